"""Isometries of truncated X_{F,p}: construction, verification, search.

All spaces here are the span of ``e_1..e_N`` with the family norm, i.e.
the family restricted to ``[1, N]``.  Permutations of ``[1, N]`` act on the
whole family by fixing every index above ``N``; compatibility is checked
on members inside the family window, so for lazy families a positive
answer is a statement about the truncation unless a constructed witness
settles it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, IncompatiblePermutationError
from .family import Family, FiniteSet, canonical_key, incidence_matrix
from .norms import as_params
from .schreier import Ordinal, SchreierFamily, _member

STRUCT_TOL = 1e-9
PATTERN_CAP = 3 ** 8


@dataclass(frozen=True)
class SignedPermutation:
    """``e_i -> signs[i-1] * e_{pi[i-1]}`` on ``[1, N]`` (1-based images)."""

    pi: tuple[int, ...]
    signs: tuple[int, ...] | None = None

    def __post_init__(self):
        pi = tuple(int(v) for v in self.pi)
        N = len(pi)
        if sorted(pi) != list(range(1, N + 1)):
            raise DomainError(f"{pi} is not a bijection of [1,{N}]")
        signs = tuple(int(s) for s in (self.signs if self.signs is not None else (1,) * N))
        if len(signs) != N or any(s not in (1, -1) for s in signs):
            raise DomainError("signs must be a list of +1/-1 of the same length as pi")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "signs", signs)

    @property
    def dim(self) -> int:
        return len(self.pi)

    @classmethod
    def identity(cls, N: int) -> "SignedPermutation":
        return cls(tuple(range(1, N + 1)))

    @classmethod
    def swap(cls, i: int, j: int, N: int) -> "SignedPermutation":
        pi = list(range(1, N + 1))
        pi[i - 1], pi[j - 1] = j, i
        return cls(tuple(pi))

    @property
    def is_identity(self) -> bool:
        return self.pi == tuple(range(1, self.dim + 1))

    def image(self, F) -> FiniteSet:
        return FiniteSet(self.pi[i - 1] for i in F)

    def matrix(self) -> np.ndarray:
        J = np.zeros((self.dim, self.dim))
        for i, (t, s) in enumerate(zip(self.pi, self.signs)):
            J[t - 1, i] = s
        return J

    def to_json(self):
        return {"pi": list(self.pi), "signs": list(self.signs)}


def _members_upto(fam: Family, N: int) -> list[FiniteSet]:
    return sorted(fam.iter_members(range(1, N + 1)), key=canonical_key)


@dataclass(frozen=True)
class Compatibility:
    compatible: bool
    witness: tuple[FiniteSet, FiniteSet] | None
    window_bounded: bool

    def __bool__(self):
        return self.compatible


def _extended_image(pi: tuple[int, ...], F) -> FiniteSet:
    N = len(pi)
    return FiniteSet(pi[i - 1] if i <= N else i for i in F)


def permutation_compatibility(fam: Family, sp: SignedPermutation, target: Family | None = None,
                              members: list[FiniteSet] | None = None) -> Compatibility:
    """Whether ``pi`` (extended by the identity past ``N``) maps ``fam`` into ``target``.

    Checked on every member inside ``[1, window]``, in canonical order, so the
    witness is the first offending member.  With ``target = fam`` the converse
    is automatic: the extended ``pi`` is injective on the finitely many
    members inside the window.
    """
    N = sp.dim
    if N > fam.window:
        raise DomainError(f"permutation dimension {N} exceeds window {fam.window}")
    target = target or fam
    if members is None:
        members = fam.members()
    moved = {i + 1 for i, v in enumerate(sp.pi) if v != i + 1}
    bounded = fam.lazy or target.lazy
    for F in members:
        if moved.isdisjoint(F) and target is fam:
            continue
        img = _extended_image(sp.pi, F)
        if not target.member(img):
            return Compatibility(False, (F, img), bounded)
    if target is not fam:
        inv = tuple(int(v) for v in np.argsort(sp.pi) + 1)
        for G in target.members(range(1, min(fam.window, target.window) + 1)):
            img = _extended_image(inv, G)
            if not fam.member(img):
                return Compatibility(False, (img, G), bounded)
    return Compatibility(True, None, bounded)


def build_signed_permutation(fam: Family, sp: SignedPermutation) -> np.ndarray:
    """Matrix of ``sp`` after checking it preserves the family on ``[1, N]``."""
    c = permutation_compatibility(fam, sp)
    if not c:
        F, img = c.witness
        raise IncompatiblePermutationError(f"{F!r} is a member but its image {img!r} is not", witness=c.witness)
    return sp.matrix()


def classify(J: np.ndarray, tol: float = STRUCT_TOL) -> dict:
    """Structural class: a signed permutation matrix or ``"other"``."""
    J = np.asarray(J, dtype=float)
    N = J.shape[0]
    big = np.abs(np.abs(J) - 1.0) <= tol
    small = np.abs(J) <= tol
    if np.all(big | small) and np.all(big.sum(0) == 1) and np.all(big.sum(1) == 1):
        rows = big.argmax(axis=0)
        pi = tuple(int(r) + 1 for r in rows)
        signs = tuple(int(np.sign(J[rows[i], i])) for i in range(N))
        return {"classification": "signed-permutation", "pi": list(pi), "signs": list(signs),
                "is_diagonal": pi == tuple(range(1, N + 1))}
    return {"classification": "other"}


@dataclass
class IsometryReport:
    max_deviation: float
    classification: str
    samples: int
    structure: dict = field(default_factory=dict)
    seed: int | None = None

    @property
    def is_isometry(self) -> bool:
        return self.max_deviation <= 1e-9

    def to_json(self):
        out = {"max_deviation": self.max_deviation, "classification": self.classification,
               "samples": self.samples, "seed": self.seed}
        out.update({k: v for k, v in self.structure.items() if k != "classification"})
        return out


def sign_patterns(N: int, cap: int = PATTERN_CAP) -> np.ndarray:
    """Nonzero vectors in ``{-1,0,1}^N`` up to global sign (at most ``cap``)."""
    out = []
    for v in itertools.product((-1.0, 0.0, 1.0), repeat=N):
        nz = [c for c in v if c]
        if nz and nz[0] > 0:
            out.append(v)
            if len(out) >= cap:
                break
    return np.array(out).reshape(-1, N)


def probe_vectors(A: np.ndarray, p: float, N: int, samples: int, rng) -> np.ndarray:
    """Gaussian directions, sign patterns and basis vectors, each of norm one."""
    X = np.vstack([rng.standard_normal((samples, N)), sign_patterns(N), np.eye(N)])
    n, _ = kernels.family_norms(X, A, p)
    return X / n[:, None]


def check_isometry(fam: Family, params, J, samples: int = 1000, seed: int = 0) -> IsometryReport:
    """Max of ``| ||Jx|| - ||x|| |`` over sampled, pattern and basis vectors."""
    params = as_params(params)
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise DomainError("isometry candidate must be a square matrix")
    if not np.all(np.isfinite(J)):
        raise DomainError("matrix has non-finite entries")
    N = J.shape[0]
    if N > fam.window:
        raise DomainError(f"matrix dimension {N} exceeds window {fam.window}")
    A = incidence_matrix(fam.maximal_elements(range(1, N + 1)), N)
    rng = np.random.default_rng(seed)
    X = probe_vectors(A, params.p, N, samples, rng)
    nJ, _ = kernels.family_norms(X @ J.T, A, params.p)
    dev = float(np.max(np.abs(nJ - 1.0)))
    st = classify(J)
    return IsometryReport(dev, st["classification"], len(X), st, seed)


def rotation_matrix(N: int, angle: float, i: int = 1, j: int = 2) -> np.ndarray:
    """Identity on ``[1, N]`` except a rotation by ``angle`` in the ``(e_i, e_j)`` plane."""
    if N < max(i, j) or i == j:
        raise DomainError("rotation plane must be two distinct indices inside [1, N]")
    R = np.eye(N)
    c, s = math.cos(angle), math.sin(angle)
    R[i - 1, i - 1], R[j - 1, i - 1] = c, s
    R[i - 1, j - 1], R[j - 1, j - 1] = -s, c
    return R


def all_signed_permutations(N: int) -> np.ndarray:
    mats = []
    for pi in itertools.permutations(range(1, N + 1)):
        for s in itertools.product((1, -1), repeat=N):
            mats.append(SignedPermutation(pi, s).matrix())
    return np.array(mats)


@dataclass
class SearchReport:
    """Best non-signed-permutation candidate found by :func:`search_isometry`.

    ``status`` is ``"candidate found"`` when the validated deviation is
    below ``found_tol`` and ``"no counterexample found"`` otherwise; the
    search never proves absence.
    """

    status: str
    deviation: float
    search_deviation: float
    matrix: np.ndarray | None
    report: IsometryReport | None
    restarts: int
    seed: int
    candidates: int

    def to_json(self):
        return {
            "status": self.status,
            "best_deviation": self.deviation,
            "search_deviation": self.search_deviation,
            "best_matrix": None if self.matrix is None else self.matrix.tolist(),
            "validation": None if self.report is None else self.report.to_json(),
            "restarts": self.restarts,
            "seed": self.seed,
            "candidates": self.candidates,
        }


def search_isometry(fam: Family, params, N: int, restarts: int = 1000, seed: int = 0, *,
                    iters: int = 100, orbit_radius: float = 0.5, penalty: float = 1.0,
                    gaussian: int = 48, validate: int = 5, found_tol: float = 1e-6,
                    backend: str | None = None) -> SearchReport:
    """Randomized local search for an isometry away from all signed permutations.

    Each restart runs damped Gauss-Newton on ``||M x_k|| - 1`` over a fixed
    sample set, plus a hinge residual pushing ``M`` at least ``orbit_radius``
    (Frobenius) away from every signed permutation.  Candidates ending at
    distance ``>= orbit_radius / 2`` are ranked by sample deviation and the
    best few are re-validated by :func:`check_isometry`.
    """
    params = as_params(params)
    if not 1 <= N <= 4:
        raise DomainError("search_isometry supports 1 <= N <= 4")
    if N > fam.window:
        raise DomainError(f"dimension {N} exceeds window {fam.window}")
    A = incidence_matrix(fam.maximal_elements(range(1, N + 1)), N)
    rng = np.random.default_rng(seed)
    X = probe_vectors(A, params.p, N, gaussian, rng)
    starts = rng.standard_normal((restarts, N, N)) / math.sqrt(N)
    perms = all_signed_permutations(N)
    Ms, dev, dist = kernels.lm_restarts(starts, X, A, params.p, perms, orbit_radius, penalty, iters,
                                        backend=backend)
    ok = np.flatnonzero(np.isfinite(dev) & (dist >= orbit_radius / 2))
    if not len(ok):
        return SearchReport("no counterexample found", math.inf, math.inf, None, None, restarts, seed, 0)
    order = ok[np.lexsort((ok, dev[ok]))]
    best = None
    for k in order[:validate]:
        rep = check_isometry(fam, params, Ms[k], samples=1000, seed=seed + 1)
        if rep.classification != "other":
            continue
        if best is None or rep.max_deviation < best[1].max_deviation:
            best = (k, rep)
    if best is None:
        return SearchReport("no counterexample found", math.inf, float(dev[order[0]]), None, None,
                            restarts, seed, len(ok))
    k, rep = best
    status = "candidate found" if rep.max_deviation < found_tol else "no counterexample found"
    return SearchReport(status, rep.max_deviation, float(dev[k]), Ms[k], rep, restarts, seed, len(ok))


@dataclass(frozen=True)
class StarResult:
    holds: bool
    witness: FiniteSet | None
    window_bounded: bool

    def __bool__(self):
        return self.holds


def star_condition(fam: Family, j: int, k: int) -> StarResult:
    """Some member ``F`` meets ``{j, k}`` while ``{j, k} u F`` is not a member.

    Members are scanned inside ``[1, window]`` in canonical order.
    """
    if j == k:
        raise DomainError("star condition needs j != k")
    if not (1 <= j <= fam.window and 1 <= k <= fam.window):
        raise DomainError(f"indices must lie in [1,{fam.window}]")
    jk = (j, k)
    for F in fam.members():
        if (j in F or k in F) and not fam.member(F.union(jk)):
            return StarResult(True, F, fam.lazy)
    return StarResult(False, None, fam.lazy)


def min_of_maximal(fam: Family, k_max: int) -> tuple[bool, dict]:
    """For ``k = 1..k_max`` the canonical-first maximal member with minimum ``k``."""
    if fam.window < 2 * k_max:
        raise DomainError(f"window {fam.window} below 2*k_max = {2 * k_max}")
    table: dict[int, FiniteSet | None] = {}
    ok = True
    for k in range(1, k_max + 1):
        found = None
        for F in fam.members(range(k, fam.window + 1)):
            if F and F[0] == k and fam.is_maximal(F):
                found = F
                break
        table[k] = found
        if found is None:
            ok = False
            break
    return ok, table


def schreier_witness(alpha, pi: tuple[int, ...], cap: int = 4096) -> tuple[FiniteSet, FiniteSet] | None:
    """Member ``F`` of ``S_alpha`` with ``pi(F)`` outside it, built directly.

    With ``i`` the first index moved by ``pi`` and ``k = pi^-1(i) > i``, try
    ``F = {k} u [N+1, N+L]``: ``pi`` fixes the tail and lowers the minimum
    to ``i``.  ``L`` is the least length whose image leaves the family
    (image membership only gets harder as ``L`` grows).  Returns ``None`` if
    that length exceeds ``cap`` or ``F`` itself is not a member.
    """
    alpha = Ordinal.parse(alpha)
    N = len(pi)
    moved = [i for i in range(1, N + 1) if pi[i - 1] != i]
    if not moved:
        return None
    i = moved[0]
    k = pi.index(i) + 1

    def image_in(L):
        return _member(alpha, (i,) + tuple(range(N + 1, N + L + 1)))

    good, bad = 0, 1
    while image_in(bad):
        good, bad = bad, 2 * bad
        if good > cap:
            return None
    while bad - good > 1:
        mid = (good + bad) // 2
        if image_in(mid):
            good = mid
        else:
            bad = mid
    F = (k,) + tuple(range(N + 1, N + bad + 1))
    if not _member(alpha, F):
        return None
    return FiniteSet._trusted(F), _extended_image(pi, F)


def rigidity_suite(alpha, params, N: int, *, seed: int = 0, restarts: int = 200,
                   search_dim: int | None = None, samples: int = 200, window: int | None = None) -> dict:
    """Exhaustive permutation check, diagonal sign check and a search run on ``S_alpha``."""
    alpha = Ordinal.parse(alpha)
    params = as_params(params)
    if not 1 <= N <= 7:
        raise DomainError("rigidity_suite enumerates N! permutations; needs 1 <= N <= 7")
    fam = SchreierFamily(alpha, max(window or 12, 2 * N + 2))
    members = fam.members()
    compatible = []
    constructed = 0
    for pi in itertools.permutations(range(1, N + 1)):
        if schreier_witness(alpha, pi) is not None:
            constructed += 1
            continue
        if permutation_compatibility(fam, SignedPermutation(pi), members=members):
            compatible.append(list(pi))
    diag_dev = 0.0
    for signs in itertools.product((1, -1), repeat=N):
        rep = check_isometry(fam, params, np.diag(signs).astype(float), samples=samples, seed=seed)
        diag_dev = max(diag_dev, rep.max_deviation)
    sd = min(N, 3) if search_dim is None else search_dim
    search = search_isometry(fam, params, sd, restarts=restarts, seed=seed)
    return {
        "alpha": str(alpha),
        "p": params.p,
        "dim": N,
        "permutations_checked": math.factorial(N),
        "compatible_permutations": compatible,
        "only_identity_permutation": compatible == [list(range(1, N + 1))],
        "rejected_by_constructed_witness": constructed,
        "window_bounded": math.factorial(N) - constructed > 1,
        "diagonal_sign_matrices": 2 ** N,
        "diagonal_max_deviation": diag_dev,
        "diagonal_all_isometries": diag_dev <= 1e-12,
        "search": search.to_json(),
        "search_maximal_sets": [list(G) for G in fam.maximal_elements(range(1, sd + 1))],
        "seed": seed,
    }
