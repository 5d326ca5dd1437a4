"""Primal and dual norms of finitely supported vectors in X_{F,p}.

``||x|| = sup_{G in F} ||P_G x||_base`` with ``base`` the l_p norm by default
(any object with a ``norm_of(values)`` method can stand in, e.g. a
Luxemburg norm).  The sup is a max over members maximal inside ``supp x``.

The dual norm of ``x*`` off the fast path is the value of

    maximize   sum_i a_i x_i
    subject to sum_{i in G} x_i^p <= 1   for every maximal G inside supp(x*)
               x >= 0

with ``a = |x*|``.  Restricting to ``x >= 0`` on ``supp(x*)`` loses nothing:
flipping signs of x to match x* and zeroing coordinates off the support
leaves ``||x||`` unchanged or smaller (1-unconditional, monotone norm) and
does not decrease the pairing.  The upper bound comes from the Lagrange
dual, the lower bound from the recovered primal point rescaled into the ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import minimize, nnls

from . import kernels
from .errors import DomainError, NumericError
from .family import Family, FiniteSet, as_set, canonical_key, incidence_matrix

NORM_TOL = 1e-9
DUAL_TOL = 1e-6


class SparseVector:
    """Finitely supported real sequence indexed from 1; zeros are not stored."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[int, float] | Iterable[float] | None = None):
        data: dict[int, float] = {}
        if entries is None:
            pass
        elif isinstance(entries, Mapping):
            for k, v in entries.items():
                i = int(k)
                if i < 1:
                    raise DomainError(f"vector index must be >= 1, got {k}")
                v = float(v)
                if not math.isfinite(v):
                    raise DomainError(f"non-finite entry at index {i}")
                if v != 0.0:
                    data[i] = v
        else:
            for i, v in enumerate(entries, start=1):
                v = float(v)
                if not math.isfinite(v):
                    raise DomainError(f"non-finite entry at index {i}")
                if v != 0.0:
                    data[i] = v
        self._entries = dict(sorted(data.items()))

    @classmethod
    def basis(cls, i: int, value: float = 1.0) -> "SparseVector":
        return cls({i: value})

    @property
    def support(self) -> FiniteSet:
        return FiniteSet._trusted(tuple(self._entries))

    def __getitem__(self, i):
        return self._entries.get(int(i), 0.0)

    def items(self):
        return self._entries.items()

    def __len__(self):
        return len(self._entries)

    def __bool__(self):
        return bool(self._entries)

    def dense(self, dim: int | None = None) -> np.ndarray:
        dim = dim if dim is not None else (max(self._entries) if self._entries else 0)
        out = np.zeros(dim)
        for i, v in self._entries.items():
            if i > dim:
                raise DomainError(f"index {i} outside dimension {dim}")
            out[i - 1] = v
        return out

    def values(self, indices: Iterable[int]) -> np.ndarray:
        return np.array([self._entries.get(i, 0.0) for i in indices])

    def scale(self, c: float) -> "SparseVector":
        return SparseVector({i: c * v for i, v in self._entries.items()})

    def __add__(self, other: "SparseVector") -> "SparseVector":
        out = dict(self._entries)
        for i, v in other.items():
            out[i] = out.get(i, 0.0) + v
        return SparseVector(out)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def __neg__(self):
        return self.scale(-1.0)

    def dot(self, other: "SparseVector") -> float:
        return math.fsum(v * other[i] for i, v in self._entries.items())

    def lp(self, p: float) -> float:
        if not self._entries:
            return 0.0
        a = np.abs(np.fromiter(self._entries.values(), float))
        if math.isinf(p):
            return float(a.max())
        return float(np.sum(a ** p) ** (1.0 / p))

    def __eq__(self, other):
        return isinstance(other, SparseVector) and self._entries == other._entries

    def __repr__(self):
        return "SparseVector(" + repr(self._entries) + ")"

    def to_json(self):
        return {str(i): v for i, v in self._entries.items()}


def as_vector(x) -> SparseVector:
    return x if isinstance(x, SparseVector) else SparseVector(x)


@dataclass(frozen=True)
class NormParams:
    p: float

    def __post_init__(self):
        if not (1.0 < float(self.p) < math.inf):
            raise DomainError(f"p must lie in (1, inf), got {self.p}")
        object.__setattr__(self, "p", float(self.p))

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)


def as_params(p) -> NormParams:
    return p if isinstance(p, NormParams) else NormParams(p)


class LpBase:
    """l_p norm on the coordinates of a member."""

    def __init__(self, p: float):
        self.p = float(p)

    def norm_of(self, values: np.ndarray) -> float:
        if values.size == 0:
            return 0.0
        return float(np.sum(np.abs(values) ** self.p) ** (1.0 / self.p))


def project(F, x) -> SparseVector:
    """Restriction of ``x`` to the indices in ``F``."""
    keep = set(as_set(F))
    return SparseVector({i: v for i, v in as_vector(x).items() if i in keep})


@dataclass(frozen=True)
class NormResult:
    value: float
    attained: FiniteSet

    def __float__(self):
        return self.value


def norm(fam: Family, params, x, base=None) -> NormResult:
    """``||x||_{F,p}`` and the first attaining maximal set in canonical order."""
    x = as_vector(x)
    base = base or LpBase(as_params(params).p)
    supp = x.support
    cands = fam.maximal_elements(supp)
    vals = [base.norm_of(x.values(G)) for G in cands]
    best = max(vals) if vals else 0.0
    thresh = best * (1.0 - 1e-12)
    for G, v in zip(cands, vals):
        if v >= thresh:
            return NormResult(float(v if v > best else best), G)
    return NormResult(0.0, FiniteSet())


def max_sets(fam: Family, dim: int) -> list[FiniteSet]:
    """Maximal members inside ``[1, dim]``, canonical order."""
    return fam.maximal_elements(range(1, dim + 1))


def batch_norms(fam: Family, params, X: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Norms of the rows of a dense ``(m, dim)`` array of coordinates ``1..dim``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    A = incidence_matrix(max_sets(fam, X.shape[1]), X.shape[1])
    vals, _ = kernels.family_norms(X, A, as_params(params).p, backend=backend)
    return vals


@dataclass(frozen=True)
class DualNormResult:
    value: float
    lower: float
    upper: float
    method: str
    maximizer: SparseVector = field(default_factory=SparseVector)
    iterations: int = 0

    def __float__(self):
        return self.value


def _dual_objective(u, a, inc, p, q):
    lam = np.exp(u)
    c = inc.T @ lam
    x = (a / (p * c)) ** (q - 1.0)
    g = lam.sum() + np.sum(a * x) / q
    grad = lam * (1.0 - inc @ (x ** p))
    return g, grad


def dual_norm(fam: Family, params, xstar, method: str = "auto", tol: float = DUAL_TOL) -> DualNormResult:
    """Dual norm of a finitely supported functional, with certified bounds.

    ``method``: ``"auto"`` uses the exact l_q value when the support is a
    member and the Lagrange-dual optimization otherwise; ``"optimize"``
    forces the optimization.
    """
    params = as_params(params)
    xstar = as_vector(xstar)
    supp = xstar.support
    fam._check_window(supp)
    p, q = params.p, params.q
    if not supp:
        return DualNormResult(0.0, 0.0, 0.0, "zero")
    if method not in ("auto", "optimize"):
        raise DomainError(f"unknown dual-norm method {method!r}")
    if method == "auto" and fam.member(supp):
        v = xstar.lp(q)
        a = np.abs(xstar.values(supp))
        x = (a / v) ** (q - 1.0)
        return DualNormResult(v, v, v, "member-support",
                              SparseVector(dict(zip(supp, x * np.sign(xstar.values(supp))))))

    idx = tuple(supp)
    a = np.abs(xstar.values(idx))
    cons = fam.maximal_elements(supp)
    pos = {i: k for k, i in enumerate(idx)}
    inc = np.zeros((len(cons), len(idx)))
    for r, G in enumerate(cons):
        for i in G:
            inc[r, pos[i]] = 1.0

    def lower_from(x):
        nrm = np.max((inc @ (x ** p)) ** (1.0 / p))
        return float(a @ x / nrm), x / nrm

    def closed(lo, up):
        return up - lo <= tol * max(1.0, up)

    best = {"upper": math.inf, "lower": -math.inf, "x": None}
    its = 0

    def offer_dual(lam):
        c = inc.T @ lam
        if np.any(c <= 0):
            return
        x = (a / (p * c)) ** (q - 1.0)
        up = float(lam.sum() + np.sum(a * x) / q)
        best["upper"] = min(best["upper"], up)
        offer_primal(x)

    def offer_primal(x):
        lo, xs = lower_from(np.maximum(x, 0.0))
        if lo > best["lower"]:
            best["lower"], best["x"] = lo, xs

    def run_dual(u0):
        nonlocal its
        res = minimize(_dual_objective, u0, args=(a, inc, p, q), jac=True, method="L-BFGS-B",
                       bounds=[(-60.0, 30.0)] * len(cons),
                       options={"maxiter": 5000, "ftol": 1e-15, "gtol": 1e-12})
        its += int(res.nit)
        offer_dual(np.exp(res.x))

    aq = np.sum(a ** q) ** (1.0 / q)
    run_dual(np.full(len(cons), math.log(aq / max(1, len(cons)))))

    if not closed(best["lower"], best["upper"]):
        # primal polish, then multipliers from the KKT stationarity a = p x^(p-1) B^T lam
        res = minimize(lambda x: (-(a @ x), -a), best["x"], jac=True, method="SLSQP",
                       bounds=[(0.0, None)] * len(idx),
                       constraints=[{"type": "ineq", "fun": lambda x: 1.0 - inc @ (np.abs(x) ** p),
                                     "jac": lambda x: -p * inc * (np.abs(x) ** (p - 1.0))[None, :]}],
                       options={"maxiter": 2000, "ftol": 1e-15})
        its += int(res.nit)
        x = np.maximum(res.x, 1e-300)
        offer_primal(x)
        x = best["x"]
        slack = 1.0 - inc @ (x ** p)
        active = np.flatnonzero(slack < 1e-6)
        if active.size:
            lam = np.zeros(len(cons))
            lam[active], _ = nnls(inc[active].T, a / (p * x ** (p - 1.0)))
            offer_dual(lam)
            if not closed(best["lower"], best["upper"]):
                run_dual(np.log(np.maximum(lam, 1e-12)))

    lo, up = best["lower"], best["upper"]
    if not closed(lo, up):
        raise NumericError(f"dual norm bounds did not close: [{lo}, {up}]", bounds=(lo, up))
    signs = np.sign(xstar.values(idx))
    return DualNormResult(0.5 * (lo + up), lo, up, "lagrange",
                          SparseVector(dict(zip(idx, best["x"] * signs))), its)


@dataclass(frozen=True)
class GapResult:
    """Comparison of the dual norm with the l_q norm of the same functional."""

    gap: bool
    dual: float
    lq: float
    support_member: bool

    @property
    def consistent(self) -> bool:
        """A gap appears exactly when the support is not a member."""
        return self.gap != self.support_member

    def __bool__(self):
        return self.gap

    def to_json(self):
        return {"gap": self.gap, "dual_norm": self.dual, "lq_norm": self.lq,
                "support_member": self.support_member, "consistent": self.consistent}


def strict_norm_gap(fam: Family, params, xstar, tol: float = 1e-8) -> GapResult:
    """Whether ``||x*|| > ||x*||_q + tol``; the certified lower bound is used."""
    params = as_params(params)
    xstar = as_vector(xstar)
    res = dual_norm(fam, params, xstar)
    lq = xstar.lp(params.q)
    member = fam.member(xstar.support)
    return GapResult(bool(res.lower > lq + tol), res.value, lq, member)
