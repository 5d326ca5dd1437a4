"""Extreme points of the unit balls of X_{S_alpha,p} and of its dual.

For a Schreier family and a norm-one ``x`` with finite support, ``x`` is
extreme iff the norming sets ``A_x = {F : sum_{i in F} |x_i|^p = 1}``
include a non-maximal member and cover every index up to ``max supp x``.
Both quantifiers reduce to finite checks over members ``T`` inside the
support (``F`` in ``A_x`` iff ``F n supp`` is norming):

* a non-maximal norming ``F`` exists iff some norming ``T`` is non-maximal;
* ``i`` in the support is covered iff it lies in a norming ``T``;
* ``i`` off the support is covered iff ``T u {i}`` is a member for some norming ``T``.

The perturbation oracle tests the definition directly and is one-sided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError
from .family import Family, FiniteSet, incidence_matrix
from .norms import NormParams, SparseVector, as_params, as_vector, norm, dual_norm
from .schreier import SchreierFamily

NORM_ONE_TOL = 1e-9
BALL_TOL = 1e-10


@dataclass
class ExtremalityReport:
    is_extreme: bool
    norming_sets: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.is_extreme

    def to_json(self):
        return {
            "is_extreme": self.is_extreme,
            "norming_sets": [list(F) for F in self.norming_sets],
            "witnesses": {k: (list(v) if isinstance(v, (tuple, FiniteSet)) else v)
                          for k, v in self.witnesses.items()},
            **({"details": self.details} if self.details else {}),
        }


def _norming(fam: Family, p: float, x: SparseVector) -> list[FiniteSet]:
    out = []
    for T in fam.maximal_elements(x.support):
        s = math.fsum(abs(x[i]) ** p for i in T)
        if abs(s - 1.0) <= NORM_ONE_TOL:
            out.append(T)
    return out


def primal_extreme(fam: Family, params, x) -> ExtremalityReport:
    """Decide extremality of a norm-one ``x`` in the unit ball of X_{S_alpha,p}."""
    if not isinstance(fam, SchreierFamily):
        raise DomainError("the extreme-point criterion is only available for Schreier families; "
                          "use perturbation_oracle")
    params = as_params(params)
    x = as_vector(x)
    if not x:
        raise DomainError("the zero vector is not on the unit sphere")
    top = x.support[-1]
    fam._check_window((top + 1,))
    nv = norm(fam, params, x).value
    if abs(nv - 1.0) > NORM_ONE_TOL:
        raise DomainError(f"primal_extreme needs ||x|| = 1, got {nv!r}")
    p = params.p
    A = _norming(fam, p, x)
    supp = set(x.support)
    non_max = [T for T in A if not fam.is_maximal(T)]
    uncovered = []
    for i in range(1, top + 1):
        if i in supp:
            hit = any(i in T for T in A)
        else:
            hit = any(fam.member(T.union((i,))) for T in A)
        if not hit:
            uncovered.append(i)
    wit = {}
    if not non_max:
        wit["all_maximal"] = True
    if uncovered:
        wit["uncovered"] = uncovered
    return ExtremalityReport(not wit, A, wit)


def dual_extreme(fam: Family, params, xstar, with_dual_norm: bool = False) -> ExtremalityReport:
    """Extremality in the dual ball: support is a member and the l_q norm is 1.

    With ``with_dual_norm`` the report also carries the dual norm, which
    exceeds 1 when the l_q norm is 1 but the support is not a member.
    """
    params = as_params(params)
    xstar = as_vector(xstar)
    supp = xstar.support
    fam._check_window(supp)
    lq = xstar.lp(params.q)
    wit = {}
    if not fam.member(supp):
        wit["support_not_in_family"] = list(supp)
    if abs(lq - 1.0) > NORM_ONE_TOL:
        wit["lq_norm"] = lq
    rep = ExtremalityReport(not wit, [supp] if not wit else [], wit)
    if with_dual_norm:
        d = dual_norm(fam, params, xstar)
        rep.details = {"dual_norm": d.value, "dual_norm_lower": d.lower, "lq_norm": lq}
    return rep


def step_schedule(p: float) -> np.ndarray:
    """Geometric steps from 0.5 down to the smallest step still resolvable.

    Growth of ``||x + t d||`` may be only of order ``t^p``; below
    ``(1e-8)^(1/p)`` that growth falls under the ball tolerance.
    """
    tmin = max(1e-4, 1e-8 ** (1.0 / p))
    n = int(math.ceil(math.log(0.5 / tmin, 2.0))) + 1
    return 0.5 * 0.5 ** np.arange(n)


@dataclass
class OracleResult:
    not_extreme: bool
    direction: SparseVector | None = None
    step: float | None = None
    trials: int = 0

    @property
    def verdict(self) -> str:
        return "not extreme" if self.not_extreme else "probably extreme"

    def to_json(self):
        return {"verdict": self.verdict,
                "direction": None if self.direction is None else self.direction.to_json(),
                "trials": self.trials}


def perturbation_oracle(fam: Family, params, x, directions: int = 10_000, step: float | None = None,
                        seed: int = 0, backend: str | None = None) -> OracleResult:
    """Search ``d != 0`` with ``max(||x + d||, ||x - d||) <= 1 + 1e-10``.

    Directions live on ``[1, max supp x + 1]``: every coordinate vector, then
    ``directions`` random unit vectors.  Each is tried at ``step`` alone or
    along :func:`step_schedule`.  Success proves non-extremality.
    """
    params = as_params(params)
    x = as_vector(x)
    if not x:
        raise DomainError("the zero vector is not on the unit sphere")
    dim = x.support[-1] + 1
    fam._check_window((dim,))
    x0 = x.dense(dim)
    A = incidence_matrix(fam.maximal_elements(range(1, dim + 1)), dim)
    nx, _ = kernels.family_norms(x0[None, :], A, params.p, backend=backend)
    if abs(nx[0] - 1.0) > NORM_ONE_TOL:
        raise DomainError(f"perturbation_oracle needs ||x|| = 1, got {nx[0]!r}")
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((directions, dim))
    R /= np.linalg.norm(R, axis=1, keepdims=True)
    D = np.vstack([np.eye(dim), R])
    steps = np.array([step]) if step is not None else step_schedule(params.p)
    trials = 0
    chunk = max(1, 65536 // (2 * len(steps)))
    for s0 in range(0, len(D), chunk):
        Dc = D[s0:s0 + chunk]
        T = (steps[None, :, None] * Dc[:, None, :]).reshape(-1, dim)
        pts = np.vstack([x0 + T, x0 - T])
        vals, _ = kernels.family_norms(pts, A, params.p, backend=backend)
        n = len(T)
        worst = np.maximum(vals[:n], vals[n:]).reshape(len(Dc), len(steps))
        trials += worst.size
        ok = np.argwhere(worst <= 1.0 + BALL_TOL)
        if len(ok):
            k, j = ok[0]
            d = steps[j] * Dc[k]
            return OracleResult(True, SparseVector(d), float(steps[j]), trials)
    return OracleResult(False, None, None, trials)
