"""Orlicz functions and the Luxemburg and Orlicz (Amemiya) norms.

An Orlicz function here is a piecewise closed-form convex ``M`` on
``[0, inf)`` with ``M(0) = 0`` and ``M(1) = 1``.  Each piece owns the
half-open interval ``(start, end]``; the first piece also owns ``0``.
Derivatives are right derivatives, so at a breakpoint the next piece wins.

Piece kinds, with ``u = t - center`` (``center`` defaults to 0):

``poly``    ``coeffs = [a0, a1, ...]``, value ``sum_k a_k u**k``
``affine``  ``coeffs = [intercept, slope]``
``circ``    ``coeffs = [offset, scale, radius]``, value
            ``offset + scale * (radius - sqrt(radius**2 - u**2))``
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, NumericError
from .norms import as_vector

CONTINUITY_TOL = 1e-12
NORMALIZATION_TOL = 1e-12
LUX_RESIDUAL_TOL = 1e-12
L2_SPAN_TOL = 1e-10
_CONVEXITY_SLACK = 1e-12
_MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class Piece:
    end: float
    kind: str
    params: tuple

    def value(self, t: np.ndarray) -> np.ndarray:
        k, a = self.kind, self.params
        if k == "poly":
            coeffs, center = a
            return np.polynomial.polynomial.polyval(t - center, coeffs)
        if k == "affine":
            intercept, slope, center = a
            return intercept + slope * (t - center)
        offset, scale, radius, center = a
        u = t - center
        # r - sqrt(r^2 - u^2) rewritten to avoid cancellation for small u
        root = np.sqrt(np.maximum(radius * radius - u * u, 0.0))
        return offset + scale * (u * u) / (radius + root)

    def slope(self, t: np.ndarray) -> np.ndarray:
        k, a = self.kind, self.params
        if k == "poly":
            coeffs, center = a
            return np.polynomial.polynomial.polyval(t - center, np.polynomial.polynomial.polyder(coeffs))
        if k == "affine":
            return np.full_like(t, a[1], dtype=float)
        offset, scale, radius, center = a
        u = t - center
        root = np.sqrt(np.maximum(radius * radius - u * u, 0.0))
        with np.errstate(divide="ignore"):
            return np.where(root > 0, scale * u / np.where(root > 0, root, 1.0), np.inf)

    def to_json(self, start: float) -> dict:
        k, a = self.kind, self.params
        if k == "poly":
            coeffs, center = list(a[0]), a[1]
        elif k == "affine":
            coeffs, center = [a[0], a[1]], a[2]
        else:
            coeffs, center = list(a[:3]), a[3]
        return {"from": start, "to": None if math.isinf(self.end) else self.end,
                "kind": k, "coeffs": coeffs, "center": center}


_ARITY = {"poly": None, "affine": 2, "circ": 3}


def _piece_from_json(d: dict) -> tuple[float, Piece]:
    kind = d.get("kind")
    if kind not in _ARITY:
        raise DomainError(f"unknown piece kind {kind!r}; expected poly, affine or circ")
    try:
        start = float(d["from"])
        end = d["to"]
        coeffs = tuple(float(c) for c in d["coeffs"])
    except KeyError as e:
        raise DomainError(f"piece is missing field {e.args[0]!r}") from None
    end = math.inf if end is None or end == "inf" else float(end)
    center = float(d.get("center", 0.0))
    n = _ARITY[kind]
    if (n is None and not coeffs) or (n is not None and len(coeffs) != n):
        raise DomainError(f"{kind} piece takes {n or 'at least one'} coefficients, got {len(coeffs)}")
    if kind == "circ" and coeffs[2] <= 0:
        raise DomainError("circ piece needs a positive radius")
    params = (coeffs, center) if kind == "poly" else coeffs + (center,)
    return start, Piece(end, kind, params)


_C = 1.0 / (2.0 - math.sqrt(2.0))
_HALF_ROOT = 1.0 / math.sqrt(2.0)

BUILTINS = {
    "example-c": (
        Piece(_HALF_ROOT, "circ", (0.0, _C, 1.0, 0.0)),
        Piece(1.0, "affine", (1.0, _C, 1.0)),
        Piece(math.inf, "poly", ((1.0 - _C / 2.0, 0.0, _C / 2.0), 0.0)),
    ),
    "square": (Piece(math.inf, "poly", ((0.0, 0.0, 1.0), 0.0)),),
}


class OrliczFunction:
    """Validated piecewise Orlicz function.

    Construction checks normalization and continuity at breakpoints; with
    ``validate`` it also scans a grid for monotonicity, positivity and
    midpoint convexity.
    """

    def __init__(self, pieces, name: str | None = None, validate: bool = True):
        pieces = tuple(pieces)
        if not pieces:
            raise DomainError("an Orlicz function needs at least one piece")
        ends = [p.end for p in pieces]
        if not math.isinf(ends[-1]):
            raise DomainError("the last piece must extend to infinity (end = null)")
        if any(not (a < b) for a, b in zip([0.0] + ends[:-1], ends)):
            raise DomainError("piece ends must be positive and strictly increasing")
        self.pieces = pieces
        self.name = name
        self._ends = np.array(ends[:-1])
        self._check_basic()
        if validate:
            self._check_shape()

    @classmethod
    def builtin(cls, name: str) -> "OrliczFunction":
        if name not in BUILTINS:
            raise DomainError(f"unknown builtin Orlicz function {name!r}; known: {sorted(BUILTINS)}")
        return cls(BUILTINS[name], name=name)

    @classmethod
    def from_json(cls, desc) -> "OrliczFunction":
        if isinstance(desc, str):
            return cls.builtin(desc)
        if isinstance(desc, dict) and "builtin" in desc:
            return cls.builtin(desc["builtin"])
        name = None
        if isinstance(desc, dict) and "pieces" in desc:
            desc, name = desc["pieces"], desc.get("name")
        if not isinstance(desc, list):
            raise DomainError("Orlicz function must be a builtin name or a list of pieces")
        parsed = [_piece_from_json(p) for p in desc]
        prev = 0.0
        for start, piece in parsed:
            if start != prev:
                raise DomainError(f"piece starting at {start!r} does not continue from {prev!r}")
            prev = piece.end
        return cls([p for _, p in parsed], name=name)

    def to_json(self):
        if self.name in BUILTINS and self.pieces == BUILTINS[self.name]:
            return {"builtin": self.name}
        starts = [0.0] + [p.end for p in self.pieces[:-1]]
        return {"pieces": [p.to_json(s) for p, s in zip(self.pieces, starts)]}

    def _piece_index(self, t: np.ndarray, right: bool) -> np.ndarray:
        # value: piece owns (start, end]; right derivative: [start, end)
        return np.searchsorted(self._ends, t, side="right" if right else "left")

    def _apply(self, t, right: bool, which: str):
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0) or np.any(~np.isfinite(arr)):
            raise DomainError("Orlicz functions are evaluated on finite t >= 0")
        flat = np.atleast_1d(arr).ravel()
        idx = self._piece_index(flat, right)
        out = np.empty_like(flat)
        for k, piece in enumerate(self.pieces):
            m = idx == k
            if m.any():
                out[m] = getattr(piece, which)(flat[m])
        if which == "value":
            out[flat == 0.0] = 0.0
        return out.reshape(arr.shape) if arr.ndim else float(out[0])

    def __call__(self, t):
        return self._apply(t, right=False, which="value")

    def derivative(self, t):
        """Right derivative ``M'(t)``."""
        return self._apply(t, right=True, which="slope")

    def _check_basic(self):
        at0 = self.pieces[0].value(np.array([0.0]))[0]
        if abs(at0) > NORMALIZATION_TOL:
            raise DomainError(f"M(0) must be 0, got {at0!r}")
        at1 = self(1.0)
        if abs(at1 - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"M(1) must be 1, got {at1!r}")
        for left, right in zip(self.pieces, self.pieces[1:]):
            b = np.array([left.end])
            gap = abs(left.value(b)[0] - right.value(b)[0])
            if not gap <= CONTINUITY_TOL * max(1.0, abs(left.value(b)[0])):
                raise DomainError(f"M is discontinuous at t = {left.end!r} (jump {gap:.3e})")

    def _check_shape(self, points: int = 1000):
        top = max(2.0, 2.0 * float(self._ends[-1])) if self._ends.size else 2.0
        t = np.linspace(0.0, top, points + 1)
        v = self(t)
        if not np.all(np.isfinite(v)):
            raise DomainError("M is not finite on its sampled range")
        if np.any(v[1:] <= 0.0):
            raise DomainError("M(t) must be positive for t > 0")
        if np.any(np.diff(v) < -_CONVEXITY_SLACK):
            raise DomainError("M must be nondecreasing")
        mid = self(0.5 * (t[:-2] + t[2:]))
        if np.any(mid > 0.5 * (v[:-2] + v[2:]) + _CONVEXITY_SLACK * np.maximum(1.0, v[2:])):
            raise DomainError("M fails the midpoint convexity check")

    def __repr__(self):
        return f"OrliczFunction({self.name or 'piecewise'}, {len(self.pieces)} pieces)"


def as_orlicz(M) -> OrliczFunction:
    return M if isinstance(M, OrliczFunction) else OrliczFunction.from_json(M)


def _abs_values(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        a = np.abs(x.astype(float).ravel())
    else:
        a = np.abs(np.fromiter(dict(as_vector(x).items()).values(), float))
    return a[a > 0]


def luxemburg_norm(M, x) -> float:
    """``inf{lam > 0 : sum M(|x_i| / lam) <= 1}``, with modular residual <= 1e-12.

    Bracket: at ``lam = max|x_i|`` the modular is at least ``M(1) = 1``; at
    ``lam = sum|x_i|`` convexity with ``M(0) = 0`` puts it at most 1.
    """
    M = as_orlicz(M)
    a = _abs_values(x)
    if a.size == 0:
        return 0.0
    lo, hi = float(a.max()), float(a.sum())

    def resid(lam):
        return math.fsum(np.atleast_1d(M(a / lam))) - 1.0

    r_lo, r_hi = resid(lo), resid(hi)
    if abs(r_lo) <= LUX_RESIDUAL_TOL:
        return lo
    if abs(r_hi) <= LUX_RESIDUAL_TOL:
        return hi
    if not (r_lo > 0 > r_hi):
        raise NumericError(f"Luxemburg bracket failed: residuals {r_lo!r} at {lo!r}, {r_hi!r} at {hi!r}",
                           bounds=(lo, hi))
    lam, info = brentq(resid, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500,
                       full_output=True)
    r = resid(lam)
    if abs(r) > LUX_RESIDUAL_TOL:
        # residual is a decreasing function of lam; nudge by ulps toward the root
        for _ in range(64):
            lam = np.nextafter(lam, math.inf if r > 0 else 0.0)
            r2 = resid(lam)
            if abs(r2) <= LUX_RESIDUAL_TOL:
                r = r2
                break
            if (r2 > 0) != (r > 0):
                break
            r = r2
    if abs(r) > LUX_RESIDUAL_TOL:
        raise NumericError(f"Luxemburg residual {r!r} above tolerance at lam={lam!r}", bounds=(lo, hi))
    return float(lam)


def conjugate(M, t: float, grid: int = 256) -> float:
    """Complementary function ``M*(t) = sup_{u >= 0} (u t - M(u))``.

    The objective is concave, and nonincreasing once ``M'(u) >= t``.  That
    ``u`` is found by doubling; a grid scan picks the best cell and a
    bounded Brent search refines inside its neighbours.
    """
    M = as_orlicz(M)
    t = float(t)
    if not (t >= 0 and math.isfinite(t)):
        raise DomainError(f"conjugate needs finite t >= 0, got {t!r}")
    if t == 0.0:
        return 0.0
    if grid < 3:
        raise DomainError("grid must have at least 3 points")
    hi = 1.0
    for _ in range(_MAX_DOUBLINGS):
        if M.derivative(hi) >= t:
            break
        hi *= 2.0
    else:
        raise NumericError(f"conjugate supremum unbounded: M'(u) < {t!r} for all u <= {hi!r}",
                           bounds=(hi * t - M(hi), math.inf))

    def neg(u):
        return M(u) - u * t

    us = np.linspace(0.0, hi, grid)
    vals = np.asarray(M(us)) - us * t
    k = int(vals.argmin())
    a, b = us[max(k - 1, 0)], us[min(k + 1, grid - 1)]
    best = -float(vals[k])
    res = minimize_scalar(neg, bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12 * max(1.0, b)})
    return max(best, -float(res.fun))


def orlicz_norm(M, x) -> float:
    """Orlicz norm via ``inf_{k > 0} (1 + sum M(k |x_i|)) / k``.

    The objective is quasi-convex in ``k`` and its minimizer lies at or
    above ``1 / (2 ||x||_M)``; the upper end is found by doubling until
    the objective turns up.
    """
    M = as_orlicz(M)
    a = _abs_values(x)
    if a.size == 0:
        return 0.0
    lux = luxemburg_norm(M, a)

    def h(k):
        return (1.0 + math.fsum(np.atleast_1d(M(k * a)))) / k

    lo = 0.5 / lux
    ks = [lo, 1.0 / lux]
    hs = [h(lo), h(1.0 / lux)]
    for _ in range(_MAX_DOUBLINGS):
        if hs[-1] > hs[-2]:
            break
        ks.append(2.0 * ks[-1])
        hs.append(h(ks[-1]))
    else:
        raise NumericError(f"Orlicz norm search range exhausted at k={ks[-1]!r}",
                           bounds=(math.fsum(a), hs[-1]))
    j = int(np.argmin(hs))
    a_k, b_k = ks[max(j - 1, 0)], ks[min(j + 1, len(ks) - 1)]
    res = minimize_scalar(h, bounds=(a_k, b_k), method="bounded",
                          options={"xatol": 1e-13 * b_k})
    return float(min(hs[j], res.fun))


@dataclass(frozen=True)
class L2SpanResult:
    holds: bool
    residual: float
    worst_t: float

    def __bool__(self):
        return self.holds

    def to_json(self):
        return {"is_l2_span": self.holds, "residual": self.residual, "worst_t": self.worst_t}


def is_l2_span(M, samples: int = 1000) -> L2SpanResult:
    """Max of ``|M(t) + M(sqrt(1 - t^2)) - 1|`` on ``t = k/(samples+1)``."""
    M = as_orlicz(M)
    if samples < 10:
        raise DomainError("is_l2_span needs at least 10 samples")
    t = np.arange(1, samples + 1) / (samples + 1)
    r = np.abs(np.asarray(M(t)) + np.asarray(M(np.sqrt(1.0 - t * t))) - 1.0)
    k = int(r.argmax())
    return L2SpanResult(bool(r[k] <= L2_SPAN_TOL), float(r[k]), float(t[k]))


@dataclass(frozen=True)
class GrowthDiagnostics:
    """Growth samples of ``M`` near 0; informational, carries no verdict."""

    u: tuple[float, ...]
    doubling_ratio: tuple[float, ...]
    elasticity: tuple[float | None, ...]

    def to_json(self):
        finite = [e for e in self.elasticity if e is not None]
        return {"u": list(self.u), "doubling_ratio": list(self.doubling_ratio),
                "elasticity": list(self.elasticity),
                "elasticity_range": [min(finite), max(finite)] if finite else None,
                "doubling_ratio_max": max(self.doubling_ratio)}


def growth_diagnostics(M, points: int = 12, smallest: float = 1e-6, log_step: float = 1e-3) -> GrowthDiagnostics:
    """Sample ``M(2u)/M(u)`` and ``u M''(u) / M'(u)`` on a log grid in ``[smallest, 1/2]``.

    The elasticity is a central difference of ``log M'`` in ``log u`` with
    half-width ``log_step``; it is ``None`` where ``M'`` vanishes.  Limits at
    0 are not inferred from these samples.
    """
    M = as_orlicz(M)
    if points < 2 or not 0.0 < smallest < 0.5:
        raise DomainError("growth_diagnostics needs points >= 2 and 0 < smallest < 1/2")
    u = np.geomspace(smallest, 0.5, points)
    ratio = np.asarray(M(2.0 * u)) / np.asarray(M(u))
    up = np.asarray(M.derivative(u * math.exp(log_step)))
    down = np.asarray(M.derivative(u * math.exp(-log_step)))
    elastic: list[float | None] = []
    for a, b in zip(up, down):
        elastic.append(float((math.log(a) - math.log(b)) / (2.0 * log_step)) if a > 0 and b > 0 else None)
    return GrowthDiagnostics(tuple(map(float, u)), tuple(map(float, ratio)), tuple(elastic))


class LuxemburgBase:
    """Luxemburg norm on the coordinates of a member, for the norms module."""

    def __init__(self, M):
        self.M = as_orlicz(M)

    def norm_of(self, values: np.ndarray) -> float:
        return luxemburg_norm(self.M, np.asarray(values, dtype=float))


class OrliczBase(LuxemburgBase):
    def norm_of(self, values: np.ndarray) -> float:
        return orlicz_norm(self.M, np.asarray(values, dtype=float))
