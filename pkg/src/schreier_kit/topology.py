"""Cantor-Bendixson derivatives and ranks on truncated families.

Two kinds of rank live here.

*Truncated* ranks iterate a window-bounded derivative and are naturals.
Each computation runs in lockstep with a shadow copy at a larger window;
a value is reported ``sound`` only when both windows agree.

*Exact* ranks of Schreier families are ordinals below ``omega^(omega+K+1)``
in Cantor normal form, computed from the greedy block decomposition:

    rank_{b+1}(F) = omega^b * (min F - m) + rank_b(last block)

where ``m`` is the number of greedy blocks, ``rank_0({x}) = 0`` and
``rank_a(empty) = omega^a``; limit stages delegate to the fundamental
sequence at ``min F``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .family import Family, FiniteSet, as_set, canonical_key
from .schreier import Ordinal, SchreierFamily, _greedy, _member, fundamental_sequence, PropertyCheck


# ------------------------------------------------------------ ordinals

@functools.total_ordering
class CNF:
    """Ordinal ``omega^e1 * c1 + ... + omega^ek * ck`` with ``e1 > ... > ek``.

    Exponents are :class:`Ordinal` values (naturals or ``omega + j``).
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[Ordinal, int]] = ()):
        merged: list[tuple[Ordinal, int]] = []
        for e, c in terms:
            if c < 0:
                raise DomainError("negative coefficient in Cantor normal form")
            if c == 0:
                continue
            e = _plain(e)
            if merged and merged[-1][0] <= e:
                raise DomainError("Cantor normal form exponents must strictly decrease")
            merged.append((e, int(c)))
        self.terms = tuple(merged)

    @classmethod
    def of(cls, n: int) -> "CNF":
        return cls([(Ordinal.finite(0), n)])

    @classmethod
    def power(cls, e: Ordinal, coef: int = 1) -> "CNF":
        return cls([(e, coef)])

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0].is_zero)

    def __int__(self):
        if not self.is_finite:
            raise DomainError(f"{self} is infinite")
        return self.terms[0][1] if self.terms else 0

    def __add__(self, other):
        if isinstance(other, int):
            other = CNF.of(other)
        if not other.terms:
            return self
        lead = other.terms[0][0]
        keep = [t for t in self.terms if t[0] > lead]
        same = [c for e, c in self.terms if e == lead]
        head = [(lead, other.terms[0][1] + (same[0] if same else 0))]
        return CNF(keep + head + list(other.terms[1:]))

    def _key(self):
        return tuple((e._key(), c) for e, c in self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = CNF.of(other)
        return isinstance(other, CNF) and self._key() == other._key()

    def __lt__(self, other):
        if isinstance(other, int):
            other = CNF.of(other)
        a, b = self.terms, other.terms
        for (ea, ca), (eb, cb) in zip(a, b):
            if ea != eb:
                return ea < eb
            if ca != cb:
                return ca < cb
        return len(a) < len(b)

    def __hash__(self):
        return hash(self._key())

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            if e.is_zero:
                parts.append(str(c))
                continue
            base = "omega" if e == Ordinal.finite(1) else f"omega^{_exp_str(e)}"
            parts.append(base if c == 1 else f"{base}*{c}")
        return " + ".join(parts)

    __repr__ = __str__


def _plain(e: Ordinal) -> Ordinal:
    # exponents compare by value; drop the policy tag
    return Ordinal(e.n, e.omega) if e.omega else e


def _exp_str(e: Ordinal) -> str:
    s = str(e)
    return s if s.isdigit() or s == "omega" else f"({s})"


@functools.lru_cache(maxsize=1 << 18)
def _exact_rank(alpha: Ordinal, F: tuple) -> CNF:
    if not F:
        return CNF.power(alpha)
    if alpha.is_zero:
        return CNF.of(0)
    if alpha.is_limit:
        return _exact_rank(fundamental_sequence(alpha, F[0]), F)
    beta = alpha.predecessor()
    blocks = _greedy(beta, F)
    free = F[0] - len(blocks)
    return CNF.power(beta, free) + _exact_rank(beta, blocks[-1])


def exact_rank(alpha, F) -> CNF:
    """Cantor-Bendixson rank of ``F`` inside ``S_alpha`` (as a subset of N)."""
    alpha = Ordinal.parse(alpha)
    F = tuple(as_set(F))
    if not _member(alpha, F):
        raise DomainError(f"{as_set(F)!r} is not in S_{alpha}")
    return _exact_rank(alpha, F)


def ordinal_sup_of_tail(values: Sequence[CNF]) -> CNF | None:
    """Supremum of a nondecreasing sequence read from a finite tail.

    Eventually constant tails give their value.  Otherwise the last values
    must share a prefix followed by terms ``omega^e * c`` with ``c`` or ``e``
    growing; the supremum is ``prefix + omega^(e+1)`` (fixed ``e``) or
    ``prefix + omega^omega`` (finite ``e`` growing).  Returns ``None`` when
    the tail fits neither pattern.
    """
    tail = list(values[-4:])
    if len(tail) < 2:
        return None
    if all(v == tail[-1] for v in tail):
        return tail[-1]
    if any(b <= a for a, b in zip(tail, tail[1:])):
        return None
    seqs = [v.terms for v in tail]
    k = 0
    while all(len(s) > k for s in seqs) and all(s[k] == seqs[0][k] for s in seqs):
        k += 1
    prefix = list(seqs[0][:k])
    heads = [s[k][0] if len(s) > k else None for s in seqs]
    if any(h is None for h in heads):
        return None
    if all(h == heads[0] for h in heads):
        e = heads[0]
        return CNF(prefix + [(e.successor(), 1)])
    if all(not h.omega for h in heads) and all(a < b for a, b in zip(heads, heads[1:])):
        return CNF(prefix + [(Ordinal.omega_plus(0), 1)])
    return None


# ------------------------------------------------- truncated derivatives

def _margin(window: int) -> int:
    return max(1, window // 4)


@dataclass
class ClosedSetSystem:
    """Finite set system inside ``[1, window]`` with a derivative regime.

    ``regime`` is ``"spreading"`` (one end-extension inside the window marks
    a limit point) or ``"explicit"`` (an end-extension whose new minimum
    exceeds ``max F + margin``).  ``shadow`` is the same construction at a
    larger window, advanced in lockstep; ``unsound`` holds sets whose status
    differs between the two windows.
    """

    sets: tuple[FiniteSet, ...]
    window: int
    regime: str = "explicit"
    parent: Family | None = None
    margin: int | None = None
    shadow: "ClosedSetSystem | None" = None
    unsound: frozenset = frozenset()
    order: int = 0

    def __post_init__(self):
        if self.regime not in ("spreading", "explicit"):
            raise DomainError(f"unknown derivative regime {self.regime!r}")
        self.sets = tuple(sorted({as_set(s) for s in self.sets}, key=canonical_key))
        if self.margin is None:
            self.margin = _margin(self.window)
        self._index = frozenset(self.sets)

    def __contains__(self, F):
        return as_set(F) in self._index

    def __len__(self):
        return len(self.sets)

    @classmethod
    def from_family(cls, fam: Family, *, cone: Iterable[int] | None = None,
                    regime: str | None = None, shadow_window: int | None = None) -> "ClosedSetSystem":
        """Members of ``fam`` inside its window, optionally only those extending ``cone``.

        The cone of ``F`` is ``{F u H : H > max F}``; derivatives of a cone
        only consult end-extensions, so ranks of ``F`` can be read off it.
        """
        regime = regime or ("spreading" if fam.spreading else "explicit")
        shadow = None
        if shadow_window is None:
            shadow_window = fam.window + _margin(fam.window)
        if shadow_window > fam.window:
            big = fam.with_window(shadow_window)
            shadow = cls.from_family(big, cone=cone, regime=regime, shadow_window=0)
        return cls(tuple(_cone_members(fam, cone)), fam.window, regime, fam,
                   margin=_margin(fam.window), shadow=shadow)

    def restricted(self, top: int) -> set[FiniteSet]:
        return {F for F in self.sets if not F or F[-1] <= top}


def _cone_members(fam: Family, cone) -> list[FiniteSet]:
    if cone is None:
        return list(fam.iter_members())
    base = as_set(cone)
    if not fam.member(base):
        return []
    start = base[-1] + 1 if base else 1
    rest = tuple(range(start, fam.window + 1))
    out = [base]
    stack = [(tuple(base), 0)]
    while stack:
        prefix, i0 = stack.pop()
        for i in range(i0, len(rest)):
            cand = prefix + (rest[i],)
            if fam._contains(FiniteSet._trusted(cand)):
                out.append(FiniteSet._trusted(cand))
                stack.append((cand, i + 1))
    return out


def _limit_points(K: ClosedSetSystem) -> list[FiniteSet]:
    index = K._index
    out = []
    if K.regime == "spreading":
        for F in K.sets:
            lo = F[-1] + 1 if F else 1
            if any(FiniteSet._trusted(F + (l,)) in index for l in range(lo, K.window + 1)):
                out.append(F)
        return out
    for F in K.sets:
        lo = (F[-1] if F else 0) + K.margin + 1
        if any(FiniteSet._trusted(F + (l,)) in index for l in range(lo, K.window + 1)):
            out.append(F)
    return out


def derivative(K: ClosedSetSystem) -> ClosedSetSystem:
    """Remove the isolated points of ``K`` under its truncation regime."""
    D = _limit_points(K)
    shadow = derivative(K.shadow) if K.shadow is not None else None
    unsound = set()
    if shadow is not None:
        mine = set(D)
        theirs = shadow.restricted(K.window)
        unsound = {F for F in K.sets if (F in mine) != (F in theirs)}
    else:
        # no second window: a rejection by the margin alone is not certified
        if K.regime == "explicit":
            mine = set(D)
            for F in K.sets:
                if F not in mine:
                    lo = (F[-1] if F else 0) + 1
                    if any(FiniteSet._trusted(F + (l,)) in K._index for l in range(lo, K.window + 1)):
                        unsound.add(F)
    return ClosedSetSystem(tuple(D), K.window, K.regime, K.parent, margin=K.margin,
                           shadow=shadow, unsound=frozenset(unsound), order=K.order + 1)


@dataclass(frozen=True)
class RankResult:
    """Truncated rank of a set; ``sound`` iff stable under window enlargement."""

    value: int
    sound: bool
    window: int
    shadow_value: int | None = None

    @property
    def inconclusive(self) -> bool:
        return not self.sound

    def to_json(self):
        return {"rank": self.value, "sound": self.sound, "window": self.window}


def _iterate_rank(K: ClosedSetSystem, F: FiniteSet) -> int:
    r = 0
    while True:
        K = _derivative_no_shadow(K)
        if F not in K:
            return r
        r += 1


def _derivative_no_shadow(K):
    D = _limit_points(K)
    return ClosedSetSystem(tuple(D), K.window, K.regime, K.parent, margin=K.margin, order=K.order + 1)


def rank(fam: Family, F, *, shadow_window: int | None = None) -> RankResult:
    """Number of derivatives of the truncated family containing ``F``.

    The derivative is iterated on the cone of ``F`` at the family window and
    at ``shadow_window`` (default ``window + window // 4``).
    """
    F = as_set(F)
    if not fam.member(F):
        raise DomainError(f"{F!r} is not a member of {fam.describe()}")
    regime = "spreading" if fam.spreading else "explicit"
    K = ClosedSetSystem(tuple(_cone_members(fam, F)), fam.window, regime, fam)
    value = _iterate_rank(K, F)
    sw = shadow_window if shadow_window is not None else fam.window + _margin(fam.window)
    big = fam.with_window(sw)
    K2 = ClosedSetSystem(tuple(_cone_members(big, F)), sw, regime, big, margin=K.margin)
    other = _iterate_rank(K2, F)
    return RankResult(value, value == other, fam.window, other)


# --------------------------------------------------------- verification

@dataclass
class RankTable:
    """Per-``n`` exact rank of ``{n}`` with its truncated counterpart."""

    alpha: Ordinal
    window: int
    rows: list = field(default_factory=list)

    @property
    def exact(self) -> list[CNF]:
        return [r["exact"] for r in self.rows]

    @property
    def consistent(self) -> bool:
        """Sound truncated values coincide with the exact ones."""
        return all(not r["sound"] or (r["exact"].is_finite and int(r["exact"]) == r["truncated"])
                   for r in self.rows)

    def to_json(self):
        return {
            str(r["n"]): {"rank": str(r["exact"]), "truncated": r["truncated"], "sound": r["sound"]}
            for r in self.rows
        }


def rank_table(alpha, n_max: int, window: int | None = None) -> RankTable:
    alpha = Ordinal.parse(alpha)
    window = window or max(16, 2 * n_max + 4)
    fam = SchreierFamily(alpha, window)
    table = RankTable(alpha, window)
    for n in range(1, n_max + 1):
        tr = rank(fam, (n,))
        table.rows.append({"n": n, "exact": exact_rank(alpha, (n,)), "truncated": tr.value, "sound": tr.sound})
    return table


def verify_rank_monotone(alpha, n_max: int, window: int | None = None) -> tuple[bool, RankTable]:
    """Whether ``n -> rank({n})`` is strictly increasing on ``1..n_max``.

    Decided on exact ranks; also requires every sound truncated rank to match.
    """
    table = rank_table(alpha, n_max, window)
    ex = table.exact
    ok = all(a < b for a, b in zip(ex, ex[1:])) and table.consistent
    return ok, table


def verify_singleton_rank_gap(alpha, pairs: Iterable[tuple[int, int]], window: int | None = None) -> tuple[bool, list]:
    """For each ``(m, n)`` with ``m < n``: ``rank({n}) >= rank({m}) + 1``."""
    alpha = Ordinal.parse(alpha)
    pairs = [(int(m), int(n)) for m, n in pairs]
    for m, n in pairs:
        if not 1 <= m < n:
            raise DomainError(f"pair ({m},{n}) needs 1 <= m < n")
    rows = []
    ok = True
    for m, n in pairs:
        rm, rn = exact_rank(alpha, (m,)), exact_rank(alpha, (n,))
        good = rn >= rm + 1
        ok &= good
        rows.append({"m": m, "n": n, "rank_m": str(rm), "rank_n": str(rn), "holds": good})
    return ok, rows


verify_f3 = verify_singleton_rank_gap  # contract name


def in_derivative(alpha, F, mu: int) -> bool:
    """``F`` lies in the ``mu``-th derivative of ``S_alpha`` (exact)."""
    alpha = Ordinal.parse(alpha)
    F = tuple(as_set(F))
    return _member(alpha, F) and _exact_rank(alpha, F) >= CNF.of(mu)


def check_head_split_in_derivative(alpha, mu: int, instances: int = 2000, window: int = 12, seed: int = 0) -> PropertyCheck:
    """Randomized check: ``{m} u F`` in the ``mu``-th derivative gives ``{n,p} u F`` there.

    Each drawn instance is judged twice, with exact ranks and with the
    truncated derivative at ``window``.  ``F`` is drawn nonempty so both
    sets share their maximum, which keeps the truncated judgement fair.
    """
    alpha = Ordinal.parse(alpha)
    rng = np.random.default_rng(seed)
    fam = SchreierFamily(alpha, window)
    out = PropertyCheck(f"head-split-derivative[S_{alpha}, mu={mu}]")
    tcache: dict = {}

    def truncated_in(G):
        if G not in tcache:
            tcache[G] = _iterate_rank(
                ClosedSetSystem(tuple(_cone_members(fam, G)), window, "spreading", fam), G) >= mu
        return tcache[G]

    draws = 0
    while out.instances < instances:
        draws += 1
        if draws > 500 * instances:
            raise DomainError("too few instances satisfy the hypothesis")
        m, n, p = sorted(rng.choice(np.arange(1, window - 1), size=3, replace=False).tolist())
        rest = np.arange(p + 1, window + 1)
        size = int(rng.integers(1, len(rest) + 1))
        F = tuple(sorted(rng.choice(rest, size=size, replace=False).tolist()))
        A, B = FiniteSet._trusted((m,) + F), FiniteSet._trusted((n, p) + F)
        if not _member(alpha, A):
            continue
        exact_hyp = _exact_rank(alpha, A) >= CNF.of(mu)
        trunc_hyp = truncated_in(A)
        if not (exact_hyp or trunc_hyp):
            continue
        out.instances += 1
        if exact_hyp and not in_derivative(alpha, B, mu):
            out.violations.append(("exact", (m, n, p), F))
        if trunc_hyp and not (_member(alpha, B) and truncated_in(B)):
            out.violations.append(("truncated", (m, n, p), F))
    return out
