"""Finite subsets of N and hereditary families of them.

A family is either *explicit* (finitely many generators, membership exact on
all of N) or *lazy* (a predicate, exact but only queried inside a truncation
window ``[1, window]``).  Everything here is 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError, WindowExceededError


class FiniteSet(tuple):
    """Sorted tuple of distinct positive integers."""

    __slots__ = ()

    def __new__(cls, elements: Iterable[int] = ()):
        if isinstance(elements, FiniteSet):
            return elements
        elems = sorted({int(e) for e in elements})
        if elems and elems[0] < 1:
            raise DomainError(f"set elements must be >= 1, got {elems[0]}")
        return super().__new__(cls, elems)

    @classmethod
    def _trusted(cls, elements: tuple) -> "FiniteSet":
        # caller guarantees strictly increasing positive ints
        return tuple.__new__(cls, elements)

    @property
    def min(self) -> int:
        if not self:
            raise DomainError("min of the empty set")
        return self[0]

    @property
    def max(self) -> int:
        if not self:
            raise DomainError("max of the empty set")
        return self[-1]

    def union(self, other: Iterable[int]) -> "FiniteSet":
        return FiniteSet(set(self).union(other))

    def issubset(self, other: Iterable[int]) -> bool:
        return set(self).issubset(other)

    def __repr__(self):
        return "{" + ",".join(map(str, self)) + "}"


def as_set(F) -> FiniteSet:
    return F if isinstance(F, FiniteSet) else FiniteSet(F)


def canonical_key(F: Sequence[int]):
    """Sort key: cardinality first, then lexicographic."""
    return (len(F), tuple(F))


def canonical_sorted(sets: Iterable[Sequence[int]]) -> list[FiniteSet]:
    return sorted({as_set(s) for s in sets}, key=canonical_key)


def interval(a: int, b: int) -> FiniteSet:
    """The integer interval ``[a, b]`` (empty when ``b < a``)."""
    return FiniteSet._trusted(tuple(range(a, b + 1)))


class Family:
    """Hereditary family of finite subsets of N containing every singleton.

    Subclasses implement :meth:`_contains`, a total membership predicate.
    The public :meth:`member` additionally enforces the window on lazy
    families, so that truncation is never silently mistaken for absence.
    """

    kind = "abstract"
    lazy = True
    spreading = False
    # True when "F not maximal" already implies F + {max F + 1} in the family.
    exterior_probe_exact = False

    def __init__(self, window: int):
        window = int(window)
        if window < 1:
            raise DomainError(f"window must be >= 1, got {window}")
        self.window = window

    def _contains(self, F: FiniteSet) -> bool:
        raise NotImplementedError

    def _check_window(self, F: Sequence[int]):
        if self.lazy and F and F[-1] > self.window:
            raise WindowExceededError(
                f"{self.describe()}: index {F[-1]} outside window [1,{self.window}]",
                window=self.window,
                offending=tuple(F),
            )

    def describe(self) -> str:
        return self.kind

    def with_window(self, window: int) -> "Family":
        raise NotImplementedError

    def member(self, F) -> bool:
        F = as_set(F)
        self._check_window(F)
        return self._contains(F)

    __contains__ = member

    def is_maximal(self, F) -> bool:
        """Whether no ``l`` gives ``F + {l}`` in the family.

        Lazy families probe every gap ``l < max F`` and then the exterior.
        For Schreier families a single exterior probe ``max F + 1`` is exact;
        other lazy families probe the exterior up to the window only.
        """
        F = as_set(F)
        if not self.member(F):
            raise DomainError(f"{F!r} is not a member of {self.describe()}")
        if not F:
            return False
        present = set(F)
        for l in range(1, F[-1]):
            if l not in present and self._contains(F.union((l,))):
                return False
        top = F[-1] + 1
        stop = top if self.exterior_probe_exact else max(top, self.window)
        for l in range(top, stop + 1):
            if self._contains(FiniteSet._trusted(F + (l,))):
                return False
        return True

    def iter_members(self, within: Iterable[int] | None = None) -> Iterator[FiniteSet]:
        """Depth-first enumeration of members contained in ``within``.

        Hereditarity lets a failed prefix prune its whole subtree.
        """
        W = self._within(within)
        yield FiniteSet()
        stack = [((), 0)]
        while stack:
            prefix, start = stack.pop()
            for idx in range(len(W) - 1, start - 1, -1):
                cand = prefix + (W[idx],)
                if self._contains(FiniteSet._trusted(cand)):
                    yield FiniteSet._trusted(cand)
                    stack.append((cand, idx + 1))

    def members(self, within: Iterable[int] | None = None) -> list[FiniteSet]:
        return sorted(self.iter_members(within), key=canonical_key)

    def _within(self, within) -> tuple[int, ...]:
        if within is None:
            return tuple(range(1, self.window + 1))
        W = as_set(within)
        self._check_window(W)
        return tuple(W)

    def maximal_elements(self, within: Iterable[int] | None = None) -> list[FiniteSet]:
        """Members inside ``within`` that are maximal among such members."""
        W = self._within(within)
        found = set(self.iter_members(W))
        out = []
        for F in found:
            rest = set(W).difference(F)
            if not any(F.union((w,)) in found for w in rest):
                out.append(F)
        return sorted(out, key=canonical_key)

    def in_closure(self, A: Iterable[int], probe_depth: int = 0) -> bool:
        """Whether every finite subset of ``A`` is a member.

        ``A`` is finite here, so by hereditarity this is membership of ``A``
        itself.  ``probe_depth`` is kept for infinite-set policies.
        """
        return self.member(as_set(A))

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()} window={self.window}>"


class ExplicitFamily(Family):
    """Family generated by finitely many sets, plus every singleton of N."""

    kind = "explicit"
    lazy = False

    def __init__(self, generators: Iterable[Iterable[int]] = (), window: int | None = None):
        sets = [as_set(g) for g in generators]
        big = {g for g in sets if len(g) >= 2}
        maximal = [g for g in big if not any(g != h and set(g) < set(h) for h in big)]
        self.generators = canonical_sorted(maximal)
        self._gensets = [frozenset(g) for g in self.generators]
        used = max((g[-1] for g in sets if g), default=1)
        super().__init__(max(used, window or 1))

    def _contains(self, F):
        if len(F) <= 1:
            return True
        return any(self._gensets[i].issuperset(F) for i in range(len(self._gensets)))

    def with_window(self, window):
        return ExplicitFamily(self.generators, window)

    def is_maximal(self, F):
        F = as_set(F)
        if not self.member(F):
            raise DomainError(f"{F!r} is not a member of {self.describe()}")
        if not F:
            return False
        return not any(g.issuperset(F) and len(g) > len(F) for g in self._gensets)

    def maximal_elements(self, within=None):
        W = set(self._within(within))
        if not W:
            return [FiniteSet()]
        cands = {FiniteSet(g & W) for g in self._gensets} | {FiniteSet((w,)) for w in W}
        cands.discard(FiniteSet())
        out = [c for c in cands if not any(c != d and set(c) < set(d) for d in cands)]
        return sorted(out, key=canonical_key)

    def maximal(self) -> list[FiniteSet]:
        """All maximal members with index at most the window."""
        return self.maximal_elements()

    def describe(self):
        return "explicit" + repr(self.generators)


class CounterFamily(ExplicitFamily):
    """Sets inside ``{1, 2}`` or inside one of the given blocks, plus singletons.

    With no blocks this is the family of sets ``F`` with ``F`` contained in
    ``{1,2}`` or ``F = {n}``; with blocks it is the interval-partition variant.
    """

    kind = "counter"

    def __init__(self, blocks: Iterable[Iterable[int]] = (), window: int | None = None):
        blocks = [as_set(b) for b in blocks]
        prev = 2
        for b in blocks:
            if not b:
                raise DomainError("empty block in counter family")
            if b[0] <= prev or tuple(b) != tuple(range(b[0], b[-1] + 1)):
                raise DomainError(
                    f"counter blocks must be consecutive intervals above 2 in increasing order, got {b!r}"
                )
            prev = b[-1]
        self.blocks = blocks
        super().__init__([(1, 2)] + blocks, window)

    def with_window(self, window):
        return CounterFamily(self.blocks, window)

    def describe(self):
        return "counter" + ("" if not self.blocks else repr(self.blocks))


class PredicateFamily(Family):
    """Lazy family backed by a user predicate on sorted tuples.

    The predicate must describe a hereditary family containing singletons;
    ``spreading`` is a promise by the caller, not something checked here
    (see :func:`is_spreading`).
    """

    kind = "predicate"

    def __init__(self, predicate: Callable[[FiniteSet], bool], window: int, *,
                 spreading: bool = False, name: str = "predicate"):
        super().__init__(window)
        self.predicate = predicate
        self.spreading = spreading
        self.name = name

    def _contains(self, F):
        return len(F) <= 1 or bool(self.predicate(F))

    def with_window(self, window):
        return PredicateFamily(self.predicate, window, spreading=self.spreading, name=self.name)

    def describe(self):
        return self.name


class CardinalityFamily(PredicateFamily):
    """``F_{<=n}``: all sets with at most ``n`` elements."""

    kind = "cardinality"
    exterior_probe_exact = True

    def __init__(self, n: int, window: int):
        if n < 1:
            raise DomainError("cardinality bound must be >= 1")
        self.bound = int(n)
        super().__init__(lambda F: len(F) <= self.bound, window, spreading=True,
                         name=f"card<={self.bound}")

    def with_window(self, window):
        return CardinalityFamily(self.bound, window)


def hereditary_closure(sets: Iterable[Iterable[int]], window: int | None = None) -> ExplicitFamily:
    """Smallest hereditary family containing ``sets`` and the singletons."""
    return ExplicitFamily(sets, window)


@dataclass(frozen=True)
class SpreadMap:
    """Order-preserving map ``source[i] -> images[i]`` with ``images[i] >= source[i]``."""

    source: FiniteSet
    images: tuple[int, ...]

    def __post_init__(self):
        if len(self.source) != len(self.images):
            raise DomainError("spread map length mismatch")
        if any(b <= a for a, b in zip(self.images, self.images[1:])):
            raise DomainError("spread map images must be strictly increasing")
        if any(s > t for s, t in zip(self.source, self.images)):
            raise DomainError("spread map must dominate pointwise")

    def image(self) -> FiniteSet:
        return FiniteSet._trusted(tuple(self.images))


def _dominating_images(F: tuple[int, ...], top: int) -> Iterator[tuple[int, ...]]:
    k = len(F)
    if k == 0:
        return

    def rec(i, lo):
        if i == k:
            yield ()
            return
        # leave room for the k - i - 1 later coordinates
        for v in range(max(lo, F[i]), top - (k - i - 1) + 1):
            for tail in rec(i + 1, v + 1):
                yield (v,) + tail

    yield from rec(0, 1)


@dataclass(frozen=True)
class SpreadingResult:
    spreading: bool
    witness: tuple[FiniteSet, FiniteSet] | None = None

    def __bool__(self):
        return self.spreading


def is_spreading(fam: Family, exhaustive_bound: int) -> SpreadingResult:
    """Exhaustive spreading check on members inside ``[1, exhaustive_bound]``.

    Images range over the whole window.  Plain translations are tried before
    the general dominating images, which keeps witnesses simple.
    """
    if exhaustive_bound > fam.window:
        raise DomainError(f"bound {exhaustive_bound} exceeds window {fam.window}")
    top = fam.window
    for F in fam.members(range(1, exhaustive_bound + 1)):
        if not F:
            continue
        for t in range(1, top - F[-1] + 1):
            img = FiniteSet._trusted(tuple(f + t for f in F))
            if not fam._contains(img):
                return SpreadingResult(False, (F, img))
        for img in _dominating_images(tuple(F), top):
            if not fam._contains(FiniteSet._trusted(img)):
                return SpreadingResult(False, (F, FiniteSet._trusted(img)))
    return SpreadingResult(True)


def incidence_matrix(sets: Sequence[Sequence[int]], dim: int) -> np.ndarray:
    """0/1 matrix with one row per set over coordinates ``1..dim``."""
    A = np.zeros((len(sets), dim), dtype=np.float64)
    for r, F in enumerate(sets):
        for i in F:
            if i <= dim:
                A[r, i - 1] = 1.0
    return A
