"""Generalized Schreier families S_alpha for alpha in N and omega + k.

Recursion:

* ``S_0`` is the family of sets with at most one element;
* ``F`` is in ``S_{b+1}`` iff ``F = E_1 u ... u E_n`` with
  ``n <= E_1 < ... < E_n`` and every ``E_i`` in ``S_b``;
* for the limit ``omega``, ``F`` is in ``S_omega`` iff ``F`` is in
  ``S_{a_n}`` for some ``n <= min F``, where ``(a_n)`` is the fundamental
  sequence chosen by the policy (``succ``: ``a_n = n + 1``; ``plain``: ``a_n = n``).

Successor membership is decided by a greedy longest-prefix split; an
exhaustive interval-partition search is kept alongside as an oracle.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError
from .family import Family, FiniteSet, as_set, canonical_key

POLICIES = ("succ", "plain")

#: Largest ``k`` accepted in ``omega + k``.
MAX_OMEGA_OFFSET = 2

BRUTE_SIZE_LIMIT = 20


@dataclass(frozen=True)
class Ordinal:
    """An ordinal ``n`` (``omega=False``) or ``omega + n`` (``omega=True``).

    ``fundamental`` names the fundamental sequence used at the omega stage;
    it is normalized to ``"succ"`` for finite ordinals, where it is unused.
    """

    n: int
    omega: bool = False
    fundamental: str = "succ"

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"ordinal offset must be >= 0, got {self.n}")
        if self.fundamental not in POLICIES:
            raise DomainError(f"unknown fundamental policy {self.fundamental!r}")
        if self.omega and self.n > MAX_OMEGA_OFFSET:
            raise DomainError(f"omega+{self.n} exceeds the supported range omega+{MAX_OMEGA_OFFSET}")
        if not self.omega and self.fundamental != "succ":
            object.__setattr__(self, "fundamental", "succ")

    @classmethod
    def finite(cls, n: int) -> "Ordinal":
        return cls(int(n))

    @classmethod
    def omega_plus(cls, k: int = 0, fundamental: str = "succ") -> "Ordinal":
        return cls(int(k), True, fundamental)

    @classmethod
    def parse(cls, text, fundamental: str = "succ") -> "Ordinal":
        if isinstance(text, Ordinal):
            return text
        if isinstance(text, int):
            return cls.finite(text)
        s = str(text).strip().lower().replace(" ", "").replace("ω", "omega")
        if s.isdigit():
            return cls.finite(int(s))
        m = re.fullmatch(r"omega(?:\+(\d+))?", s)
        if not m:
            raise DomainError(f"cannot parse ordinal {text!r}")
        return cls.omega_plus(int(m.group(1) or 0), fundamental)

    @property
    def is_zero(self) -> bool:
        return not self.omega and self.n == 0

    @property
    def is_limit(self) -> bool:
        return self.omega and self.n == 0

    @property
    def is_successor(self) -> bool:
        return self.n > 0

    def predecessor(self) -> "Ordinal":
        if not self.is_successor:
            raise DomainError(f"{self} has no predecessor")
        return Ordinal(self.n - 1, self.omega, self.fundamental)

    def successor(self) -> "Ordinal":
        return Ordinal(self.n + 1, self.omega, self.fundamental)

    def _key(self):
        return (self.omega, self.n)

    def __lt__(self, other):
        return self._key() < other._key()

    def __le__(self, other):
        return self._key() <= other._key()

    def __gt__(self, other):
        return self._key() > other._key()

    def __ge__(self, other):
        return self._key() >= other._key()

    def __str__(self):
        if not self.omega:
            return str(self.n)
        return "omega" if self.n == 0 else f"omega+{self.n}"


def fundamental_sequence(alpha: Ordinal, n: int) -> Ordinal:
    """The ``n``-th term of the fundamental sequence of the limit ``alpha``."""
    if not alpha.is_limit:
        raise DomainError(f"fundamental sequence requested for non-limit ordinal {alpha}")
    if n < 1:
        raise DomainError("fundamental sequence is indexed from 1")
    return Ordinal.finite(n + 1 if alpha.fundamental == "succ" else n)


@dataclass(frozen=True)
class Decomposition:
    """Consecutive blocks ``E_1 < ... < E_n`` whose union is the decomposed set."""

    blocks: tuple[FiniteSet, ...]

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def admissible(self) -> bool:
        """``n <= min E_1``, the block-count condition of the successor step."""
        return not self.blocks or self.n <= self.blocks[0][0]

    def union(self) -> FiniteSet:
        return FiniteSet._trusted(tuple(i for b in self.blocks for i in b))


@functools.lru_cache(maxsize=1 << 19)
def _member(alpha: Ordinal, F: tuple) -> bool:
    if not F:
        return True
    if alpha.is_zero:
        return len(F) <= 1
    if alpha.is_limit:
        # S_{a_n} increases with n, so "some n <= min F" means n = min F.
        return _member(fundamental_sequence(alpha, F[0]), F)
    dec = _greedy(alpha.predecessor(), F)
    return dec is not None and len(dec) <= F[0]


def _greedy(beta: Ordinal, F: tuple):
    blocks = []
    i, k = 0, len(F)
    while i < k:
        if not _member(beta, F[i:i + 1]):
            return None
        j = _longest_prefix(beta, F, i)
        blocks.append(F[i:j])
        i = j
    return blocks


def _longest_prefix(beta: Ordinal, F: tuple, i: int) -> int:
    # prefixes of a member are members: gallop, then bisect for the last member
    k = len(F)
    good, step = i + 1, 1
    while good < k:
        probe = min(k, good + step)
        if _member(beta, F[i:probe]):
            good = probe
            step *= 2
        else:
            bad = probe
            break
    else:
        return good
    while bad - good > 1:
        mid = (good + bad) // 2
        if _member(beta, F[i:mid]):
            good = mid
        else:
            bad = mid
    return good


def schreier_member(alpha, F) -> bool:
    """Membership of ``F`` in ``S_alpha``."""
    alpha = Ordinal.parse(alpha)
    return _member(alpha, tuple(as_set(F)))


def greedy_decompose(beta, F) -> Decomposition | None:
    """Split ``F`` into the fewest consecutive ``S_beta`` blocks.

    Each block is the longest prefix of the remainder lying in ``S_beta``.
    Since ``S_beta`` is hereditary, any split into consecutive members can be
    pushed towards the greedy one without adding blocks, so greedy is optimal.
    Returns ``None`` if a single element is not in ``S_beta``.
    """
    beta = Ordinal.parse(beta)
    F = tuple(as_set(F))
    if not F:
        raise DomainError("greedy_decompose needs a nonempty set")
    blocks = _greedy(beta, F)
    if blocks is None:
        return None
    return Decomposition(tuple(FiniteSet._trusted(b) for b in blocks))


@functools.lru_cache(maxsize=1 << 19)
def _brute_member(alpha: Ordinal, F: tuple) -> bool:
    if not F:
        return True
    if alpha.is_zero:
        return len(F) <= 1
    if alpha.is_limit:
        return any(_brute_member(fundamental_sequence(alpha, n), F) for n in range(1, F[0] + 1))
    return _brute_split(alpha.predecessor(), F, F[0])


def _brute_split(beta: Ordinal, F: tuple, max_blocks: int) -> bool:
    k = len(F)
    for mask in range(1 << (k - 1)):
        if bin(mask).count("1") + 1 > max_blocks:
            continue
        start, ok = 0, True
        for gap in range(k - 1):
            if mask >> gap & 1:
                if not _brute_member(beta, F[start:gap + 1]):
                    ok = False
                    break
                start = gap + 1
        if ok and _brute_member(beta, F[start:]):
            return True
    return False


def brute_decompose(beta, F, max_blocks: int) -> bool:
    """Exhaustive search over the ``2^(|F|-1)`` interval partitions of ``F``.

    True iff some partition uses at most ``max_blocks`` blocks, all in
    ``S_beta``.  Block membership is itself decided by this same exhaustive
    search, so no greedy step is involved anywhere.
    """
    beta = Ordinal.parse(beta)
    F = tuple(as_set(F))
    if len(F) > BRUTE_SIZE_LIMIT:
        raise DomainError(f"brute_decompose limited to |F| <= {BRUTE_SIZE_LIMIT}, got {len(F)}")
    if not F:
        return True
    return _brute_split(beta, F, max_blocks)


def brute_member(alpha, F) -> bool:
    """Membership in ``S_alpha`` using only exhaustive partition search."""
    alpha = Ordinal.parse(alpha)
    return _brute_member(alpha, tuple(as_set(F)))


class SchreierFamily(Family):
    """Lazy family ``S_alpha`` truncated to the window ``[1, window]``."""

    kind = "schreier"
    spreading = True
    # non-maximal G in S_alpha gives G + {l} in S_alpha for every l > G
    exterior_probe_exact = True

    def __init__(self, alpha, window: int = 12, fundamental: str | None = None):
        super().__init__(window)
        if fundamental is not None and not isinstance(alpha, Ordinal):
            alpha = Ordinal.parse(alpha, fundamental)
        self.alpha = Ordinal.parse(alpha)

    def _contains(self, F):
        return _member(self.alpha, tuple(F))

    def with_window(self, window):
        return SchreierFamily(self.alpha, window)

    def describe(self):
        tag = f"S_{self.alpha}"
        if self.alpha.omega:
            tag += f"[{self.alpha.fundamental}]"
        return tag


def maximal_block_decomposition(alpha, G) -> Decomposition | None:
    """Split a maximal ``G`` of ``S_{b+1}`` into ``min G`` maximal ``S_b`` blocks.

    Backtracking over interval partitions; returns ``None`` if no such split
    exists.  Works for any ``G``, which is how the check is made falsifiable.
    """
    alpha = Ordinal.parse(alpha)
    beta = alpha.predecessor()
    G = tuple(as_set(G))
    if not G:
        return None
    m = G[0]
    if len(G) < m:
        return None
    blocks: list[tuple] = []

    def rec(i):
        if i == len(G):
            return len(blocks) == m
        if len(blocks) == m:
            return False
        for j in range(i + 1, len(G) + 1):
            blk = G[i:j]
            if not _member(beta, blk):
                break
            if _is_maximal_in(beta, blk):
                blocks.append(blk)
                if rec(j):
                    return True
                blocks.pop()
        return False

    if rec(0):
        return Decomposition(tuple(FiniteSet._trusted(b) for b in blocks))
    return None


def _is_maximal_in(alpha: Ordinal, F: tuple) -> bool:
    if not F:
        return False
    if alpha.is_zero:
        return len(F) == 1
    present = set(F)
    for l in range(1, F[-1]):
        if l not in present and _member(alpha, tuple(sorted(present | {l}))):
            return False
    return not _member(alpha, F + (F[-1] + 1,))


@dataclass
class PropertyCheck:
    """Outcome of a randomized or exhaustive structural check."""

    name: str
    instances: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.instances > 0 and not self.violations


def check_head_split(alpha, instances: int = 10_000, seed: int = 0, span: int = 14) -> PropertyCheck:
    """Randomized check: ``m < n < p < F`` and ``{m} u F`` in S_alpha give ``{n,p} u F`` in S_alpha.

    Draws until ``instances`` hypotheses hold.  ``span`` bounds the indices.
    """
    alpha = Ordinal.parse(alpha)
    rng = np.random.default_rng(seed)
    out = PropertyCheck(f"head-split[S_{alpha}]")
    draws = 0
    while out.instances < instances:
        draws += 1
        if draws > 200 * instances:
            raise DomainError("too few instances satisfy the hypothesis; widen span")
        m, n, p = sorted(rng.choice(np.arange(1, span - 1), size=3, replace=False).tolist())
        rest = np.arange(p + 1, span + 1)
        size = int(rng.integers(0, min(len(rest), m + 1) + 1))
        F = tuple(sorted(rng.choice(rest, size=size, replace=False).tolist())) if size else ()
        if not _member(alpha, (m,) + F):
            continue
        out.instances += 1
        if not _member(alpha, (n, p) + F):
            out.violations.append(((m, n, p), F))
    return out


def check_maximal_block_split(alpha, top: int = 12) -> PropertyCheck:
    """Every maximal ``G`` of ``S_alpha`` with ``max G <= top`` splits as in :func:`maximal_block_decomposition`."""
    alpha = Ordinal.parse(alpha)
    fam = SchreierFamily(alpha, top)
    out = PropertyCheck(f"maximal-split[S_{alpha}]")
    for G in fam.iter_members():
        if G and _is_maximal_in(alpha, tuple(G)):
            out.instances += 1
            if maximal_block_decomposition(alpha, G) is None:
                out.violations.append(G)
    return out


def schreier_family(alpha: str | int | Ordinal, window: int = 12, fundamental: str = "succ") -> SchreierFamily:
    return SchreierFamily(Ordinal.parse(alpha, fundamental), window)


def sorted_members(alpha, top: int) -> list[FiniteSet]:
    """All members of ``S_alpha`` inside ``[1, top]`` in canonical order."""
    return sorted(SchreierFamily(alpha, top).iter_members(), key=canonical_key)
