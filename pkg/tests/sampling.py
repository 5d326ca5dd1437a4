"""Seeded generators of test inputs shared by several test modules."""

from __future__ import annotations

import itertools

import numpy as np

from schreier_kit.norms import SparseVector, norm

LEVELS = np.array([1.0, 2 ** -0.5, 0.5, 3 ** -0.5])


def sphere_vectors(fam, p: float, count: int, top: int = 4, seed: int = 0) -> list[SparseVector]:
    """Norm-one vectors supported in ``[1, top]``.

    Two thirds draw entries from a few levels so that p-th power sums tie on
    several sets (one of those thirds uses a prefix support ``[1, k]``, where
    extreme points live); the rest are Gaussian.  All are rescaled.
    """
    rng = np.random.default_rng(seed)
    out: list[SparseVector] = []
    while len(out) < count:
        mode = len(out) % 3
        mask = rng.random(top) < 0.6
        if mode == 0:
            mask = np.arange(top) < rng.integers(1, top + 1)
        if not mask.any():
            continue
        if mode < 2:
            vals = rng.choice(LEVELS ** (2.0 / p), top) * rng.choice((-1.0, 1.0), top)
        else:
            vals = rng.standard_normal(top)
        x = SparseVector(np.where(mask, vals, 0.0))
        n = norm(fam, p, x).value
        x = SparseVector({i: v / n for i, v in x.items()})
        # rescaling can leave a norming sum 1 ulp off; snap it back
        x = SparseVector({i: v / norm(fam, p, x).value for i, v in x.items()})
        out.append(x)
    return out


def level_sphere_vectors(fam, p: float, top: int = 4) -> list[SparseVector]:
    """Every vector on ``[1, top]`` with entries in ``{0} u LEVELS^(2/p)`` and norm exactly one."""
    levels = [0.0, *(LEVELS ** (2.0 / p))]
    out = []
    for v in itertools.product(levels, repeat=top):
        if any(v) and abs(norm(fam, p, v).value - 1.0) <= 1e-12:
            out.append(SparseVector(v))
    return out
