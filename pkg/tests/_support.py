"""Shared test helpers: seeded grids and brute-force matching oracles."""

from __future__ import annotations

import itertools
import math

import numpy as np

from topokit.persistence import PersistenceDiagram, PersistentDot


def random_distinct_grid(rng, height: int, width: int,
                         lo: float = 0.05, hi: float = 0.95) -> np.ndarray:
    """Random permutation of an evenly spaced value ladder.

    Guarantees pairwise-distinct values with a known minimum gap of
    (hi - lo) / (height*width - 1), so finite-difference probes and
    perturbation bounds can be chosen safely.
    """
    n = height * width
    values = np.linspace(lo, hi, n)
    return rng.permutation(values).reshape(height, width)


def diagram_from_pairs(pairs, essential_index: int | None = None) -> PersistenceDiagram:
    """Wrap bare (birth, death) pairs in a diagram with dummy pixel indices."""
    dots = []
    for i, (b, d) in enumerate(pairs):
        essential = i == essential_index
        dots.append(PersistentDot(
            birth=float(b), death=float(d), birth_pixel=i,
            death_pixel=None if essential else 1000 + i, essential=essential,
        ))
    return PersistenceDiagram(dots=tuple(dots), height=0, width=0)


def random_diagram_pairs(rng, max_dots: int = 4):
    """Random list of (birth, death) pairs with birth <= death in [0, 1]."""
    n = int(rng.integers(0, max_dots + 1))
    out = []
    for _ in range(n):
        b = float(rng.uniform(0.0, 0.9))
        d = float(rng.uniform(b, 1.0))
        out.append((b, d))
    return out


def _partial_matchings(n: int, m: int):
    """Yield every assignment of left dots to right dots or the diagonal.

    Each yielded list has length n; entry -1 sends that left dot to the
    diagonal, otherwise it names a distinct right dot. Right dots missing
    from the list go to the diagonal.
    """
    for k in range(0, min(n, m) + 1):
        for left_sub in itertools.combinations(range(n), k):
            for right_perm in itertools.permutations(range(m), k):
                match = [-1] * n
                for li, ri in zip(left_sub, right_perm):
                    match[li] = ri
                yield match


def brute_wasserstein(left_pairs, right_pairs, p: float) -> float:
    """Exhaustive minimum over all augmented assignments, finite p >= 1."""
    n, m = len(left_pairs), len(right_pairs)
    best = math.inf
    for match in _partial_matchings(n, m):
        total = 0.0
        used = set()
        for li, ri in enumerate(match):
            lb, ld = left_pairs[li]
            if ri == -1:
                total += ((ld - lb) / math.sqrt(2.0)) ** p
            else:
                used.add(ri)
                rb, rd = right_pairs[ri]
                total += math.hypot(lb - rb, ld - rd) ** p
        for ri in range(m):
            if ri not in used:
                rb, rd = right_pairs[ri]
                total += ((rd - rb) / math.sqrt(2.0)) ** p
        best = min(best, total)
    return best ** (1.0 / p)


def brute_bottleneck(left_pairs, right_pairs) -> float:
    """Exhaustive minimum of the maximum pair distance (Chebyshev ground metric)."""
    n, m = len(left_pairs), len(right_pairs)
    best = math.inf
    for match in _partial_matchings(n, m):
        worst = 0.0
        used = set()
        for li, ri in enumerate(match):
            lb, ld = left_pairs[li]
            if ri == -1:
                worst = max(worst, (ld - lb) / 2.0)
            else:
                used.add(ri)
                rb, rd = right_pairs[ri]
                worst = max(worst, abs(lb - rb), abs(ld - rd))
        for ri in range(m):
            if ri not in used:
                rb, rd = right_pairs[ri]
                worst = max(worst, (rd - rb) / 2.0)
        best = min(best, worst)
    return best


def brute_assignment_cost(cost_matrix) -> float:
    """Minimum-cost perfect assignment by explicit permutation enumeration."""
    c = np.asarray(cost_matrix, dtype=np.float64)
    size = c.shape[0]
    best = math.inf
    for perm in itertools.permutations(range(size)):
        best = min(best, float(sum(c[i, j] for i, j in enumerate(perm))))
    return best
