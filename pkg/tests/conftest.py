import itertools

import numpy as np
import pytest

from coopmot.core import Detection


def make_box(x=0.0, y=0.0, z=0.0, theta=0.0, h=1.0, w=1.0, l=1.0,
             score=1.0, agent_id="a", frame=0, local_index=0):
    return Detection(x=x, y=y, z=z, theta=theta, h=h, w=w, l=l,
                     score=score, agent_id=agent_id, frame=frame,
                     local_index=local_index)


def rand_box7(rng, center_scale=2.0, extent_lo=0.5, extent_hi=4.0):
    return np.concatenate([
        rng.uniform(-center_scale, center_scale, 3),
        rng.uniform(-np.pi, np.pi, 1),
        rng.uniform(extent_lo, extent_hi, 3),
    ])


def box_aabb(b7):
    """Axis-aligned bounds of an oriented box, shape (2, 3)."""
    x, y, z, theta, h, w, l = b7[:7]
    c, s = abs(np.cos(theta)), abs(np.sin(theta))
    ex = c * l / 2 + s * w / 2
    ey = s * l / 2 + c * w / 2
    lo = np.array([x - ex, y - ey, z - h / 2])
    hi = np.array([x + ex, y + ey, z + h / 2])
    return np.stack([lo, hi])


def points_in_box(points, b7):
    x, y, z, theta, h, w, l = b7[:7]
    d = points - np.array([x, y, z])
    c, s = np.cos(theta), np.sin(theta)
    u = c * d[:, 0] + s * d[:, 1]
    v = -s * d[:, 0] + c * d[:, 1]
    return (np.abs(u) <= l / 2) & (np.abs(v) <= w / 2) & (np.abs(d[:, 2]) <= h / 2)


def mc_iou(a7, b7, rng, n=100_000):
    """Monte Carlo volume-membership IoU estimate (independent oracle)."""
    bounds = np.stack([box_aabb(a7), box_aabb(b7)])
    lo = bounds[:, 0, :].min(axis=0)
    hi = bounds[:, 1, :].max(axis=0)
    pts = rng.uniform(lo, hi, size=(n, 3))
    in_a = points_in_box(pts, a7)
    in_b = points_in_box(pts, b7)
    either = np.count_nonzero(in_a | in_b)
    if either == 0:
        return 0.0
    return np.count_nonzero(in_a & in_b) / either


def brute_min_cost(cost):
    """Exhaustive minimum-cost assignment over all injections."""
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    if n == 0 or m == 0:
        return 0.0, []
    if n <= m:
        best, best_pairs = np.inf, []
        for perm in itertools.permutations(range(m), n):
            total = sum(cost[i, perm[i]] for i in range(n))
            if total < best:
                best, best_pairs = total, [(i, perm[i]) for i in range(n)]
        return best, best_pairs
    total, pairs = brute_min_cost(cost.T)
    return total, [(r, c) for c, r in pairs]


def brute_max_gated_matching(iou, threshold):
    """Max-total-IoU matching using only pairs at or above the threshold."""
    iou = np.asarray(iou, dtype=float)
    edges = [(r, c) for r in range(iou.shape[0]) for c in range(iou.shape[1])
             if iou[r, c] >= threshold]

    def best(remaining, used_r, used_c):
        if not remaining:
            return 0.0
        (r, c), rest = remaining[0], remaining[1:]
        skip = best(rest, used_r, used_c)
        if r in used_r or c in used_c:
            return skip
        take = iou[r, c] + best(rest, used_r | {r}, used_c | {c})
        return max(skip, take)

    return best(edges, frozenset(), frozenset())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
