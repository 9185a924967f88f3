"""Static 3-D k-d tree for exact nearest-neighbour queries.

Ties on distance resolve to the point inserted first, which keeps the
planner deterministic on grid-like clouds.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import EmptyCloud


class _Node:
    __slots__ = ("index", "axis", "left", "right")

    def __init__(self, index, axis, left, right):
        self.index = index
        self.axis = axis
        self.left = left
        self.right = right


def sq_dist(p, q) -> float:
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    dz = p[2] - q[2]
    return dx * dx + dy * dy + dz * dz


class KDTree:
    def __init__(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        self._pts = [tuple(map(float, p)) for p in pts]
        self.root = self._build(list(range(len(self._pts))), 0)

    def __len__(self) -> int:
        return len(self._pts)

    def _build(self, idx: list[int], depth: int):
        if not idx:
            return None
        # Split on the axis of largest spread; fall back to round-robin on flat sets.
        coords = self._pts
        spreads = [
            max(coords[i][a] for i in idx) - min(coords[i][a] for i in idx) for a in range(3)
        ]
        axis = max(range(3), key=lambda a: (spreads[a], -((a - depth) % 3)))
        idx.sort(key=lambda i: (coords[i][axis], i))
        mid = len(idx) // 2
        return _Node(
            idx[mid],
            axis,
            self._build(idx[:mid], depth + 1),
            self._build(idx[mid + 1 :], depth + 1),
        )

    def nearest(self, q) -> tuple[int, float]:
        """Index of and squared distance to the closest stored point."""
        if self.root is None:
            raise EmptyCloud("k-d tree is empty")
        q = tuple(map(float, q))
        pts = self._pts
        best_i = -1
        best_d = math.inf
        stack = [self.root]
        # Depth-first with the near child pushed last so it is popped first.
        while stack:
            node = stack.pop()
            if node is None:
                continue
            if isinstance(node, tuple):
                # Deferred far child: (bound, node).
                bound, node = node
                if bound > best_d:
                    continue
            i = node.index
            p = pts[i]
            d = sq_dist(p, q)
            if d < best_d or (d == best_d and i < best_i):
                best_d, best_i = d, i
            diff = q[node.axis] - p[node.axis]
            if diff < 0:
                near, far = node.left, node.right
            else:
                near, far = node.right, node.left
            if far is not None:
                stack.append((diff * diff, far))
            if near is not None:
                stack.append(near)
        return best_i, best_d


def nearest_index(points, q) -> int:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise EmptyCloud("cannot search an empty cloud")
    return KDTree(pts).nearest(q)[0]
