"""Independent reference implementations used as test oracles.

Nothing here imports the package's algorithms; each oracle recomputes its
quantity the slow, obvious way.
"""

from __future__ import annotations

import math
import re
from collections import deque
from itertools import combinations

import numpy as np


def bfs_distances(adj: dict[int, set[int]], source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def adjacency_by_name(pubs) -> dict[str, set[str]]:
    """O(P * k^2) pair enumeration over author names."""
    adj: dict[str, set[str]] = {}
    for p in pubs:
        names = list(p.authors)
        for a in names:
            adj.setdefault(a, set())
        for i in range(len(names)):
            for j in range(len(names)):
                if names[i] != names[j]:
                    adj[names[i]].add(names[j])
    return adj


def paper_recount(pubs, name: str) -> int:
    return sum(1 for p in pubs if name in p.authors)


def joint_recount(pubs, a: str, b: str) -> int:
    return sum(1 for p in pubs if a in p.authors and b in p.authors)


def random_adjacency(rng, n: int, p: float) -> dict[int, set[int]]:
    adj = {i: set() for i in range(1, n + 1)}
    for u, v in combinations(range(1, n + 1), 2):
        if rng.random() < p:
            adj[u].add(v)
            adj[v].add(u)
    return adj


def naive_confusion(pred, label) -> tuple[int, int, int, int]:
    tp = tn = fp = fn = 0
    for p, t in zip(pred, label):
        if p == 1 and t == 1:
            tp += 1
        elif p == 0 and t == 0:
            tn += 1
        elif p == 1:
            fp += 1
        else:
            fn += 1
    return tp, tn, fp, fn


def mann_whitney_auc(scores, labels) -> float:
    """P(score of random positive > score of random negative), ties count 1/2."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for a in pos:
        for b in neg:
            total += 1.0 if a > b else 0.5 if a == b else 0.0
    return total / (len(pos) * len(neg))


def gaussian_pdf(x: float, mean: float, var: float) -> float:
    return math.exp(-((x - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)


def central_difference(f, theta: np.ndarray, h: float = 1e-5) -> np.ndarray:
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up.flat[i] += h
        down.flat[i] -= h
        grad.flat[i] = (f(up) - f(down)) / (2 * h)
    return grad


def scan_record_count(data: bytes, max_lines: int | None, kinds) -> int:
    """Count records of ``kinds`` whose closing tag lies within the first lines.

    Works on DBLP's layout, where every record ends with ``</kind>`` on a line
    of its own; a record cut by the line budget has no closing tag in range.
    """
    closing = re.compile(rb"</(" + b"|".join(k.encode() for k in kinds) + rb")>\s*$")
    n = 0
    for i, line in enumerate(data.splitlines()):
        if max_lines is not None and i >= max_lines:
            break
        if closing.search(line):
            n += 1
    return n


def relative_error(analytic, numeric) -> float:
    a = np.asarray(analytic, dtype=np.float64).ravel()
    n = np.asarray(numeric, dtype=np.float64).ravel()
    scale = max(np.linalg.norm(a) + np.linalg.norm(n), 1e-12)
    return float(np.linalg.norm(a - n) / scale)


def pack(*arrays) -> np.ndarray:
    return np.concatenate([np.ravel(a) for a in arrays]).astype(np.float64)


def unpack(theta, shapes):
    out, i = [], 0
    for shape in shapes:
        size = int(np.prod(shape)) if shape else 1
        chunk = theta[i : i + size]
        out.append(chunk.reshape(shape) if shape else float(chunk[0]))
        i += size
    return out
