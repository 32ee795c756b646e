"""Dynamic-programming kernel for optimal re-parameterization."""
from math import gcd, sqrt

import numba
import numpy as np

MAX_SLOPE = 4
MOVES = np.array(
    [(a, b) for a in range(1, MAX_SLOPE + 1) for b in range(1, MAX_SLOPE + 1) if gcd(a, b) == 1],
    dtype=np.int64,
)


@numba.njit(cache=True, nogil=True)
def edge_weight(q1, q2, k, l, i, j):
    """Trapezoidal integral of <q1(t), q2(gamma(t))> sqrt(gamma') over rows k..i.

    gamma runs linearly from column l to column j while t runs from row k to i.
    """
    n = q1.shape[0]
    h = 1.0 / (n - 1)
    slope = (j - l) / (i - k)
    total = 0.0
    for p in range(k, i + 1):
        x = l + slope * (p - k)
        f = int(x)
        if f > n - 2:
            f = n - 2
        a = x - f
        v0 = (1.0 - a) * q2[f, 0] + a * q2[f + 1, 0]
        v1 = (1.0 - a) * q2[f, 1] + a * q2[f + 1, 1]
        term = q1[p, 0] * v0 + q1[p, 1] * v1
        if p == k or p == i:
            term *= 0.5
        total += term
    return total * h * sqrt(slope)


@numba.njit(cache=True, nogil=True)
def dp_table(q1, q2, moves):
    n = q1.shape[0]
    score = np.full((n, n), -np.inf)
    prev = np.full((n, n, 2), -1, dtype=np.int64)
    score[0, 0] = 0.0
    for i in range(1, n):
        for j in range(1, n):
            best = -np.inf
            bk = -1
            bl = -1
            for mv in range(moves.shape[0]):
                k = i - moves[mv, 0]
                l = j - moves[mv, 1]
                if k < 0 or l < 0:
                    continue
                s = score[k, l]
                if s == -np.inf:
                    continue
                cand = s + edge_weight(q1, q2, k, l, i, j)
                if cand > best:
                    best = cand
                    bk = k
                    bl = l
            score[i, j] = best
            prev[i, j, 0] = bk
            prev[i, j, 1] = bl
    return score, prev


def dp_path(q1: np.ndarray, q2: np.ndarray, moves: np.ndarray = MOVES):
    """Return (optimal score, list of lattice knots from (0, 0) to (n-1, n-1))."""
    q1 = np.ascontiguousarray(q1, dtype=np.float64)
    q2 = np.ascontiguousarray(q2, dtype=np.float64)
    score, prev = dp_table(q1, q2, moves)
    n = len(q1)
    knots = [(n - 1, n - 1)]
    i, j = n - 1, n - 1
    while (i, j) != (0, 0):
        i, j = int(prev[i, j, 0]), int(prev[i, j, 1])
        knots.append((i, j))
    return float(score[n - 1, n - 1]), knots[::-1]

