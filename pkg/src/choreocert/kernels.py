"""Hot numeric kernels: pairwise distance/force scans over sampled trajectories.

Every kernel takes positions or velocities shaped (bodies, samples, 2) in
float64 and loops over unordered body pairs in lexicographic order with time
ascending, so results are deterministic and runs are repeatable bit for bit.

Two implementations are provided: numba ``@njit`` loops (default) and a pure
numpy fallback. Selection is via the ``CHOREOCERT_BACKEND`` environment
variable ("numba" or "numpy"), read once at import time. The two backends
agree to floating-point roundoff; see benchmarks/kernel_bench.py for a
side-by-side timing comparison.
"""

from __future__ import annotations

import os

import numpy as np

_REQUESTED = os.environ.get("CHOREOCERT_BACKEND", "").strip().lower()
if _REQUESTED not in ("", "numba", "numpy"):
    raise ValueError(
        f"CHOREOCERT_BACKEND={_REQUESTED!r} not recognized (use 'numba' or 'numpy')"
    )

if _REQUESTED != "numpy":
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _REQUESTED == "numba":
            raise
        _HAVE_NUMBA = False
else:
    _HAVE_NUMBA = False

BACKEND = "numba" if _HAVE_NUMBA else "numpy"


def pair_index_table(n_bodies: int) -> np.ndarray:
    """(P, 2) array of 0-based unordered pairs i < j, lexicographic."""
    pairs = [(i, j) for i in range(n_bodies) for j in range(i + 1, n_bodies)]
    return np.array(pairs, dtype=np.int64)


# -- pure numpy implementations ----------------------------------------------

def _np_pair_mean_inverse_distance(pos):
    ii, jj = pair_index_table(pos.shape[0]).T
    diff = pos[ii] - pos[jj]
    dist = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2)
    return (1.0 / dist).mean(axis=1)


def _np_pair_mean_square_relative_velocity(vel):
    ii, jj = pair_index_table(vel.shape[0]).T
    diff = vel[ii] - vel[jj]
    return (diff[..., 0] ** 2 + diff[..., 1] ** 2).mean(axis=1)


def _np_pair_forces(pos):
    B = pos.shape[0]
    ii, jj = pair_index_table(B).T
    diff = pos[ii] - pos[jj]
    d2 = diff[..., 0] ** 2 + diff[..., 1] ** 2
    g = -diff / (d2 * np.sqrt(d2))[..., None]
    out = np.zeros_like(pos)
    np.add.at(out, ii, g)
    np.subtract.at(out, jj, g)
    return out


def _np_min_separation_scan(pos):
    ii, jj = pair_index_table(pos.shape[0]).T
    diff = pos[ii] - pos[jj]
    dist = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2)
    flat = np.argmin(dist)
    p, k = divmod(flat, dist.shape[1])
    return float(dist[p, k]), int(ii[p]), int(jj[p]), int(k)


# -- numba implementations ----------------------------------------------------

if _HAVE_NUMBA:

    @njit(cache=True)
    def _nb_pair_mean_inverse_distance(pos):
        B, M, _ = pos.shape
        out = np.empty(B * (B - 1) // 2)
        p = 0
        for i in range(B):
            for j in range(i + 1, B):
                acc = 0.0
                for k in range(M):
                    dx = pos[i, k, 0] - pos[j, k, 0]
                    dy = pos[i, k, 1] - pos[j, k, 1]
                    acc += 1.0 / np.sqrt(dx * dx + dy * dy)
                out[p] = acc / M
                p += 1
        return out

    @njit(cache=True)
    def _nb_pair_mean_square_relative_velocity(vel):
        B, M, _ = vel.shape
        out = np.empty(B * (B - 1) // 2)
        p = 0
        for i in range(B):
            for j in range(i + 1, B):
                acc = 0.0
                for k in range(M):
                    dx = vel[i, k, 0] - vel[j, k, 0]
                    dy = vel[i, k, 1] - vel[j, k, 1]
                    acc += dx * dx + dy * dy
                out[p] = acc / M
                p += 1
        return out

    @njit(cache=True)
    def _nb_pair_forces(pos):
        B, M, _ = pos.shape
        out = np.zeros((B, M, 2))
        for i in range(B):
            for j in range(i + 1, B):
                for k in range(M):
                    dx = pos[i, k, 0] - pos[j, k, 0]
                    dy = pos[i, k, 1] - pos[j, k, 1]
                    d2 = dx * dx + dy * dy
                    w = 1.0 / (d2 * np.sqrt(d2))
                    out[i, k, 0] -= dx * w
                    out[i, k, 1] -= dy * w
                    out[j, k, 0] += dx * w
                    out[j, k, 1] += dy * w
        return out

    @njit(cache=True)
    def _nb_min_separation_scan(pos):
        B, M, _ = pos.shape
        best = np.inf
        bi, bj, bk = 0, 1, 0
        for i in range(B):
            for j in range(i + 1, B):
                for k in range(M):
                    dx = pos[i, k, 0] - pos[j, k, 0]
                    dy = pos[i, k, 1] - pos[j, k, 1]
                    d = np.sqrt(dx * dx + dy * dy)
                    if d < best:
                        best = d
                        bi, bj, bk = i, j, k
        return best, bi, bj, bk


def _as_pos(arr):
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError(f"expected array shaped (bodies, samples, 2), got {arr.shape}")
    return arr


def pair_mean_inverse_distance(pos) -> np.ndarray:
    """Per-pair time average of 1/|q_i - q_j|, pairs in lexicographic order."""
    pos = _as_pos(pos)
    if BACKEND == "numba":
        return _nb_pair_mean_inverse_distance(pos)
    return _np_pair_mean_inverse_distance(pos)


def pair_mean_square_relative_velocity(vel) -> np.ndarray:
    """Per-pair time average of |v_i - v_j|^2, pairs in lexicographic order."""
    vel = _as_pos(vel)
    if BACKEND == "numba":
        return _nb_pair_mean_square_relative_velocity(vel)
    return _np_pair_mean_square_relative_velocity(vel)


def pair_forces(pos) -> np.ndarray:
    """Gradient of sum_{i<j} 1/|q_i - q_j| with respect to each body position.

    Row i holds sum_{j != i} (q_j - q_i)/|q_i - q_j|^3, which is also the
    Newtonian acceleration of unit-mass body i.
    """
    pos = _as_pos(pos)
    if BACKEND == "numba":
        return _nb_pair_forces(pos)
    return _np_pair_forces(pos)


def min_separation_scan(pos) -> tuple[float, int, int, int]:
    """Global minimum pair distance: (distance, i, j, sample index), 0-based.

    Ties break to the smallest (i, j, k) lexicographically because the scan
    updates only on strict improvement.
    """
    pos = _as_pos(pos)
    if BACKEND == "numba":
        d, i, j, k = _nb_min_separation_scan(pos)
        return float(d), int(i), int(j), int(k)
    return _np_min_separation_scan(pos)


def warmup() -> None:
    """Force JIT compilation of every kernel (no-op on the numpy backend)."""
    pos = np.zeros((2, 4, 2))
    pos[1, :, 0] = 1.0
    pair_mean_inverse_distance(pos)
    pair_mean_square_relative_velocity(pos)
    pair_forces(pos)
    min_separation_scan(pos)
