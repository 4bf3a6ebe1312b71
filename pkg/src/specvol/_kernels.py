"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The single dominant cost of the Monte Carlo harness is turning an increment
vector of length n into the J x K array of block coefficients; everything
here serves that product.  Backend selection: the environment variable
SPECVOL_BACKEND may be "numba", "numpy" or "auto" (default).  "auto" uses
numba when it imports, numpy otherwise.

Geometry convention: observations live on cells [(i-1)/n, i/n]; block k
covers [k/K, (k+1)/K].  Each block is cut into "pieces" by the cell edges.
For a piece with normalized endpoints u_lo < u_hi inside block k, the
frequency-j coefficient picks up

    scale_j * (cos(j*pi*u_hi) - cos(j*pi*u_lo)) * dY[cell]

with scale_j = n * sqrt(2h) * h / (pi^2 j^2), which is the exact integral of
the sine antiderivative over the piece times n, applied to the increment.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


_requested = os.environ.get("SPECVOL_BACKEND", "auto").strip().lower()
if _requested not in {"auto", "numba", "numpy"}:
    warnings.warn(f"SPECVOL_BACKEND={_requested!r} not recognized, using 'auto'")
    _requested = "auto"
if _requested == "numba" and not HAVE_NUMBA:
    warnings.warn("SPECVOL_BACKEND=numba requested but numba is unavailable; using numpy")
USE_NUMBA = HAVE_NUMBA if _requested == "auto" else (_requested == "numba" and HAVE_NUMBA)


def active_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


@dataclass(frozen=True)
class BlockGeometry:
    """Static piece decomposition of one (n, K) observation/block layout."""

    n: int
    K: int
    bounds_u: np.ndarray   # (B,) normalized piece boundaries, blockwise 0..1
    piece_lo: np.ndarray   # (P,) index of each piece's lower boundary in bounds_u
    piece_cell: np.ndarray  # (P,) 0-based cell index into the increment vector
    bptr: np.ndarray       # (K+1,) boundary offsets per block
    pptr: np.ndarray       # (K+1,) piece offsets per block


@lru_cache(maxsize=8)
def block_geometry(n: int, K: int) -> BlockGeometry:
    """Exact piece decomposition; boundary classification in integer arithmetic."""
    if K < 1 or n < 1:
        raise ValueError("n and K must be positive")
    L = n // gcd(n, K) * K          # lcm
    cw = L // n                     # cell width in 1/L units
    bw = L // K                     # block width in 1/L units
    bounds = []
    piece_lo = []
    piece_cell = []
    bptr = [0]
    pptr = [0]
    for k in range(K):
        lo_int = k * bw
        hi_int = (k + 1) * bw
        i_first = lo_int // cw + 1                  # 1-based cell containing (lo, lo+)
        i_last = (hi_int + cw - 1) // cw            # 1-based cell containing (hi-, hi)
        base = len(bounds)
        bounds.append(0.0)
        for i in range(i_first, i_last + 1):
            right = min(i * cw, hi_int)
            bounds.append((right - lo_int) / bw)
            piece_lo.append(base + (i - i_first))
            piece_cell.append(i - 1)
        bptr.append(len(bounds))
        pptr.append(len(piece_cell))
    return BlockGeometry(
        n=n,
        K=K,
        bounds_u=np.asarray(bounds, dtype=np.float64),
        piece_lo=np.asarray(piece_lo, dtype=np.int64),
        piece_cell=np.asarray(piece_cell, dtype=np.int64),
        bptr=np.asarray(bptr, dtype=np.int64),
        pptr=np.asarray(pptr, dtype=np.int64),
    )


def coefficient_scales(n: int, K: int, J: int) -> np.ndarray:
    h = 1.0 / K
    j = np.arange(1, J + 1, dtype=np.float64)
    return n * np.sqrt(2.0 * h) * h / (np.pi ** 2 * j ** 2)


def block_sums_numpy(geom: BlockGeometry, dY: np.ndarray, J: int, scale: np.ndarray) -> np.ndarray:
    out = np.empty((J, geom.K), dtype=np.float64)
    d = dY[geom.piece_cell]
    starts = geom.pptr[:-1]
    for j in range(1, J + 1):
        c = np.cos((j * np.pi) * geom.bounds_u)
        g = (c[geom.piece_lo + 1] - c[geom.piece_lo]) * d
        out[j - 1] = scale[j - 1] * np.add.reduceat(g, starts)
    return out


@njit(cache=True)
def _block_sums_numba_impl(bounds_u, piece_lo, piece_cell, bptr, pptr, dY, J, scale):  # pragma: no cover
    K = bptr.size - 1
    out = np.empty((J, K), dtype=np.float64)
    for k in range(K):
        b0, b1 = bptr[k], bptr[k + 1]
        nb = b1 - b0
        p0, p1 = pptr[k], pptr[k + 1]
        c1 = np.cos(np.pi * bounds_u[b0:b1])
        cjm = np.ones(nb)
        cj = c1.copy()
        for j in range(1, J + 1):
            acc = 0.0
            for p in range(p0, p1):
                lo = piece_lo[p] - b0
                acc += (cj[lo + 1] - cj[lo]) * dY[piece_cell[p]]
            out[j - 1, k] = scale[j - 1] * acc
            if j < J:
                for b in range(nb):
                    nxt = 2.0 * c1[b] * cj[b] - cjm[b]
                    cjm[b] = cj[b]
                    cj[b] = nxt
    return out


def block_sums_numba(geom: BlockGeometry, dY: np.ndarray, J: int, scale: np.ndarray) -> np.ndarray:
    if not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return _block_sums_numba_impl(
        geom.bounds_u, geom.piece_lo, geom.piece_cell, geom.bptr, geom.pptr,
        np.ascontiguousarray(dY, dtype=np.float64), J, scale,
    )


def block_sums(geom: BlockGeometry, dY: np.ndarray, J: int, scale: np.ndarray) -> np.ndarray:
    """Coefficients y[j,k] = scale_j * sum over block pieces of cos-diff * dY."""
    if USE_NUMBA:
        return block_sums_numba(geom, dY, J, scale)
    return block_sums_numpy(geom, dY, J, scale)


@lru_cache(maxsize=16)
def block_normalizers(n: int, K: int, delta: float, j: int = 1):
    """Exact per-block second-moment decomposition of the discrete statistic.

    For the frequency-j coefficient on the (n, K) layout with noise level
    delta, returns (s, nu) with E[y_jk^2] = s_k * sigma^2(k/K) + nu_k exactly
    when sigma^2 is constant on block k: s_k sums the squared piece weights
    over full cells, nu_k is the variance of the summation-by-parts noise
    coefficients.  These converge to (h^2/(pi^2 j^2), delta^2/n) as the cell
    count per block grows.
    """
    geom = block_geometry(n, K)
    scale = coefficient_scales(n, K, j)[j - 1]
    c = np.cos((j * np.pi) * geom.bounds_u)
    w_all = scale * (c[geom.piece_lo + 1] - c[geom.piece_lo])
    s = np.empty(K)
    nu = np.empty(K)
    for k in range(K):
        w = w_all[geom.pptr[k]:geom.pptr[k + 1]]
        s[k] = np.sum(w * w) / n
        A = np.empty(w.size + 1)
        A[0] = -w[0]
        A[1:-1] = w[:-1] - w[1:]
        A[-1] = w[-1]
        if geom.piece_cell[geom.pptr[k]] == 0:
            A[0] = 0.0  # first cell's increment is Y_1 itself: no epsilon_0 term
        nu[k] = delta ** 2 * np.sum(A * A)
    s.setflags(write=False)
    nu.setflags(write=False)
    return s, nu
