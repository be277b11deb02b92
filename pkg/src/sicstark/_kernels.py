"""Brute-force element enumeration used as an independent oracle for ideal counts.

Each ideal of a class-number-one field has exactly one generator x + y*w in
the fundamental domain rho1 > 0, 1 <= rho1/|rho2| < eps0^2.  Walking that
domain and binning by ray class gives the Dirichlet coefficients without
any prime factorisation.

The numba kernel is used unless SICSTARK_DISABLE_NUMBA is set to a
non-empty value other than "0"; the numpy path is row-vectorised.
"""
from __future__ import annotations

import math
import os

import numpy as np

_DISABLED = os.environ.get("SICSTARK_DISABLE_NUMBA", "") not in ("", "0")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag
    HAVE_NUMBA = False


def _bounds(D: int, eps0: float, X: int, half: bool) -> tuple[int, int]:
    scale = 2 if half else 1
    ymax = int(math.sqrt(X) * eps0 / math.sqrt(D) * scale) + 2
    xmax = int(math.sqrt(X) * eps0 * 2 * scale) + 2
    return ymax, xmax


def _count_numpy(D, half, eps0, X, d, finv, table, N):
    counts = np.zeros((N, X + 1), dtype=np.int64)
    sq = math.sqrt(D)
    hi = eps0 * eps0 * (1 - 1e-12)
    ymax, xmax = _bounds(D, eps0, X, half)
    xs = np.arange(-xmax, xmax + 1, dtype=np.int64)
    inv2 = pow(2, -1, d)
    for y in range(-ymax, ymax + 1):
        x = xs
        if half:
            x = x[(x - y) % 2 == 0]
        n = x * x - D * y * y
        if half:
            n = n // 4
        r1 = x + y * sq
        r2 = x - y * sq
        ok = (r1 > 0) & (n != 0)
        ratio = np.where(ok, r1 / np.abs(np.where(r2 == 0, 1, r2)), 0.0)
        n = np.abs(n)
        ok &= (ratio >= 1 - 1e-12) & (ratio < hi) & (n <= X) & (n % d != 0)
        if not ok.any():
            continue
        xa, na, r2a = x[ok], n[ok], r2[ok]
        if half:
            m = (xa * inv2) % d
            nn = (y * inv2 * finv) % d
        else:
            m = xa % d
            nn = (y * finv) % d
        s = (r2a < 0).astype(np.int64)
        cls = table[m, np.full_like(m, nn), s]
        np.add.at(counts, (cls, na), 1)
    return counts


if HAVE_NUMBA:
    @njit(cache=True)
    def _count_numba(D, half, eps0, X, d, finv, table, N, ymax, xmax, inv2):  # pragma: no cover
        counts = np.zeros((N, X + 1), dtype=np.int64)
        sq = math.sqrt(D)
        hi = eps0 * eps0 * (1 - 1e-12)
        for y in range(-ymax, ymax + 1):
            for x in range(-xmax, xmax + 1):
                if half and (x - y) % 2 != 0:
                    continue
                n = x * x - D * y * y
                if half:
                    n //= 4
                if n == 0:
                    continue
                r1 = x + y * sq
                if r1 <= 0:
                    continue
                r2 = x - y * sq
                ratio = r1 / abs(r2)
                if ratio < 1 - 1e-12 or ratio >= hi:
                    continue
                n = abs(n)
                if n > X or n % d == 0:
                    continue
                if half:
                    m = (x * inv2) % d
                    nn = (y * inv2 * finv) % d
                else:
                    m = x % d
                    nn = (y * finv) % d
                s = 1 if r2 < 0 else 0
                counts[table[m, nn, s], n] += 1
        return counts


def count_by_elements(D: int, half: bool, eps0: float, X: int, d: int, finv: int,
                      table: np.ndarray, N: int, use_numba: bool | None = None) -> np.ndarray:
    """Counts[class, n] of ideals of norm n <= X via the fundamental domain walk.

    table[m, n, s] is the class exponent of (m + n*sqrt(Delta) mod d, sign s at rho2).
    """
    if use_numba is None:
        use_numba = HAVE_NUMBA
    table = np.ascontiguousarray(table, dtype=np.int64)
    if use_numba and HAVE_NUMBA:
        ymax, xmax = _bounds(D, eps0, X, half)
        return _count_numba(D, half, eps0, X, d, finv, table, N, ymax, xmax, pow(2, -1, d))
    return _count_numpy(D, half, eps0, X, d, finv, table, N)
