"""Point queries on a CharGrid: Lagrange interpolation and finite differences.

All queries work on small patches around the point so they stay cheap on
large grids. Stencils never reach outside the determined triangle; a
StencilError is raised instead.
"""
from __future__ import annotations

import math

import numpy as np


class StencilError(ValueError):
    pass


# 4th-order centered first and second differences
D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
# 3rd derivative, 2nd order (7-point not needed for our uses)
D3 = np.array([-0.5, 1.0, 0.0, -1.0, 0.5])


def lagrange4(f):
    """Weights of 4-point Lagrange interpolation on nodes -1, 0, 1, 2 at f."""
    return np.array([
        -f * (f - 1) * (f - 2) / 6.0,
        (f + 1) * (f - 1) * (f - 2) / 2.0,
        -(f + 1) * f * (f - 2) / 2.0,
        (f + 1) * f * (f - 1) / 6.0,
    ])


def _patch(G, name, i0, j0, r):
    A = getattr(G, name) if isinstance(name, str) else name
    if i0 - r < 0 or j0 - r < 0 or i0 + r + 1 >= A.shape[0] or j0 + r + 1 >= A.shape[1]:
        raise StencilError(f"stencil leaves the grid near node ({i0}, {j0})")
    P = A[i0 - r:i0 + r + 2, j0 - r:j0 + r + 2]
    if not np.all(np.isfinite(P)):
        raise StencilError(f"stencil touches undetermined cells near node ({i0}, {j0})")
    return P


def _split(G, X, Y):
    fi, fj = (X - G.X0g) / G.h, (Y - G.Y0g) / G.h
    i0, j0 = int(math.floor(fi)), int(math.floor(fj))
    return i0, j0, fi - i0, fj - j0


def interp(G, name, X, Y):
    """Bicubic Lagrange value of a field at (X, Y)."""
    i0, j0, a, b = _split(G, X, Y)
    P = _patch(G, name, i0, j0, 1)
    return float(lagrange4(a) @ P @ lagrange4(b))


def interp_bilinear(G, name, X, Y):
    A = getattr(G, name) if isinstance(name, str) else name
    i0, j0, a, b = _split(G, X, Y)
    i0 = min(max(i0, 0), A.shape[0] - 2)
    j0 = min(max(j0, 0), A.shape[1] - 2)
    a = (X - G.X0g) / G.h - i0
    b = (Y - G.Y0g) / G.h - j0
    # snap round-off so points on lattice lines use only their own edge
    a = 0.0 if abs(a) < 1e-9 else 1.0 if abs(a - 1) < 1e-9 else a
    b = 0.0 if abs(b) < 1e-9 else 1.0 if abs(b - 1) < 1e-9 else b
    P = A[i0:i0 + 2, j0:j0 + 2]
    W = np.array([[(1 - a) * (1 - b), (1 - a) * b], [a * (1 - b), a * b]])
    # corners with zero weight may be undetermined (points on the data line)
    return float(np.sum(np.where(W != 0, W * P, 0.0)))


def point_derivs(G, name, X, Y):
    """Value and derivatives (X, Y, XX, YY, XY, XXX) of a field at (X, Y).

    Derivatives are 4th-order centered differences at lattice nodes
    (XXX is 2nd order), then interpolated to the point by bicubic Lagrange.
    """
    i0, j0, a, b = _split(G, X, Y)
    r = 4
    P = _patch(G, name, i0, j0, r)
    h = G.h
    # node (i0-1+k, j0-1+l), k,l in 0..3  ->  patch index (r-1+k, r-1+l)
    out = {k: np.empty((4, 4)) for k in ("v", "X", "Y", "XX", "YY", "XY", "XXX")}
    for k in range(4):
        for l in range(4):
            ci, cj = r - 1 + k, r - 1 + l
            rowX = P[ci - 2:ci + 3, cj]
            rowY = P[ci, cj - 2:cj + 3]
            out["v"][k, l] = P[ci, cj]
            out["X"][k, l] = D1 @ rowX / h
            out["Y"][k, l] = D1 @ rowY / h
            out["XX"][k, l] = D2 @ rowX / h**2
            out["YY"][k, l] = D2 @ rowY / h**2
            out["XXX"][k, l] = D3 @ rowX / h**3
            blk = P[ci - 2:ci + 3, cj - 2:cj + 3]
            out["XY"][k, l] = D1 @ blk @ D1 / h**2
    wa, wb = lagrange4(a), lagrange4(b)
    return {k: float(wa @ v @ wb) for k, v in out.items()}


def column_values(G, name, X, j_lo, j_hi):
    """Field values on rows j_lo..j_hi interpolated to abscissa X (cubic in X)."""
    A = getattr(G, name) if isinstance(name, str) else name
    fi = (X - G.X0g) / G.h
    i0 = int(math.floor(fi))
    wa = lagrange4(fi - i0)
    return wa @ A[i0 - 1:i0 + 3, j_lo:j_hi + 1]


def row_values(G, name, Y, i_lo, i_hi):
    """Field values on columns i_lo..i_hi interpolated to ordinate Y (cubic in Y)."""
    A = getattr(G, name) if isinstance(name, str) else name
    fj = (Y - G.Y0g) / G.h
    j0 = int(math.floor(fj))
    wb = lagrange4(fj - j0)
    return A[i_lo:i_hi + 1, j0 - 1:j0 + 3] @ wb


def interp_bilinear_many(G, name, X, Y):
    """Vectorized interp_bilinear over arrays of points."""
    A = getattr(G, name) if isinstance(name, str) else name
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    fi = (X - G.X0g) / G.h
    fj = (Y - G.Y0g) / G.h
    i0 = np.clip(np.floor(fi).astype(int), 0, A.shape[0] - 2)
    j0 = np.clip(np.floor(fj).astype(int), 0, A.shape[1] - 2)
    a = fi - i0
    b = fj - j0
    a = np.where(np.abs(a) < 1e-9, 0.0, np.where(np.abs(a - 1) < 1e-9, 1.0, a))
    b = np.where(np.abs(b) < 1e-9, 0.0, np.where(np.abs(b - 1) < 1e-9, 1.0, b))
    out = np.zeros_like(a)
    for di, dj, wgt in ((0, 0, (1 - a) * (1 - b)), (1, 0, a * (1 - b)),
                        (0, 1, (1 - a) * b), (1, 1, a * b)):
        v = A[i0 + di, j0 + dj]
        out += np.where(wgt != 0, wgt * np.where(np.isfinite(v), v, 0.0), 0.0)
        out = np.where((wgt != 0) & ~np.isfinite(v), np.nan, out)
    return out
