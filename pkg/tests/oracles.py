"""Independent reference computations used by the tests.

Nothing here calls LAPACK's QZ: roots come from exact or high-precision
determinant polynomials, closed-form quadratics, or explicit formulas.
"""

import cmath
from fractions import Fraction

import mpmath
import numpy as np


def _det_fraction(mat):
    a = [row[:] for row in mat]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


def _interpolate(xs, ys):
    """Exact coefficients (lowest degree first) of the interpolating polynomial."""
    n = len(xs)
    coef = [Fraction(0)] * n
    for i in range(n):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j in range(n):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for d in range(len(basis) - 1):
                basis[d] -= xs[j] * basis[d + 1]
            denom *= xs[i] - xs[j]
        for d in range(n):
            coef[d] += ys[i] * basis[d] / denom
    return coef


def pencil_polynomial_exact(a0, a1):
    """Coefficients of det(A0 - lam A1) for integer/rational pencils."""
    n = len(a0)
    a0 = [[Fraction(int(v)) for v in row] for row in np.asarray(a0)]
    a1 = [[Fraction(int(v)) for v in row] for row in np.asarray(a1)]
    xs = [Fraction(k) for k in range(n + 1)]
    ys = [_det_fraction([[a0[i][j] - x * a1[i][j] for j in range(n)] for i in range(n)])
          for x in xs]
    return _interpolate(xs, ys)


def pencil_roots_exact(a0, a1):
    """(finite roots, infinite count); ``None`` when the pencil is singular."""
    n = len(a0)
    coef = pencil_polynomial_exact(a0, a1)
    nz = [d for d, c in enumerate(coef) if c != 0]
    if not nz:
        return None
    deg = max(nz)
    if deg == 0:
        return [], n
    with mpmath.workdps(60):
        roots = mpmath.polyroots([mpmath.mpf(c.numerator) / c.denominator
                                  for c in reversed(coef[: deg + 1])],
                                 maxsteps=400, extraprec=400)
        roots = [complex(r) for r in roots]
    return roots, n - deg


def pencil_roots_mp(a0, a1, dps=60):
    """Same as :func:`pencil_roots_exact` for float pencils, in high precision."""
    n = len(a0)
    with mpmath.workdps(dps):
        A0 = mpmath.matrix(np.asarray(a0, float).tolist())
        A1 = mpmath.matrix(np.asarray(a1, float).tolist())
        xs = [mpmath.mpf(k) for k in range(n + 1)]
        ys = [mpmath.det(A0 - x * A1) for x in xs]
        # Newton divided differences -> monomial coefficients
        dd = list(ys)
        for lvl in range(1, n + 1):
            for i in range(n, lvl - 1, -1):
                dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - lvl])
        poly = [mpmath.mpf(0)] * (n + 1)
        basis = [mpmath.mpf(1)]
        for i in range(n + 1):
            for d, b in enumerate(basis):
                poly[d] += dd[i] * b
            nb = [mpmath.mpf(0)] * (len(basis) + 1)
            for d, b in enumerate(basis):
                nb[d + 1] += b
                nb[d] -= xs[i] * b
            basis = nb
        scale = max(abs(c) for c in poly)
        deg = max(d for d, c in enumerate(poly) if abs(c) > scale * mpmath.mpf(10) ** (-30))
        roots = mpmath.polyroots(list(reversed(poly[: deg + 1])), maxsteps=400, extraprec=400) \
            if deg > 0 else []
        return [complex(r) for r in roots], n - deg


def nk_roots_closed_form(sigma, beta, kappa, phi_pi, phi_y, rho):
    """Transition roots of the NK pencil: rho plus the (y, pi) quadratic."""
    a = 1 + phi_y / sigma
    qa = beta
    qb = -(a * beta + 1 + kappa / sigma)
    qc = a + kappa * phi_pi / sigma
    disc = cmath.sqrt(qb * qb - 4 * qa * qc)
    return [rho, (-qb + disc) / (2 * qa), (-qb - disc) / (2 * qa)]


def match_multisets(found, expected, rel=1e-6):
    """Largest relative mismatch after optimal pairing."""
    from scipy.optimize import linear_sum_assignment

    if len(found) != len(expected):
        return float("inf")
    if not found:
        return 0.0
    cost = np.array([[abs(f - e) / max(1.0, abs(e)) for e in expected] for f in found])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def table_a2_pair(rows, horizon=200, seed=0):
    """Two path tables whose per-variable differences have prescribed
    (max_abs_diff, rmse): one spike of size ``max`` plus a constant level."""
    rng = np.random.default_rng(seed)
    base = rng.normal(scale=0.01, size=(horizon, len(rows)))
    other = base.copy()
    for j, (_name, mx, rmse) in enumerate(rows):
        level = np.sqrt((horizon * rmse ** 2 - mx ** 2) / (horizon - 1))
        d = np.full(horizon, level)
        d[horizon // 3] = mx
        other[:, j] = base[:, j] + d
    return base, other
