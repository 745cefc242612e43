"""Exact linear solving over Z and over Q.

The decomposition solvers need two primitives: a rational Gaussian
elimination (for certificate checks) and an integer solver A x = b based on
column-style Hermite reduction, used to find integer-valued polynomials in
the binomial basis.  Matrix sizes stay in the low hundreds, so plain
Python bigints are fine.
"""

from __future__ import annotations

from fractions import Fraction


def rat_solve(rows, rhs):
    """One solution of rows * x = rhs over Q, or None when inconsistent.

    rows: list of lists of Fractions/ints; free variables are set to 0.
    """
    m = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    nrows = len(m)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if m[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        piv = m[r][c]
        m[r] = [v / piv for v in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [m[i][j] - f * m[r][j] for j in range(ncols + 1)]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    for i in range(r, nrows):
        if m[i][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = m[i][ncols]
    return x


def int_solve(rows, rhs):
    """One integer solution of rows * x = rhs, or None.

    rows: list of lists of ints; rhs: list of ints.  Works by reducing the
    augmented column space with integer row operations on the transposed
    system (Hermite-style), tracking the transformation.
    """
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    if nrows == 0 or ncols == 0:
        return [0] * ncols if all(b == 0 for b in rhs) else None
    # columns of A as vectors; find integer combination equal to rhs.
    # Work on the matrix [A | -I] row-reduced over Z by columns: we instead
    # do Hermite reduction on A^T with a unimodular tracker U so U A^T = H.
    at = [list(col) for col in zip(*rows)]  # ncols x nrows
    u = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]
    row = 0
    pivcols = []
    for col in range(nrows):
        # find pivot: nonzero entry in at[row:][col] with smallest absolute value
        while True:
            cand = [i for i in range(row, ncols) if at[i][col] != 0]
            if not cand:
                break
            piv = min(cand, key=lambda i: (abs(at[i][col]), i))
            at[row], at[piv] = at[piv], at[row]
            u[row], u[piv] = u[piv], u[row]
            done = True
            for i in range(row + 1, ncols):
                if at[i][col] != 0:
                    q = at[i][col] // at[row][col]
                    if q:
                        at[i] = [a - q * b for a, b in zip(at[i], at[row])]
                        u[i] = [a - q * b for a, b in zip(u[i], u[row])]
                    if at[i][col] != 0:
                        done = False
            if done:
                break
        if row < ncols and at[row][col] != 0:
            if at[row][col] < 0:
                at[row] = [-a for a in at[row]]
                u[row] = [-a for a in u[row]]
            pivcols.append((row, col))
            row += 1
            if row == ncols:
                break
    # back-substitute: find y (integer row vector over the H rows) with
    # y H = rhs, i.e. solve in echelon order.
    y = [0] * ncols
    residual = list(rhs)
    for r, c in pivcols:
        if residual[c] % at[r][c] != 0:
            return None
        t = residual[c] // at[r][c]
        y[r] = t
        if t:
            residual = [a - t * b for a, b in zip(residual, at[r])]
    if any(residual):
        return None
    # x = y U gives the combination of original columns
    x = [0] * ncols
    for i in range(ncols):
        if y[i]:
            for j in range(ncols):
                x[j] += y[i] * u[i][j]
    return x
