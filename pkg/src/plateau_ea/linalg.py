"""Small dense linear algebra, generic over the scalar type.

Everything here works uniformly on Fractions (exact), Python floats, and
mpmath floats: only +, -, *, /, abs, comparisons and an injected sqrt are
used. Matrices are lists of row lists. Sizes are tiny (the level chain is
k x k with k <= 8), so clarity beats blocking.
"""

from __future__ import annotations

import math


class SingularMatrixError(ValueError):
    pass


def solve_linear(A, b):
    """Solve A x = b by Gaussian elimination with partial pivoting.

    Exact when the entries are Fractions. Raises SingularMatrixError on a
    zero pivot column.
    """
    n = len(A)
    M = [list(row) + [bi] for row, bi in zip(A, b)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if M[piv][col] == 0:
            raise SingularMatrixError(f"zero pivot in column {col}")
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
        prow = M[col]
        for r in range(col + 1, n):
            f = M[r][col] / prow[col]
            if f == 0:
                continue
            row = M[r]
            for c in range(col, n + 1):
                row[c] -= f * prow[c]
    x = [None] * n
    for r in range(n - 1, -1, -1):
        s = M[r][n]
        for c in range(r + 1, n):
            s -= M[r][c] * x[c]
        x[r] = s / M[r][r]
    return x


def vec_mat(v, A):
    """Row vector times matrix: (v A)_j = sum_i v_i A_ij."""
    n = len(A)
    cols = len(A[0])
    return [sum(v[i] * A[i][j] for i in range(n)) for j in range(cols)]


def mat_vec(A, v):
    """Matrix times column vector."""
    return [sum(row[j] * v[j] for j in range(len(v))) for row in A]


def identity(n, one=1.0, zero=0.0):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def symmetry_defect(A):
    """max |A_ij - A_ji| over all pairs."""
    n = len(A)
    worst = 0
    for i in range(n):
        for j in range(i + 1, n):
            d = abs(A[i][j] - A[j][i])
            if d > worst:
                worst = d
    return worst


def jacobi_eigh(S, *, sqrt=math.sqrt, tol=None, max_sweeps=100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvectors[i] the unit vector
    for eigenvalues[i] (rows, not columns), unsorted. Rotations are applied
    until the off-diagonal Frobenius mass drops below tol times the matrix
    scale (tol defaults to ~100 ulp for floats; pass an mpf tolerance and
    mp.sqrt for high-precision runs).
    """
    n = len(S)
    a = [list(row) for row in S]
    # rows that never rotate stay exact unit vectors, so a float identity is
    # lossless even under mpmath arithmetic
    v = identity(n)
    scale = sqrt(sum(a[i][j] * a[i][j] for i in range(n) for j in range(n)))
    if scale == 0:
        return [a[i][i] for i in range(n)], v
    if tol is None:
        tol = 1e-14
    for _ in range(max_sweeps):
        off = sqrt(
            sum(a[i][j] * a[i][j] for i in range(n) for j in range(n) if i != j)
        )
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if abs(apq) <= tol * scale / (n * n):
                    continue
                theta = (a[q][q] - a[p][p]) / (2 * apq)
                t = 1 / (abs(theta) + sqrt(theta * theta + 1))
                if theta < 0:
                    t = -t
                c = 1 / sqrt(t * t + 1)
                s = t * c
                for i in range(n):
                    aip, aiq = a[i][p], a[i][q]
                    a[i][p] = c * aip - s * aiq
                    a[i][q] = s * aip + c * aiq
                for i in range(n):
                    api, aqi = a[p][i], a[q][i]
                    a[p][i] = c * api - s * aqi
                    a[q][i] = s * api + c * aqi
                for i in range(n):
                    vpi, vqi = v[p][i], v[q][i]
                    v[p][i] = c * vpi - s * vqi
                    v[q][i] = s * vpi + c * vqi
    else:
        raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")
    return [a[i][i] for i in range(n)], v


def left_residual_norm(vec, A, lam, *, sqrt=math.sqrt):
    """Euclidean norm of vec A - lam vec."""
    r = vec_mat(vec, A)
    return sqrt(sum((ri - lam * xi) ** 2 for ri, xi in zip(r, vec)))
