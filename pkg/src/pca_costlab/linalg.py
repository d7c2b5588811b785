"""
Dense linear-algebra kernels with exact flop accounting.

Matrices are plain 2-D ``float64`` numpy arrays. Every kernel takes an
optional :class:`~pca_costlab.flops.FlopCounter` and charges it for the
arithmetic it performs; rotations are applied with vectorised row/column
updates but counted element by element.

mean_center
    subtract column means
matmul
    dense product, charged rows*inner*cols multiply-adds
givens
    rotation coefficients zeroing the second entry of a pair
qr_decompose
    thin QR by Givens rotations, non-negative diagonal of R
bidiagonalize
    reduce a square matrix to upper bidiagonal form, R = U1 B V1
bidiag_svd
    implicit-shift (Golub-Kahan) QR iteration on a bidiagonal matrix
sym_eig
    cyclic Jacobi eigensolver for symmetric matrices
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidInputError
from .flops import FlopCounter

DEFAULT_TOL = 1e-12
DEFAULT_MAX_SWEEPS = 100

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class GivensRotation:
    """Plane rotation acting on rows (or columns) ``i`` and ``j``.

    Applied from the left it maps rows ``(x_i, x_j)`` to
    ``(c*x_i + s*x_j, -s*x_i + c*x_j)``.
    """

    i: int
    j: int
    c: float
    s: float

    def __post_init__(self):
        if not self.i < self.j:
            raise InvalidInputError("rotation indices must satisfy i < j")
        if abs(self.c * self.c + self.s * self.s - 1.0) > 1e-12:
            raise InvalidInputError("c**2 + s**2 must equal 1")

    def as_matrix(self, n):
        G = np.eye(n)
        G[self.i, self.i] = G[self.j, self.j] = self.c
        G[self.i, self.j] = self.s
        G[self.j, self.i] = -self.s
        return G

    def apply_left(self, M, counter=None):
        """In-place ``M <- G M``."""
        _rotate(M[self.i], M[self.j], self.c, self.s, counter)
        return M

    def apply_right_transpose(self, M, counter=None):
        """In-place ``M <- M G'``."""
        _rotate(M[:, self.i], M[:, self.j], self.c, self.s, counter)
        return M


@dataclass
class EigenPairs:
    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0


@dataclass
class SvdResult:
    """``U @ diag(sigma) @ V.T`` reproduces the factored matrix."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    iterations: int = 0


def as_matrix(A, name="A"):
    M = np.array(A, dtype=np.float64, copy=True)
    if M.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} contains NaN or Inf")
    return M


def _counter(counter):
    return FlopCounter() if counter is None else counter


def _rotate(x, y, c, s, counter=None):
    # x <- c x + s y ; y <- c y - s x   (in place on views)
    t = c * x + s * y
    y[...] = c * y - s * x
    x[...] = t
    if counter is not None:
        n = x.size
        counter.count(adds=2 * n, muls=4 * n)


def mean_center(A, counter=None):
    """Subtract the column means from every row.

    Returns ``(A_c, mu)``.
    """
    A = as_matrix(A)
    N, D = A.shape
    if N == 0 or D == 0:
        raise InvalidInputError("cannot mean-center an empty matrix")
    counter = _counter(counter)
    mu = A.sum(axis=0) / N
    A_c = A - mu
    counter.count(adds=(N - 1) * D + N * D, divs_sqrts=D)
    return A_c, mu


def matmul(A, B, counter=None):
    """Dense product ``A @ B``; charges ``rows*inner*cols`` multiply-adds."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2:
        raise InvalidInputError("matmul expects 2-D operands")
    m, k = A.shape
    k2, n = B.shape
    if k != k2:
        raise InvalidInputError(f"dimension mismatch: {A.shape} @ {B.shape}")
    _counter(counter).fma(m * k * n)
    return A @ B


def givens(a, b, counter=None):
    """Coefficients ``(c, s, r)`` with ``c*a + s*b = r`` and ``-s*a + c*b = 0``.

    ``b == 0`` yields the identity rotation and ``r = a``.
    """
    if b == 0.0:
        return 1.0, 0.0, a
    # scale first so subnormal inputs keep full precision in c and s
    scale = max(abs(a), abs(b))
    a_s, b_s = a / scale, b / scale
    h = math.hypot(a_s, b_s)
    if counter is not None:
        counter.count(adds=1, muls=3, divs_sqrts=5)
    return a_s / h, b_s / h, scale * h


def qr_decompose(Z, counter=None):
    """Thin QR of a tall matrix by Givens rotations.

    Rotations zero each column bottom-up on adjacent row pairs. ``Q`` is
    ``m x n`` with orthonormal columns, ``R`` is ``n x n`` upper triangular
    with a non-negative diagonal.
    """
    R = as_matrix(Z, "Z")
    m, n = R.shape
    if m < n:
        raise InvalidInputError(f"qr_decompose needs rows >= cols, got {R.shape}")
    counter = _counter(counter)
    rotations = []
    for k in range(n):
        for i in range(m - 1, k, -1):
            b = R[i, k]
            if b == 0.0:
                continue
            c, s, r = givens(R[i - 1, k], b, counter)
            _rotate(R[i - 1, k + 1:], R[i, k + 1:], c, s, counter)
            R[i - 1, k] = r
            R[i, k] = 0.0
            rotations.append((i, c, s))

    # Q = G_1' ... G_s' [I_n; 0], accumulated right to left on the thin block.
    Q = np.eye(m, n)
    for i, c, s in reversed(rotations):
        _rotate(Q[i - 1], Q[i], c, -s, counter)

    R = R[:n]
    for k in range(n):
        if R[k, k] < 0.0:
            R[k, k:] *= -1.0
            Q[:, k] *= -1.0
    return Q, np.triu(R)


def bidiagonalize(R, counter=None):
    """Reduce a square matrix to upper bidiagonal ``B`` with ``R = U1 B V1``.

    Left rotations clear column ``k`` below the diagonal, right rotations
    then clear row ``k`` beyond the superdiagonal.
    """
    B = as_matrix(R, "R")
    n, n2 = B.shape
    if n != n2:
        raise InvalidInputError(f"bidiagonalize needs a square matrix, got {B.shape}")
    counter = _counter(counter)
    U = np.eye(n)
    V = np.eye(n)
    for k in range(n):
        for i in range(n - 1, k, -1):
            b = B[i, k]
            if b == 0.0:
                continue
            c, s, r = givens(B[i - 1, k], b, counter)
            _rotate(B[i - 1, k + 1:], B[i, k + 1:], c, s, counter)
            B[i - 1, k] = r
            B[i, k] = 0.0
            _rotate(U[:, i - 1], U[:, i], c, s, counter)
        for j in range(n - 1, k + 1, -1):
            b = B[k, j]
            if b == 0.0:
                continue
            c, s, r = givens(B[k, j - 1], b, counter)
            _rotate(B[k + 1:, j - 1], B[k + 1:, j], c, s, counter)
            B[k, j - 1] = r
            B[k, j] = 0.0
            _rotate(V[:, j - 1], V[:, j], c, s, counter)
    return U, B, V.T


def _check_bidiagonal(B):
    n = B.shape[0]
    if B.shape != (n, n):
        raise InvalidInputError(f"bidiagonal matrix must be square, got {B.shape}")
    off = B.copy()
    idx = np.arange(n)
    off[idx, idx] = 0.0
    off[idx[:-1], idx[1:]] = 0.0
    scale = np.abs(B).max() if B.size else 0.0
    if np.abs(off).max(initial=0.0) > 1e-12 * scale:
        raise InvalidInputError("matrix is not upper bidiagonal")


def _wilkinson_shift(d, e, p, q):
    # Eigenvalue of the trailing 2x2 of B'B (block p..q) closest to its last entry.
    a = d[q - 1] ** 2 + (e[q - 2] ** 2 if q - 1 > p else 0.0)
    c = d[q] ** 2 + e[q - 1] ** 2
    b = d[q - 1] * e[q - 1]
    delta = 0.5 * (a - c)
    if delta == 0.0:
        return c - abs(b)
    return c - b * b / (delta + math.copysign(math.hypot(delta, b), delta))


def bidiag_svd(B, tol=DEFAULT_TOL, max_sweeps=DEFAULT_MAX_SWEEPS, counter=None):
    """SVD of an upper bidiagonal matrix by implicit-shift QR iteration.

    A superdiagonal entry is deflated once it drops below
    ``tol * (|d_i| + |d_{i+1}|)``. Zero diagonal entries are chased out
    with rotations before shifted steps resume. ``max_sweeps`` bounds the
    number of shifted steps per singular value.
    """
    B = as_matrix(B, "B")
    _check_bidiagonal(B)
    n = B.shape[0]
    counter = _counter(counter)
    d = np.diag(B).copy()
    e = np.diag(B, 1).copy()
    U = np.eye(n)
    V = np.eye(n)
    scale = max(np.abs(d).max(initial=0.0), np.abs(e).max(initial=0.0))
    floor = _EPS * scale
    budget = max_sweeps * max(n, 1)
    steps = 0

    while True:
        for i in range(n - 1):
            if e[i] != 0.0 and (abs(e[i]) <= tol * (abs(d[i]) + abs(d[i + 1]))
                                or abs(e[i]) <= floor):
                e[i] = 0.0
        q = n - 1
        while q > 0 and e[q - 1] == 0.0:
            q -= 1
        if q == 0:
            break
        p = q - 1
        while p > 0 and e[p - 1] != 0.0:
            p -= 1
        if steps >= budget:
            raise ConvergenceError(
                f"bidiag_svd did not converge in {steps} steps",
                float(np.linalg.norm(e)))
        steps += 1

        for i in range(p, q + 1):
            if abs(d[i]) <= floor:
                d[i] = 0.0
        zero = [i for i in range(p, q) if d[i] == 0.0]
        if zero:
            # Clear row i: push e[i] right along the row with left rotations.
            i = zero[0]
            f = e[i]
            e[i] = 0.0
            for k in range(i + 1, q + 1):
                c, s, r = givens(d[k], f, counter)
                d[k] = r
                _rotate(U[:, k], U[:, i], c, s, counter)
                if k < q:
                    f = -s * e[k]
                    e[k] = c * e[k]
                    counter.count(muls=2)
            continue
        if d[q] == 0.0:
            # Clear column q: push e[q-1] up the column with right rotations.
            f = e[q - 1]
            e[q - 1] = 0.0
            for k in range(q - 1, p - 1, -1):
                c, s, r = givens(d[k], f, counter)
                d[k] = r
                _rotate(V[:, k], V[:, q], c, s, counter)
                if k > p:
                    f = -s * e[k - 1]
                    e[k - 1] = c * e[k - 1]
                    counter.count(muls=2)
            continue

        mu = _wilkinson_shift(d, e, p, q)
        counter.count(adds=6, muls=7, divs_sqrts=3)
        y = d[p] * d[p] - mu
        z = d[p] * e[p]
        for k in range(p, q):
            c, s, r = givens(y, z, counter)
            if k > p:
                e[k - 1] = r
            dk, ek, dk1 = d[k], e[k], d[k + 1]
            d[k] = c * dk + s * ek
            e[k] = c * ek - s * dk
            bulge = s * dk1
            d[k + 1] = c * dk1
            _rotate(V[:, k], V[:, k + 1], c, s, counter)

            c, s, r = givens(d[k], bulge, counter)
            d[k] = r
            ek, dk1 = e[k], d[k + 1]
            e[k] = c * ek + s * dk1
            d[k + 1] = c * dk1 - s * ek
            if k + 1 < q:
                bulge = s * e[k + 1]
                e[k + 1] = c * e[k + 1]
            _rotate(U[:, k], U[:, k + 1], c, s, counter)
            counter.count(adds=4, muls=12)
            y, z = e[k], bulge

    neg = d < 0.0
    d[neg] = -d[neg]
    V[:, neg] *= -1.0
    order = np.argsort(-d, kind="stable")
    return SvdResult(U[:, order], d[order], V[:, order], steps)


def sym_eig(S, tol=DEFAULT_TOL, max_sweeps=DEFAULT_MAX_SWEEPS, counter=None):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Sweeps continue until the off-diagonal Frobenius norm falls below
    ``tol * ||S||_F``. Eigenvalues come back in descending order with the
    eigenvectors as matching columns.
    """
    A = as_matrix(S, "S")
    n, n2 = A.shape
    if n != n2:
        raise InvalidInputError(f"sym_eig needs a square matrix, got {A.shape}")
    counter = _counter(counter)
    norm = float(np.linalg.norm(A))
    if np.linalg.norm(A - A.T) > 1e-9 * norm:
        raise InvalidInputError("sym_eig input is not symmetric")
    A = 0.5 * (A + A.T)
    counter.count(adds=n * n, muls=n * n)
    V = np.eye(n)
    # Rotations below this size cannot keep the off-norm above tol*||S||.
    skip = 0.1 * tol * norm / max(n, 1)
    sweeps = 0
    while True:
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        counter.count(adds=n * n, muls=n * n, divs_sqrts=1)
        if off <= tol * norm:
            break
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"sym_eig did not converge in {sweeps} sweeps", off)
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= skip:
                    continue
                app, aqq = A[p, p], A[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                _rotate(A[:, p], A[:, q], c, -s, counter)
                _rotate(A[p], A[q], c, -s, counter)
                A[p, q] = A[q, p] = 0.0
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                _rotate(V[:, p], V[:, q], c, -s, counter)
                counter.count(adds=6, muls=6, divs_sqrts=5)
    values = np.diag(A).copy()
    order = np.argsort(-values, kind="stable")
    return EigenPairs(values[order], V[:, order], sweeps)
