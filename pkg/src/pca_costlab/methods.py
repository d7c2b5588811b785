"""The four principal-component methods.

Each method takes an ``N x D`` data matrix, centers it, and returns a
:class:`PCAResult` whose ``components`` are ``D x d`` with one component per
column. ``values`` are always on the scale of eigenvalues of the unnormalised
Gram matrix ``A_c' A_c`` (squared singular values of ``A_c``), so results from
different methods compare directly.

All methods accept an optional ``FlopCounter``. They tag their arithmetic with
phase names; :mod:`pca_costlab.costsim` reads those tags to build its ledger.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NumericalDegeneracyError
from .flops import FlopCounter
from .linalg import (DEFAULT_MAX_SWEEPS, DEFAULT_TOL, as_matrix, bidiag_svd,
                     bidiagonalize, matmul, mean_center, qr_decompose, sym_eig)


class MethodTag(enum.Enum):
    COV_EIG = "coveig"
    SVD_BIDIAG = "svd"
    SSVD = "ssvd"
    PPCA = "ppca"


class PpcaMode(enum.Enum):
    STANDARD = "standard"
    RECOMPUTE = "recompute"


@dataclass
class PCAResult:
    components: np.ndarray
    values: np.ndarray
    mean: np.ndarray
    iterations_used: int
    method: MethodTag
    converged: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def d(self):
        return self.components.shape[1]


@dataclass(frozen=True)
class SsvdParams:
    d: int
    p: int = 5
    j: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.d < 1 or self.p < 0 or self.j < 0:
            raise InvalidInputError(f"invalid SSVD parameters: {self}")

    @property
    def l(self):  # noqa: E743
        return self.d + self.p


@dataclass(frozen=True)
class PpcaParams:
    d: int
    max_iter: int = 100
    tol: float = 1e-6
    mode: PpcaMode = PpcaMode.STANDARD
    seed: int = 0

    def __post_init__(self):
        if self.d < 1 or self.max_iter < 1 or not self.tol > 0:
            raise InvalidInputError(f"invalid PPCA parameters: {self}")
        if not isinstance(self.mode, PpcaMode):
            object.__setattr__(self, "mode", PpcaMode(self.mode))


def _counter(counter):
    return FlopCounter() if counter is None else counter


def fix_signs(V):
    """Flip each column so that its largest-magnitude entry is positive."""
    V = np.array(V, dtype=np.float64, copy=True)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.where(V[idx, np.arange(V.shape[1])] < 0.0, -1.0, 1.0)
    return V * signs


def _check_d(d, limit, what):
    if not 1 <= d <= limit:
        raise InvalidInputError(f"target dimension d={d} outside [1, {limit}] ({what})")


def pca_cov_eig(A, d, tol=DEFAULT_TOL, max_sweeps=DEFAULT_MAX_SWEEPS, counter=None):
    """PCA from the eigen-decomposition of the Gram matrix ``A_c' A_c``."""
    A = as_matrix(A)
    N, D = A.shape
    _check_d(d, min(N, D), "min(N, D)")
    counter = _counter(counter)
    with counter.phase("column_sums"):
        A_c, mu = mean_center(A, counter)
    with counter.phase("partial_gram"):
        gram = matmul(A_c.T, A_c, counter)
    with counter.phase("eigensolve"):
        eig = sym_eig(gram, tol, max_sweeps, counter)
    return PCAResult(
        components=fix_signs(eig.vectors[:, :d]),
        values=np.maximum(eig.values[:d], 0.0),
        mean=mu,
        iterations_used=eig.sweeps,
        method=MethodTag.COV_EIG,
    )


def pca_svd_bidiag(A, d, tol=DEFAULT_TOL, max_sweeps=DEFAULT_MAX_SWEEPS, counter=None):
    """PCA through QR, Givens bidiagonalisation and bidiagonal QR iteration.

    ``A_c = Q R``, ``R = U1 B V1`` and ``B = U2 S V2'`` give right singular
    vectors ``V = V1' V2`` and left vectors ``U = Q U1 U2``. Requires N >= D.
    """
    A = as_matrix(A)
    N, D = A.shape
    if N < D:
        raise InvalidInputError(f"pca_svd_bidiag needs N >= D, got {A.shape}")
    _check_d(d, D, "D")
    counter = _counter(counter)
    with counter.phase("column_sums"):
        A_c, mu = mean_center(A, counter)
    with counter.phase("qr"):
        Q, R = qr_decompose(A_c, counter)
    with counter.phase("bidiagonalize"):
        U1, B, V1 = bidiagonalize(R, counter)
    with counter.phase("bidiag_svd"):
        svd = bidiag_svd(B, tol, max_sweeps, counter)
    with counter.phase("assemble"):
        V_raw = matmul(V1.T, svd.V[:, :d], counter)
        U = matmul(Q, matmul(U1, svd.U[:, :d], counter), counter)
    V = fix_signs(V_raw)
    # Keep U consistent with the sign-fixed V.
    signs = np.where(np.sum(V * V_raw, axis=0) < 0.0, -1.0, 1.0)
    return PCAResult(
        components=V,
        values=svd.sigma[:d] ** 2,
        mean=mu,
        iterations_used=svd.iterations,
        method=MethodTag.SVD_BIDIAG,
        diagnostics={"singular_values": svd.sigma.copy(), "left_vectors": U * signs},
    )


def ssvd(A, params, tol=DEFAULT_TOL, max_sweeps=DEFAULT_MAX_SWEEPS, counter=None):
    """Randomised (stochastic) SVD with Gaussian sampling and power iterations.

    Stage one builds an orthonormal basis ``Q`` for the range of
    ``(A_c A_c')^j A_c Omega``, re-orthonormalising between rounds. Stage two
    solves the small ``l x l`` eigenproblem of ``B B'`` with ``B = Q' A_c`` and
    recovers ``V = B' U~ S^-1``.
    """
    A = as_matrix(A)
    N, D = A.shape
    l = params.l  # noqa: E741
    if l > min(N, D):
        raise InvalidInputError(f"d + p = {l} exceeds min(N, D) = {min(N, D)}")
    counter = _counter(counter)
    rng = np.random.default_rng(params.seed)
    omega = rng.standard_normal((D, l))

    with counter.phase("column_sums"):
        A_c, mu = mean_center(A, counter)
    with counter.phase("sample"):
        Z = matmul(A_c, omega, counter)
    for t in range(params.j):
        with counter.phase(f"power_{t + 1}"):
            Q, _ = qr_decompose(Z, counter)
            Z = matmul(A_c, matmul(A_c.T, Q, counter), counter)
    with counter.phase("qr"):
        Q, _ = qr_decompose(Z, counter)
    with counter.phase("project"):
        B = matmul(Q.T, A_c, counter)
    with counter.phase("small_eig"):
        eig = sym_eig(matmul(B, B.T, counter), tol, max_sweeps, counter)
        lam = np.maximum(eig.values, 0.0)
        sigma = np.sqrt(lam)
        counter.count(divs_sqrts=l)
        keep = sigma > 1e-12 * sigma[0] if sigma[0] > 0.0 else np.zeros(l, dtype=bool)
        V = matmul(B.T, eig.vectors, counter)
        V[:, keep] /= sigma[keep]
        V[:, ~keep] = 0.0
        counter.count(divs_sqrts=D * int(keep.sum()))
        U = matmul(Q, eig.vectors[:, :params.d], counter)

    d = params.d
    rank = int(keep[:d].sum())
    values = np.where(keep[:d], lam[:d], 0.0)
    V = fix_signs(V[:, :d])
    return PCAResult(
        components=V,
        values=values,
        mean=mu,
        iterations_used=params.j,
        method=MethodTag.SSVD,
        diagnostics={
            "rank_deficient": rank < d,
            "numerical_rank": rank,
            "oversampled_values": lam.copy(),
            "left_vectors": U,
        },
    )


def reconstruction_error_1norm(Y_c, X, C, counter=None):
    """Entrywise 1-norm of ``Y_c - X C'``."""
    Y_c = np.asarray(Y_c, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    if Y_c.ndim != 2 or X.ndim != 2 or C.ndim != 2:
        raise InvalidInputError("reconstruction_error_1norm expects 2-D arrays")
    N, D = Y_c.shape
    if X.shape[0] != N or C.shape[0] != D or X.shape[1] != C.shape[1]:
        raise InvalidInputError(
            f"shape mismatch: Y_c {Y_c.shape}, X {X.shape}, C {C.shape}")
    counter = _counter(counter)
    resid = Y_c - matmul(X, C.T, counter)
    counter.count(adds=2 * N * D)
    return float(np.abs(resid).sum())


def _projection_error(Y, C, counter):
    # X = Y C (C'C)^-1 : least-squares latent coordinates for the current C.
    d = C.shape[1]
    gram = matmul(C.T, C, counter)
    counter.count(adds=d ** 3, muls=d ** 3, divs_sqrts=d * d)
    X = matmul(Y, matmul(C, np.linalg.inv(gram), counter), counter)
    return reconstruction_error_1norm(Y, X, C, counter)


def ppca_em(A, params, counter=None):
    """Probabilistic PCA fitted by expectation maximisation.

    E-step, with ``M = C'C + s2 I``::

        <x_n>     = M^-1 C' y_n
        <x_n x_n'> = s2 M^-1 + <x_n><x_n>'

    M-step::

        C  <- [sum y_n <x_n>'] [sum <x_n x_n'>]^-1
        s2 <- (1/ND) sum ||y_n - C <x_n>||^2 + (s2/D) tr(M^-1 C'C)

    The s2 update is the usual expected squared residual, rearranged so that
    it cannot go negative through cancellation.

    Convergence is tested on the 1-norm of ``Y_c - X C'`` with ``X`` the
    least-squares projection onto the current ``C``; iteration stops when the
    error changes by less than ``tol`` times ``||Y_c||_1``. The test watches
    the subspace only, so the reported ``sigma2`` can still be some way from
    its own fixed point when the loop stops.

    ``params.mode`` does not change any arithmetic; it only tells the cost
    simulator what the workers would ship.
    """
    A = as_matrix(A)
    N, D = A.shape
    d = params.d
    if not d < D:
        raise InvalidInputError(f"ppca_em needs d < D, got d={d}, D={D}")
    if not N > d:
        raise InvalidInputError(f"ppca_em needs N > d, got N={N}, d={d}")
    counter = _counter(counter)
    rng = np.random.default_rng(params.seed)
    C = rng.standard_normal((D, d))
    s2 = 1.0
    eye = np.eye(d)

    with counter.phase("column_sums"):
        Y, mu = mean_center(A, counter)
    data_l1 = float(np.abs(Y).sum())

    errors = []
    variances = [s2]
    converged = False
    iterations = 0
    for t in range(1, params.max_iter + 1):
        with counter.phase(f"em_{t}"):
            if t == 1:
                errors.append(_projection_error(Y, C, counter))
            # E-step
            M = matmul(C.T, C, counter) + s2 * eye
            M_inv = np.linalg.inv(M)
            counter.count(adds=d ** 3 + d, muls=d ** 3, divs_sqrts=d * d)
            X = matmul(Y, matmul(C, M_inv, counter), counter)
            Sxx = N * s2 * M_inv + matmul(X.T, X, counter)
            counter.count(adds=d * d, muls=2 * d * d)
            # M-step
            YX = matmul(Y.T, X, counter)
            counter.count(adds=d ** 3, muls=d ** 3, divs_sqrts=d * d)
            C_new = matmul(YX, np.linalg.inv(Sxx), counter)
            resid = Y - matmul(X, C_new.T, counter)
            trace_term = float(np.sum(M_inv * matmul(C_new.T, C_new, counter)))
            s2 = (float(np.sum(resid * resid)) + N * s2 * trace_term) / (N * D)
            counter.count(adds=2 * N * D + d * d + 1, muls=N * D + d * d + 2, divs_sqrts=1)
            C = C_new
            if not s2 > 1e-300:
                raise NumericalDegeneracyError(
                    f"noise variance collapsed to {s2!r} at iteration {t}")
            variances.append(s2)
            errors.append(_projection_error(Y, C, counter))
        iterations = t
        if abs(errors[-2] - errors[-1]) <= params.tol * data_l1:
            converged = True
            break

    with counter.phase("orthonormalize"):
        Qc, _ = qr_decompose(C, counter)
        P = matmul(Y, Qc, counter)
        eig = sym_eig(matmul(P.T, P, counter), counter=counter)
        comps = matmul(Qc, eig.vectors, counter)

    return PCAResult(
        components=fix_signs(comps),
        values=np.maximum(eig.values, 0.0),
        mean=mu,
        iterations_used=iterations,
        method=MethodTag.PPCA,
        converged=converged,
        diagnostics={
            "mode": params.mode.value,
            "error_history": errors,
            "sigma2_history": variances,
            "sigma2": s2,
            "loadings": C,
        },
    )
