"""Function-valued matrices over a shared inner product.

A function-valued matrix stores one coefficient vector of length ``h`` per
entry, as an ``(m, n, h)`` array.  Scalar matrices act on it from the left
and right, the adjoint contracts against the Hilbert-space inner product,
and a pivoted Gram-Schmidt process provides QR, SVD, numerical column-rank,
the applied pseudoinverse, and cross approximation.
"""

from dataclasses import dataclass

import numpy as np

from .hilbert import InnerProduct

DEFAULT_TOL = 1e-12


class BMatrix:
    """Matrix with entries in H, stored as an ``(m, n, h)`` float array.

    The data array is treated as immutable; operations return new
    instances and never write into their inputs.
    """

    __slots__ = ("data", "ip")

    def __init__(self, data, ip):
        data = np.asarray(data, dtype=float)
        if data.ndim != 3:
            raise ValueError("BMatrix data must have shape (m, n, h)")
        if data.shape[2] != ip.h:
            raise ValueError(
                f"entry length {data.shape[2]} does not match ip.h={ip.h}"
            )
        self.data = data
        self.ip = ip

    @property
    def m(self):
        return self.data.shape[0]

    @property
    def n(self):
        return self.data.shape[1]

    @property
    def h(self):
        return self.data.shape[2]

    @property
    def shape(self):
        return self.data.shape[:2]

    def entry(self, i, j):
        return self.data[i, j]

    @classmethod
    def zeros(cls, m, n, ip):
        return cls(np.zeros((m, n, ip.h)), ip)

    def __repr__(self):
        return f"BMatrix({self.m}x{self.n} over R^{self.h}, {self.ip.kind})"


@dataclass
class QRFactors:
    """Pivoted thin QR of a function-valued matrix.

    ``Q`` has ``rank`` H-orthonormal columns, ``R`` is ``rank x n`` in
    pivoted column order (upper-trapezoidal on the accepted columns), and
    ``perm`` lists original column indices in pivot order, accepted
    columns first.
    """

    Q: BMatrix
    R: np.ndarray
    perm: np.ndarray
    rank: int


@dataclass
class SVDFactors:
    """SVD ``A = U diag(sigma) V^T`` with function-valued ``U``.

    ``U`` is ``m x r`` with H-orthonormal columns, ``sigma`` is positive
    nonincreasing, and ``V`` is a real ``n x r`` matrix with orthonormal
    columns.
    """

    U: BMatrix
    sigma: np.ndarray
    V: np.ndarray


def l2h_norm(A):
    """Frobenius-type norm: root of the summed squared entry H-norms."""
    return float(np.sqrt(np.sum(A.ip.pair(A.data, A.data).clip(min=0.0))))


def column_norms(A):
    """H-norms of the columns of ``A`` as a length-``n`` vector."""
    return np.sqrt(np.sum(A.ip.pair(A.data, A.data), axis=0).clip(min=0.0))


def transpose(A):
    return BMatrix(np.swapaxes(A.data, 0, 1), A.ip)


def left_mul(B, A):
    """Product of a scalar ``(k, m)`` matrix with a function-valued one."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[1] != A.m:
        raise ValueError(f"cannot multiply {B.shape} with {A.m}x{A.n}")
    return BMatrix(np.einsum("ik,kjh->ijh", B, A.data), A.ip)


def right_mul(A, C):
    """Product of a function-valued matrix with a scalar ``(n, l)`` one."""
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != A.n:
        raise ValueError(f"cannot multiply {A.m}x{A.n} with {C.shape}")
    return BMatrix(np.einsum("ikh,kl->ilh", A.data, C), A.ip)


def adjoint_apply(A, B):
    """Columnwise adjoint product ``A* B`` as a real ``(n, k)`` matrix.

    Entry ``(j, l)`` sums the H-inner products of column ``l`` of ``B``
    against column ``j`` of ``A``.
    """
    if A.ip != B.ip:
        raise ValueError("operands use different inner products")
    if A.m != B.m:
        raise ValueError(f"row mismatch: {A.m} vs {B.m}")
    return np.einsum("ijh,ilh->jl", A.data, A.ip.apply(B.data))


def mgs_qr(A, tol_rel=DEFAULT_TOL):
    """Column-pivoted modified Gram-Schmidt QR with rank detection.

    At every step the remaining column of largest residual H-norm is
    selected (ties go to the smallest index) and orthogonalized; one
    reorthogonalization pass is run when the residual norm has dropped
    below 1/sqrt(2) of the column's original norm.  The process stops
    once the largest remaining residual norm falls to ``tol_rel`` times
    the largest original column norm.

    Accepted columns are swapped to the front of the workspace, so the
    active block stays a contiguous slice; a Gram-applied copy of the
    workspace is maintained alongside to keep every inner product a
    single contraction.
    """
    ip = A.ip
    m, n, h = A.data.shape
    work = A.data.astype(float, copy=True)
    gwork = work if ip.kind == "identity" else ip.apply(work)
    cols = np.arange(n)
    orig = column_norms(A)
    max_orig = float(orig.max()) if n else 0.0
    cap = min(n, m * h)

    Rfull = np.zeros((cap, n))
    n_active = n  # columns in [t, n_active) are candidates; beyond, dropped
    t = 0
    drop = 1.0 / np.sqrt(2.0)

    def _swap(a, b):
        if a == b:
            return
        work[:, [a, b]] = work[:, [b, a]]
        if gwork is not work:
            gwork[:, [a, b]] = gwork[:, [b, a]]
        cols[[a, b]] = cols[[b, a]]

    if max_orig > 0.0:
        threshold = tol_rel * max_orig
        while t < cap and t < n_active:
            sq = np.einsum("mjh,mjh->j", work[:, t:n_active],
                           gwork[:, t:n_active])
            ties = np.flatnonzero(sq == sq.max())
            p_rel = int(ties[np.argmin(cols[t:n_active][ties])])
            vnorm = np.sqrt(max(float(sq[p_rel]), 0.0))
            if vnorm <= threshold:
                break
            _swap(t, t + p_rel)
            v = work[:, t]
            if vnorm < drop * orig[cols[t]]:
                for i in range(t):
                    c = float(np.sum(gwork[:, i] * v))
                    v -= c * work[:, i]
                    Rfull[i, cols[t]] += c
                if gwork is not work:
                    gwork[:, t] = ip.apply(v)
                vnorm = float(np.sqrt(max(np.sum(gwork[:, t] * v), 0.0)))
                if vnorm <= threshold:
                    # dependent after reorthogonalization: keep the reduced
                    # residual for reconstruction, never pivot on it again
                    n_active -= 1
                    _swap(t, n_active)
                    continue
            work[:, t] /= vnorm
            if gwork is not work:
                gwork[:, t] /= vnorm
            Rfull[t, cols[t]] = vnorm
            if t + 1 < n:
                coef = np.einsum("mh,mjh->j", gwork[:, t], work[:, t + 1:])
                Rfull[t, cols[t + 1:]] = coef
                work[:, t + 1:] -= work[:, t][:, None, :] * coef[None, :, None]
                if gwork is not work:
                    gwork[:, t + 1:] -= (gwork[:, t][:, None, :]
                                         * coef[None, :, None])
            t += 1

    r = t
    rejected = sorted(cols[r:].tolist())
    perm = np.array(cols[:r].tolist() + rejected, dtype=int)
    Q = BMatrix(work[:, :r].copy() if r else np.zeros((m, 0, h)), ip)
    R = Rfull[:r][:, perm] if n else np.zeros((0, 0))
    return QRFactors(Q=Q, R=R, perm=perm, rank=r)


def _truncated_scalar_svd(R, tol_rel):
    Uh, s, Vh = np.linalg.svd(R, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        return Uh[:, :0], s[:0], Vh[:0]
    keep = s > tol_rel * s[0]
    k = int(np.count_nonzero(keep))
    return Uh[:, :k], s[:k], Vh[:k]


def svd(A, tol_rel=DEFAULT_TOL):
    """SVD of a function-valued matrix via pivoted QR.

    The scalar triangular factor of :func:`mgs_qr` is decomposed with an
    ordinary SVD and the function-valued orthonormal factor is rotated
    accordingly.  Singular values at or below ``tol_rel`` times the
    largest one are discarded.  A zero matrix yields empty factors.
    """
    m, n, h = A.data.shape
    qr = mgs_qr(A, tol_rel)
    if qr.rank == 0:
        return SVDFactors(
            U=BMatrix(np.zeros((m, 0, h)), A.ip),
            sigma=np.zeros(0),
            V=np.zeros((n, 0)),
        )
    Uh, s, Vh = _truncated_scalar_svd(qr.R, tol_rel)
    U = BMatrix(np.einsum("mrh,rt->mth", qr.Q.data, Uh), A.ip)
    V = np.zeros((n, s.size))
    V[qr.perm] = Vh.T
    return SVDFactors(U=U, sigma=s, V=V)


def pinv_apply(A, B, tol_rel=DEFAULT_TOL):
    """Apply the pseudoinverse of ``A`` to the columns of ``B``.

    Returns the real ``(n, k)`` matrix ``V diag(sigma)^-1 (U* B)``.  The
    adjoint product ``U* B`` is evaluated through the Gram-Schmidt
    recurrences: each column of ``B`` is reduced against the pivoted
    orthonormal columns in turn, which is the numerically stable way of
    applying the adjoint of an MGS-computed factor.  A zero ``A`` maps
    everything to zero.
    """
    if A.ip != B.ip:
        raise ValueError("operands use different inner products")
    if A.m != B.m:
        raise ValueError(f"row mismatch: {A.m} vs {B.m}")
    ip = A.ip
    n, k = A.n, B.n
    qr = mgs_qr(A, tol_rel)
    if qr.rank == 0:
        return np.zeros((n, k))
    Uh, s, Vh = _truncated_scalar_svd(qr.R, tol_rel)
    if s.size == 0:
        return np.zeros((n, k))

    W = B.data.astype(float, copy=True)
    C = np.empty((qr.rank, k))
    for i in range(qr.rank):
        q = qr.Q.data[:, i]
        c = np.einsum("mh,mkh->k", ip.apply(q), W)
        C[i] = c
        W -= q[:, None, :] * c[None, :, None]

    coeff = (Uh.T @ C) / s[:, None]
    out = np.zeros((n, k))
    out[qr.perm] = Vh.T @ coeff
    return out


def column_rank(A, tol_rel=DEFAULT_TOL):
    """Numerical column-rank: the number of accepted MGS pivots."""
    return mgs_qr(A, tol_rel).rank


def _canonical_index_set(I, size, what):
    idx = sorted(set(int(i) for i in I))
    if not idx:
        raise ValueError(f"empty {what} index set")
    if idx[0] < 0 or idx[-1] >= size:
        raise ValueError(f"{what} index set out of range for size {size}")
    return idx


def cross_matrix(A, I, J, tol_rel=DEFAULT_TOL):
    """Cross approximation of ``A`` at row set ``I`` and column set ``J``.

    Returns ``(F, core, Pt)`` with ``core = A(I, J)``, the right factor
    ``Pt`` solving against the row slab ``A(I, :)`` and the left factor
    ``F`` solving against the transposed column slab; transposition and
    pseudoinversion do not commute for function-valued matrices, so the
    left factor goes through the transposed core.  The assembled product
    ``F core Pt`` reproduces ``A`` on ``I x J``; the sampled rows and
    columns of the factors are pinned to exact unit vectors, which is an
    identity in exact arithmetic and keeps the interpolation property
    exact in floating point.
    """
    I = _canonical_index_set(I, A.m, "row")
    J = _canonical_index_set(J, A.n, "column")
    core = BMatrix(A.data[np.ix_(I, J)], A.ip)
    row_slab = BMatrix(A.data[I], A.ip)
    col_slab = BMatrix(A.data[:, J], A.ip)

    Pt = pinv_apply(core, row_slab, tol_rel)
    F = pinv_apply(transpose(core), transpose(col_slab), tol_rel).T
    F[I] = np.eye(len(I))
    Pt[:, J] = np.eye(len(J))
    return F, core, Pt


def assemble_cross(F, core, Pt):
    """Materialize the cross approximant ``F core Pt`` as a BMatrix."""
    return right_mul(left_mul(F, core), Pt)
