"""From flattening kernel to structured polynomial system.

The kernel of the mode-1 flattening yields bilinear forms f_j(x, y) =
x^T F_j y.  Shifting these forms by monomials gives a sparse structured
matrix whose left nullspace carries the normal-form data.  Both a dense
SVD and an iterative Gram-matrix eigensolver path are provided for the
nullspace.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse
import scipy.sparse.linalg

from .bigraded import Bidegree, hilbert_dim, monomial_basis
from .config import DEFAULT_TOLERANCES
from .errors import CorankMismatch, FlatteningRankMismatch

_E = {}


def _unit(dim, k):
    key = (dim, k)
    if key not in _E:
        v = [0] * dim
        v[k] = 1
        _E[key] = tuple(v)
    return _E[key]


def _add(a, inc):
    return tuple(x + y for x, y in zip(a, inc))


@dataclass
class BilinearSystem:
    """s bilinear forms on P^m x P^n given by (m+1) x (n+1) coefficient
    matrices; f_j(x, y) = x^T F_j y."""

    coeffs: np.ndarray  # shape (s, m+1, n+1)

    def __post_init__(self):
        self.coeffs = np.atleast_3d(np.asarray(self.coeffs))

    @property
    def s(self):
        return self.coeffs.shape[0]

    @property
    def m(self):
        return self.coeffs.shape[1] - 1

    @property
    def n(self):
        return self.coeffs.shape[2] - 1

    def transposed(self):
        """The same system with the roles of the two factors swapped."""
        return BilinearSystem(np.ascontiguousarray(self.coeffs.transpose(0, 2, 1)))


def kernel_flattening(M, r, dims, tol=DEFAULT_TOLERANCES):
    """Orthonormal basis of the flattening kernel as a bilinear system.

    ``dims = (m+1, n+1)`` fixes how the (m+1)(n+1) columns split into the
    two factor modes.  Takes the s = (m+1)(n+1) - r right singular vectors
    attached to the smallest singular values.  The spectrum must be
    compatible with the supplied rank: sigma_r clearly nonzero and well
    separated from sigma_{r+1}.
    """
    M = np.asarray(M)
    m1, n1 = (int(x) for x in dims)
    ell1, cols = M.shape
    if cols != m1 * n1:
        raise ValueError(f"flattening has {cols} columns, dims give {m1 * n1}")
    if r > min(ell1, cols):
        raise FlatteningRankMismatch(f"rank {r} impossible for a {ell1} x {cols} flattening")
    _, sv, vh = np.linalg.svd(M, full_matrices=True)
    if sv[0] == 0:
        raise FlatteningRankMismatch("zero flattening")
    if sv[r - 1] / sv[0] < tol.rank_rel:
        raise FlatteningRankMismatch(
            f"sigma_{r}/sigma_1 = {sv[r - 1] / sv[0]:.2e} below {tol.rank_rel:.0e}: "
            "flattening rank appears smaller than the requested rank"
        )
    if r < len(sv):
        if sv[r] > 0 and sv[r - 1] / sv[r] < tol.kernel_sep:
            raise FlatteningRankMismatch(
                f"sigma_{r}/sigma_{r + 1} = {sv[r - 1] / sv[r]:.2e}: no clear rank gap"
            )
        if sv[r] / sv[0] > tol.gap_rel:
            warnings.warn(
                f"trailing singular value ratio {sv[r] / sv[0]:.2e} exceeds "
                f"{tol.gap_rel:.0e}; input is not exactly rank {r}",
                stacklevel=2,
            )
    s = cols - r
    if s == 0:
        return BilinearSystem(np.empty((0, m1, n1), dtype=M.dtype))
    # right singular vectors for the smallest singular values
    kernel = vh[r:, :].conj()
    return BilinearSystem(kernel.reshape(s, m1, n1))


def evaluate(system, beta, gamma):
    """Residual vector (f_1(beta, gamma), ..., f_s(beta, gamma))."""
    beta = np.asarray(beta)
    gamma = np.asarray(gamma)
    return np.einsum("jkl,k,l->j", system.coeffs, beta, gamma)


def jacobian(system, beta, gamma):
    """s x (m+n+2) Jacobian; derivatives w.r.t. beta first, then gamma."""
    beta = np.asarray(beta)
    gamma = np.asarray(gamma)
    dbeta = np.einsum("jkl,l->jk", system.coeffs, gamma)
    dgamma = np.einsum("jkl,k->jl", system.coeffs, beta)
    return np.concatenate([dbeta, dgamma], axis=1)


@dataclass
class ResultantMatrix:
    """Sparse matrix of all monomial shifts of the system's forms at a
    bidegree.

    Rows are indexed by the monomial basis of the (d, e) piece; columns by
    (form j, shift monomial) with the form index major.  Each column is a
    copy of vec(F_j) placed at the shifted row positions.
    """

    degree: Bidegree
    m: int
    n: int
    s: int
    matrix: scipy.sparse.csc_matrix

    @property
    def shape(self):
        return self.matrix.shape

    def toarray(self):
        return self.matrix.toarray()


def shift_row_indices(m, n, degree):
    """For each shift monomial of degree (d-1, e-1), the row positions in
    the (d, e) basis of that shift times each x_k y_l."""
    d, e = degree
    row_basis = monomial_basis(m, n, (d, e))
    shift_basis = monomial_basis(m, n, (d - 1, e - 1))
    out = []
    for a1, b1 in shift_basis.exponents:
        rows = np.empty((m + 1) * (n + 1), dtype=np.int64)
        pos = 0
        for k in range(m + 1):
            ak = _add(a1, _unit(m + 1, k))
            for l in range(n + 1):
                rows[pos] = row_basis.index_of(ak, _add(b1, _unit(n + 1, l)))
                pos += 1
        out.append(rows)
    return out


def build_resultant(system, degree):
    """Assemble the shift matrix column by column, without polynomial
    multiplication: each column copies the coefficients of one form into
    the rows of the shifted monomials."""
    d, e = degree
    if (d, e) < (1, 1):
        raise ValueError("degree must be at least (1, 1)")
    m, n, s = system.m, system.n, system.s
    if s == 0:
        raise ValueError("empty system")
    rows_per_shift = shift_row_indices(m, n, (d, e))
    nshift = len(rows_per_shift)
    block = (m + 1) * (n + 1)
    nrows = hilbert_dim(m, n, d, e)

    row_idx = np.tile(np.concatenate(rows_per_shift), s)
    col_idx = np.repeat(np.arange(s * nshift), block)
    vals = np.concatenate([
        np.tile(system.coeffs[j].reshape(-1), nshift) for j in range(s)
    ])
    mat = scipy.sparse.coo_matrix(
        (vals, (row_idx, col_idx)), shape=(nrows, s * nshift)
    ).tocsc()
    return ResultantMatrix(Bidegree(d, e), m, n, s, mat)


def dump_matrixmarket(res, path):
    """Debug dump in MatrixMarket coordinate format."""
    scipy.io.mmwrite(path, res.matrix.tocoo())


def left_nullspace(res, r, method="auto", tol=DEFAULT_TOLERANCES):
    """Orthonormal rows spanning the left nullspace of the shift matrix.

    ``svd`` runs a full dense SVD and keeps the last r left singular
    vectors.  ``eigs`` forms the Gram matrix R R^H and extracts the r
    smallest eigenpairs iteratively; ``auto`` switches to it above the
    configured entry count.  Raises CorankMismatch when the spectrum does
    not show a corank-r gap, which signals a degree outside the regularity
    or a misspecified rank.
    """
    nrows, ncols = res.shape
    if res.s == 0 or ncols == 0:
        raise ValueError("left_nullspace needs a nonempty system")
    if r < 1 or r >= nrows:
        raise ValueError(f"corank {r} out of range for {nrows} rows")
    expected_rank = nrows - r
    if expected_rank > ncols:
        raise CorankMismatch(
            f"shift matrix is {nrows} x {ncols}: corank is at least "
            f"{nrows - ncols} > {r}; the degree is outside the regularity"
        )
    if method == "auto":
        method = "eigs" if nrows * ncols >= tol.eigs_entry_threshold else "svd"
    if method == "svd":
        N, ok, detail = _nullspace_svd(res, r, tol)
    elif method == "eigs":
        try:
            N, ok, detail = _nullspace_eigs(res, r, tol)
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise CorankMismatch(f"iterative eigensolver did not converge: {exc}") from exc
    else:
        raise ValueError(f"unknown nullspace method {method!r}")
    if not ok:
        raise CorankMismatch(detail)
    scale = scipy.sparse.linalg.norm(res.matrix)
    rel = np.linalg.norm((N @ res.matrix).ravel()) / scale if scale else 0.0
    if rel > tol.null_rel:
        warnings.warn(
            f"nullspace residual ||N R||/||R|| = {rel:.2e} exceeds {tol.null_rel:.0e}",
            stacklevel=2,
        )
    return N


def _nullspace_svd(res, r, tol):
    dense = res.matrix.toarray()
    nrows = dense.shape[0]
    u, sv, _ = np.linalg.svd(dense, full_matrices=True)
    expected_rank = nrows - r
    if expected_rank < len(sv):
        small, large = sv[expected_rank], sv[expected_rank - 1]
        if small > 0 and large / small < tol.sep_ratio:
            return None, False, (
                f"singular values {large:.3e} / {small:.3e} not separated by "
                f"{tol.sep_ratio:.0e}: corank differs from {r}"
            )
    elif sv[expected_rank - 1] / sv[0] < tol.rank_rel:
        return None, False, "shift matrix rank deficient beyond the expected corank"
    N = u[:, expected_rank:].conj().T
    return N, True, ""


def _nullspace_eigs(res, r, tol):
    R = res.matrix
    gram = (R @ R.conj().T).toarray()
    nrows = gram.shape[0]
    scale = np.linalg.norm(gram)
    k = min(r + 3, nrows - 1)
    # small negative shift keeps the shift-invert factorization definite
    sigma = -1e-8 * scale
    detail = ""
    # fixed starting vector: ARPACK otherwise draws one from the global
    # generator, which would break run-to-run determinism
    v0 = np.random.default_rng(0x5EED).standard_normal(nrows).astype(gram.dtype)
    # a degenerate near-zero cluster can be undercounted when the Lanczos
    # subspace is too small; escalate ncv before giving up
    for ncv in (None, min(nrows, max(4 * k + 1, 40)), min(nrows, max(10 * k, 100))):
        vals, vecs = scipy.sparse.linalg.eigsh(
            gram, k=k, sigma=sigma, which="LM", ncv=ncv, v0=v0,
            tol=tol.eigs_tol, maxiter=tol.eigs_maxiter,
        )
        order = np.argsort(np.abs(vals))
        vals, vecs = vals[order], vecs[:, order]
        small, nxt = abs(vals[r - 1]), abs(vals[r])
        if small == 0 or nxt / small >= tol.sep_ratio ** 2:
            N = vecs[:, :r].conj().T
            if not np.iscomplexobj(R.data):
                # real input: continue with the real part of the nullspace
                N = np.real(N)
                N = np.linalg.qr(N.T)[0].T
            return N, True, ""
        detail = (
            f"Gram eigenvalues {nxt:.3e} / {small:.3e} not separated by "
            f"{tol.sep_ratio ** 2:.0e}: corank differs from {r}"
        )
        if ncv is not None and ncv >= nrows:
            break
    return None, False, detail
