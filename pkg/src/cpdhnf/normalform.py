"""Pre-normal forms and multiplication matrices.

A pre-normal form is a rank-r map on a graded piece whose kernel is the
ideal's piece in that degree.  Restricting it to a well-conditioned column
subset turns multiplication by degree-raising polynomials into commuting
r x r matrices whose joint eigenvalues are homogeneous coordinates of the
solution points.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bigraded import Bidegree, monomial_basis
from .config import DEFAULT_TOLERANCES
from .errors import BasisDeficient, DefectiveEigenvectors, FlatteningRankMismatch


def _unit(dim, k):
    v = [0] * dim
    v[k] = 1
    return tuple(v)


def _add(a, inc):
    return tuple(x + y for x, y in zip(a, inc))


def shifted_submatrix(N, m, n, degree, shift):
    """Columns of N pulled back along multiplication by x^{a'} y^{b'}.

    Column (k, l) of the result is the column of N at the monomial
    x^{a'+e_k} y^{b'+e_l}; pairs (k, l) run row-major.
    """
    d, e = degree
    a1, b1 = (tuple(shift[0]), tuple(shift[1]))
    if sum(a1) != d - 1 or sum(b1) != e - 1:
        raise ValueError(f"shift {shift} does not have degree ({d - 1}, {e - 1})")
    basis = monomial_basis(m, n, degree)
    cols = np.empty((m + 1) * (n + 1), dtype=np.int64)
    pos = 0
    for k in range(m + 1):
        ak = _add(a1, _unit(m + 1, k))
        for l in range(n + 1):
            cols[pos] = basis.index_of(ak, _add(b1, _unit(n + 1, l)))
            pos += 1
    return N[:, cols]


def _combined_shift(N, m, n, degree, coeffs, shift_degree):
    """Linear combination sum_c coeffs * N_{a',b'} over all shifts of the
    given degree."""
    shifts = monomial_basis(m, n, shift_degree).exponents
    if len(coeffs) != len(shifts):
        raise ValueError("one coefficient per shift monomial required")
    out = np.zeros((N.shape[0], (m + 1) * (n + 1)), dtype=np.result_type(N, coeffs))
    for c, (a1, b1) in zip(coeffs, shifts):
        if c != 0:
            out += c * shifted_submatrix(N, m, n, degree, (a1, b1))
    return out


def make_h0(N, m, n, degree, rng=None, coeffs=None):
    """Random (or caller-supplied) combination of the shifted submatrices.

    Coefficients are i.i.d. standard normal; with probability one the
    corresponding polynomial does not vanish at any solution point.  A
    bad draw surfaces downstream as a pivot-rank deficiency.
    """
    d, e = degree
    nshifts = len(monomial_basis(m, n, (d - 1, e - 1)))
    if coeffs is None:
        if (d, e) == (1, 1):
            coeffs = np.ones(1)
        else:
            if rng is None:
                raise ValueError("need rng when no coefficients are supplied")
            coeffs = rng.standard_normal(nshifts)
    coeffs = np.asarray(coeffs)
    return coeffs, _combined_shift(N, m, n, degree, coeffs, (d - 1, e - 1))


@dataclass
class PreNormalForm:
    """Pre-normal form with a chosen pivot basis.

    ``axis`` records which side's coordinates the multiplication family
    produces: "x" for the general degree-(d, e) path, "y" for the pencil
    shortcut on the flattening row space.  ``tri`` holds the full
    triangular QR factor; the leading r columns are the invertible
    restriction to the pivot basis.
    """

    N: np.ndarray
    m: int
    n: int
    degree: Bidegree
    axis: str
    h0: np.ndarray
    h: np.ndarray | None
    q: np.ndarray
    tri: np.ndarray
    pivots: np.ndarray
    cond: float

    @property
    def r(self):
        return self.N.shape[0]

    @property
    def basis(self):
        return self.pivots[: self.r]


def choose_basis(n_h0, tol=DEFAULT_TOLERANCES):
    """Column-pivoted QR picking r well-conditioned basis columns.

    Raises BasisDeficient when the r-th pivot collapses, which flags a
    combination vanishing at a solution point or a rank misspecification.
    """
    r = n_h0.shape[0]
    if n_h0.shape[1] < r:
        raise BasisDeficient(
            f"need at least {r} columns to pick a basis, found {n_h0.shape[1]}"
        )
    q, tri, piv = scipy.linalg.qr(n_h0, mode="economic", pivoting=True)
    diag = np.abs(np.diagonal(tri)[:r])
    if diag[0] == 0 or diag[-1] / diag[0] < tol.piv_rel:
        raise BasisDeficient(
            f"pivot ratio {0.0 if diag[0] == 0 else diag[-1] / diag[0]:.2e} below "
            f"{tol.piv_rel:.0e}: restricted map is numerically singular"
        )
    cond = float(np.linalg.cond(tri[:, :r]))
    return q, tri, piv, cond


def prenormal_general(N, m, n, degree, rng=None, tol=DEFAULT_TOLERANCES,
                      h0_coeffs=None, h_coeffs=None):
    """Assemble the degree-(d, e) pre-normal form from a left nullspace.

    Requires d >= 2 (callers handle (1, e) by transposing the two small
    modes).  The auxiliary polynomial h lives one x-degree below the shift
    degree and degenerates to the constant 1 when (d, e) = (2, 1).
    """
    d, e = degree
    if d < 2:
        raise ValueError("general path needs x-degree >= 2")
    h0, n_h0 = make_h0(N, m, n, degree, rng=rng, coeffs=h0_coeffs)
    q, tri, piv, cond = choose_basis(n_h0, tol)
    h_degree = (d - 2, e - 1)
    nh = len(monomial_basis(m, n, h_degree))
    if h_coeffs is None:
        if h_degree == (0, 0):
            h = np.ones(1)
        else:
            h = rng.standard_normal(nh)
    else:
        h = np.asarray(h_coeffs)
    if len(h) != nh:
        raise ValueError("h must have one coefficient per degree-(d-2, e-1) monomial")
    return PreNormalForm(N, m, n, Bidegree(d, e), "x", h0, h, q, tri, np.asarray(piv), cond)


def pencil_prenormal(flattening, r, dims, rng=None, tol=DEFAULT_TOLERANCES,
                     h0_coeffs=None):
    """Pencil-path pre-normal form for ranks r <= m+1.

    The top-r right-singular rows of the flattening represent its row
    space and already form a pre-normal form on the bilinear piece.  The
    combination polynomial is linear in the y-variables, the pivot basis
    lives among the x-variables, and the multiplication family produces
    the y-side coordinates; this needs the second-mode factor vectors to
    be linearly independent, which a pivot failure reports a posteriori.
    """
    M = np.asarray(flattening)
    m1, n1 = (int(x) for x in dims)
    if r > m1:
        raise ValueError(f"pencil path needs rank <= {m1}")
    u, sv, vh = np.linalg.svd(M, full_matrices=False)
    if sv[0] == 0 or (r < len(sv) and sv[r - 1] / sv[0] < tol.rank_rel):
        raise FlatteningRankMismatch("flattening rank below the requested rank")
    N = vh[:r, :]
    if h0_coeffs is None:
        if rng is None:
            raise ValueError("need rng when no coefficients are supplied")
        h0 = rng.standard_normal(n1)
    else:
        h0 = np.asarray(h0_coeffs)
    n_h0 = sum(h0[j] * N[:, j::n1] for j in range(n1))
    q, tri, piv, cond = choose_basis(n_h0, tol)
    return PreNormalForm(N, m1 - 1, n1 - 1, Bidegree(1, 1), "y", h0, None,
                         q, tri, np.asarray(piv), cond)


@dataclass
class MultiplicationFamily:
    """Commuting r x r matrices, one per coordinate of the tagged side."""

    matrices: np.ndarray  # shape (count, r, r)
    axis: str

    def __len__(self):
        return self.matrices.shape[0]

    def commutation_residual(self):
        """max ||M_i M_j - M_j M_i||_F / (||M_i||_F ||M_j||_F)."""
        mats = self.matrices
        norms = [np.linalg.norm(M) for M in mats]
        worst = 0.0
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                comm = mats[i] @ mats[j] - mats[j] @ mats[i]
                denom = norms[i] * norms[j]
                if denom > 0:
                    worst = max(worst, np.linalg.norm(comm) / denom)
        return worst


def multiplication_matrices(pnf, tol=DEFAULT_TOLERANCES):
    """Form the family M_k = (restricted h0-map)^{-1} (restricted g_k-map).

    On the general path g_k = h * x_k for k = 0..m; on the pencil path
    g_j = y_j.  The triangular factor is never inverted explicitly; each
    matrix comes from a back-substitution.
    """
    r = pnf.r
    sel = pnf.pivots[:r]
    tri_r = pnf.tri[:, :r]
    mats = []
    if pnf.axis == "y":
        n1 = pnf.n + 1
        for j in range(n1):
            nj = pnf.N[:, j::n1]
            mats.append(scipy.linalg.solve_triangular(tri_r, pnf.q.conj().T @ nj[:, sel]))
    else:
        d, e = pnf.degree
        h_degree = (d - 2, e - 1)
        h_shifts = monomial_basis(pnf.m, pnf.n, h_degree).exponents
        dtype = np.result_type(pnf.N, pnf.h)
        for k in range(pnf.m + 1):
            nk = np.zeros((r, (pnf.m + 1) * (pnf.n + 1)), dtype=dtype)
            for c, (a2, b1) in zip(pnf.h, h_shifts):
                if c != 0:
                    shift = (_add(a2, _unit(pnf.m + 1, k)), b1)
                    nk = nk + c * shifted_submatrix(pnf.N, pnf.m, pnf.n, pnf.degree, shift)
            mats.append(scipy.linalg.solve_triangular(tri_r, pnf.q.conj().T @ nk[:, sel]))
    family = MultiplicationFamily(np.array(mats), pnf.axis)
    resid = family.commutation_residual()
    if resid > tol.comm_rel:
        warnings.warn(f"multiplication family commutes only to {resid:.2e}", stacklevel=2)
    return family


def simultaneous_diagonalize(family, seed=0, rng=None, tol=DEFAULT_TOLERANCES):
    """Joint eigenvalues of a commuting family.

    Eigen-decomposes a random combination and reads each matrix's
    eigenvalues off its (approximately) diagonalized conjugate.  Returns
    the raw coordinate matrix with one column per solution point; column i
    is a set of homogeneous coordinates for point i on the family's side.
    Retries with fresh combinations before giving up.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    mats = family.matrices
    count, r, _ = mats.shape
    best = None
    for _ in range(max(1, tol.diag_retries)):
        t = rng.standard_normal(count)
        combo = np.tensordot(t, mats, axes=1)
        _, vecs = np.linalg.eig(combo)
        coords = np.empty((count, r), dtype=complex)
        worst = 0.0
        try:
            for j in range(count):
                dj = np.linalg.solve(vecs, mats[j] @ vecs)
                off = dj - np.diag(np.diagonal(dj))
                denom = np.linalg.norm(dj)
                if denom > 0:
                    worst = max(worst, np.linalg.norm(off) / denom)
                coords[j] = np.diagonal(dj)
        except np.linalg.LinAlgError:
            continue
        if worst <= tol.diag_rel:
            return coords
        if best is None or worst < best[0]:
            best = (worst, coords)
    if best is None or best[0] > tol.diag_fail:
        detail = "singular eigenvector matrix" if best is None else (
            f"best off-diagonal residual {best[0]:.2e} above {tol.diag_fail:.0e}"
        )
        raise DefectiveEigenvectors(f"simultaneous diagonalization failed: {detail}")
    # Approximately commuting input (e.g. a noisy tensor): the diagonal
    # entries are still the right estimates and Newton refinement follows.
    warnings.warn(
        f"off-diagonal residual {best[0]:.2e} above {tol.diag_rel:.0e}; "
        "continuing with the best attempt", stacklevel=2,
    )
    return best[1]
