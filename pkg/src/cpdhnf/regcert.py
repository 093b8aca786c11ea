"""Finite-field certification of the degree choice.

For a configuration of points sampled over Z_p, the Hilbert function of
the ideal generated by the kernel of their evaluation matrix can be
computed exactly by modular Gaussian elimination.  The finite-field value
upper-bounds the characteristic-zero one, and together with the universal
lower bound r this sandwiches it: finding one configuration with value r
certifies the degree for generic configurations (semicontinuity).
"""

import math
from dataclasses import dataclass

import numpy as np

from .bigraded import hilbert_dim, rank_bound
from .errors import ConfigNotInW, RankOutOfRange
from .polysys import shift_row_indices

DEFAULT_PRIME = 8191


def _check_prime(p):
    if p < 2 or p >= 1 << 15:
        raise ValueError("prime must satisfy 2 <= p < 2^15 (32-bit safe products)")
    for q in range(2, int(math.isqrt(p)) + 1):
        if p % q == 0:
            raise ValueError(f"{p} is not prime")


def _row_echelon(M, p, reduced=False):
    """In-place-style modular elimination; returns (rank, matrix, pivot cols).

    Vectorized row updates keep intermediates below p^2 < 2^30, safe in
    int64 arithmetic.
    """
    M = np.array(M, dtype=np.int64) % p
    rows, cols = M.shape
    pivots = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        nz = np.nonzero(M[row:, col])[0]
        if nz.size == 0:
            continue
        piv = row + nz[0]
        if piv != row:
            M[[row, piv]] = M[[piv, row]]
        inv = pow(int(M[row, col]), p - 2, p)
        M[row] = (M[row] * inv) % p
        if reduced:
            targets = np.nonzero(M[:, col])[0]
            targets = targets[targets != row]
        else:
            targets = row + 1 + np.nonzero(M[row + 1:, col])[0]
        if len(targets):
            M[targets] = (M[targets] - np.outer(M[targets, col], M[row])) % p
        pivots.append(col)
        row += 1
    return row, M, pivots


def fp_rank(M, p=DEFAULT_PRIME):
    """Exact rank over Z_p by modular Gaussian elimination."""
    _check_prime(p)
    M = np.atleast_2d(np.asarray(M))
    if M.size == 0:
        return 0
    return _row_echelon(M, p)[0]


def _fp_kernel(M, p):
    """Basis of the right nullspace over Z_p, one vector per free column."""
    rank, rref, pivots = _row_echelon(M, p, reduced=True)
    cols = M.shape[1]
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for idx, f in enumerate(free):
        basis[idx, f] = 1
        for i, pc in enumerate(pivots):
            basis[idx, pc] = (-rref[i, f]) % p
    return basis


@dataclass(frozen=True)
class PointConfigFp:
    """r points on P^m x P^n with coordinates in Z_p.

    The rows beta_i (x) gamma_i of the evaluation matrix must be linearly
    independent over Z_p for the configuration to define the intended
    ideal; that is checked where it matters, not at construction.
    """

    p: int
    beta: np.ndarray   # (m+1) x r
    gamma: np.ndarray  # (n+1) x r

    def __post_init__(self):
        _check_prime(self.p)
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=np.int64) % self.p)
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=np.int64) % self.p)
        if self.beta.shape[1] != self.gamma.shape[1]:
            raise ValueError("beta and gamma must have the same number of points")

    @property
    def m(self):
        return self.beta.shape[0] - 1

    @property
    def n(self):
        return self.gamma.shape[0] - 1

    @property
    def r(self):
        return self.beta.shape[1]

    def w_matrix(self):
        """r x (m+1)(n+1) matrix with rows beta_i (x) gamma_i (row-major
        pair order, matching the flattening column convention)."""
        outer = self.beta.T[:, :, None] * self.gamma.T[:, None, :]
        return (outer.reshape(self.r, -1)) % self.p


def random_config(m, n, r, p=DEFAULT_PRIME, seed=0):
    rng = np.random.default_rng(seed)
    beta = rng.integers(0, p, size=(m + 1, r), dtype=np.int64)
    gamma = rng.integers(0, p, size=(n + 1, r), dtype=np.int64)
    return PointConfigFp(p, beta, gamma)


def hilbert_from_points(config, degree):
    """Hilbert function of the quotient at (d, e), exactly over Z_p.

    Builds the kernel of the evaluation matrix, assembles the shift matrix
    with the same column-placement rule as the floating-point solver, and
    returns the corank.
    """
    d, e = degree
    if (d, e) < (1, 1):
        raise ValueError("degree must be at least (1, 1)")
    m, n, r, p = config.m, config.n, config.r, config.p
    w = config.w_matrix()
    if fp_rank(w, p) < r:
        raise ConfigNotInW(f"point evaluations have rank < {r} over Z_{p}")
    forms = _fp_kernel(w, p)
    s = forms.shape[0]
    rows_per_shift = shift_row_indices(m, n, (d, e))
    nrows = hilbert_dim(m, n, d, e)
    R = np.zeros((nrows, s * len(rows_per_shift)), dtype=np.int64)
    col = 0
    for j in range(s):
        fj = forms[j]
        for rows in rows_per_shift:
            R[rows, col] = fj
            col += 1
    return nrows - fp_rank(R, p)


def catalecticant_corank(config):
    """Corank of the stacked pairwise-symmetry constraint matrix at (2, 1).

    For each pair q < q' of first-factor coordinates the block row
    [Gamma H_{q'} | -Gamma H_q] (placed at block columns q and q')
    expresses the partial-symmetry conditions for membership in the
    catalecticant image; the corank of the stack equals the degree-(2,1)
    Hilbert value.  Accepts a finite-field configuration or a pair of
    real/complex coordinate matrices (beta, gamma).
    """
    if isinstance(config, PointConfigFp):
        beta, gamma, p = config.beta, config.gamma, config.p
        exact = True
    else:
        beta, gamma = (np.asarray(x) for x in config)
        exact = False
    m1, r = beta.shape
    n1 = gamma.shape[0]
    m = m1 - 1
    npairs = (m1 * m) // 2
    dtype = np.int64 if exact else np.result_type(beta, gamma)
    A = np.zeros((npairs * n1, m1 * r), dtype=dtype)
    row = 0
    for q in range(m1):
        for q2 in range(q + 1, m1):
            band = slice(row * n1, (row + 1) * n1)
            A[band, q * r:(q + 1) * r] = gamma * beta[q2]
            A[band, q2 * r:(q2 + 1) * r] = -(gamma * beta[q])
            row += 1
    if exact:
        rank = fp_rank(A % p, p)
    else:
        sv = np.linalg.svd(A, compute_uv=False)
        rank = int(np.sum(sv > 1e-10 * sv[0])) if sv.size and sv[0] > 0 else 0
    return m1 * r - rank


def certify_regularity(m, n, d, r, p=DEFAULT_PRIME, trials=3, seed=0):
    """Search for a witness configuration certifying degree (d, 1).

    Success on the first sampled configuration whose evaluation matrix has
    full rank r and whose Hilbert value at (d, 1) equals r; by upper
    semicontinuity this certifies the degree for generic configurations.
    Failure after all trials is inconclusive, never a refutation.  Trial t
    uses seed + t.
    """
    _check_prime(p)
    bound = rank_bound(m, n, d, 1)
    if r > min(bound, m * n):
        raise RankOutOfRange(
            f"rank {r} outside the certifiable range min({bound}, {m * n})"
        )
    cert = {
        "format": "cpdhnf-cert v1",
        "m": m, "n": n, "d": d, "r": r, "p": p,
        "seed": None, "rankN": None, "hf": None, "success": False,
    }
    for trial in range(trials):
        trial_seed = seed + trial
        config = random_config(m, n, r, p, seed=trial_seed)
        rank_w = int(fp_rank(config.w_matrix(), p))
        cert["seed"], cert["rankN"] = trial_seed, rank_w
        if rank_w < r:
            cert["hf"] = None
            continue
        hf = int(hilbert_from_points(config, (d, 1)))
        cert["hf"] = hf
        if hf == r:
            cert["success"] = True
            break
    return cert
