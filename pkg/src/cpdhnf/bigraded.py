"""Combinatorics of the bigraded polynomial ring on P^m x P^n.

Monomial bases of the graded pieces, the ring's Hilbert function, the
rational rank bound controlling which bidegrees can work for a given
number of points, and automatic degree selection for the solver.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from .errors import RankOutOfRange


class Bidegree(NamedTuple):
    d: int
    e: int


def hilbert_dim(m, n, d, e):
    """Dimension of the bidegree-(d, e) piece: C(m+d, d) * C(n+e, e).

    Exact integer arithmetic; Python integers never wrap.
    """
    if min(m, n, d, e) < 0:
        raise ValueError("all arguments must be nonnegative")
    return math.comb(m + d, d) * math.comb(n + e, e)


def _exponents(nvars, total):
    """Exponent tuples of the given total degree, lexicographically
    descending (first variable greatest)."""
    if nvars == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        for rest in _exponents(nvars - 1, total - first):
            out.append((first,) + rest)
    return out


@dataclass(frozen=True)
class MonomialBasis:
    """Ordered monomial basis of the (d, e) graded piece.

    Entries are (a, b) exponent-tuple pairs, x-block major / y-block minor,
    each block in lexicographic order with the 0-th variable greatest.  For
    degree (1, 1) this reproduces the row-major (k, l) pair order used by
    the mode-1 flattening columns.
    """

    m: int
    n: int
    degree: Bidegree

    @property
    def exponents(self):
        return _basis_exponents(self.m, self.n, self.degree)

    def __len__(self):
        return len(self.exponents)

    def index_of(self, a, b):
        key = (tuple(a), tuple(b))
        try:
            return _basis_index(self.m, self.n, self.degree)[key]
        except KeyError:
            raise ValueError(f"exponents {key} not of degree {tuple(self.degree)}") from None


@lru_cache(maxsize=256)
def _basis_exponents(m, n, degree):
    d, e = degree
    return tuple(
        (a, b) for a in _exponents(m + 1, d) for b in _exponents(n + 1, e)
    )


@lru_cache(maxsize=256)
def _basis_index(m, n, degree):
    return {ab: i for i, ab in enumerate(_basis_exponents(m, n, degree))}


def monomial_basis(m, n, degree):
    basis = MonomialBasis(m, n, Bidegree(*degree))
    assert len(basis) == hilbert_dim(m, n, *degree)
    return basis


def rank_bound(m, n, d, e):
    """Rational threshold on the point count for bidegree (d, e).

    Above this bound the quotient's Hilbert function provably exceeds the
    point count, so (d, e) cannot certify the points.  Infinite at (1, 1).
    Returned as an exact Fraction (or math.inf).
    """
    if (d, e) < (1, 1):
        raise ValueError("degree must be at least (1, 1) componentwise")
    if (d, e) == (1, 1):
        return math.inf
    h11 = hilbert_dim(m, n, 1, 1)
    hde = hilbert_dim(m, n, d, e)
    hshift = hilbert_dim(m, n, d - 1, e - 1)
    return Fraction(h11 * hshift - hde, hshift - 1)


class DegreePlan(NamedTuple):
    """Chosen bidegree with its predicted resultant-matrix footprint."""

    degree: Bidegree
    path: str          # "pencil" | "normal-form"
    rows: int
    cols: int


def _plan(m, n, r, degree):
    d, e = degree
    s = (m + 1) * (n + 1) - r
    rows = hilbert_dim(m, n, d, e)
    cols = s * hilbert_dim(m, n, d - 1, e - 1)
    path = "pencil" if (d, e) == (1, 1) else "normal-form"
    return DegreePlan(Bidegree(d, e), path, rows, cols)


def select_degree(m, n, r, ell, beta_independent=True):
    """Pick the bidegree for the solver.

    Ranks up to m+1 with independent second-mode factors go to the pencil
    shortcut at (1, 1).  Otherwise the smallest workable (d, 1) and (1, e)
    are compared: the lower raised degree wins, matrix size breaks ties,
    and a residual tie goes to (d, 1).  Mixed degrees with both entries
    >= 2 are never selected automatically.
    """
    if r < 1:
        raise ValueError("rank must be positive")
    if r > min(ell + 1, m * n):
        raise RankOutOfRange(
            f"rank {r} exceeds min(l+1, m*n) = {min(ell + 1, m * n)} "
            f"for shape ({ell + 1}, {m + 1}, {n + 1})"
        )
    if r <= m + 1 and beta_independent:
        return _plan(m, n, r, (1, 1))

    d = next(d for d in range(2, n + 2) if rank_bound(m, n, d, 1) >= r)
    e = next(e for e in range(2, m + 2) if rank_bound(m, n, 1, e) >= r)
    plan_d = _plan(m, n, r, (d, 1))
    plan_e = _plan(m, n, r, (1, e))
    if (d, plan_d.rows * plan_d.cols) <= (e, plan_e.rows * plan_e.cols):
        return plan_d
    return plan_e
