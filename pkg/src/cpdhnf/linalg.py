"""Small shared linear-algebra helpers."""

import numpy as np


def khatri_rao(factors):
    """Column-wise Kronecker product of a list of matrices.

    All matrices must have the same number of columns; column i of the
    result is the Kronecker product of the i-th columns, with the first
    factor varying slowest (row-major pair order).
    """
    factors = [np.asarray(f) for f in factors]
    r = factors[0].shape[1]
    if any(f.shape[1] != r for f in factors):
        raise ValueError("all factors need the same column count")
    out = factors[0]
    for f in factors[1:]:
        out = (out[:, None, :] * f[None, :, :]).reshape(-1, r)
    return out


def normalize_columns(factors):
    """Apply the output normalization convention to a CPD factor list.

    Columns of every factor except the first get unit 2-norm and a real
    nonnegative leading (first non-negligible) entry; all scales and phases
    are absorbed into the first factor's columns.
    """
    factors = [np.array(f) for f in factors]
    r = factors[0].shape[1]
    for k in range(1, len(factors)):
        for i in range(r):
            col = factors[k][:, i]
            nrm = np.linalg.norm(col)
            if nrm == 0:
                continue
            col /= nrm
            lead = _leading_entry(col)
            phase = lead / abs(lead) if lead != 0 else 1.0
            col /= phase
            factors[k][:, i] = col
            factors[0][:, i] *= nrm * phase
    return factors


def _leading_entry(v, rel=1e-12):
    cutoff = rel * np.max(np.abs(v))
    for x in v:
        if abs(x) > cutoff:
            return x
    return v[0]


def unitize(v):
    """Unit 2-norm copy of v with real nonnegative leading entry."""
    v = np.asarray(v, dtype=complex if np.iscomplexobj(v) else float)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("zero vector")
    v = v / nrm
    lead = _leading_entry(v)
    if lead != 0:
        v = v / (lead / abs(lead))
    return v


def subspace_distance(A, B):
    """Largest principal angle sine between the row spaces of A and B."""
    qa = np.linalg.qr(np.asarray(A).conj().T)[0]
    qb = np.linalg.qr(np.asarray(B).conj().T)[0]
    sv = np.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    sv = np.clip(sv, -1.0, 1.0)
    return float(np.sqrt(max(0.0, 1.0 - np.min(sv) ** 2)))


def match_columns(found, truth):
    """Greedy permutation matching columns of `found` to columns of `truth`.

    Scores pairs by normalized absolute correlation and assigns greedily,
    which is adequate for well-separated factors at test scale.  Returns
    perm with found[:, perm[i]] matched to truth[:, i].
    """
    found = np.asarray(found)
    truth = np.asarray(truth)
    r = truth.shape[1]
    fn = found / np.maximum(np.linalg.norm(found, axis=0), 1e-300)
    tn = truth / np.maximum(np.linalg.norm(truth, axis=0), 1e-300)
    corr = np.abs(tn.conj().T @ fn)
    perm = [-1] * r
    used = set()
    for _ in range(r):
        i, j = np.unravel_index(np.argmax(corr), corr.shape)
        perm[i] = int(j)
        used.add(int(j))
        corr[i, :] = -1.0
        corr[:, j] = -1.0
    return perm


def factor_set_distance(found, truth):
    """Max column-wise deviation between two factor-column sets.

    Both inputs are matrices with r columns; columns are compared after
    unit normalization and leading-sign fixing, under the greedy matching.
    """
    perm = match_columns(found, truth)
    worst = 0.0
    for i in range(truth.shape[1]):
        a = unitize(truth[:, i])
        b = unitize(found[:, perm[i]])
        worst = max(worst, float(np.linalg.norm(a - b)))
    return worst
