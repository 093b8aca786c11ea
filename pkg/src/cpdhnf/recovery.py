"""Back end of the solver: per-point recovery, Newton refinement, first-mode
factors, and the end-to-end decomposition driver."""

import time
import warnings
from contextlib import contextmanager

import numpy as np

from .bigraded import select_degree
from .config import DEFAULT_TOLERANCES, DecomposeOptions
from .errors import (AmbiguousKernel, CorankMismatch, CpdError, RankDeficientKR,
                     RankOutOfRange, SingularJacobian)
from .linalg import khatri_rao
from .normalform import (multiplication_matrices, pencil_prenormal,
                         prenormal_general, simultaneous_diagonalize)
from .polysys import (build_resultant, evaluate, jacobian, kernel_flattening,
                      left_nullspace)
from .tensors import (REAL, CPDecomposition, DenseTensor, add_noise,
                      backward_error, choose_grouping, flatten_mode1,
                      rank1_factorization, reshape_group, st_hosvd)

__all__ = [
    "solve_gamma", "newton_refine", "solve_alpha", "decompose",
    "decompose_with_info", "add_noise",
]


def solve_gamma(system, beta, tol=DEFAULT_TOLERANCES):
    """Second-point coordinates from the forms at a fixed first point.

    Stacks the rows beta^T F_j and takes the right singular vector of the
    smallest singular value; a clear gap between the two smallest singular
    values certifies the one-dimensional kernel the genericity assumption
    promises.
    """
    if system.s < 1:
        raise ValueError("need at least one form")
    beta = np.asarray(beta)
    if not np.any(beta):
        raise ValueError("zero point")
    A = np.einsum("jkl,k->jl", system.coeffs, beta)
    n1 = system.n + 1
    if system.s < system.n:
        raise AmbiguousKernel(
            f"only {system.s} forms for {n1} unknowns: kernel cannot be one-dimensional"
        )
    _, sv, vh = np.linalg.svd(A, full_matrices=True)
    if len(sv) >= n1:
        small, nxt = sv[n1 - 1], sv[n1 - 2]
    else:
        # s == n: square-ish system, kernel dimension is 1 iff full row rank
        small, nxt = 0.0, sv[-1]
    # one-dimensional kernel: exactly one singular value collapses
    if sv[0] == 0 or nxt <= tol.rank_rel * sv[0]:
        raise AmbiguousKernel(
            f"second-smallest singular value {nxt:.3e} vanishes: kernel has "
            "dimension greater than one"
        )
    if small > tol.solve_gap * nxt:
        raise AmbiguousKernel(
            f"two smallest singular values {small:.3e}, {nxt:.3e} not separated"
        )
    return vh[-1, :].conj()


def _pinv_apply(J, res, rcond):
    u, sv, vh = np.linalg.svd(J, full_matrices=False)
    cutoff = rcond * sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > cutoff))
    coeff = (u.conj().T @ res)[:rank] / sv[:rank]
    return vh[:rank, :].conj().T @ coeff, rank


def _orth_complement(v):
    """Orthonormal basis of the hyperplane orthogonal to the unit vector v."""
    dim = v.shape[0]
    q = np.linalg.qr(np.column_stack([v, np.eye(dim)]))[0]
    return q[:, 1:dim]


def newton_refine(system, beta, gamma, iters=3, tol=DEFAULT_TOLERANCES):
    """Gauss-Newton refinement of an approximate simple zero.

    The forms are bihomogeneous, so the raw Jacobian maps both scaling
    directions onto the residual (Euler's relation) and a naive step merely
    rescales the point.  Steps are therefore taken in the product of affine
    charts: the Jacobian restricted to the directions orthogonal to the
    current point, applied via its pseudo-inverse.  On that chart the
    restricted Jacobian has full rank exactly when the zero is simple.  A
    step is only accepted if the residual does not increase, keeping
    refinement monotone.
    """
    b = np.asarray(beta) / np.linalg.norm(beta)
    g = np.asarray(gamma) / np.linalg.norm(gamma)
    res = evaluate(system, b, g)
    rnorm = np.linalg.norm(res)
    needed = system.m + system.n
    # unit points on unit-norm forms: residuals at this level are rounding
    # noise and stepping on them only jitters the output
    floor = 10 * np.finfo(float).eps * np.sqrt(max(system.s, 1))
    for _ in range(iters):
        if rnorm <= floor:
            break
        J = jacobian(system, b, g)
        ub = _orth_complement(b)
        ug = _orth_complement(g)
        chart = np.block([
            [ub, np.zeros((system.m + 1, system.n), dtype=ug.dtype)],
            [np.zeros((system.n + 1, system.m), dtype=ub.dtype), ug],
        ])
        step, rank = _pinv_apply(J @ chart, res, tol.newton_rcond)
        if rank < needed:
            raise SingularJacobian(
                f"chart Jacobian rank {rank} < {needed}: zero is not simple"
            )
        delta = chart @ step
        nb = b - delta[: system.m + 1]
        ng = g - delta[system.m + 1:]
        nb /= np.linalg.norm(nb)
        ng /= np.linalg.norm(ng)
        nres = evaluate(system, nb, ng)
        nnorm = np.linalg.norm(nres)
        if nnorm > rnorm:
            break
        b, g, res, rnorm = nb, ng, nres, nnorm
    return b, g


def solve_alpha(flat, betas, gammas, tol=DEFAULT_TOLERANCES):
    """First-mode factors by least squares against the flattening.

    Solves K A = flat^T for the Khatri-Rao matrix K of the recovered point
    coordinates.  Returns (alphas, relative residual).
    """
    K = khatri_rao([np.asarray(betas), np.asarray(gammas)])
    r = K.shape[1]
    if r > K.shape[0]:
        raise RankDeficientKR(f"rank {r} exceeds the {K.shape[0]} Khatri-Rao rows")
    sol, _, rank, _ = np.linalg.lstsq(K, np.asarray(flat).T, rcond=None)
    if rank < r:
        raise RankDeficientKR(f"Khatri-Rao matrix rank {rank} < {r}")
    scale = np.linalg.norm(flat)
    resid = np.linalg.norm(K @ sol - np.asarray(flat).T) / scale if scale else 0.0
    return sol.T, float(resid)


@contextmanager
def _stage(timings, name, tracker=None):
    if tracker is not None:
        tracker["current"] = name
    start = time.perf_counter()
    yield
    timings[name] = timings.get(name, 0.0) + (time.perf_counter() - start) * 1e3


def _resolve_degree(options, r, mc, nc, lc):
    """Degree plan for the compressed core; returns (degree, path, swap)."""
    if options.path not in ("auto", "pencil", "normal-form"):
        raise ValueError(f"unknown path {options.path!r}")
    if options.degree is not None:
        d, e = (int(x) for x in options.degree)
        if (d, e) < (1, 1):
            raise ValueError("forced degree must be at least (1, 1)")
        if (d, e) == (1, 1):
            if r > mc:
                raise RankOutOfRange(f"pencil degree (1,1) needs rank <= {mc}")
            return (1, 1), "pencil", False
        if d == 1:
            return (e, 1), "normal-form", True
        return (d, e), "normal-form", False
    if options.path == "pencil":
        if r > mc:
            raise RankOutOfRange(f"pencil path needs rank <= {mc}, got {r}")
        return (1, 1), "pencil", False
    if options.path == "auto" and r <= mc:
        return (1, 1), "pencil", False
    plan = select_degree(mc - 1, nc - 1, r, lc - 1, beta_independent=False)
    d, e = plan.degree
    if d == 1:
        return (e, 1), "normal-form", True
    return (d, e), "normal-form", False


def _core_nullspace(res, r, kernel, tol):
    if kernel == "auto":
        method = "eigs" if res.shape[0] * res.shape[1] >= tol.eigs_entry_threshold else "svd"
        try:
            return left_nullspace(res, r, method=method, tol=tol), method
        except CorankMismatch:
            if method == "eigs":
                # surface only if the dense path agrees
                return left_nullspace(res, r, method="svd", tol=tol), "svd"
            raise
    return left_nullspace(res, r, method=kernel, tol=tol), kernel


def _decompose_order3(t, r, options, rng, timings, info, tracker):
    l1, m1, n1 = t.shape
    tol = options.tolerances
    tracker["current"] = "validation"
    if r > min(l1, (m1 - 1) * (n1 - 1)):
        raise RankOutOfRange(
            f"rank {r} exceeds min(l+1, m*n) = {min(l1, (m1 - 1) * (n1 - 1))} "
            f"for shape {t.shape}"
        )
    real_field = t.scalars == REAL

    with _stage(timings, "compression", tracker):
        targets = (min(l1, r), min(m1, r), min(n1, r))
        core, us = st_hosvd(t, targets)
    if r == 1:
        info["degree_used"] = (1, 1)
        info["path"] = "rank-1"
        scale = core.data.reshape(())
        return [[us[0] * scale, us[1].copy(), us[2].copy()]]

    lc, mc, nc = core.shape
    tracker["current"] = "degree"
    degree, path, swap = _resolve_degree(options, r, mc, nc, lc)
    if swap:
        core = DenseTensor(core.data.transpose(0, 2, 1), core.scalars)
        mc, nc = nc, mc
    info["degree_used"] = (degree[1], degree[0]) if swap else tuple(degree)
    info["path"] = path

    flat = flatten_mode1(core)
    with _stage(timings, "kernel", tracker):
        system = kernel_flattening(flat, r, (mc, nc), tol)

    if path == "pencil":
        with _stage(timings, "multiplication", tracker):
            pnf = pencil_prenormal(flat, r, (mc, nc), rng=rng, tol=tol)
            info["basis_cond"] = pnf.cond
            family = multiplication_matrices(pnf, tol)
        with _stage(timings, "diagonalization", tracker):
            coords = simultaneous_diagonalize(family, rng=rng, tol=tol)
        if real_field:
            coords = coords.real
        gammas = np.empty((nc, r), dtype=coords.dtype)
        betas = np.empty((mc, r), dtype=coords.dtype)
        transposed = system.transposed()
        with _stage(timings, "recovery", tracker):
            for i in range(r):
                g = coords[:, i] / np.linalg.norm(coords[:, i])
                gammas[:, i] = g
                betas[:, i] = solve_gamma(transposed, g, tol)
    else:
        with _stage(timings, "resultant", tracker):
            res = build_resultant(system, degree)
        with _stage(timings, "cokernel", tracker):
            N, method = _core_nullspace(res, r, options.kernel, tol)
            info["kernel_method"] = method
        if real_field:
            N = np.real(N)
        with _stage(timings, "multiplication", tracker):
            pnf = prenormal_general(N, mc - 1, nc - 1, degree, rng=rng, tol=tol)
            info["basis_cond"] = pnf.cond
            family = multiplication_matrices(pnf, tol)
        with _stage(timings, "diagonalization", tracker):
            coords = simultaneous_diagonalize(family, rng=rng, tol=tol)
        if real_field:
            coords = coords.real
        betas = np.empty((mc, r), dtype=coords.dtype)
        gammas = np.empty((nc, r), dtype=coords.dtype)
        with _stage(timings, "recovery", tracker):
            for i in range(r):
                b = coords[:, i] / np.linalg.norm(coords[:, i])
                betas[:, i] = b
                gammas[:, i] = solve_gamma(system, b, tol)

    point_sets = [(betas, gammas)]
    if options.newton_iters > 0:
        with _stage(timings, "refinement", tracker):
            refined_b, refined_g = betas.copy(), gammas.copy()
            for i in range(r):
                b, g = newton_refine(system, betas[:, i], gammas[:, i],
                                     options.newton_iters, tol)
                refined_b[:, i], refined_g[:, i] = b, g
            if not (np.array_equal(refined_b, betas) and np.array_equal(refined_g, gammas)):
                # keep the unrefined points as a fallback candidate so that
                # refinement can never degrade the reported fit
                point_sets = [(refined_b, refined_g), (betas, gammas)]
            else:
                point_sets = [(refined_b, refined_g)]

    candidates = []
    with _stage(timings, "recovery", tracker):
        for idx, (bs, gs) in enumerate(point_sets):
            try:
                alphas, resid = solve_alpha(flat, bs, gs, tol)
            except RankDeficientKR:
                if idx == 0:
                    raise
                continue
            if idx == 0:
                info["alpha_residual"] = resid
            if swap:
                bs, gs = gs, bs
            candidates.append([us[0] @ alphas, us[1] @ bs, us[2] @ gs])
    return candidates


def _ungroup_factors(factors3, grouping, r):
    """Split grouped rank-1 factor columns back into per-mode vectors."""
    d = len(grouping.shape)
    out = [np.empty(0)] * d
    scales = np.ones(r, dtype=np.result_type(*[f.dtype for f in factors3]))
    for part, fac in zip(grouping.parts, factors3):
        dims = [grouping.shape[i - 1] for i in part]
        mats = [np.empty((dim, r), dtype=fac.dtype) for dim in dims]
        for i in range(r):
            sigma, vecs = rank1_factorization(fac[:, i], dims)
            scales[i] *= sigma
            for mat, v in zip(mats, vecs):
                mat[:, i] = v
        for mode, mat in zip(part, mats):
            out[mode - 1] = mat
    out[0] = out[0] * scales
    return out


def decompose_with_info(t, r, options=None):
    """Full decomposition pipeline; returns (CPDecomposition, info dict).

    info carries the degree used, the path taken, per-stage timings in
    milliseconds, and any warnings raised along the way.  Deterministic
    for fixed options.seed.
    """
    options = options or DecomposeOptions()
    tol = options.tolerances or DEFAULT_TOLERANCES
    if options.tolerances is None:
        options = options.with_(tolerances=tol)
    rng = np.random.default_rng(options.seed)
    timings = {}
    info = {"seed": options.seed, "warnings": []}
    tracker = {"current": "setup"}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if t.order < 3:
                raise ValueError("decompose expects a tensor of order >= 3")
            if t.order == 3:
                candidates = _decompose_order3(t, r, options, rng, timings, info, tracker)
            else:
                with _stage(timings, "grouping", tracker):
                    grouping = options.grouping or choose_grouping(t.shape, r)
                    info["grouping"] = [list(p) for p in grouping.parts]
                    t3 = reshape_group(t, grouping)
                grouped = _decompose_order3(t3, r, options, rng, timings, info, tracker)
                with _stage(timings, "recovery", tracker):
                    candidates = [_ungroup_factors(fs, grouping, r) for fs in grouped]
            # candidates beyond the first exist only when Newton moved the
            # points; keep whichever fits the input best in the final metric
            best = None
            for fs in candidates:
                dec = CPDecomposition(fs).normalize()
                err = backward_error(t, dec)
                if best is None or err < best[1]:
                    best = (dec, err)
            dec, err = best
            info["backward_error"] = err
        info["warnings"] = [str(w.message) for w in caught]
    except CpdError as exc:
        if exc.stage is None:
            exc.stage = tracker["current"]
        raise
    info["stage_timings_ms"] = {k: round(v, 3) for k, v in timings.items()}
    return dec, info


def decompose(t, r, options=None):
    """Compute a rank-r CPD of a tensor of order >= 3.

    Tensors of order above three are reshaped through an automatically
    chosen mode grouping and the grouped rank-1 factors are split back
    afterwards.  The returned decomposition follows the normalization
    convention (unit non-first-mode columns, scale in mode 1).
    """
    return decompose_with_info(t, r, options)[0]
