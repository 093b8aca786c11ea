"""Acceptance suite: one test per exit criterion, each printing a PASS/FAIL
line.  Run with `pytest tests/test_acceptance.py -v -s`."""

import math
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

import cpdhnf
from cpdhnf import (DecomposeOptions, NoFeasibleGrouping, build_resultant,
                    certify_regularity, decompose_with_info, flatten_mode1,
                    hilbert_from_points, kernel_flattening, left_nullspace,
                    monomial_basis, multiplication_matrices, prenormal_general,
                    random_config, random_cpd, rank_bound, select_degree,
                    simultaneous_diagonalize)
from cpdhnf.linalg import unitize
from cpdhnf.recovery import add_noise

from conftest import (GOLDEN_BETAS, GOLDEN_EIG_ROWS, GOLDEN_GAMMAS,
                      golden_resultant_dense)

warnings.simplefilter("ignore")


def report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"\nACCEPTANCE {num:2d} {name}: {status}{suffix}")
    assert ok, f"criterion {num} ({name}) failed {suffix}"


def match_point_sets(found_b, found_g, true_b, true_g):
    """Greedy joint matching of (beta, gamma) pairs; returns the worst
    column deviation after unit normalization."""
    r = true_b.shape[1]
    fk = np.stack([np.kron(unitize(found_b[:, i]), unitize(found_g[:, i]))
                   for i in range(r)], axis=1)
    tk = np.stack([np.kron(unitize(true_b[:, i]), unitize(true_g[:, i]))
                   for i in range(r)], axis=1)
    corr = np.abs(tk.conj().T @ fk)
    worst = 0.0
    used = set()
    for _ in range(r):
        i, j = np.unravel_index(np.argmax(corr), corr.shape)
        used.add(int(j))
        corr[i, :], corr[:, j] = -1, -1
        for truth, found in ((true_b[:, i], found_b[:, j]),
                             (true_g[:, i], found_g[:, j])):
            worst = max(worst, np.linalg.norm(unitize(truth) - unitize(found)))
    if len(used) < r:
        return np.inf
    return worst


def test_criterion_1_golden_example(golden_tensor):
    start = time.perf_counter()
    dec, info = decompose_with_info(golden_tensor, 4)
    elapsed = time.perf_counter() - start
    err = info["backward_error"]
    dist = match_point_sets(dec.factors[1], dec.factors[2], GOLDEN_BETAS, GOLDEN_GAMMAS)
    ok = err <= 1e-12 and dist <= 1e-8 and elapsed < 1.0
    report(1, "golden example", ok,
           f"err={err:.2e} point-dist={dist:.2e} time={elapsed:.2f}s")


def test_criterion_2_golden_matrices(golden_tensor, golden_system):
    res = build_resultant(golden_system, (2, 1))
    matrix_ok = np.array_equal(res.toarray(), golden_resultant_dense())

    system = kernel_flattening(flatten_mode1(golden_tensor), 4, (3, 3))
    N = left_nullspace(build_resultant(system, (2, 1)), 4, method="svd")
    pnf = prenormal_general(N, 2, 2, (2, 1), rng=np.random.default_rng(0),
                            h0_coeffs=np.ones(3))
    family = multiplication_matrices(pnf)
    coords = simultaneous_diagonalize(family, seed=0).real

    eig_ok = True
    corr = np.abs((GOLDEN_EIG_ROWS / np.linalg.norm(GOLDEN_EIG_ROWS, axis=0)).T
                  @ (coords / np.linalg.norm(coords, axis=0)))
    perm = corr.argmax(axis=1)
    eig_ok = len(set(perm.tolist())) == 4 and np.allclose(
        coords[:, perm], GOLDEN_EIG_ROWS, atol=1e-6)
    report(2, "golden matrices", matrix_ok and eig_ok,
           f"matrix={'exact' if matrix_ok else 'MISMATCH'} eigenvalues={'ok' if eig_ok else 'MISMATCH'}")


def test_criterion_3_hilbert_tables():
    start = time.perf_counter()
    cells = [(2, 2, 4, (1, 1), 4), (2, 2, 4, (2, 1), 4),
             (2, 2, 4, (1, 2), 4), (2, 2, 4, (2, 2), 4),
             (6, 2, 12, (1, 1), 12), (6, 2, 12, (2, 1), 21),
             (6, 2, 12, (3, 1), 12), (6, 2, 12, (1, 2), 15),
             (6, 2, 12, (1, 5), 12)]
    bad = []
    for m, n, r, degree, expected in cells:
        hits = sum(
            hilbert_from_points(random_config(m, n, r, seed=seed), degree) == expected
            for seed in range(10)
        )
        if hits < 9:
            bad.append((m, n, r, degree, hits))
    elapsed = time.perf_counter() - start
    report(3, "hilbert tables", not bad and elapsed < 10.0,
           f"bad-cells={bad} time={elapsed:.1f}s")


def test_criterion_4_regularity_bound():
    ok = (rank_bound(6, 2, 2, 1) == Fraction(21, 2)
          and rank_bound(6, 2, 3, 1) == Fraction(112, 9)
          and tuple(select_degree(6, 2, 12, 11).degree) == (3, 1))
    report(4, "regularity bound", ok)


def test_criterion_5_certification_sweep():
    start = time.perf_counter()
    failures = []
    for m1 in range(2, 11):
        for n1 in range(2, 11):
            m, n = m1 - 1, n1 - 1
            r = math.floor(min(rank_bound(m, n, 2, 1), m * n))
            cert = certify_regularity(m, n, 2, r, p=8191, trials=3, seed=0)
            if not cert["success"]:
                failures.append((m, n, r))
    elapsed = time.perf_counter() - start
    report(5, "certification sweep", not failures and elapsed < 120.0,
           f"cells=81 failures={failures} time={elapsed:.1f}s")


@pytest.fixture(scope="module")
def accuracy_grid():
    """Criterion 6/7 shared data: errors for every format, seed, kernel and
    Newton setting over the scaled accuracy-sweep grid, plus the wall time
    the whole grid took."""
    start = time.perf_counter()
    results = {}
    for m1 in range(2, 11):
        for n1 in range(2, m1 + 1):
            m, n = m1 - 1, n1 - 1
            r = math.floor(min(rank_bound(m, n, 2, 1), m * n))
            if r < 1:
                continue
            for seed in range(5):
                t, _ = random_cpd((r, m1, n1), r, seed=10_000 + seed)
                for kernel in ("svd", "eigs"):
                    errs = {}
                    for newton in (0, 3):
                        _, info = decompose_with_info(
                            t, r, DecomposeOptions(kernel=kernel, seed=7,
                                                   newton_iters=newton))
                        errs[newton] = info["backward_error"]
                    results[(m1, n1, r, seed, kernel)] = errs
    return results, time.perf_counter() - start


def test_criterion_6_accuracy_sweep(accuracy_grid):
    grid, elapsed = accuracy_grid
    bad_median, bad_agree = [], []
    formats = sorted({(m1, n1, r) for m1, n1, r, _, _ in grid})
    for m1, n1, r in formats:
        for kernel in ("svd", "eigs"):
            errs = [grid[(m1, n1, r, s, kernel)][3] for s in range(5)]
            if np.median(errs) > 1e-10:
                bad_median.append((m1, n1, kernel, float(np.median(errs))))
        for s in range(5):
            pair = [grid[(m1, n1, r, s, k)][3] for k in ("svd", "eigs")]
            if max(pair) > 10 * min(pair) and max(pair) > 1e-14:
                bad_agree.append((m1, n1, s, pair))
    ok = not bad_median and not bad_agree and elapsed < 600.0
    report(6, "accuracy sweep", ok,
           f"formats={len(formats)} bad-median={bad_median[:3]} "
           f"bad-agreement={bad_agree[:3]} grid-time={elapsed:.1f}s")


def test_criterion_7_newton_effect(accuracy_grid):
    grid, _ = accuracy_grid
    violations = []
    eligible, improved = 0, 0
    for key, errs in grid.items():
        pre, post = errs[0], errs[3]
        if post > pre:
            violations.append((key, pre, post))
        if pre >= 1e-10:
            eligible += 1
            if post <= 0.1 * pre:
                improved += 1
    frac_ok = (improved >= 0.5 * eligible) if eligible else True
    ok = not violations and frac_ok
    report(7, "newton effect", ok,
           f"trials={len(grid)} violations={len(violations)} "
           f"eligible={eligible} improved={improved}")


def test_criterion_8_noise_robustness():
    start = time.perf_counter()
    failing_cells = []
    for r in (5, 10, 20, 30):
        for e in range(-15, -4):
            hits = 0
            errs = []
            for s in range(5):
                base = 100_003 * s
                t, _ = random_cpd((50, 10, 5), r, seed=base)
                noisy = add_noise(t, e, seed=base + 1)
                try:
                    _, info = decompose_with_info(
                        noisy, r, DecomposeOptions(seed=base + 2))
                    err = info["backward_error"]
                except cpdhnf.CpdError:
                    err = math.inf
                errs.append(err)
                if err <= 10.0 ** e:
                    hits += 1
            if hits / 5 < 0.9:
                failing_cells.append((r, e, hits, float(max(errs))))
    elapsed = time.perf_counter() - start
    report(8, "noise robustness", not failing_cells and elapsed < 300.0,
           f"failing-cells={failing_cells} time={elapsed:.1f}s")


def test_criterion_9_higher_order_reshaping():
    start = time.perf_counter()
    t, _ = random_cpd((4, 4, 3, 3, 3), 20, seed=99)
    try:
        _, info = decompose_with_info(t, 20)
        elapsed = time.perf_counter() - start
        ok = info["backward_error"] <= 1e-10 and elapsed < 30.0
        detail = f"err={info['backward_error']:.2e} time={elapsed:.1f}s"
    except NoFeasibleGrouping as exc:
        ok = False
        detail = f"no grouping satisfies the rank condition: {exc.args[0]}"
    report(9, "higher-order reshaping", ok, detail)


def test_criterion_10_pencil_general_consistency():
    cases = []
    for dims in ((9, 6, 5), (10, 7, 4), (8, 5, 5), (12, 6, 4)):
        for r in (3, 4, 5):
            cases.append((dims, r))
    cases = cases[:20] + [((11, 8, 5), r) for r in (4, 5)][: max(0, 20 - len(cases))]
    worst = 0.0
    for idx, (dims, r) in enumerate(cases[:20]):
        t, _ = random_cpd(dims, r, seed=500 + idx)
        d1, _ = decompose_with_info(t, r, DecomposeOptions(path="pencil", seed=3))
        d2, _ = decompose_with_info(t, r, DecomposeOptions(path="normal-form", seed=3))
        dist = max(
            match_point_sets(d1.factors[1], d1.factors[2],
                             d2.factors[1], d2.factors[2]), 0.0)
        worst = max(worst, dist)
    report(10, "pencil/general consistency", worst <= 1e-9,
           f"instances=20 worst-dist={worst:.2e}")


def test_criterion_11_property_suites():
    rng = np.random.default_rng(0)

    # commuting multiplication families from evaluation-built forms
    comm_ok = True
    for m, n, r, seed in [(3, 2, 6, 1), (5, 4, 14, 2), (9, 6, 40, 3)]:
        betas = np.random.default_rng(seed).standard_normal((m + 1, r))
        gammas = np.random.default_rng(seed + 50).standard_normal((n + 1, r))
        basis = monomial_basis(m, n, (2, 1))
        N = np.array([
            [np.prod(betas[:, i] ** np.array(a)) * np.prod(gammas[:, i] ** np.array(b))
             for a, b in basis.exponents]
            for i in range(r)
        ])
        pnf = prenormal_general(N, m, n, (2, 1), rng=np.random.default_rng(seed))
        family = multiplication_matrices(pnf)
        comm_ok = comm_ok and family.commutation_residual() <= 1e-8

    # Jacobian against central differences
    from cpdhnf import evaluate, jacobian
    jac_ok = True
    for seed in range(5):
        t, _ = random_cpd((8, 5, 4), 6, seed=seed)
        system = kernel_flattening(flatten_mode1(t), 6, (5, 4))
        beta = rng.standard_normal(5)
        gamma = rng.standard_normal(4)
        J = jacobian(system, beta, gamma)
        h = 1e-6
        fd = np.zeros_like(J)
        x = np.concatenate([beta, gamma])
        for j in range(9):
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            fd[:, j] = (evaluate(system, xp[:5], xp[5:])
                        - evaluate(system, xm[:5], xm[5:])) / (2 * h)
        jac_ok = jac_ok and np.linalg.norm(J - fd) <= 1e-6

    # universal lower bound over 200 random cells
    lower_ok = True
    cell_rng = np.random.default_rng(1)
    for _ in range(200):
        m, n = (int(x) for x in cell_rng.integers(1, 6, size=2))
        r = int(cell_rng.integers(1, max(m * n, 2)))
        d, e = (int(x) for x in cell_rng.integers(1, 4, size=2))
        config = random_config(m, n, r, seed=int(cell_rng.integers(1 << 30)))
        if hilbert_from_points(config, (d, e)) < r:
            lower_ok = False
            break

    # above the rank bound the value always exceeds the point count
    region_ok = True
    for m, n, d in [(6, 2, 2), (4, 3, 2), (5, 2, 2), (6, 2, 1)]:
        degree = (d, 1) if d > 1 else (1, 2)
        bound = rank_bound(m, n, *degree)
        lo = math.floor(bound) + 1
        for r in range(lo, m * n + 1):
            config = random_config(m, n, r, seed=r)
            if hilbert_from_points(config, degree) <= r:
                region_ok = False
    ok = comm_ok and jac_ok and lower_ok and region_ok
    report(11, "property suites", ok,
           f"commutation={comm_ok} jacobian={jac_ok} lower-bound={lower_ok} "
           f"excluded-region={region_ok}")
