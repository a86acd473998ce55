"""Acceptance criteria 1 to 8, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` and the verdict lines are
written straight to the terminal, bypassing output capture.
"""

import itertools
import math
import subprocess
import sys
import warnings
from fractions import Fraction

import numpy as np
import pytest

from moddist.embedding import expected_distance, squared_distance
from moddist.generators import (
    ModularDistanceParams,
    base_generators,
    integer_relation_divisibility,
    triangle_free_check_bruteforce,
    truncated_generators,
    weight_function,
)
from moddist.quotient_graphs import (
    DEFAULT_VERTEX_CAP,
    DOMINANCE_TOL,
    CollisionWarning,
    build_quotient,
    independence_number_exact,
    max_independent_set_exhaustive,
    spectral_ratio_of,
)
from moddist.spectral import (
    DEFAULT_MARGIN,
    DegenerateQuotient,
    chi_lower_bound,
    circulant_eigenvalues,
    check_quotient,
    fejer_kernel,
    fejer_kernel_exact_at_zero,
    integral_comparison,
    ratio_bound,
    spectral_certificate,
)

from conftest import PQ_SWEEP

EIGEN_TOL = 1e-9
FEJER_TOL = 0.05
TREND_SLACK = 0.1
SWEEP_N = [4, 8, 16, 32]
GRID = 64
# rounding floor for summing 4kn cosines; overshoots below this are zero
DEFICIT_FLOOR = 1e-12


@pytest.fixture
def verdict(capsys):
    def emit(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {number}: {detail}"

    return emit


def full_sweep(max_k=3):
    for p, q in PQ_SWEEP:
        for k in range(1, max_k + 1):
            yield ModularDistanceParams(p, q, k)


def test_criterion_1_exact_embedding(verdict):
    bad, count = [], 0
    for params in full_sweep():
        for n in range(1, 9):
            gens = truncated_generators(params, n)
            assert len(gens) == 4 * params.k * n
            for g in gens:
                count += 1
                d = expected_distance(params, g.atom, g.scale)
                if squared_distance(params, g.vector) != d * d or d % params.q != params.p:
                    bad.append((params, g))
    verdict(1, not bad, f"{count} generators checked, {len(bad)} mismatches")


def test_criterion_2_total_weight(verdict):
    bad = [
        (params, n)
        for params in full_sweep()
        for n in range(1, 9)
        if weight_function(params, n).total_weight != 2 * params.k
    ]
    verdict(2, not bad, f"total weight == 2k exactly; failures: {bad}")


def _dense(w, m):
    B = np.zeros((m * m, m * m))
    for i, j in itertools.product(range(m), repeat=2):
        for (x, y), wt in w.entries.items():
            B[i * m + j, ((i + x) % m) * m + (j + y) % m] += float(wt)
    return B


def test_criterion_3_circulant_oracle(verdict):
    worst, checked, skipped = 0.0, [], []
    for n in (1, 2):
        w = weight_function(ModularDistanceParams(1, 2, 1), n)
        for m in (3, 5, 6):
            try:
                fast = np.sort(circulant_eigenvalues(w, m).ravel())
            except DegenerateQuotient:
                skipped.append((n, m))
                continue
            dense = np.linalg.eigvalsh(_dense(w, m))
            worst = max(worst, float(np.max(np.abs(fast - dense))))
            checked.append((n, m))
    verdict(
        3, checked and worst <= EIGEN_TOL,
        f"max eigenvalue error {worst:.2e} over (n, m) {checked}; degenerate {skipped}",
    )


def test_criterion_4_ratio_dominance(verdict):
    instances, exhaustive, worst_margin, failures = 0, 0, math.inf, []
    for params in full_sweep(max_k=2):
        for n in (1, 2, 3):
            w = weight_function(params, n)
            for m in range(2, 11):
                if m * m > DEFAULT_VERTEX_CAP:
                    continue
                try:
                    check_quotient(w, m)
                except DegenerateQuotient:
                    continue
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", CollisionWarning)
                    g = build_quotient(w, m)
                rep = independence_number_exact(g)
                ratio, _, _ = spectral_ratio_of(w, m)
                instances += 1
                worst_margin = min(worst_margin, ratio - float(rep.density))
                if float(rep.density) > ratio + DOMINANCE_TOL:
                    failures.append((params, n, m, "dominance"))
                if m * m <= 25:
                    exhaustive += 1
                    if len(max_independent_set_exhaustive(g.neighbour_masks())) != rep.alpha:
                        failures.append((params, n, m, "exhaustive"))
    verdict(
        4, instances > 0 and not failures,
        f"{instances} quotients, {exhaustive} cross-checked exhaustively, "
        f"min(ratio - alpha/m^2) = {worst_margin:.3g}, failures {failures}",
    )


def test_criterion_5_triangle_free(verdict):
    witnesses, pairs, triples, kernel_failures = [], 0, 0, []
    for params in full_sweep():
        for max_scale in range(1, 5):
            cert = triangle_free_check_bruteforce(params, max_scale)
            pairs += cert.pairs_checked
            if not cert.passed:
                witnesses.append((params, cert.witness))
        atoms = [a for a in base_generators(params) if a.sign == 1]
        for triple in itertools.combinations(atoms, 3):
            triples += 1
            try:
                integer_relation_divisibility(params, list(triple))
            except AssertionError as exc:
                kernel_failures.append(str(exc))
    verdict(
        5, not witnesses and not kernel_failures,
        f"{pairs} sum pairs, {triples} atom triples; witnesses {witnesses}, "
        f"divisibility failures {kernel_failures}",
    )


def test_criterion_6_fejer(verdict):
    at_zero = all(
        fejer_kernel_exact_at_zero(n) == Fraction(1, 2) and fejer_kernel(n, q, 0.0) == 0.5
        for n in range(1, 65)
        for q in (2, 3, 5)
    )
    rng = np.random.default_rng(20240601)
    ells = rng.uniform(-200.0, 200.0, size=10_000)
    nonneg = all(integral_comparison(float(x)) >= 0 for x in ells if x != 0)
    n, worst = 256, 0.0
    for q in (2, 3, 5):
        for theta in rng.uniform(1e-5, 20.0 / (2 * math.pi * n * q), size=200):
            ell = 2 * math.pi * n * q * theta
            worst = max(worst, abs(fejer_kernel(n, q, theta) - integral_comparison(ell)))
    verdict(
        6, at_zero and nonneg and worst <= FEJER_TOL,
        f"K(0) = 1/2: {at_zero}; comparison >= 0 on 10^4 samples: {nonneg}; "
        f"max |kernel - integral| at n=256 = {worst:.2e}",
    )


@pytest.mark.slow
def test_criterion_7_chromatic_trend(verdict):
    clauses, lines = {}, []
    for k in (1, 2):
        params = ModularDistanceParams(1, 2, k)
        certs = [spectral_certificate(weight_function(params, n), GRID) for n in SWEEP_N]
        deficits = [-2.0 - c.inf_estimate for c in certs]
        deficits = [d if d > DEFICIT_FLOOR else 0.0 for d in deficits]
        # (a) any overshoot below -2 must shrink as n grows
        shrinking = all(
            b < a or a == b == 0.0 for a, b in zip(deficits, deficits[1:])
        )
        target = 1 / (k + 1) + TREND_SLACK
        best_ratio = min(c.alpha_ratio_bound for c in certs)
        best_chi = max(chi_lower_bound(c.alpha_ratio_bound, DEFAULT_MARGIN) for c in certs)
        clauses[f"k={k} (a) shrinking deficit"] = shrinking
        clauses[f"k={k} (b) ratio <= {target:.3f}"] = best_ratio <= target
        clauses[f"k={k} (b) chi >= {k + 1}"] = best_chi >= k + 1
        lines.append(
            f"k={k}: inf {[round(c.inf_estimate, 4) for c in certs]}, "
            f"ratio {[round(c.alpha_ratio_bound, 4) for c in certs]}, best chi {best_chi}"
        )
    failed = [name for name, ok in clauses.items() if not ok]
    verdict(7, not failed, "; ".join(lines) + f"; failing clauses: {failed}")


def test_criterion_8_determinism(verdict, tmp_path):
    argv = [
        sys.executable, "-m", "moddist.cli", "report", "--p", "1", "--q", "2", "--k", "2",
        "--n", "2", "--n-sweep", "2,4", "--grid", "16", "--m", "5,7", "--max-scale", "2",
    ]
    runs = [subprocess.run(argv, capture_output=True, check=False) for _ in range(2)]
    same = runs[0].stdout == runs[1].stdout and runs[0].returncode == runs[1].returncode
    verdict(
        8, same and runs[0].returncode == 0 and runs[0].stdout,
        f"two report runs, {len(runs[0].stdout)} bytes each, identical: {same}",
    )
