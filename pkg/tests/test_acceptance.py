"""Acceptance criteria, one test each; every test records a pass/fail line."""

import itertools
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from quanta_timing import analytic_bounds as ab
from quanta_timing.distributions import DeadlineInputDensity, exponential, weibull
from quanta_timing.permutation import count_admissible, perm_entropy, perm_pmf
from quanta_timing.simulation import (
    EpochConfig,
    estimate_epoch_coverage,
    estimate_h_omega,
    estimate_mi_decomposition,
    epoch_feasibility,
)

E = math.e


def record(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _brute_counts(t, s, block=400):
    """Exhaustive count for each row by checking every permutation."""
    M = t.shape[1]
    perms = np.array(list(itertools.permutations(range(M))))
    out = []
    for i in range(0, t.shape[0], block):
        ss = s[i:i + block][:, perms]
        ok = np.all(ss >= t[i:i + block, None, :], axis=2)
        out.append(ok.sum(axis=1))
    return np.concatenate(out)


def test_criterion_1_count_oracle():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    mismatches = 0
    for M in range(2, 8):
        n = 10_000
        t = rng.random((n, M)) * 2.0
        s = t + rng.exponential(1.0, (n, M))
        # a quarter of the instances are unconstrained, a quarter on an integer grid with ties
        free = rng.random(n) < 0.25
        s[free] = rng.random((int(free.sum()), M)) * 3.0
        grid = rng.random(n) < 0.25
        t[grid] = rng.integers(0, 4, (int(grid.sum()), M))
        s[grid] = rng.integers(0, 6, (int(grid.sum()), M))
        brute = _brute_counts(t, s)
        fast = np.array([count_admissible(a, b) for a, b in zip(t, s)])
        mismatches += int(np.count_nonzero(brute != fast))
    elapsed = time.perf_counter() - start
    record(1, "permutation count equals enumeration", mismatches == 0 and elapsed < 30,
           f"{mismatches} mismatches in 60000 instances, {elapsed:.1f}s")


def test_criterion_2_exponential_uniformity():
    rng = np.random.default_rng(102)
    ex, wb = exponential(1.0), weibull(1.0, 2.0)
    spread, strict_ok, strict_cases = 0.0, True, 0
    for _ in range(1000):
        M = int(rng.integers(2, 8))
        t = rng.random(M) * 2.0
        s = np.sort(t + rng.exponential(1.0, M))
        p = perm_pmf(ex, t, s).probs
        spread = max(spread, float(p.max() - p.min()))
        n = count_admissible(t, s)
        if n >= 2:
            strict_cases += 1
            strict_ok &= perm_entropy(wb, t, s) < math.log(n)
    record(2, "exponential posterior uniform, Weibull strictly below log count",
           spread < 1e-12 and strict_ok and strict_cases > 0,
           f"max spread {spread:.1e}, {strict_cases} strict cases")


def test_criterion_3_delta_gamma_consistency():
    ex = exponential(1.0)
    worst = 0.0
    for lt in (0.5, 1.0, E, 10.0):
        law = DeadlineInputDensity.from_lambda_tau(lt)
        moments = {k: law.expected_phi_pow(ex, k) for k in range(1, 12)}
        for M in range(2, 13):
            closed = ab.delta_gamma_deadline_all(M, lt)
            for ell in range(1, M):
                worst = max(worst, abs(ab.delta_gamma_general(law, ex, M, ell, moments) - closed[ell + 1]))
    record(3, "generic dGamma equals closed form", worst < 1e-9, f"max diff {worst:.1e}")


def test_criterion_4_h_omega_monte_carlo():
    ex = exponential(1.0)
    start = time.perf_counter()
    worst_z = 0.0
    for i, M in enumerate((2, 4, 8)):
        for j, lt in enumerate((1.0, E, 10.0)):
            rep = estimate_h_omega(DeadlineInputDensity.from_lambda_tau(lt), ex, M, 100_000, seed=400 + 10 * i + j)
            worst_z = max(worst_z, abs(rep.mean - ab.h_omega_exponential(M, lt)) / rep.stderr)
    elapsed = time.perf_counter() - start
    record(4, "closed-form permutation entropy matches Monte Carlo", worst_z <= 3.0 and elapsed < 120,
           f"worst |z| {worst_z:.2f}, {elapsed:.1f}s")


def test_criterion_5_mi_decomposition():
    law = DeadlineInputDensity.from_lambda_tau(E)
    rep = estimate_mi_decomposition(law, exponential(1.0), 2, 1_000_000, seed=500)
    record(5, "histogram MI matches decomposition at M=2", rep.gap_analytic < 0.05,
           f"lhs {rep.lhs:.4f} vs {rep.rhs_analytic:.4f}, gap {rep.gap_analytic:.4f}")


def test_criterion_6_capacity_convergence():
    vals = [ab.cq_finite(2**k, 2.0) for k in range(15)]
    increasing = all(b > a for a, b in zip(vals, vals[1:]))
    gap = abs(vals[-1] - ab.cq_series(2.0))
    lam = 1.0
    grid = np.exp(np.linspace(math.log(0.25), math.log(32.0), 4097))
    ct = np.array([ab.ct_bound(lam, c, "simple") for c in grid])
    step = float(np.diff(np.log(grid))[0])
    peak = float(grid[np.argmax(ct)])
    ok = (increasing and gap < 0.01 and ab.cq_simple(E) == 1.0
          and abs(math.log(peak) - 1.0) <= step and abs(ct.max() - lam / E) < 1e-6)
    record(6, "finite-M bound converges, simple bound peaks at chi=e", ok,
           f"gap {gap:.1e} at M=2^14, peak chi {peak:.4f}")


def test_criterion_7_epoch_coverage():
    model = exponential(1.0)
    worst = math.inf
    for i, M in enumerate((8, 64)):
        for j, eps in enumerate((0.05, 0.1, 0.5)):
            cfg = EpochConfig(M, 1.0, eps)
            rep = estimate_epoch_coverage(model, cfg, 100_000, seed=700 + 10 * i + j)
            bound = epoch_feasibility(model, M, 1.0, eps).worst_case_cdf
            margin = (rep.mean - bound) / max(rep.stderr, 1e-300)
            worst = min(worst, margin)
    record(7, "coverage never below worst-case CDF", worst >= -3.0, f"min margin {worst:.2f} stderr")


def test_criterion_8_bound_caps():
    bad = 0
    count = 0
    for M in (1, 2, 3, 5, 8, 16, 64, 256, 1024, 16384):
        for lt in np.logspace(-3, 3, 25):
            he = ab.h_omega_exponential(M, lt)
            bad += not (0.0 <= he + 1e-12 and he <= math.lgamma(M + 1) + 1e-9)
            bad += not (ab.mi_ordered_lower(M, lt) / M <= math.log1p(lt / E) + 1e-12)
            count += 1
    for M in (2**k for k in range(15)):
        for chi in (0.25, 1.0, 2.0, E, 8.0, 32.0):
            bad += not (ab.cq_finite(M, chi) <= math.log1p(chi * M / E) + 1e-12)
            count += 1
    record(8, "entropy and data-processing caps", bad == 0, f"{bad} violations in {count} points")
