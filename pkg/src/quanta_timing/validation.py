"""Self-check suites run by ``quanta-timing validate``.

Each suite returns a dict with ``name``, ``passed``, ``tolerance`` and the
measured quantities.  Monte Carlo suites use 3-sigma tolerances.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import analytic_bounds as ab
from .distributions import (DeadlineInputDensity, PointMassEmission, UniformEmission,
                            exponential, weibull)
from .permutation import count_admissible, enumerate_admissible, perm_entropy, perm_pmf
from .simulation import (EpochConfig, estimate_epoch_coverage, estimate_h_omega,
                         estimate_log_count, estimate_mi_decomposition, epoch_feasibility)

LAM_TAU_GRID = (1.0, math.e, 10.0)


def suite_seed(root: int, k: int) -> int:
    return int(np.random.SeedSequence([root, k]).generate_state(1, np.uint32)[0])


def _random_instance(rng, M):
    lt = float(rng.choice([0.2, 1.0, 5.0]))
    t = DeadlineInputDensity.from_lambda_tau(lt).sample(rng, M)
    s = t + rng.exponential(1.0, M)
    if rng.random() < 0.2:
        s = rng.random(M) * (lt + 1.0)
    return t, np.sort(s)


def permutation_count_oracle(seed: int, per_m: int = 500) -> dict:
    rng = np.random.default_rng(seed)
    mismatches = 0
    for M in range(2, 8):
        for _ in range(per_m):
            t, s = _random_instance(rng, M)
            if count_admissible(t, s) != len(enumerate_admissible(t, s)):
                mismatches += 1
    return {"name": "permutation_count_oracle", "passed": bool(mismatches == 0),
            "mismatches": mismatches, "instances": 6 * per_m, "tolerance": 0, "seed": seed}


def permutation_uniformity(seed: int, instances: int = 300) -> dict:
    rng = np.random.default_rng(seed)
    ex, wb = exponential(1.0), weibull(1.0, 2.0)
    spread = 0.0
    strict_ok = True
    strict_cases = 0
    for _ in range(instances):
        M = int(rng.integers(2, 7))
        t = rng.random(M) * 2.0
        s = np.sort(t + rng.exponential(1.0, M))
        pmf = perm_pmf(ex, t, s)
        spread = max(spread, float(pmf.probs.max() - pmf.probs.min()))
        n = count_admissible(t, s)
        if n >= 2:
            strict_cases += 1
            strict_ok &= perm_entropy(wb, t, s) < math.log(n)
    return {"name": "permutation_uniformity", "passed": bool(spread < 1e-12 and strict_ok),
            "max_spread": spread, "weibull_strict": strict_ok, "weibull_cases": strict_cases,
            "tolerance": 1e-12, "seed": seed}


def delta_gamma_consistency(max_M: int = 12) -> dict:
    ex = exponential(1.0)
    worst = 0.0
    for lt in (0.5, 1.0, math.e, 10.0):
        law = DeadlineInputDensity.from_lambda_tau(lt)
        moments = {k: law.expected_phi_pow(ex, k) for k in range(1, max_M)}
        for M in range(2, max_M + 1):
            closed = ab.delta_gamma_deadline_all(M, lt)
            for ell in range(1, M):
                gen = ab.delta_gamma_general(law, ex, M, ell, moments)
                worst = max(worst, abs(gen - closed[ell + 1]))
    return {"name": "delta_gamma_consistency", "passed": bool(worst < 1e-9), "max_abs_diff": worst,
            "tolerance": 1e-9}


def h_omega_monte_carlo(seed: int, n: int, workers: int = 1) -> dict:
    ex = exponential(1.0)
    points = []
    ok = True
    for i, M in enumerate((2, 4, 8)):
        for j, lt in enumerate(LAM_TAU_GRID):
            law = DeadlineInputDensity.from_lambda_tau(lt)
            rep = estimate_h_omega(law, ex, M, n, suite_seed(seed, 10 * i + j), workers)
            exact = ab.h_omega_exponential(M, lt)
            z = abs(rep.mean - exact) / rep.stderr
            ok &= z <= 3.0
            points.append({"M": M, "lam_tau": lt, "analytic": exact, **rep.to_dict(), "z": z})
    return {"name": "h_omega_monte_carlo", "passed": bool(ok), "points": points,
            "tolerance": "3 stderr"}


def degenerate_density(seed: int, n: int, M: int = 4) -> dict:
    rep = estimate_h_omega(PointMassEmission(0.0), exponential(1.0), M, n, seed)
    target = math.log(math.factorial(M))
    gap = abs(rep.mean - target)
    return {"name": "degenerate_density", "passed": bool(gap < 1e-12), "mean": rep.mean,
            "log_M_factorial": target, "gap": gap, "tolerance": 1e-12, "seed": seed}


def count_bound_non_exponential(seed: int, n: int, M: int = 4) -> dict:
    """Weibull passage: paired ``H <= log|Omega|`` and ``E log|Omega| = h_up``."""
    law, wb = UniformEmission(1.0), weibull(1.0, 2.0)
    h = estimate_h_omega(law, wb, M, n, seed)
    c = estimate_log_count(law, wb, M, n, seed)
    bound = ab.h_up(law, wb, M)
    z = abs(c.mean - bound) / c.stderr
    ok = h.mean <= c.mean and h.mean < bound and z <= 3.0
    return {"name": "count_bound_non_exponential", "passed": bool(ok), "h_omega": h.to_dict(),
            "log_count": c.to_dict(), "h_up": bound, "z": z, "tolerance": "3 stderr"}


def mi_decomposition(seed: int, n: int, workers: int = 1) -> dict:
    law = DeadlineInputDensity.from_lambda_tau(math.e)
    rep = estimate_mi_decomposition(law, exponential(1.0), 2, n, seed, workers=workers)
    return {"name": "mi_decomposition", "passed": bool(rep.gap_analytic < 0.05),
            "lhs": rep.lhs, "rhs_analytic": rep.rhs_analytic, "rhs_mc": rep.rhs,
            "gap": rep.gap_analytic, "tolerance": 0.05, "n": n, "seed": seed}


def capacity_convergence(lam: float = 1.0) -> dict:
    vals = [ab.cq_finite(2 ** k, 2.0) for k in range(0, 15)]
    increasing = all(b > a for a, b in zip(vals, vals[1:]))
    series = ab.cq_series(2.0)
    gap = abs(vals[-1] - series)
    grid = np.exp(np.linspace(math.log(0.25), math.log(32.0), 4097))
    ct = np.array([ab.ct_bound(lam, c, "simple") for c in grid])
    peak = float(grid[np.argmax(ct)])
    ok = increasing and gap < 0.01 and ab.cq_simple(math.e) == 1.0 and abs(ct.max() - lam / math.e) < 1e-6
    return {"name": "capacity_convergence", "passed": bool(ok), "increasing": increasing,
            "gap_at_2^14": gap, "cq_simple_e": ab.cq_simple(math.e), "ct_peak_chi": peak,
            "ct_peak": float(ct.max()), "tolerance": 0.01}


def epoch_coverage(seed: int, n: int, rho: float, eps: float, lam: float = 1.0,
                   workers: int = 1) -> dict:
    model = exponential(lam)
    points = []
    ok = True
    for i, M in enumerate((8, 64)):
        cfg = EpochConfig(M, rho, eps)
        diag = epoch_feasibility(model, M, rho, eps)
        rep = estimate_epoch_coverage(model, cfg, n, suite_seed(seed, i), workers=workers)
        ok &= rep.mean >= diag.worst_case_cdf - 3.0 * rep.stderr
        points.append({"M": M, "worst_case_cdf": diag.worst_case_cdf, "verdict": diag.verdict,
                       **rep.to_dict()})
    return {"name": "epoch_coverage", "passed": bool(ok), "points": points,
            "tolerance": "3 stderr"}


def bound_caps() -> dict:
    ok = True
    for M in (1, 2, 3, 5, 8, 16, 64, 256, 1024):
        for lt in (1e-3, 0.1, 0.5, 1.0, math.e, 10.0, 100.0):
            he = ab.h_omega_exponential(M, lt)
            ok &= -1e-12 <= he <= math.lgamma(M + 1) + 1e-9
            ok &= ab.mi_ordered_lower(M, lt) / M <= math.log1p(lt / math.e) + 1e-12
    return {"name": "bound_caps", "passed": bool(ok), "tolerance": 1e-9}


def run_all(seed: int, n: int, rho: float = 1.0, eps: float = 0.1, lam: float = 1.0,
            workers: int = 1, timings: bool = False) -> dict:
    jobs = [
        lambda: permutation_count_oracle(suite_seed(seed, 1)),
        lambda: permutation_uniformity(suite_seed(seed, 2)),
        delta_gamma_consistency,
        lambda: h_omega_monte_carlo(suite_seed(seed, 3), n, workers),
        lambda: degenerate_density(suite_seed(seed, 4), min(n, 10_000)),
        lambda: count_bound_non_exponential(suite_seed(seed, 5), min(n, 20_000)),
        # the 64x64 histogram needs ~10^6 draws at the default sample size
        lambda: mi_decomposition(suite_seed(seed, 6), 10 * n, workers),
        lambda: capacity_convergence(lam),
        lambda: epoch_coverage(suite_seed(seed, 7), n, rho, eps, lam, workers),
        bound_caps,
    ]
    results = []
    for job in jobs:
        start = time.perf_counter()
        res = job()
        if timings:
            res["seconds"] = round(time.perf_counter() - start, 3)
        results.append(res)
    return {"seed": seed, "samples": n, "passed": bool(all(r["passed"] for r in results)),
            "suites": results}
