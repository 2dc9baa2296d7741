import math

import numpy as np
import pytest

from quanta_timing import analytic_bounds as ab
from quanta_timing.distributions import (
    DeadlineInputDensity,
    PointMassEmission,
    UniformEmission,
    exponential,
    weibull,
)
from quanta_timing.simulation import (
    CHUNK,
    EpochConfig,
    EstimateReport,
    estimate_epoch_coverage,
    estimate_h_omega,
    estimate_log_count,
    estimate_mi_decomposition,
    epoch_feasibility,
    simulate_batch,
    simulate_channel_use,
    sorted_pair_entropy,
)

E = math.e


def test_channel_use_invariants(rng, expo, deadline_e):
    for M in (1, 2, 5, 9):
        u = simulate_channel_use(deadline_e, expo, M, rng)
        np.testing.assert_array_equal(u.s, u.t + u.d)
        assert np.all(np.diff(u.s_sorted) > 0)
        np.testing.assert_array_equal(u.s[list(u.omega)], u.s_sorted)
        assert u.M == M
    assert simulate_channel_use(deadline_e, expo, 1, rng).omega == (0,)


def test_passage_mean_in_batch():
    t, d, s = simulate_batch(UniformEmission(1.0), exponential(2.0), 4, 250_000, np.random.default_rng(8))
    d = d.ravel()
    assert abs(d.mean() - 0.5) < 3 * d.std(ddof=1) / math.sqrt(d.size)
    np.testing.assert_array_equal(s, t + d.reshape(t.shape))


def test_all_emissions_on_atoms():
    law = DeadlineInputDensity.from_lambda_tau(E)
    M, n = 3, 200_000
    t, _, _ = simulate_batch(law, exponential(1.0), M, n, np.random.default_rng(9))
    hit = np.all((t == 0.0) | (t == law.tau), axis=1)
    p = (law.p0 + law.ptau) ** M
    assert abs(hit.mean() - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_estimate_report():
    r = EstimateReport.from_values(np.array([1.0, 2.0, 3.0, 4.0]), seed=3)
    assert r.mean == 2.5
    assert r.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert r.to_dict() == {"mean": 2.5, "stderr": r.stderr, "n": 4, "seed": 3}


def test_h_omega_example(expo, deadline_e):
    rep = estimate_h_omega(deadline_e, expo, 2, 100_000, seed=21)
    assert abs(rep.mean - ab.h_omega_exponential(2, E)) <= 3 * rep.stderr


@pytest.mark.parametrize("M", range(2, 9))
def test_h_omega_grid(expo, M):
    for j, lt in enumerate((0.5, 1.0, E, 10.0)):
        law = DeadlineInputDensity.from_lambda_tau(lt)
        rep = estimate_h_omega(law, expo, M, 100_000, seed=1000 + 10 * M + j)
        assert abs(rep.mean - ab.h_omega_exponential(M, lt)) <= 3 * rep.stderr


def test_degenerate_density_gives_log_factorial(expo):
    for M in (2, 4, 6):
        rep = estimate_h_omega(PointMassEmission(0.0), expo, M, 2000, seed=M)
        assert rep.mean == pytest.approx(math.lgamma(M + 1), abs=1e-12)
        assert rep.stderr < 1e-12


def test_non_exponential_entropy_below_log_count(wb2):
    law = UniformEmission(1.0)
    h = estimate_h_omega(law, wb2, 4, 20_000, seed=31)
    c = estimate_log_count(law, wb2, 4, 20_000, seed=31)
    assert h.mean < c.mean
    bound = ab.h_up(law, wb2, 4)
    assert abs(c.mean - bound) <= 3 * c.stderr
    assert h.mean < bound - 3 * h.stderr


@pytest.mark.parametrize("M", [3, 6])
def test_log_count_matches_h_up_weibull(M):
    law, wb = DeadlineInputDensity.from_lambda_tau(2.0), weibull(1.0, 1.7)
    c = estimate_log_count(law, wb, M, 100_000, seed=40 + M)
    assert abs(c.mean - ab.h_up(law, wb, M)) <= 3 * c.stderr


def test_h_omega_cap(expo):
    with pytest.raises(ValueError):
        estimate_h_omega(UniformEmission(1.0), expo, 9, 10, seed=0)


def test_same_seed_same_report(expo, deadline_e):
    a = estimate_h_omega(deadline_e, expo, 3, 1000, seed=5)
    b = estimate_h_omega(deadline_e, expo, 3, 1000, seed=5)
    assert a == b
    assert estimate_h_omega(deadline_e, expo, 3, 1000, seed=6) != a


def test_worker_count_does_not_change_result(expo, deadline_e):
    n = 2 * CHUNK + 17
    a = estimate_h_omega(deadline_e, expo, 3, n, seed=5, workers=1)
    b = estimate_h_omega(deadline_e, expo, 3, n, seed=5, workers=2)
    assert a == b


def test_mi_decomposition_at_e(expo, deadline_e):
    rep = estimate_mi_decomposition(deadline_e, expo, 2, 1_000_000, seed=77)
    assert rep.gap_analytic < 0.05
    assert rep.gap < 0.05
    assert abs(rep.h_sorted_hist - rep.h_sorted_theory) < 0.05
    d = rep.to_dict()
    assert d["gap"] == rep.gap and d["h_omega"]["n"] == 1_000_000


def test_mi_decomposition_vanishing_spread(expo):
    law = DeadlineInputDensity.from_lambda_tau(1e-3)
    rep = estimate_mi_decomposition(law, expo, 2, 400_000, seed=78)
    assert abs(rep.rhs_analytic) < 1e-3
    assert abs(rep.lhs) < 0.05


def test_mi_decomposition_rejects_bad_setup(expo, deadline_e):
    with pytest.raises(ValueError):
        estimate_mi_decomposition(deadline_e, expo, 3, 10, seed=0)
    with pytest.raises(ValueError):
        estimate_mi_decomposition(UniformEmission(1.0), expo, 2, 10, seed=0)
    with pytest.raises(ValueError):
        estimate_mi_decomposition(deadline_e, exponential(2.0), 2, 10, seed=0)


def test_sorted_pair_entropy_on_known_law():
    # sorted pair of two iid Exp(1): h = 2 - log 2
    x = np.sort(np.random.default_rng(12).exponential(1.0, (500_000, 2)), axis=1)
    assert sorted_pair_entropy(x) == pytest.approx(2 - math.log(2), abs=0.03)


def test_symmetric_statistic_unchanged_by_sorting():
    law, model, M, n = DeadlineInputDensity.from_lambda_tau(E), exponential(1.0), 4, 200_000
    t, _, s = simulate_batch(law, model, M, n, np.random.default_rng(13))
    q_sorted = np.sort(s, axis=1).sum(axis=1)
    np.testing.assert_allclose(q_sorted, s.sum(axis=1), rtol=1e-13)
    mean_t = law.pu * law.tau / 2 + law.ptau * law.tau
    exact = M * (mean_t + 1.0)
    assert abs(q_sorted.mean() - exact) <= 3 * q_sorted.std(ddof=1) / math.sqrt(n)


def test_epoch_diagnostics_direct_values():
    rep = epoch_feasibility(exponential(1.0), 64, 1.0, 0.1)
    assert abs(rep.worst_case_cdf - (1 - math.exp(-6.4)) ** 64) < 1e-12
    assert abs(rep.tail_mass - 64 * math.exp(-6.4)) < 1e-12
    assert rep.verdict == "feasible-trend" and rep.heuristic
    assert rep.probe[1] == pytest.approx(128 * math.exp(-12.8))


def test_epoch_verdict_for_shrinking_guard():
    # a guard fraction so small the tail still grows over the probe
    rep = epoch_feasibility(exponential(1.0), 2, 1.0, 0.01)
    assert rep.verdict == "infeasible-trend"


@pytest.mark.parametrize("M", [8, 64])
@pytest.mark.parametrize("eps", [0.05, 0.1, 0.5])
def test_epoch_coverage_beats_worst_case(M, eps):
    model = exponential(1.0)
    cfg = EpochConfig(M, 1.0, eps)
    assert cfg.tau == M and cfg.gamma == pytest.approx(eps * M)
    rep = estimate_epoch_coverage(model, cfg, 100_000, seed=M + int(100 * eps))
    assert rep.mean >= epoch_feasibility(model, M, 1.0, eps).worst_case_cdf - 3 * rep.stderr


def test_epoch_config_validation():
    with pytest.raises(ValueError):
        EpochConfig(4, 1.0, 0.0)
    with pytest.raises(ValueError):
        estimate_epoch_coverage(exponential(1.0), EpochConfig(4, 1.0, 0.1), 10, 0,
                                law=UniformEmission(10.0))
