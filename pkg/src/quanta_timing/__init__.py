"""Exact and Monte Carlo quantities for the identical-quanta release-timing channel."""

from .analytic_bounds import (
    BinomialMixture,
    BoundPoint,
    binom_expect_log_factorial,
    cq_finite,
    cq_series,
    cq_simple,
    ct_bound,
    delta_gamma_deadline,
    delta_gamma_general,
    gamma_bar,
    h_omega_exponential,
    h_up,
    mi_ordered_lower,
    theta_bar_iid,
)
from .distributions import (
    DeadlineInputDensity,
    EmissionSchedule,
    FirstPassageModel,
    PointMassEmission,
    UniformEmission,
    expected_phi_pow,
    exponential,
    order_stat_density_iid,
    phi,
    sample_emissions,
    sample_passage,
    weibull,
)
from .permutation import (
    BinOccupancy,
    PermutationPMF,
    count_admissible,
    enumerate_admissible,
    perm_entropy,
    perm_pmf,
)
from .simulation import (
    ChannelUseSample,
    EpochConfig,
    EstimateReport,
    epoch_feasibility,
    estimate_h_omega,
    estimate_mi_decomposition,
    simulate_channel_use,
)

__version__ = "0.1.0"
