"""Monte Carlo channel uses and the estimators that check the analytic results.

All estimators take a root ``seed``.  Samples are generated in fixed-size
chunks, each with its own child stream from ``SeedSequence(seed).spawn``,
so results do not depend on how many worker processes are used.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import logsumexp

from .analytic_bounds import h_omega_exponential, mi_unordered
from .distributions import E, DeadlineInputDensity, EmissionLaw, FirstPassageModel
from .permutation import ENUMERATION_CAP, _all_perms, log_count_admissible_batch, perm_entropy

CHUNK = 25_000


@dataclass(frozen=True)
class ChannelUseSample:
    t: np.ndarray
    d: np.ndarray
    s: np.ndarray
    s_sorted: np.ndarray
    omega: tuple

    @property
    def M(self) -> int:
        return self.t.size


def _has_ties(s):
    ss = np.sort(s, axis=-1)
    return np.any(np.diff(ss, axis=-1) == 0, axis=-1)


def simulate_channel_use(law: EmissionLaw, model: FirstPassageModel, M: int,
                         rng: np.random.Generator) -> ChannelUseSample:
    """One launch-and-capture of ``M`` quanta; redrawn on exact arrival ties."""
    while True:
        t = law.sample(rng, M)
        d = model.sample(rng, M)
        s = t + d
        if not _has_ties(s):
            break
    omega = np.argsort(s, kind="stable")
    return ChannelUseSample(t=t, d=d, s=s, s_sorted=s[omega], omega=tuple(int(i) for i in omega))


def simulate_batch(law: EmissionLaw, model: FirstPassageModel, M: int, n: int,
                   rng: np.random.Generator):
    """``n`` independent channel uses as ``(t, d, s)`` arrays of shape ``(n, M)``."""
    t = law.sample(rng, (n, M))
    d = model.sample(rng, (n, M))
    s = t + d
    tied = _has_ties(s)
    while np.any(tied):
        k = int(np.count_nonzero(tied))
        t[tied] = law.sample(rng, (k, M))
        d[tied] = model.sample(rng, (k, M))
        s[tied] = t[tied] + d[tied]
        tied = _has_ties(s)
    return t, d, s


@dataclass(frozen=True)
class EstimateReport:
    mean: float
    stderr: float
    n: int
    seed: int

    @classmethod
    def from_values(cls, values: np.ndarray, seed: int) -> "EstimateReport":
        n = values.size
        sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
        return cls(mean=float(np.mean(values)), stderr=sd / math.sqrt(n), n=n, seed=seed)

    def to_dict(self) -> dict:
        return asdict(self)


def _chunk_sizes(n: int):
    full, rest = divmod(n, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _run_chunks(fn, args: tuple, n: int, seed: int, workers: int = 1) -> np.ndarray:
    """Evaluate ``fn(*args, size, seed_seq)`` per chunk and concatenate in order."""
    if n < 1:
        raise ValueError("need at least one sample")
    sizes = _chunk_sizes(n)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [args + (size, child) for size, child in zip(sizes, children)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, *zip(*jobs)))
    else:
        parts = [fn(*job) for job in jobs]
    return np.concatenate(parts, axis=0)


def _h_omega_values(law, model, M, size, seed_seq):
    rng = np.random.default_rng(seed_seq)
    t, _, s = simulate_batch(law, model, M, size, rng)
    if model.is_exponential:
        # uniform posterior over admissible matchings
        return log_count_admissible_batch(t, s)
    s.sort(axis=1)
    return np.array([perm_entropy(model, ti, si) for ti, si in zip(t, s)])


def _log_count_values(law, model, M, size, seed_seq):
    rng = np.random.default_rng(seed_seq)
    t, _, s = simulate_batch(law, model, M, size, rng)
    return log_count_admissible_batch(t, s)


def estimate_h_omega(law: EmissionLaw, model: FirstPassageModel, M: int, n: int, seed: int,
                     workers: int = 1) -> EstimateReport:
    """Monte Carlo mean of the per-use permutation entropy ``H(Omega | s, t)``."""
    if M > ENUMERATION_CAP:
        raise ValueError(f"exact per-sample entropy capped at M={ENUMERATION_CAP}")
    vals = _run_chunks(_h_omega_values, (law, model, M), n, seed, workers)
    return EstimateReport.from_values(vals, seed)


def estimate_log_count(law: EmissionLaw, model: FirstPassageModel, M: int, n: int, seed: int,
                       workers: int = 1) -> EstimateReport:
    """Monte Carlo mean of ``log |Omega|``.  Same seed as ``estimate_h_omega`` gives paired samples."""
    vals = _run_chunks(_log_count_values, (law, model, M), n, seed, workers)
    return EstimateReport.from_values(vals, seed)


def _theta_values(law, model, M, m, ell, size, seed_seq):
    rng = np.random.default_rng(seed_seq)
    t = np.sort(law.sample(rng, (size, M)), axis=1)
    d = model.sample(rng, (size, m))
    late = np.sum(t[:, :m] + d >= t[:, m:m + 1], axis=1)
    return (late == ell).astype(float)


def estimate_theta_bar(law: EmissionLaw, model: FirstPassageModel, M: int, m: int, ell: int,
                       n: int, seed: int) -> EstimateReport:
    """Frequency with which exactly ``ell`` of the ``m`` earliest quanta arrive
    no earlier than the ``(m+1)``-th emission."""
    vals = _run_chunks(_theta_values, (law, model, M, m, ell), n, seed)
    return EstimateReport.from_values(vals, seed)


def log_conditional_density(model: FirstPassageModel, t: np.ndarray, s_sorted: np.ndarray) -> np.ndarray:
    """Row-wise ``log f(s_sorted | t)``: log-sum over matchings of ``prod g(s - t)``."""
    t = np.atleast_2d(t)
    s_sorted = np.atleast_2d(s_sorted)
    M = t.shape[1]
    if M > ENUMERATION_CAP:
        raise ValueError(f"matching sum capped at M={ENUMERATION_CAP}")
    perms = _all_perms(M)
    logg = model.logpdf(s_sorted[:, :, None] - t[:, None, :])
    cols = np.arange(M)
    per_perm = np.sum(logg[:, perms, cols], axis=2)
    return logsumexp(per_perm, axis=1)


def histogram_entropy_2d(x: np.ndarray, y: np.ndarray, bins: int = 64) -> float:
    """Differential entropy from equal-mass marginal bins with Miller-Madow correction."""
    q = np.linspace(0.0, 1.0, bins + 1)
    ex = np.quantile(x, q)
    ey = np.quantile(y, q)
    counts, _, _ = np.histogram2d(x, y, bins=[ex, ey])
    n = counts.sum()
    area = np.outer(np.diff(ex), np.diff(ey))
    nz = counts > 0
    p = counts[nz] / n
    h = -np.sum(p * np.log(p / area[nz]))
    return float(h + (np.count_nonzero(nz) - 1) / (2.0 * n))


def sorted_pair_entropy(s_sorted: np.ndarray, bins: int = 64) -> float:
    """Differential entropy of ordered pairs ``s1 < s2`` from samples.

    Works in ``(s1, s2 - s1)`` (unit Jacobian, so the triangular support
    becomes a quadrant) and squashes each coordinate with
    ``x -> 1 - exp(-x/c)``, ``c`` the sample mean, so the exponential tails
    do not end up in a few wide cells.  The squashing Jacobian is added back
    exactly as a sample mean.
    """
    a = s_sorted[:, 0]
    b = s_sorted[:, 1] - s_sorted[:, 0]
    jac = 0.0
    squashed = []
    for x in (a, b):
        c = float(np.mean(x))
        jac += float(np.mean(math.log(c) + x / c))
        squashed.append(-np.expm1(-x / c))
    return histogram_entropy_2d(squashed[0], squashed[1], bins) + jac


@dataclass(frozen=True)
class MIDecompositionReport:
    """Both sides of ``I(sorted S; T) = I(S; T) - (log M! - H(Omega | sorted S, T))``."""

    lam_tau: float
    n: int
    seed: int
    bins: int
    h_sorted_hist: float
    h_sorted_theory: float
    h_cond_mc: float
    h_cond_stderr: float
    lhs: float
    h_omega: EstimateReport
    rhs: float
    rhs_analytic: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def gap_analytic(self) -> float:
        return abs(self.lhs - self.rhs_analytic)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["gap"] = self.gap
        out["gap_analytic"] = self.gap_analytic
        return out


def _mi_values(law, model, size, seed_seq):
    rng = np.random.default_rng(seed_seq)
    t, _, s = simulate_batch(law, model, 2, size, rng)
    logc = log_count_admissible_batch(t, s)
    s = np.sort(s, axis=1)
    logf = log_conditional_density(model, t, s)
    return np.column_stack([s, logf, logc])


def estimate_mi_decomposition(law: DeadlineInputDensity, model: FirstPassageModel, M: int,
                              n: int, seed: int, bins: int = 64, workers: int = 1) -> MIDecompositionReport:
    """Check the sorting-loss decomposition of the ordered MI at ``M = 2``.

    Left side: ``h(sorted S)`` from a 2-D equal-mass histogram
    (``sorted_pair_entropy``) minus
    ``h(sorted S | T)`` from the exact folded conditional density.  Right
    side: ``M log(1 + lam_tau/e) - log M! + H(Omega | sorted S, T)`` with
    the last term estimated from the same samples.
    """
    if M != 2:
        raise ValueError("the histogram check is only run at M = 2")
    if not isinstance(law, DeadlineInputDensity) or not model.is_exponential:
        raise ValueError("needs the deadline density with exponential passage")
    if not math.isclose(model.rate, law.lam):
        raise ValueError("passage rate and density rate differ")
    cols = _run_chunks(_mi_values, (law, model), n, seed, workers)
    s1, s2, logf, logc = cols.T
    h_sorted = sorted_pair_entropy(np.column_stack([s1, s2]), bins)
    h_cond = float(-np.mean(logf))
    h_cond_se = float(np.std(logf, ddof=1) / math.sqrt(n))
    h_om = EstimateReport.from_values(logc, seed)
    lt = law.lam_tau
    per_quantum = math.log1p(lt / E) + 1.0 - math.log(law.lam)
    iu = mi_unordered(2, lt)
    return MIDecompositionReport(
        lam_tau=lt, n=n, seed=seed, bins=bins,
        h_sorted_hist=h_sorted,
        h_sorted_theory=2.0 * per_quantum - math.log(2.0),
        h_cond_mc=h_cond, h_cond_stderr=h_cond_se,
        lhs=h_sorted - h_cond,
        h_omega=h_om,
        rhs=iu - math.log(2.0) + h_om.mean,
        rhs_analytic=iu - math.log(2.0) + h_omega_exponential(2, lt),
    )


@dataclass(frozen=True)
class EpochConfig:
    """``M`` quanta per use, mean emission rate ``rho``, guard fraction ``eps``."""

    M: int
    rho: float
    eps: float

    def __post_init__(self):
        if self.M < 1 or not self.rho > 0 or not self.eps > 0:
            raise ValueError("need M >= 1, rho > 0, eps > 0")

    @property
    def tau(self) -> float:
        return self.M / self.rho

    @property
    def gamma(self) -> float:
        return self.eps * self.tau


@dataclass(frozen=True)
class FeasibilityReport:
    M: int
    rho: float
    eps: float
    worst_case_cdf: float
    tail_mass: float
    probe: tuple
    verdict: str
    heuristic: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def epoch_feasibility(model: FirstPassageModel, M: int, rho: float, eps: float,
                      doublings: int = 3) -> FeasibilityReport:
    """Worst-case final-arrival CDF ``G(M eps/rho)^M`` and tail ``M * ccdf(M eps/rho)``.

    The verdict is a heuristic: ``feasible-trend`` when the tail shrinks at
    every step of an ``M``-doubling probe.
    """
    cfg = EpochConfig(M, rho, eps)
    x = M * eps / rho
    worst = float(np.exp(M * np.log1p(-float(model.ccdf(x)))))
    tail = M * float(model.ccdf(x))
    probe = tuple((M << j) * float(model.ccdf((M << j) * eps / rho)) for j in range(doublings + 1))
    shrinking = all(b < a or a == 0.0 for a, b in zip(probe, probe[1:]))
    return FeasibilityReport(M=cfg.M, rho=cfg.rho, eps=cfg.eps, worst_case_cdf=worst,
                             tail_mass=tail, probe=probe,
                             verdict="feasible-trend" if shrinking else "infeasible-trend")


def _coverage_values(law, model, M, horizon, size, seed_seq):
    rng = np.random.default_rng(seed_seq)
    _, _, s = simulate_batch(law, model, M, size, rng)
    return (s.max(axis=1) <= horizon).astype(float)


def estimate_epoch_coverage(model: FirstPassageModel, config: EpochConfig, n: int, seed: int,
                            law: EmissionLaw | None = None, workers: int = 1) -> EstimateReport:
    """Frequency with which the last arrival lands before ``tau (1 + eps)``.

    Emissions default to the deadline density on ``[0, M/rho]``.
    """
    if law is None:
        law = DeadlineInputDensity(lam=model.rate, tau=config.tau)
    if law.deadline > config.tau * (1 + 1e-12):
        raise ValueError("emission law reaches past the epoch deadline")
    horizon = config.tau + config.gamma
    vals = _run_chunks(_coverage_values, (law, model, config.M, horizon), n, seed, workers)
    return EstimateReport.from_values(vals, seed)
