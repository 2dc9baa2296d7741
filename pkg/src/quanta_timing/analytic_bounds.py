"""Closed forms and quadrature for the permutation-entropy bound and capacity bounds.

Notation follows the code, not symbols: ``lam_tau`` is the passage rate
times the emission deadline, ``chi`` is passage rate over mean emission rate
(so ``lam_tau = chi * M`` when the deadline grows as ``M / rho``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .distributions import E, EmissionLaw, FirstPassageModel

POISSON_SWITCH_M = 100_000
SERIES_TOL = 1e-12
SERIES_MAX_TERMS = 10_000


def _check_ell(M: int, ell: int, lo: int = 1):
    if M < 2 or not lo <= ell <= M - 1:
        raise ValueError(f"need {lo} <= ell <= M-1, got ell={ell}, M={M}")


def log_factorial(k):
    return gammaln(np.asarray(k, dtype=float) + 1.0)


# --- generic iid route ------------------------------------------------------

def theta_bar_iid(law: EmissionLaw, model: FirstPassageModel, M: int, m: int, ell: int) -> float:
    """Expected probability that exactly ``ell`` of the ``m`` earliest quanta
    are still in transit when the ``(m+1)``-th emission happens."""
    if not 1 <= ell <= m <= M - 1:
        raise ValueError(f"need 1 <= ell <= m <= M-1, got ell={ell}, m={m}, M={M}")
    coef = M * math.comb(M - 1, ell) * math.comb(M - ell - 1, m - ell)

    def fn(F, ph):
        return (1.0 - F) ** (M - m - 1) * ph ** ell * (F - ph) ** (m - ell)

    return coef * law.expect(model, fn, order=M // 2 + 2)


def gamma_bar(law: EmissionLaw, model: FirstPassageModel, M: int, ell: int) -> float:
    """``M C(M-1, ell) E[phi^ell (1 - phi)^(M-1-ell)]``."""
    _check_ell(M, ell)
    coef = M * math.comb(M - 1, ell)
    return coef * law.expect(model, lambda F, ph: ph ** ell * (1.0 - ph) ** (M - 1 - ell),
                             order=M // 2 + 2)


def delta_gamma_general(law: EmissionLaw, model: FirstPassageModel, M: int, ell: int,
                        moments=None) -> float:
    """``gamma_bar(ell) - gamma_bar(ell + 1)`` through the alternating moment sum.

    ``moments[k]`` may supply precomputed ``E[phi^k]``.
    """
    _check_ell(M, ell)
    n = M - ell - 1
    if moments is None:
        moments = {k: law.expected_phi_pow(model, k) for k in range(ell, M)}
    terms = [(-1) ** r * math.comb(n, r) * (ell + r + 1) * moments[ell + r] for r in range(n + 1)]
    return math.comb(M, ell + 1) * math.fsum(terms)


def h_up(law: EmissionLaw, model: FirstPassageModel, M: int) -> float:
    """Upper bound on ``H(Omega | S, T)``: ``sum_ell dGamma(ell) log (ell+1)!``.

    Equals the expected log number of admissible matchings for iid emissions.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if M == 1:
        return 0.0
    moments = {k: law.expected_phi_pow(model, k) for k in range(1, M)}
    return math.fsum(delta_gamma_general(law, model, M, ell, moments) * float(log_factorial(ell + 1))
                     for ell in range(1, M))


# --- deadline density, exponential passage ----------------------------------

@dataclass(frozen=True)
class BinomialMixture:
    """The two binomial laws behind the closed-form permutation entropy."""

    M: int
    lam_tau: float

    @property
    def p1(self) -> float:
        return E / (E + self.lam_tau)

    @property
    def p2(self) -> float:
        return 1.0 / (E + self.lam_tau)


def _binom_logpmf(M: int, p: float, k):
    return stats.binom.logpmf(k, M, p)


def delta_gamma_deadline_all(M: int, lam_tau: float) -> np.ndarray:
    """Closed-form ``dGamma_{M, k-1}`` for ``k = 0..M`` (deadline density)."""
    if not lam_tau > 0:
        raise ValueError("lam_tau must be positive")
    mix = BinomialMixture(M, lam_tau)
    k = np.arange(M + 1)
    first = np.exp(_binom_logpmf(M, mix.p1, k))
    weight = lam_tau / (1.0 - mix.p2) * (k - M * mix.p2)
    second = weight * np.exp(_binom_logpmf(M, mix.p2, k))
    return first + second


def delta_gamma_deadline(M: int, lam_tau: float, k: int) -> float:
    """Closed-form ``dGamma_{M, k-1}`` under the deadline density, ``1 <= k <= M``."""
    if not 1 <= k <= M:
        raise ValueError(f"need 1 <= k <= M, got k={k}, M={M}")
    return float(delta_gamma_deadline_all(M, lam_tau)[k])


def binom_expect_log_factorial(M: int, p: float) -> float:
    """``E[log K!]`` for ``K ~ Binomial(M, p)``, summed in log space."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p == 0.0 or M == 0:
        return 0.0
    if p == 1.0:
        return float(log_factorial(M))
    mean = M * p
    if M > POISSON_SWITCH_M and p < 1e-3:
        # binomial -> Poisson(M p) with M p held fixed
        hi = int(mean + 40.0 * math.sqrt(mean) + 40)
        k = np.arange(hi + 1)
        return float(np.sum(np.exp(stats.poisson.logpmf(k, mean)) * log_factorial(k)))
    sd = math.sqrt(mean * (1.0 - p))
    lo = max(0, int(mean - 40.0 * sd - 40))
    hi = min(M, int(mean + 40.0 * sd + 40))
    k = np.arange(lo, hi + 1)
    return float(np.sum(np.exp(_binom_logpmf(M, p, k)) * log_factorial(k)))


def h_omega_exponential(M: int, lam_tau: float) -> float:
    """``H(Omega | S, T)`` for exponential passage and the deadline density.

    Computed as ``sum_{k=2}^{M} dGamma_{M,k-1} log k!``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if M == 1:
        return 0.0
    dg = delta_gamma_deadline_all(M, lam_tau)
    k = np.arange(2, M + 1)
    return float(np.sum(dg[2:] * log_factorial(k)))


def h_omega_two_binomial(M: int, lam_tau: float) -> float:
    """Same quantity written as ``E[log K1!] + E[w(K2) log K2!]``."""
    mix = BinomialMixture(M, lam_tau)
    k = np.arange(M + 1)
    w = lam_tau / (1.0 - mix.p2) * (k - M * mix.p2)
    second = np.sum(w * np.exp(_binom_logpmf(M, mix.p2, k)) * log_factorial(k))
    return binom_expect_log_factorial(M, mix.p1) + float(second)


def mi_unordered(M: int, lam_tau: float) -> float:
    """``I(S; T) = M log(1 + lam_tau / e)`` for the deadline density."""
    return M * math.log1p(lam_tau / E)


def mi_ordered_lower(M: int, lam_tau: float) -> float:
    """``I(sorted S; T)`` under exponential passage and the deadline density.

    Can be negative for small ``lam_tau`` and large ``M``; not clamped.
    """
    if not lam_tau > 0:
        raise ValueError("lam_tau must be positive")
    return mi_unordered(M, lam_tau) - float(log_factorial(M)) + h_omega_exponential(M, lam_tau)


# --- capacity bounds --------------------------------------------------------

def _check_chi(chi: float):
    if not chi > 0:
        raise ValueError(f"chi must be positive, got {chi}")


def cq_finite(M: int, chi: float) -> float:
    """Per-quantum ordered MI with ``M`` quanta and deadline ``M / rho``."""
    _check_chi(chi)
    return mi_ordered_lower(M, chi * M) / M


def cq_h_free(M: int, chi: float) -> float:
    """Bound that drops the permutation entropy: ``log(1 + chi M/e) - log(M!)/M``."""
    _check_chi(chi)
    return math.log1p(chi * M / E) - float(log_factorial(M)) / M


def cq_simple(chi: float) -> float:
    _check_chi(chi)
    return max(math.log(chi), 0.0)


def cq_series_raw(chi: float, tol: float = SERIES_TOL) -> float:
    """``log chi + sum_{k>=2} Poisson(k; 1/chi) (k chi - 1) log k!`` without clamping.

    Stops once past the Poisson mode and the term is below ``tol`` times the
    partial sum; at most ``SERIES_MAX_TERMS`` terms.
    """
    _check_chi(chi)
    mode = 1.0 / chi
    total = 0.0
    for k in range(2, SERIES_MAX_TERMS + 2):
        lf = math.lgamma(k + 1)
        term = math.exp(-mode - k * math.log(chi) - lf) * (k * chi - 1.0) * lf
        total += term
        if k > mode and abs(term) < tol * abs(total):
            break
    return math.log(chi) + total


def cq_series(chi: float, tol: float = SERIES_TOL, clamp: bool = True) -> float:
    raw = cq_series_raw(chi, tol)
    return max(raw, 0.0) if clamp else raw


def ct_bound(lam: float, chi: float, variant: str = "simple") -> float:
    """Nats per unit time: ``rho * C_q`` with ``rho = lam / chi``."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    if variant == "simple":
        cq = cq_simple(chi)
    elif variant == "series":
        cq = cq_series(chi)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return lam / chi * cq


@dataclass(frozen=True)
class BoundPoint:
    """Capacity lower bounds at one ``chi``; ``M=None`` marks the large-M limit."""

    chi: float
    M: int | None
    cq: float
    ct: float
    cq_raw: float

    @classmethod
    def evaluate(cls, chi: float, lam: float = 1.0, M: int | None = None,
                 variant: str = "series") -> "BoundPoint":
        if M is None:
            raw = cq_series_raw(chi) if variant == "series" else math.log(chi)
        else:
            raw = cq_finite(M, chi)
        cq = max(raw, 0.0)
        return cls(chi=chi, M=M, cq=cq, ct=lam / chi * cq, cq_raw=raw)
