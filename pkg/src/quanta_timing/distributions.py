"""Passage-time laws, emission laws and the integrals built from them.

Time is dimensionless throughout: a passage law carries its rate ``rate``
(mean passage time ``1/rate``) and emission laws carry a deadline ``tau``.
Most derived quantities only depend on ``rate * tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, special

E = math.e

# quadrature tolerances for the absolutely continuous parts
QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-11
QUAD_LIMIT = 200


@dataclass(frozen=True)
class FirstPassageModel:
    """Causal first-passage law ``g`` with rate ``rate`` (mean ``1/rate``).

    ``kind`` is ``"exponential"`` or ``"weibull"``.  The Weibull law is
    rescaled so that its mean is also ``1/rate``; ``shape`` must be >= 1 so
    the density stays bounded at the origin.
    """

    kind: str
    rate: float
    shape: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exponential", "weibull"):
            raise ValueError(f"unknown passage law {self.kind!r}")
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if self.kind == "weibull" and not self.shape >= 1:
            raise ValueError("weibull shape must be >= 1")

    @property
    def is_exponential(self) -> bool:
        return self.kind == "exponential" or self.shape == 1.0

    @cached_property
    def scale(self) -> float:
        if self.kind == "exponential":
            return 1.0 / self.rate
        return 1.0 / (self.rate * math.gamma(1.0 + 1.0 / self.shape))

    def _z(self, d):
        return (np.maximum(d, 0.0) / self.scale) ** self.shape

    def pdf(self, d):
        d = np.asarray(d, dtype=float)
        k = self.shape if self.kind == "weibull" else 1.0
        r = np.maximum(d, 0.0) / self.scale
        return np.where(d >= 0, (k / self.scale) * r ** (k - 1.0) * np.exp(-(r ** k)), 0.0)

    def logpdf(self, d):
        d = np.asarray(d, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(d))

    def ccdf(self, d):
        d = np.asarray(d, dtype=float)
        return np.where(d >= 0, np.exp(-self._z(d)), 1.0)

    def cdf(self, d):
        d = np.asarray(d, dtype=float)
        return np.where(d >= 0, -np.expm1(-self._z(d)), 0.0)

    def integrated_ccdf(self, x):
        """Closed form of ``int_0^x ccdf(u) du`` for ``x >= 0``."""
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        if self.kind == "exponential":
            return -np.expm1(-self.rate * x) / self.rate
        return special.gammainc(1.0 / self.shape, self._z(x)) / self.rate

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    def mean_by_quadrature(self) -> float:
        val, _ = integrate.quad(lambda x: float(self.ccdf(x)), 0.0, np.inf,
                                epsabs=1e-12, epsrel=1e-10, limit=QUAD_LIMIT)
        return val

    def inverse_ccdf(self, u):
        """Duration ``d`` with ``ccdf(d) = u`` for ``u`` in ``(0, 1]``."""
        u = np.asarray(u, dtype=float)
        z = -np.log(u)
        if self.kind == "exponential":
            return z / self.rate
        return self.scale * z ** (1.0 / self.shape)

    def quantile(self, q):
        return self.inverse_ccdf(1.0 - np.asarray(q, dtype=float))

    def sample(self, rng: np.random.Generator, size=None):
        # 1 - random() lies in (0, 1], so the result is finite and >= 0
        return self.inverse_ccdf(1.0 - rng.random(size))


def exponential(rate: float = 1.0) -> FirstPassageModel:
    return FirstPassageModel("exponential", rate)


def weibull(rate: float = 1.0, shape: float = 2.0) -> FirstPassageModel:
    return FirstPassageModel("weibull", rate, shape)


def sample_passage(model: FirstPassageModel, rng: np.random.Generator, size=None):
    """Draw passage duration(s) from ``model``."""
    return model.sample(rng, size)


class EmissionLaw:
    """Marginal law of a single emission time: point masses plus one uniform piece.

    Subclasses provide ``atoms`` (tuple of ``(location, mass)``), and the
    uniform piece as ``uniform_mass`` spread over ``(lo, hi)``.
    """

    atoms: tuple = ()
    uniform_mass: float = 0.0
    lo: float = 0.0
    hi: float = 0.0

    @property
    def deadline(self) -> float:
        locs = [a for a, _ in self.atoms]
        if self.uniform_mass > 0:
            locs.append(self.hi)
        return max(locs)

    @property
    def density(self) -> float:
        """Height of the uniform piece."""
        if self.uniform_mass == 0:
            return 0.0
        return self.uniform_mass / (self.hi - self.lo)

    def pdf(self, t):
        """Density of the absolutely continuous part."""
        t = np.asarray(t, dtype=float)
        return np.where((t > self.lo) & (t < self.hi), self.density, 0.0)

    def _uniform_cdf(self, t):
        if self.uniform_mass == 0:
            return np.zeros_like(t)
        return self.uniform_mass * np.clip((t - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        out = self._uniform_cdf(t)
        for a, p in self.atoms:
            out = out + np.where(t >= a, p, 0.0)
        return out

    def cdf_left(self, t):
        """``P(T < t)``."""
        t = np.asarray(t, dtype=float)
        out = self._uniform_cdf(t)
        for a, p in self.atoms:
            out = out + np.where(t > a, p, 0.0)
        return out

    def sample(self, rng: np.random.Generator, size=None):
        locs = np.array([a for a, _ in self.atoms] + [np.nan])
        masses = np.array([p for _, p in self.atoms] + [self.uniform_mass])
        u = rng.random(size)
        v = rng.random(size)
        branch = np.searchsorted(np.cumsum(masses)[:-1], u, side="right")
        uniform = self.lo + (self.hi - self.lo) * v
        return np.where(branch == len(self.atoms), uniform, locs[branch])

    def phi(self, t, model: FirstPassageModel):
        """Probability that an emission strictly before ``t`` is still in transit at ``t``.

        Generic route: ``int_{x<t} f_T(x) ccdf(t - x) dx`` with atoms summed
        and the uniform piece through the model's integrated CCDF.
        """
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for a, p in self.atoms:
            out = out + np.where(t > a, p * model.ccdf(t - a), 0.0)
        if self.uniform_mass > 0:
            upper = np.minimum(t, self.hi)
            part = model.integrated_ccdf(t - self.lo) - model.integrated_ccdf(t - upper)
            out = out + np.where(t > self.lo, self.density * part, 0.0)
        return out

    def expect(self, model: FirstPassageModel, fn, order: int = 16) -> float:
        """``E[fn(F_T(T), phi(T))]`` with atoms smeared over their own mass.

        An atom of mass ``p`` at ``a`` contributes ``p * int_0^1 fn(F_- + p v,
        phi_- + p v) dv`` where ``F_-``/``phi_-`` exclude the atom itself; this
        breaks ties between co-located emissions uniformly at random.  ``fn``
        must be vectorised; the ``v`` integral uses Gauss-Legendre with
        ``order`` nodes (exact for polynomial ``fn`` of degree < 2*order).
        """
        total = 0.0
        if self.atoms:
            nodes, weights = np.polynomial.legendre.leggauss(order)
            v = 0.5 * (nodes + 1.0)
            w = 0.5 * weights
            for a, p in self.atoms:
                f_minus = float(self.cdf_left(a))
                phi_minus = float(self.phi(a, model))
                total += p * float(np.dot(w, fn(f_minus + p * v, phi_minus + p * v)))
        if self.uniform_mass > 0:
            inner = [a for a, _ in self.atoms if self.lo < a < self.hi]

            def integrand(t):
                return self.density * float(fn(self.cdf(t), self.phi(t, model)))

            val, _ = integrate.quad(integrand, self.lo, self.hi, points=inner or None,
                                    epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)
            total += val
        return total

    def expected_phi_pow(self, model: FirstPassageModel, k: int) -> float:
        """``E[phi(T)^k]`` by quadrature (generic route)."""
        if k < 0:
            raise ValueError("k must be >= 0")
        return self.expect(model, lambda F, ph: ph ** k, order=max(2, k // 2 + 2))


@dataclass(frozen=True)
class DeadlineInputDensity(EmissionLaw):
    """Emission law maximising ``h(S)`` under exponential passage and deadline ``tau``.

    Atom ``1/(e + lam*tau)`` at 0, uniform mass ``lam*tau/(e + lam*tau)`` on
    ``(0, tau)`` and atom ``(e - 1)/(e + lam*tau)`` at ``tau``.
    """

    lam: float
    tau: float

    def __post_init__(self):
        if not (self.lam > 0 and self.tau > 0):
            raise ValueError("lam and tau must be positive")

    @classmethod
    def from_lambda_tau(cls, lam_tau: float, lam: float = 1.0) -> "DeadlineInputDensity":
        return cls(lam=lam, tau=lam_tau / lam)

    @property
    def lam_tau(self) -> float:
        return self.lam * self.tau

    @property
    def p0(self) -> float:
        return 1.0 / (E + self.lam_tau)

    @property
    def pu(self) -> float:
        return self.lam_tau / (E + self.lam_tau)

    @property
    def ptau(self) -> float:
        return (E - 1.0) / (E + self.lam_tau)

    @property
    def atoms(self):
        return ((0.0, self.p0), (self.tau, self.ptau))

    @property
    def uniform_mass(self):
        return self.pu

    @property
    def lo(self):
        return 0.0

    @property
    def hi(self):
        return self.tau

    def closed_phi(self, t):
        """Closed-form ``phi`` for exponential passage with rate ``lam``."""
        t = np.asarray(t, dtype=float)
        c = 1.0 / (E + self.lam_tau)
        late = E * c * np.exp(-self.lam * np.maximum(t - self.tau, 0.0))
        return np.where(t < 0, 0.0, np.where(t <= self.tau, c, late))


def phi(density: DeadlineInputDensity, t):
    return density.closed_phi(t)


def expected_phi_pow(density: DeadlineInputDensity, k: int) -> float:
    """Closed form ``E[phi^k(T)] = (lam*tau + e^(k+1)/(k+1)) / (e + lam*tau)^(k+1)``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    lt = density.lam_tau
    if (k + 1) * math.log(E + lt) < 700.0:
        return (lt + E ** (k + 1) / (k + 1)) / (E + lt) ** (k + 1)
    log_c = -math.log(E + lt)
    return math.exp((k + 1) * (1.0 + log_c) - math.log(k + 1)) + lt * math.exp((k + 1) * log_c)


@dataclass(frozen=True)
class UniformEmission(EmissionLaw):
    """Emission time uniform on ``(0, tau)``."""

    tau: float

    @property
    def uniform_mass(self):
        return 1.0

    @property
    def lo(self):
        return 0.0

    @property
    def hi(self):
        return self.tau


@dataclass(frozen=True)
class PointMassEmission(EmissionLaw):
    """Every quantum released at the same instant ``at`` (degenerate law)."""

    at: float = 0.0

    @property
    def atoms(self):
        return ((self.at, 1.0),)


@dataclass(frozen=True)
class EmissionSchedule:
    """Emission times for one channel use."""

    t: np.ndarray
    tau: float

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("schedule needs at least one emission")
        if np.any(t < 0) or np.any(t > self.tau):
            raise ValueError("emission outside [0, tau]")
        object.__setattr__(self, "t", t)

    @property
    def M(self) -> int:
        return self.t.size


def sample_emissions(density: EmissionLaw, M: int, rng: np.random.Generator) -> EmissionSchedule:
    if M < 1:
        raise ValueError("M must be >= 1")
    return EmissionSchedule(density.sample(rng, M), density.deadline)


def order_stat_density_iid(marginal, M: int, m: int, t):
    """Density of the ``(m+1)``-th smallest of ``M`` iid draws from ``marginal``.

    ``marginal`` needs ``pdf`` and ``cdf`` (scipy frozen distributions work).
    """
    if not 0 <= m <= M - 1:
        raise ValueError(f"order index m={m} outside [0, {M - 1}]")
    F = np.asarray(marginal.cdf(t), dtype=float)
    f = np.asarray(marginal.pdf(t), dtype=float)
    return (m + 1) * math.comb(M, m + 1) * f * F ** m * (1.0 - F) ** (M - m - 1)
