"""Admissible emission-to-arrival matchings and the permutation entropy.

A permutation ``perm`` assigns arrival ``s[perm[m]]`` to emission ``t[m]``;
it is admissible when every assigned arrival is no earlier than its emission
(``s == t`` counts as admissible).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .distributions import FirstPassageModel

ENUMERATION_CAP = 8


def _pair(t, s):
    t = np.sort(np.asarray(t, dtype=float).ravel())
    s = np.sort(np.asarray(s, dtype=float).ravel())
    if t.size != s.size:
        raise ValueError(f"length mismatch: {t.size} emissions vs {s.size} arrivals")
    if t.size == 0:
        raise ValueError("need at least one quantum")
    return t, s


@dataclass(frozen=True)
class BinOccupancy:
    """Arrival counts in the bins ``[t_m, t_{m+1})`` of the sorted emissions.

    ``sigma[m-1]`` counts arrivals in bin ``m`` (``t_{M+1} = inf``), ``eta[m]``
    is the cumulative count through bin ``m`` with ``eta[0] = 0``, and
    ``early`` counts arrivals before the first emission.
    """

    sigma: np.ndarray
    eta: np.ndarray
    early: int

    @classmethod
    def from_times(cls, t, s) -> "BinOccupancy":
        t, s = _pair(t, s)
        early = int(np.count_nonzero(s < t[0]))
        # side="right" puts s == t_m into bin m
        idx = np.searchsorted(t, s, side="right")
        sigma = np.bincount(idx[idx > 0] - 1, minlength=t.size)
        eta = np.concatenate(([0], np.cumsum(sigma)))
        return cls(sigma=sigma, eta=eta, early=early)

    @property
    def M(self) -> int:
        return self.sigma.size

    @property
    def admissible(self) -> bool:
        m = np.arange(self.M + 1)
        return self.early == 0 and bool(np.all(self.eta <= m)[()])


def count_admissible(t, s) -> int:
    """Exact number of admissible matchings, ``prod_{m=1}^{M-1} (m + 1 - eta_m)``."""
    occ = BinOccupancy.from_times(t, s)
    if not occ.admissible:
        return 0
    return math.prod(m + 1 - int(occ.eta[m]) for m in range(1, occ.M))


def log_count_admissible(t, s) -> float:
    occ = BinOccupancy.from_times(t, s)
    if not occ.admissible:
        return -math.inf
    m = np.arange(1, occ.M)
    return float(np.sum(np.log(m + 1 - occ.eta[1:-1])))


def log_count_admissible_batch(t, s) -> np.ndarray:
    """Row-wise ``log count_admissible`` for ``(n, M)`` arrays; ``-inf`` where none."""
    t = np.sort(np.atleast_2d(np.asarray(t, dtype=float)), axis=1)
    s = np.sort(np.atleast_2d(np.asarray(s, dtype=float)), axis=1)
    if t.shape != s.shape:
        raise ValueError(f"shape mismatch: {t.shape} vs {s.shape}")
    M = t.shape[1]
    # eta[:, j] = #{arrivals < t_{j+1}} for j = 0..M-1 (j = 0 is the early count)
    eta = np.sum(s[:, None, :] < t[:, :, None], axis=2)
    factors = np.arange(1, M + 1) - eta
    out = np.sum(np.log(np.maximum(factors[:, 1:], 1)), axis=1)
    bad = (eta[:, 0] > 0) | np.any(factors[:, 1:] <= 0, axis=1)
    out[bad] = -np.inf
    return out


@lru_cache(maxsize=None)
def _all_perms(M: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(M))), dtype=np.intp).reshape(-1, M)


def _check_cap(M: int):
    if M > ENUMERATION_CAP:
        raise ValueError(f"exhaustive enumeration capped at M={ENUMERATION_CAP} ({M} requested)")


def enumerate_admissible(t, s) -> list[tuple[int, ...]]:
    """Every admissible ``perm`` (arrival ``s[perm[m]]`` to emission ``t[m]``), lexicographic."""
    t = np.asarray(t, dtype=float).ravel()
    s = np.asarray(s, dtype=float).ravel()
    if t.size != s.size:
        raise ValueError(f"length mismatch: {t.size} emissions vs {s.size} arrivals")
    _check_cap(t.size)
    perms = _all_perms(t.size)
    ok = np.all(s[perms] >= t, axis=1)
    return [tuple(int(i) for i in p) for p in perms[ok]]


@dataclass(frozen=True)
class PermutationPMF:
    support: tuple
    probs: np.ndarray

    def entropy(self) -> float:
        p = self.probs
        return float(-np.sum(p * np.log(p)))


def _log_weights(model: FirstPassageModel, t, s):
    t = np.asarray(t, dtype=float).ravel()
    s = np.asarray(s, dtype=float).ravel()
    if t.size != s.size:
        raise ValueError(f"length mismatch: {t.size} emissions vs {s.size} arrivals")
    _check_cap(t.size)
    perms = _all_perms(t.size)
    # logg[i, j] = log g(s_i - t_j)
    logg = model.logpdf(s[:, None] - t[None, :])
    cols = np.arange(t.size)
    return perms, np.sum(logg[perms, cols], axis=1)


def perm_pmf(model: FirstPassageModel, t, s_sorted) -> PermutationPMF:
    """Posterior over matchings given emissions and ordered arrivals.

    Each matching is weighted by ``prod_m g(s[perm[m]] - t[m])``.
    """
    perms, logw = _log_weights(model, t, s_sorted)
    keep = np.isfinite(logw)
    if not np.any(keep):
        raise ValueError("inadmissible (t, s): no matching has positive density")
    logw = logw[keep]
    probs = np.exp(logw - logsumexp(logw))
    support = tuple(tuple(int(i) for i in p) for p in perms[keep])
    return PermutationPMF(support=support, probs=probs)


def perm_entropy(model: FirstPassageModel, t, s_sorted) -> float:
    """``H(Omega | s, t)`` in nats."""
    perms, logw = _log_weights(model, t, s_sorted)
    logw = logw[np.isfinite(logw)]
    if logw.size == 0:
        raise ValueError("inadmissible (t, s): no matching has positive density")
    lse = logsumexp(logw)
    p = np.exp(logw - lse)
    return float(max(lse - np.dot(p, logw), 0.0))
