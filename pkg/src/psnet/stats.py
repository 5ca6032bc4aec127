"""Sampling errors, chi-square comparison and exact reference distributions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats as _sps

VALID_BIN_COUNT = 10


def subensemble_error(values):
    """Mean of sub-ensemble means and its standard error.

    ``values`` has the repeat index on axis 0; any trailing shape is kept.
    """
    v = np.asarray(values)
    if v.ndim == 0 or v.shape[0] < 2:
        raise ValueError("need at least 2 sub-ensembles to estimate an error")
    mean = v.mean(axis=0)
    err = v.std(axis=0, ddof=1) / np.sqrt(v.shape[0])
    return mean, err


@dataclass(frozen=True, eq=False)
class ReferenceDistribution:
    probabilities: np.ndarray
    std_errors: np.ndarray = None
    event_count: float = np.inf
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < -1e-12):
            raise ValueError("reference probabilities must be non-negative")
        if p.sum() > 1 + 1e-12:
            raise ValueError(f"reference probabilities sum to {p.sum()} > 1")
        e = np.zeros_like(p) if self.std_errors is None else np.asarray(self.std_errors, dtype=float)
        if e.shape != p.shape:
            raise ValueError("std_errors shape does not match probabilities")
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "std_errors", e)


@dataclass(frozen=True)
class ChiSquareReport:
    chi2: float
    k_valid: int
    chi2_per_k: float
    excluded_bins: list

    def as_dict(self) -> dict:
        return {"chi2": self.chi2, "k_valid": self.k_valid, "chi2_per_k": self.chi2_per_k,
                "excluded_bins": [list(map(int, b)) for b in self.excluded_bins]}


def chi_square(sim, ref: ReferenceDistribution, min_count: float = VALID_BIN_COUNT) -> ChiSquareReport:
    """Chi-square of a simulated distribution against a reference.

    A bin is valid when the reference expects more than ``min_count``
    events (``event_count * P``). The variance per bin is the sum of the
    reference and simulated variances. ``sim`` is anything with
    ``probabilities`` and ``std_errors`` arrays.
    """
    p_sim = np.asarray(sim.probabilities, dtype=float)
    e_sim = np.asarray(sim.std_errors, dtype=float)
    if p_sim.shape != ref.probabilities.shape:
        raise ValueError(f"bin shape mismatch: {p_sim.shape} vs {ref.probabilities.shape}")
    valid = ref.event_count * ref.probabilities > min_count
    if not valid.any():
        raise ValueError("no valid bins: every reference bin expects <= %g events" % min_count)
    var = ref.std_errors ** 2 + e_sim ** 2
    if np.any(var[valid] <= 0):
        raise ValueError("zero variance in a valid bin")
    chi2 = float(np.sum((p_sim[valid] - ref.probabilities[valid]) ** 2 / var[valid]))
    k = int(valid.sum())
    excluded = [tuple(ix) for ix in np.argwhere(~valid)]
    return ChiSquareReport(chi2, k, chi2 / k, excluded)


def exact_thermal_total(M: int, n: float, event_count: float = np.inf) -> ReferenceDistribution:
    """Total-click distribution of M independent thermal modes of occupation ``n``."""
    if n < 0:
        raise ValueError("thermal occupation must be >= 0")
    p = n / (1.0 + n)
    probs = _sps.binom.pmf(np.arange(M + 1), M, p)
    return ReferenceDistribution(probs, event_count=event_count,
                                 meta={"reference": "exact-thermal", "M": M, "n": n})


def click_probability(n: float, m_tilde: float) -> float:
    """Single-mode click probability of a zero-mean Gaussian state."""
    return 1.0 - 1.0 / np.sqrt((1.0 + n + m_tilde) * (1.0 + n - m_tilde))


def poisson_binomial(ps: Sequence[float]) -> np.ndarray:
    dist = np.array([1.0])
    for p in ps:
        dist = np.convolve(dist, [1.0 - p, p])
    return dist


def exact_independent_click_total(specs, event_count: float = np.inf) -> ReferenceDistribution:
    """Total clicks for independent single-mode Gaussian inputs (identity network)."""
    from .core import moments_from_spec

    ps = []
    for s in specs:
        mo = moments_from_spec(s)
        ps.append(click_probability(mo.n, mo.m_tilde))
    probs = np.clip(poisson_binomial(ps), 0.0, None)
    return ReferenceDistribution(probs, event_count=event_count,
                                 meta={"reference": "exact-independent", "M": len(ps)})
