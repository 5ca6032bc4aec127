"""Phase-space sampling of product Gaussian input states."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import (
    Ensemble,
    ModeSpec,
    Ordering,
    SeededStream,
    SubEnsembleLayout,
    moments_from_spec,
    sigma_variances,
)
from .stats import subensemble_error


@dataclass(frozen=True)
class InputSpec:
    modes: tuple[ModeSpec, ...]
    ordering: Ordering

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ValueError("an input needs at least one mode")
        for m in modes:
            if not isinstance(m, ModeSpec):
                raise TypeError(f"expected ModeSpec, got {type(m).__name__}")
        object.__setattr__(self, "modes", modes)

    @property
    def M(self) -> int:
        return len(self.modes)

    def stddevs(self) -> tuple[np.ndarray, np.ndarray]:
        sv = [sigma_variances(moments_from_spec(m), self.ordering) for m in self.modes]
        return np.array([v.dx for v in sv]), np.array([v.dy for v in sv])


def draw_chunk(spec: InputSpec, size: int, stream: SeededStream) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``size`` samples of ``(alpha, beta)`` from one stream.

    Each sample consumes 2M unit normals: columns ``0..M-1`` drive the
    x-like quadrature and ``M..2M-1`` the y-like one.
    """
    dx, dy = spec.stddevs()
    w = stream.normals((size, 2 * spec.M))
    wx, wy = w[:, :spec.M], w[:, spec.M:]
    a = dx * wx
    b = 1j * dy * wy
    alpha = 0.5 * (a + b)
    if spec.ordering.is_wigner:
        return alpha, alpha.conj()
    return alpha, 0.5 * (a - b)


def iter_chunks(spec: InputSpec, layout: SubEnsembleLayout, seed: SeededStream) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    for k in range(layout.repeats):
        yield draw_chunk(spec, layout.chunk, seed.substream(k))


def draw_input(spec: InputSpec, layout: SubEnsembleLayout, seed: SeededStream,
               threads: int = 1) -> Ensemble:
    """Sample a full input ensemble; sub-ensemble ``k`` uses stream index ``k``."""
    def work(k):
        return draw_chunk(spec, layout.chunk, seed.substream(k))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, range(layout.repeats)))
    else:
        parts = [work(k) for k in range(layout.repeats)]
    alpha = np.concatenate([p[0] for p in parts])
    beta = alpha.conj() if spec.ordering.is_wigner else np.concatenate([p[1] for p in parts])
    return Ensemble(alpha, beta, spec.ordering, layout, {"seed": seed.seed})


@dataclass(frozen=True)
class MomentEstimate:
    n: np.ndarray
    n_err: np.ndarray
    m: np.ndarray
    m_err: np.ndarray


def estimate_moments(ens: Ensemble) -> MomentEstimate:
    """Per-mode ``<a^dagger a>`` and ``<a a>`` with sub-ensemble errors."""
    ns, ms = [], []
    for a, b in ens.chunks():
        ns.append((b * a).mean(axis=0).real - ens.ordering.sigma)
        ms.append((a * a).mean(axis=0).real)
    n, n_err = subensemble_error(np.array(ns))
    m, m_err = subensemble_error(np.array(ms))
    return MomentEstimate(n, n_err, m, m_err)


def uniform_input(M: int, mode: ModeSpec, ordering: Ordering) -> InputSpec:
    return InputSpec(tuple([mode] * M), ordering)


def squeezed_input(rs: Sequence[float], ordering: Ordering, epsilon=0.0) -> InputSpec:
    eps = np.broadcast_to(np.asarray(epsilon, dtype=float), (len(rs),))
    return InputSpec(tuple(ModeSpec.squeezed(float(r), float(e)) for r, e in zip(rs, eps)), ordering)
