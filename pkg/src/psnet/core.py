"""Shared data types for phase-space ensembles.

Quadrature convention throughout: ``x = a + a^dagger`` and
``y = (a - a^dagger) / i`` so the vacuum has unit symmetric variance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

POSITIVE_P = 0.0
WIGNER = 0.5

_ORDERING_NAMES = {POSITIVE_P: "positive-p", WIGNER: "wigner"}


class ValidationError(ValueError):
    """A numerical or physical precondition was violated."""


@dataclass(frozen=True)
class Ordering:
    """Operator ordering parameter: 0 is normal (positive-P), 1/2 symmetric (Wigner)."""

    sigma: float

    def __post_init__(self):
        if self.sigma not in _ORDERING_NAMES:
            raise ValueError(f"unsupported ordering sigma={self.sigma!r}; use 0 or 0.5")

    @classmethod
    def positive_p(cls) -> "Ordering":
        return cls(POSITIVE_P)

    @classmethod
    def wigner(cls) -> "Ordering":
        return cls(WIGNER)

    @classmethod
    def from_name(cls, name: str) -> "Ordering":
        key = name.lower().replace("_", "-")
        if key in ("positive-p", "positivep", "+p", "p"):
            return cls.positive_p()
        if key in ("wigner", "w"):
            return cls.wigner()
        raise ValueError(f"unknown representation {name!r}")

    @property
    def name(self) -> str:
        return _ORDERING_NAMES[self.sigma]

    @property
    def is_wigner(self) -> bool:
        return self.sigma == WIGNER


class ModeKind(str, enum.Enum):
    SQUEEZED = "squeezed"
    THERMAL = "thermal"
    VACUUM = "vacuum"


@dataclass(frozen=True)
class ModeSpec:
    """Single-mode Gaussian input.

    A squeezed mode with ``r > 0`` has its ``y`` quadrature squeezed.
    ``epsilon`` converts a fraction of the coherence into thermal noise
    while leaving the photon number unchanged.
    """

    r: float = 0.0
    epsilon: float = 0.0
    kind: ModeKind = ModeKind.SQUEEZED
    n_thermal: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModeKind(self.kind))
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValueError(f"squeezing r must be finite and >= 0, got {self.r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not (math.isfinite(self.n_thermal) and self.n_thermal >= 0):
            raise ValueError(f"n_thermal must be finite and >= 0, got {self.n_thermal}")
        if self.kind is ModeKind.THERMAL:
            if self.r != 0 or self.epsilon != 0:
                raise ValueError("thermal modes take only n_thermal")
        elif self.kind is ModeKind.VACUUM:
            if self.r != 0 or self.epsilon != 0 or self.n_thermal != 0:
                raise ValueError("vacuum modes take no parameters")
        elif self.n_thermal != 0:
            raise ValueError("n_thermal applies to thermal modes only")

    @classmethod
    def squeezed(cls, r: float, epsilon: float = 0.0) -> "ModeSpec":
        return cls(r=r, epsilon=epsilon, kind=ModeKind.SQUEEZED)

    @classmethod
    def thermal(cls, n: float) -> "ModeSpec":
        return cls(kind=ModeKind.THERMAL, n_thermal=n)

    @classmethod
    def vacuum(cls) -> "ModeSpec":
        return cls(kind=ModeKind.VACUUM)

    @property
    def is_vacuum(self) -> bool:
        return self.r == 0 and self.n_thermal == 0


@dataclass(frozen=True)
class GaussianMoments:
    n: float
    m_tilde: float
    n_th: float = 0.0


@dataclass(frozen=True)
class SigmaVariances:
    """Complex standard deviations of the two sampled quadratures."""

    dx: complex
    dy: complex


@dataclass(frozen=True)
class SubEnsembleLayout:
    repeats: int
    chunk: int

    def __post_init__(self):
        if self.repeats < 2:
            raise ValueError(
                f"insufficient sub-ensembles for error estimation: repeats={self.repeats} < 2"
            )
        if self.chunk < 1:
            raise ValueError(f"chunk must be >= 1, got {self.chunk}")

    @property
    def samples(self) -> int:
        return self.repeats * self.chunk


# spawn-key roles keep independent consumers of one seed apart
ROLE_SAMPLER = 0
ROLE_MATRIX = 1


@dataclass(frozen=True)
class SeededStream:
    """Deterministic source of unit-variance Gaussian noise.

    Streams are PCG64 generators keyed by ``SeedSequence(seed,
    spawn_key=(role, stream_index))``; normals come from numpy's ziggurat
    ``standard_normal``. Equal keys give identical sequences.
    """

    seed: int
    stream_index: int = 0
    role: int = ROLE_SAMPLER

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.role, self.stream_index))
        return np.random.Generator(np.random.PCG64(ss))

    def normals(self, shape) -> np.ndarray:
        return self.generator().standard_normal(shape)

    def substream(self, index: int) -> "SeededStream":
        return SeededStream(self.seed, index, self.role)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """S x M phase-space samples; rows are grouped into ``layout.repeats`` chunks."""

    alpha: np.ndarray
    beta: np.ndarray
    ordering: Ordering
    layout: SubEnsembleLayout
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=complex)
        beta = np.asarray(self.beta, dtype=complex)
        if alpha.ndim != 2 or alpha.shape != beta.shape:
            raise ValueError("alpha and beta must be matching S x M arrays")
        if alpha.shape[0] != self.layout.samples:
            raise ValueError(
                f"{alpha.shape[0]} samples do not fit layout "
                f"{self.layout.repeats} x {self.layout.chunk}"
            )
        if self.ordering.is_wigner and not np.array_equal(beta, alpha.conj()):
            raise ValueError("Wigner ensembles require beta == conj(alpha)")
        alpha.flags.writeable = False
        beta.flags.writeable = False
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def modes(self) -> int:
        return self.alpha.shape[1]

    @property
    def samples(self) -> int:
        return self.alpha.shape[0]

    def chunks(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield ``(alpha, beta)`` for each sub-ensemble in order."""
        c = self.layout.chunk
        for k in range(self.layout.repeats):
            yield self.alpha[k * c:(k + 1) * c], self.beta[k * c:(k + 1) * c]

    def select(self, modes) -> "Ensemble":
        """View restricted to a subset of modes (in the given order)."""
        idx = list(modes)
        return Ensemble(self.alpha[:, idx], self.beta[:, idx], self.ordering, self.layout, dict(self.meta))


def moments_from_spec(spec: ModeSpec) -> GaussianMoments:
    if spec.kind is ModeKind.THERMAL:
        return GaussianMoments(n=spec.n_thermal, m_tilde=0.0, n_th=0.0)
    if spec.is_vacuum:
        return GaussianMoments(0.0, 0.0, 0.0)
    sh, ch = math.sinh(spec.r), math.cosh(spec.r)
    n = sh * sh
    return GaussianMoments(n=n, m_tilde=(1.0 - spec.epsilon) * sh * ch, n_th=spec.epsilon * n)


def _root(v: float) -> complex:
    # principal root: non-negative real part, +i for negative arguments
    return complex(math.sqrt(v)) if v >= 0 else complex(0.0, math.sqrt(-v))


def sigma_variances(moments: GaussianMoments, ordering: Ordering) -> SigmaVariances:
    """Standard deviations with ``dx**2 = 2(n + sigma + m)``, ``dy**2 = 2(n + sigma - m)``."""
    s = ordering.sigma
    return SigmaVariances(
        dx=_root(2.0 * (moments.n + s + moments.m_tilde)),
        dy=_root(2.0 * (moments.n + s - moments.m_tilde)),
    )
