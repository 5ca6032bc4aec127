"""Click-detector estimators and grouped count probabilities.

Grouped probabilities are estimated from positive-P samples through
Fourier observables: for each disjoint set ``S_j`` of output modes and
``k = 0..M_j``,

    F_j(k) = prod_{i in S_j} (pi_i(0) + pi_i(1) exp(-i k theta_j)),
    theta_j = 2 pi / (M_j + 1),

averaged over samples and inverted with a multidimensional DFT.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import Ensemble, ValidationError
from .stats import subensemble_error

BRUTEFORCE_MAX_MODES = 16

try:
    import numba as _nb
except ModuleNotFoundError:  # pragma: no cover
    _nb = None

if _nb is not None:
    @_nb.njit(cache=True)
    def _factor_kernel(pi0, pi1, idx, z, out):
        for s in range(pi0.shape[0]):
            for k in range(z.shape[0]):
                acc = 1.0 + 0.0j
                zk = z[k]
                for i in idx:
                    acc *= pi0[s, i] + pi1[s, i] * zk
                out[s, k] = acc


@dataclass(frozen=True)
class GroupedSpec:
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sets = tuple(tuple(int(i) for i in s) for s in self.sets)
        if not sets or any(len(s) == 0 for s in sets):
            raise ValueError("grouping needs at least one non-empty set")
        flat = [i for s in sets for i in s]
        if any(i < 0 for i in flat):
            raise ValueError("mode indices must be non-negative")
        if len(set(flat)) != len(flat):
            raise ValueError("grouping sets must be pairwise disjoint")
        object.__setattr__(self, "sets", sets)

    @classmethod
    def total(cls, M: int) -> "GroupedSpec":
        return cls((tuple(range(M)),))

    @classmethod
    def split(cls, sizes: Sequence[int], offset: int = 0) -> "GroupedSpec":
        sets, start = [], offset
        for s in sizes:
            sets.append(tuple(range(start, start + s)))
            start += s
        return cls(tuple(sets))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.sets)

    @property
    def angles(self) -> tuple[float, ...]:
        return tuple(2 * math.pi / (n + 1) for n in self.sizes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(n + 1 for n in self.sizes)

    @property
    def order(self) -> int:
        return sum(self.sizes)

    def check(self, M: int) -> None:
        top = max(i for s in self.sets for i in s)
        if top >= M:
            raise ValueError(f"mode index {top} out of range for {M} modes")

    def to_text(self) -> str:
        return ";".join(",".join(map(str, s)) for s in self.sets)

    @classmethod
    def from_text(cls, text: str) -> "GroupedSpec":
        sets = []
        for part in text.split(";"):
            idx = []
            for tok in part.split(","):
                tok = tok.strip()
                if "-" in tok:
                    a, b = tok.split("-")
                    idx.extend(range(int(a), int(b) + 1))
                elif tok:
                    idx.append(int(tok))
            sets.append(tuple(idx))
        return cls(tuple(sets))


@dataclass(frozen=True, eq=False)
class GroupedDistribution:
    """Probabilities over grouped counts ``(m_1, .., m_g)``.

    ``chunk_estimates`` keeps the per-sub-ensemble distributions so that
    errors of derived quantities (marginals, sums) come from the same
    spread as the bins themselves.
    """

    probabilities: np.ndarray
    std_errors: np.ndarray
    meta: dict = field(default_factory=dict)
    chunk_estimates: np.ndarray = None

    @property
    def shape(self):
        return self.probabilities.shape

    def total(self) -> float:
        return float(self.probabilities.sum())

    def marginal(self, keep: Sequence[int]) -> "GroupedDistribution":
        keep = tuple(keep)
        drop = tuple(a for a in range(self.probabilities.ndim) if a not in keep)
        if self.chunk_estimates is not None:
            chunks = self.chunk_estimates.sum(axis=tuple(a + 1 for a in drop))
            p, e = subensemble_error(chunks)
        else:
            chunks = None
            p = self.probabilities.sum(axis=drop)
            e = np.sqrt((self.std_errors ** 2).sum(axis=drop))
        meta = dict(self.meta)
        if "spec" in meta:
            sets = GroupedSpec.from_text(meta["spec"]).sets
            meta["spec"] = GroupedSpec(tuple(sets[a] for a in keep)).to_text()
        return GroupedDistribution(p, e, meta, chunks)


def click_estimators(n_prime):
    """Phase-space click weights ``(exp(-n'), 1 - exp(-n'))``.

    Complex or negative weights are legitimate for positive-P samples.
    """
    pi0 = np.exp(-np.asarray(n_prime, dtype=complex))
    return pi0, 1.0 - pi0


def _require_positive_p(ens: Ensemble):
    if ens.ordering.sigma != 0:
        raise ValidationError("click probabilities need a normally ordered (positive-P) ensemble")


def fourier_factors(pi0: np.ndarray, pi1: np.ndarray, spec: GroupedSpec) -> list[np.ndarray]:
    """Per-sample ``F_j(k)`` arrays of shape ``(S, M_j + 1)``."""
    out = []
    for idx, theta in zip(spec.sets, spec.angles):
        k = np.arange(len(idx) + 1)
        z = np.exp(-1j * theta * k)
        if _nb is not None:
            F = np.empty((pi0.shape[0], len(idx) + 1), dtype=complex)
            _factor_kernel(np.ascontiguousarray(pi0), np.ascontiguousarray(pi1),
                           np.asarray(idx, dtype=np.int64), z, F)
        else:
            F = np.ones((pi0.shape[0], len(idx) + 1), dtype=complex)
            for i in idx:
                F *= pi0[:, i, None] + pi1[:, i, None] * z
        out.append(F)
    return out


def _mean_outer(factors: list[np.ndarray]) -> np.ndarray:
    S = factors[0].shape[0]
    if len(factors) == 1:
        return factors[0].mean(axis=0)
    if len(factors) == 2:
        return factors[0].T @ factors[1] / S
    acc = factors[0]
    for F in factors[1:]:
        acc = (acc[:, :, None] * F[:, None, :]).reshape(S, -1)
    return acc.mean(axis=0).reshape(tuple(F.shape[1] for F in factors))


def fourier_observable(alpha: np.ndarray, beta: np.ndarray, spec: GroupedSpec) -> np.ndarray:
    """Sample mean of the grouped Fourier observable over one block of samples."""
    pi0, pi1 = click_estimators(beta * alpha)
    return _mean_outer(fourier_factors(pi0, pi1, spec))


def inverse_dft(g_tilde: np.ndarray) -> np.ndarray:
    """``G(m) = prod(1/(M_j+1)) sum_k G~(k) exp(i sum_j k_j theta_j m_j)``."""
    return np.fft.ifftn(g_tilde)


def grouped_chunk(alpha: np.ndarray, beta: np.ndarray, spec: GroupedSpec) -> np.ndarray:
    """Complex grouped distribution estimated from one sub-ensemble."""
    return inverse_dft(fourier_observable(alpha, beta, spec))


def bruteforce_chunk(alpha: np.ndarray, beta: np.ndarray, spec: GroupedSpec) -> np.ndarray:
    """Same estimand as :func:`grouped_chunk` by summing every click pattern."""
    modes = [i for s in spec.sets for i in s]
    if len(modes) > BRUTEFORCE_MAX_MODES:
        raise ValueError(f"enumeration is capped at {BRUTEFORCE_MAX_MODES} modes, got {len(modes)}")
    pi0, pi1 = click_estimators(beta * alpha)
    S = alpha.shape[0]
    # W[s, c] = prod_i pi_i(c_i); pattern bits ordered as `modes`, first mode most significant
    W = np.ones((S, 1), dtype=complex)
    for i in modes:
        W = (W[:, :, None] * np.stack([pi0[:, i], pi1[:, i]], axis=1)[:, None, :]).reshape(S, -1)
    patterns = np.array(list(itertools.product((0, 1), repeat=len(modes))), dtype=int).reshape(-1, len(modes))
    counts, start = [], 0
    for n in spec.sizes:
        counts.append(patterns[:, start:start + n].sum(axis=1))
        start += n
    flat = np.ravel_multi_index(tuple(counts), spec.shape)
    binned = np.zeros((S, int(np.prod(spec.shape))), dtype=complex)
    for c in range(W.shape[1]):
        binned[:, flat[c]] += W[:, c]
    return binned.mean(axis=0).reshape(spec.shape)


def _finalize(chunks: list[np.ndarray], meta: dict) -> GroupedDistribution:
    arr = np.array(chunks)
    mean_c = arr.mean(axis=0)
    _, imag_err = subensemble_error(arr.imag)
    p, e = subensemble_error(arr.real)
    meta = dict(meta)
    meta["imag_residue"] = float(np.abs(mean_c.imag).max())
    meta["imag_residue_se"] = float(imag_err.max())
    return GroupedDistribution(p, e, meta, arr.real)


def _run_chunks(fn, chunks: Iterable, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda ab: fn(*ab), chunks))
    return [fn(a, b) for a, b in chunks]


def _meta_for(ens: Ensemble, spec: GroupedSpec) -> dict:
    meta = {"samples": ens.samples, "repeats": ens.layout.repeats, "chunk": ens.layout.chunk,
            "representation": ens.ordering.name, "spec": spec.to_text()}
    if "seed" in ens.meta:
        meta["seed"] = ens.meta["seed"]
    return meta


def grouped_probability(ens: Ensemble, spec: GroupedSpec, threads: int = 1) -> GroupedDistribution:
    """Grouped click-count distribution via the inverse DFT of Fourier observables."""
    _require_positive_p(ens)
    spec.check(ens.modes)
    chunks = _run_chunks(lambda a, b: grouped_chunk(a, b, spec), ens.chunks(), threads)
    return _finalize(chunks, _meta_for(ens, spec))


def grouped_probability_bruteforce(ens: Ensemble, spec: GroupedSpec) -> GroupedDistribution:
    """Enumeration oracle for :func:`grouped_probability` (at most 16 modes)."""
    _require_positive_p(ens)
    spec.check(ens.modes)
    if spec.order > BRUTEFORCE_MAX_MODES:
        raise ValueError(f"enumeration is capped at {BRUTEFORCE_MAX_MODES} modes, got {spec.order}")
    chunks = [bruteforce_chunk(a, b, spec) for a, b in ens.chunks()]
    return _finalize(chunks, _meta_for(ens, spec))


# -- CSV ---------------------------------------------------------------------

def write_distribution(dist, path, extra_meta: dict | None = None) -> None:
    """Write ``m_1..m_g, probability, std_error`` rows with ``#`` metadata."""
    p = np.asarray(dist.probabilities)
    e = np.asarray(dist.std_errors)
    meta = dict(dist.meta)
    if extra_meta:
        meta.update(extra_meta)
    buf = io.StringIO()
    for k in sorted(meta):
        buf.write(f"# {k}: {json.dumps(meta[k], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"m_{j + 1}" for j in range(p.ndim)] + ["probability", "std_error"])
    for idx in np.ndindex(p.shape):
        w.writerow(list(idx) + [f"{p[idx]:.17g}", f"{e[idx]:.17g}"])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_distribution(path) -> tuple[np.ndarray, np.ndarray, dict]:
    meta, rows = {}, []
    with open(path, encoding="utf-8") as fh:
        body = []
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                try:
                    meta[key.strip()] = json.loads(val)
                except json.JSONDecodeError:
                    meta[key.strip()] = val.strip()
            elif line.strip():
                body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    g = len(header) - 2
    if g < 1 or header[-2:] != ["probability", "std_error"]:
        raise ValueError(f"{path}: unexpected header {header}")
    for row in reader:
        rows.append(([int(x) for x in row[:g]], float(row[g]), float(row[g + 1])))
    shape = tuple(max(r[0][j] for r in rows) + 1 for j in range(g))
    p = np.zeros(shape)
    e = np.zeros(shape)
    for idx, pv, ev in rows:
        p[tuple(idx)] = pv
        e[tuple(idx)] = ev
    return p, e, meta


def load_grouped(path) -> GroupedDistribution:
    p, e, meta = read_distribution(path)
    return GroupedDistribution(p, e, meta)
