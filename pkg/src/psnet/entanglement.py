"""Quadrature statistics and EPR / steering / M-partite entanglement witnesses.

Inputs follow the two-squeezer convention: input 1 is squeezed in ``p``
with ``Var(p_1) = exp(-2 r1)`` and input 2 is squeezed in ``x`` with
``Var(x_2) = exp(-2 r2)``; all other inputs are vacuum. Reported
variances are those of the measured (symmetrically ordered) quadratures,
for which the vacuum gives one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import Ensemble, ModeSpec, Ordering, ValidationError
from .network import BeamSplitterChainSpec, TransmissionMatrix, bs_chain_matrix
from .sampler import InputSpec
from .stats import subensemble_error

PASS_MARGIN = 3.0


@dataclass(frozen=True)
class QuadratureSpec:
    mode: int
    theta: float = 0.0

    @classmethod
    def x(cls, mode: int) -> "QuadratureSpec":
        return cls(mode, 0.0)

    @classmethod
    def p(cls, mode: int) -> "QuadratureSpec":
        return cls(mode, math.pi / 2)


def _combination(alpha, beta, coeffs: np.ndarray, theta: float) -> np.ndarray:
    """Samples of ``sum_i c_i (alpha_i e^{-i theta} + beta_i e^{i theta})``."""
    c = np.asarray(coeffs, dtype=float)
    return alpha @ (c * np.exp(-1j * theta)) + beta @ (c * np.exp(1j * theta))


def quadrature_samples(ens: Ensemble, spec: QuadratureSpec) -> np.ndarray:
    """Real quadrature readouts of one mode of a Wigner ensemble."""
    if not ens.ordering.is_wigner:
        raise ValidationError("quadrature samples correspond to readouts only in the Wigner representation")
    ph = np.exp(-1j * spec.theta)
    q = ens.alpha[:, spec.mode] * ph + ens.beta[:, spec.mode] * np.conj(ph)
    if q.size and np.abs(q.imag).max() > 1e-12:
        raise ValidationError("quadrature samples have an imaginary residue")
    return q.real


def _var_chunk(q: np.ndarray) -> complex:
    n = q.shape[0]
    mean = q.mean()
    return (np.mean(q * q) - mean * mean) * (n / (n - 1))


def _cov_chunk(a: np.ndarray, b: np.ndarray) -> complex:
    n = a.shape[0]
    return (np.mean(a * b) - a.mean() * b.mean()) * (n / (n - 1))


def _combo_variances(chunks: Iterable, ordering: Ordering, combos) -> np.ndarray:
    """Per-chunk measured variances, shape ``(repeats, len(combos))``.

    Sample variances of phase-space quadratures carry the representation's
    ordering; ``(1 - 2 sigma) * sum c_i^2`` converts them to symmetric
    (measured) variances.
    """
    corr = [(1.0 - 2.0 * ordering.sigma) * float(np.sum(np.square(c))) for c, _ in combos]
    out = []
    for a, b in chunks:
        out.append([_var_chunk(_combination(a, b, c, th)).real + k
                    for (c, th), k in zip(combos, corr)])
    return np.array(out)


@dataclass
class WitnessReport:
    M: int
    du2: float
    dv2: float
    product: float
    sum: float
    product_threshold: float
    sum_threshold: float
    std_errors: dict
    gains: tuple = (1.0, 1.0)
    steering_product: Optional[float] = None
    representation: str = "wigner"
    samples: int = 0
    analytic: dict = field(default_factory=dict)

    @property
    def product_pass(self) -> bool:
        return self.product + PASS_MARGIN * self.std_errors["product"] < self.product_threshold

    @property
    def sum_pass(self) -> bool:
        return self.sum + PASS_MARGIN * self.std_errors["sum"] < self.sum_threshold

    def records(self) -> list[dict]:
        recs = [
            {"statistic": "du2", "value": self.du2, "std_error": self.std_errors["du2"], "threshold": None, "pass": None},
            {"statistic": "dv2", "value": self.dv2, "std_error": self.std_errors["dv2"], "threshold": None, "pass": None},
            {"statistic": "product", "value": self.product, "std_error": self.std_errors["product"],
             "threshold": self.product_threshold, "pass": self.product_pass},
            {"statistic": "sum", "value": self.sum, "std_error": self.std_errors["sum"],
             "threshold": self.sum_threshold, "pass": self.sum_pass},
        ]
        if self.steering_product is not None:
            recs.append({"statistic": "steering_product", "value": self.steering_product,
                         "std_error": self.std_errors["product"], "threshold": 1.0,
                         "pass": self.steering_product + PASS_MARGIN * self.std_errors["product"] < 1.0})
        for r in recs:
            r["M"] = self.M
            r["representation"] = self.representation
        return recs

    def to_json(self) -> str:
        return json.dumps({"M": self.M, "representation": self.representation, "samples": self.samples,
                           "gains": list(self.gains), "analytic": self.analytic,
                           "statistics": self.records()}, sort_keys=True)


def _report_from_variances(v: np.ndarray, M: int, prod_thr: float, sum_thr: float,
                           ordering: Ordering, **kw) -> WitnessReport:
    """Combine per-chunk ``(du2, dv2)`` pairs into a report.

    Product and sum errors use first-order propagation with the observed
    covariance of the two variances across sub-ensembles, so they stay
    defined when single sub-ensembles produce negative estimates.
    """
    (du2, dv2), (eu, ev) = subensemble_error(v)
    R = v.shape[0]
    cov = np.cov(v[:, 0], v[:, 1], ddof=1)[0, 1] / R
    prod = math.sqrt(max(du2 * dv2, 0.0))
    if du2 > 0 and dv2 > 0:
        rel2 = (eu / du2) ** 2 + (ev / dv2) ** 2 + 2 * cov / (du2 * dv2)
        eprod = 0.5 * prod * math.sqrt(max(rel2, 0.0))
    else:
        eprod = math.inf
    esum = math.sqrt(max(eu ** 2 + ev ** 2 + 2 * cov, 0.0))
    errs = {"du2": float(eu), "dv2": float(ev), "product": float(eprod), "sum": float(esum)}
    return WitnessReport(M=M, du2=float(du2), dv2=float(dv2), product=prod, sum=float(du2 + dv2),
                         product_threshold=prod_thr, sum_threshold=sum_thr, std_errors=errs,
                         representation=ordering.name, samples=R, **kw)


def _pair_combos(M: int, i: int, j: int, g: float, h: float):
    cu = np.zeros(M)
    cv = np.zeros(M)
    cu[i], cu[j] = 1.0, -g
    cv[i], cv[j] = 1.0, h
    return [(cu, 0.0), (cv, math.pi / 2)]


def epr_witness(ens: Ensemble, g: float = 1.0, h: float = 1.0, modes=(0, 1)) -> WitnessReport:
    """``Delta(x_1 - g x_2) Delta(p_1 + h p_2)`` against ``1 + g h``."""
    i, j = modes
    v = _combo_variances(ens.chunks(), ens.ordering, _pair_combos(ens.modes, i, j, g, h))
    rep = _report_from_variances(v, 2, 1.0 + g * h, 2.0 * (1.0 + g * h), ens.ordering, gains=(g, h))
    rep.samples = ens.samples
    return rep


def analytic_gains(r1: float, r2: float, R1: float = 1 / math.sqrt(2)) -> tuple[float, float]:
    """Inference gains minimising ``Var(x1 - g_x x2)`` and ``Var(p1 + g_p p2)``."""
    T1 = math.sqrt(1.0 - R1 * R1)
    a, b = math.exp(2 * r1), math.exp(-2 * r2)
    c, d = math.exp(2 * r2), math.exp(-2 * r1)
    gx = R1 * T1 * (a - b) / (T1 * T1 * a + R1 * R1 * b)
    gp = R1 * T1 * (c - d) / (R1 * R1 * c + T1 * T1 * d)
    return gx, gp


def inference_variances(r1: float, r2: float, R1: float, gx: float, gp: float) -> tuple[float, float]:
    """Exact ``Var(x1 - gx x2)`` and ``Var(p1 + gp p2)`` behind one beam splitter."""
    T1 = math.sqrt(1.0 - R1 * R1)
    vx = (R1 - gx * T1) ** 2 * math.exp(2 * r1) + (T1 + gx * R1) ** 2 * math.exp(-2 * r2)
    vp = (R1 + gp * T1) ** 2 * math.exp(-2 * r1) + (T1 - gp * R1) ** 2 * math.exp(2 * r2)
    return vx, vp


def steering_witness(ens: Ensemble, r1: float, r2: float, R1: float = 1 / math.sqrt(2),
                     gains: Optional[tuple[float, float]] = None, modes=(0, 1)) -> WitnessReport:
    """EPR steering product ``S_{1|2}``; steering of mode 1 when ``S < 1``."""
    gx, gp = analytic_gains(r1, r2, R1) if gains is None else gains
    i, j = modes
    v = _combo_variances(ens.chunks(), ens.ordering, _pair_combos(ens.modes, i, j, gx, gp))
    vx, vp = inference_variances(r1, r2, R1, gx, gp)
    analytic = {"du2": vx, "dv2": vp, "steering_product": math.sqrt(vx * vp),
                "gains": list(analytic_gains(r1, r2, R1))}
    if math.isclose(R1, 1 / math.sqrt(2)):
        analytic["steering_optimum"] = 1.0 / math.cosh(r1 + r2)
    rep = _report_from_variances(v, 2, 1.0, 2.0, ens.ordering, gains=(gx, gp), analytic=analytic)
    rep.steering_product = rep.product
    rep.samples = ens.samples
    return rep


@dataclass(frozen=True)
class GainEstimate:
    gx: float
    gp: float
    gx_err: float
    gp_err: float


def empirical_gains(ens: Ensemble, modes=(0, 1)) -> GainEstimate:
    """Covariance-ratio gains ``Cov(x1,x2)/Var(x2)`` and ``-Cov(p1,p2)/Var(p2)``."""
    i, j = modes
    corr = 1.0 - 2.0 * ens.ordering.sigma
    ex, ep = np.zeros(ens.modes), np.zeros(ens.modes)
    gxs, gps = [], []
    for a, b in ens.chunks():
        row = []
        for th in (0.0, math.pi / 2):
            ei, ej = ex.copy(), ep.copy()
            ei[i], ej[j] = 1.0, 1.0
            qi, qj = _combination(a, b, ei, th), _combination(a, b, ej, th)
            var = _var_chunk(qj).real + corr
            if var <= 0:
                raise ValidationError("degenerate second-mode quadrature variance")
            row.append(_cov_chunk(qi, qj).real / var)
        gxs.append(row[0])
        gps.append(-row[1])
    gx, egx = subensemble_error(gxs)
    gp, egp = subensemble_error(gps)
    return GainEstimate(float(gx), float(gp), float(egx), float(egp))


def mpartite_combos(M: int):
    if M < 2:
        raise ValueError("M-partite witnesses need M >= 2")
    c = np.full(M, 1.0 / math.sqrt(M - 1))
    cu, cv = -c, c.copy()
    cu[0] = cv[0] = 1.0
    return [(cu, 0.0), (cv, math.pi / 2)]


def mpartite_from_chunks(chunks: Iterable, ordering: Ordering, M: int,
                         r1: Optional[float] = None, r2: Optional[float] = None) -> WitnessReport:
    v = _combo_variances(chunks, ordering, mpartite_combos(M))
    analytic = {}
    if r1 is not None and r2 is not None:
        analytic = {"du2": 2 * math.exp(-2 * r2), "dv2": 2 * math.exp(-2 * r1),
                    "product": 2 * math.exp(-(r1 + r2)),
                    "sum": 2 * math.exp(-2 * r2) + 2 * math.exp(-2 * r1)}
    return _report_from_variances(v, M, 2.0 / (M - 1), 4.0 / (M - 1), ordering, analytic=analytic)


def mpartite_witness(ens: Ensemble, M: int, r1: Optional[float] = None,
                     r2: Optional[float] = None) -> WitnessReport:
    """Product and sum criteria for ``u = x_1 - sum_k x_k / sqrt(M-1)``, ``v = p_1 + sum_k p_k / sqrt(M-1)``."""
    if ens.modes != M:
        raise ValueError(f"ensemble has {ens.modes} modes, witness expects {M}")
    rep = mpartite_from_chunks(ens.chunks(), ens.ordering, M, r1, r2)
    rep.samples = ens.samples
    return rep


def epr_source(M: int, r1: float, r2: float, ordering: Ordering,
               reflectivities: Optional[Sequence[float]] = None,
               epsilon: float = 0.0) -> tuple[InputSpec, TransmissionMatrix]:
    """Inputs and network for the M-mode EPR / multipartite experiment.

    A quarter-wave phase on input 2 turns its ``y`` squeezing into ``x``
    squeezing before the beam-splitter chain.
    """
    modes = [ModeSpec.squeezed(r1, epsilon), ModeSpec.squeezed(r2, epsilon)]
    modes += [ModeSpec.vacuum()] * (M - 2)
    chain = bs_chain_matrix(BeamSplitterChainSpec(M, None if reflectivities is None else tuple(reflectivities)))
    phase = np.ones(M, dtype=complex)
    phase[1] = 1j
    T = TransmissionMatrix(chain.entries * phase[None, :], meta=dict(chain.meta, input_phase="i on mode 2"))
    return InputSpec(tuple(modes), ordering), T
