"""Streaming experiment drivers.

These never materialise the full ensemble: each sub-ensemble is drawn,
transformed and reduced independently, then the per-chunk estimates are
combined in repeat order. Results match the in-memory route
(``draw_input`` -> ``apply`` -> reduction) up to floating-point rounding.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator

from .core import Ordering, SeededStream, SubEnsembleLayout, ValidationError
from .counting import GroupedDistribution, GroupedSpec, _finalize, grouped_chunk
from .entanglement import WitnessReport, epr_source, mpartite_from_chunks
from .network import TransmissionMatrix, apply_arrays
from .sampler import InputSpec, draw_chunk


def _ordered(fn: Callable, n: int, threads: int) -> Iterator:
    """Yield ``fn(0..n-1)`` in order with at most ``threads`` results pending."""
    if threads <= 1:
        for k in range(n):
            yield fn(k)
        return
    with ThreadPoolExecutor(threads) as pool:
        for start in range(0, n, threads):
            yield from pool.map(fn, range(start, min(start + threads, n)))


def _map_chunks(fn: Callable, layout: SubEnsembleLayout, threads: int) -> list:
    return list(_ordered(fn, layout.repeats, threads))


def _check_network(spec: InputSpec, T: TransmissionMatrix):
    if T.M != spec.M:
        raise ValueError(f"matrix is {T.M} x {T.M} but input has {spec.M} modes")
    if spec.ordering.is_wigner and not T.is_unitary():
        raise ValidationError("Wigner ensembles require a unitary transmission matrix")


def simulate_grouped(spec: InputSpec, T: TransmissionMatrix, layout: SubEnsembleLayout,
                     seed: SeededStream, grouping: GroupedSpec, threads: int = 1) -> GroupedDistribution:
    if spec.ordering.sigma != 0:
        raise ValidationError("click probabilities need a normally ordered (positive-P) ensemble")
    _check_network(spec, T)
    grouping.check(spec.M)

    def one(k):
        a, b = draw_chunk(spec, layout.chunk, seed.substream(k))
        a, b = apply_arrays(T, a, b)
        return grouped_chunk(a, b, grouping)

    chunks = _map_chunks(one, layout, threads)
    meta = {"samples": layout.samples, "repeats": layout.repeats, "chunk": layout.chunk,
            "representation": spec.ordering.name, "spec": grouping.to_text(), "seed": seed.seed}
    return _finalize(chunks, meta)


def simulate_mpartite(M: int, r1: float, r2: float, ordering: Ordering, layout: SubEnsembleLayout,
                      seed: SeededStream, threads: int = 1, epsilon: float = 0.0) -> WitnessReport:
    spec, T = epr_source(M, r1, r2, ordering, epsilon=epsilon)

    def one(k):
        a, b = draw_chunk(spec, layout.chunk, seed.substream(k))
        return apply_arrays(T, a, b, ordering.is_wigner)

    exact = epsilon == 0
    rep = mpartite_from_chunks(_ordered(one, layout.repeats, threads), ordering, M,
                               r1 if exact else None, r2 if exact else None)
    rep.samples = layout.samples
    return rep
