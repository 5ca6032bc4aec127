import math

import numpy as np
import pytest

from psnet.core import ModeSpec, Ordering, SeededStream, SubEnsembleLayout
from psnet.sampler import (
    InputSpec,
    draw_chunk,
    draw_input,
    estimate_moments,
    squeezed_input,
    uniform_input,
)


def test_single_sample_by_hand():
    # one squeezed mode, one sample: alpha = (dx w0 + i dy w1)/2
    spec = squeezed_input([0.5], Ordering.positive_p())
    stream = SeededStream(3)
    w = stream.normals((1, 2))[0]
    a, b = draw_chunk(spec, 1, stream)
    dx = math.sqrt(math.exp(1.0) - 1)
    dy = 1j * math.sqrt(1 - math.exp(-1.0))
    assert a[0, 0] == pytest.approx((dx * w[0] + 1j * dy * w[1]) / 2, abs=1e-14)
    assert b[0, 0] == pytest.approx((dx * w[0] - 1j * dy * w[1]) / 2, abs=1e-14)
    # dy is imaginary, so both amplitudes are real for this ordering
    assert a.imag[0, 0] == 0 and b.imag[0, 0] == 0


def test_wigner_beta_is_conjugate():
    spec = squeezed_input([0.3, 1.0], Ordering.wigner())
    ens = draw_input(spec, SubEnsembleLayout(3, 5), SeededStream(1))
    assert np.array_equal(ens.beta, ens.alpha.conj())


def test_vacuum_positive_p_is_exactly_zero():
    spec = uniform_input(3, ModeSpec.vacuum(), Ordering.positive_p())
    a, b = draw_chunk(spec, 10, SeededStream(0))
    assert not a.any() and not b.any()


def test_threads_do_not_change_samples():
    spec = squeezed_input([0.2, 0.4, 0.9], Ordering.positive_p())
    lay = SubEnsembleLayout(6, 50)
    e1 = draw_input(spec, lay, SeededStream(9), threads=1)
    e4 = draw_input(spec, lay, SeededStream(9), threads=4)
    assert np.array_equal(e1.alpha, e4.alpha) and np.array_equal(e1.beta, e4.beta)


def test_chunks_are_independent_of_repeats():
    # sub-ensemble k is a pure function of (seed, k)
    spec = squeezed_input([0.5], Ordering.wigner())
    short = draw_input(spec, SubEnsembleLayout(2, 10), SeededStream(5))
    long = draw_input(spec, SubEnsembleLayout(4, 10), SeededStream(5))
    assert np.array_equal(short.alpha, long.alpha[:20])


@pytest.mark.parametrize("ordering", [Ordering.positive_p(), Ordering.wigner()])
@pytest.mark.parametrize("mode", [ModeSpec.squeezed(0.8, 0.2), ModeSpec.thermal(1.5)])
def test_moment_estimates_within_5_se(ordering, mode):
    spec = InputSpec((mode,), ordering)
    est = estimate_moments(draw_input(spec, SubEnsembleLayout(20, 5000), SeededStream(11)))
    from psnet.core import moments_from_spec
    mo = moments_from_spec(mode)
    assert abs(est.n[0] - mo.n) < 5 * est.n_err[0]
    if mo.m_tilde:
        assert abs(est.m[0] - mo.m_tilde) < 5 * est.m_err[0]
    else:
        assert abs(est.m[0]) < 5 * est.m_err[0]


def test_input_spec_validation():
    with pytest.raises(ValueError):
        InputSpec((), Ordering.wigner())
    with pytest.raises(TypeError):
        InputSpec((0.5,), Ordering.wigner())
    spec = squeezed_input([0.1, 0.2], Ordering.wigner(), epsilon=[0.0, 0.5])
    assert spec.modes[1].epsilon == 0.5 and spec.M == 2
