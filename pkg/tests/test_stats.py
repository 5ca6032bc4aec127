import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import fock_squeezed_vacuum, fock_thermal
from psnet.core import ModeSpec
from psnet.stats import (
    ReferenceDistribution,
    chi_square,
    click_probability,
    exact_independent_click_total,
    exact_thermal_total,
    poisson_binomial,
    subensemble_error,
)


def test_subensemble_error_frozen():
    mean, err = subensemble_error([1.0, 2.0, 3.0, 6.0])
    assert mean == 3.0
    assert err == pytest.approx(math.sqrt(14 / 3) / 2, rel=1e-14)


def test_subensemble_error_needs_two():
    with pytest.raises(ValueError):
        subensemble_error([1.0])


def test_subensemble_error_keeps_trailing_shape():
    m, e = subensemble_error(np.ones((5, 3, 2)))
    assert m.shape == (3, 2) and not e.any()


def test_fock_oracle_squeezed_click():
    p = fock_squeezed_vacuum(0.5)
    assert abs(1 - p.sum()) < 1e-12
    assert 1 - p[0] == pytest.approx(0.113181116, abs=1e-9)
    assert click_probability(math.sinh(0.5) ** 2, math.sinh(0.5) * math.cosh(0.5)) == pytest.approx(1 - p[0], abs=1e-14)


def test_fock_oracle_thermal_click():
    p = fock_thermal(1.0, cutoff=80)
    assert abs(1 - p.sum()) < 1e-12
    assert click_probability(1.0, 0.0) == pytest.approx(1 - p[0], abs=1e-15)


def test_exact_thermal_total_frozen():
    ref = exact_thermal_total(3, 1.0)
    assert np.allclose(ref.probabilities, [1 / 8, 3 / 8, 3 / 8, 1 / 8], atol=1e-15)
    assert ref.event_count == math.inf


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30))
def test_poisson_binomial_normalised_with_correct_mean(ps):
    d = poisson_binomial(ps)
    assert d.shape == (len(ps) + 1,)
    assert d.sum() == pytest.approx(1.0, abs=1e-12)
    assert (np.arange(len(d)) * d).sum() == pytest.approx(sum(ps), abs=1e-10)


def test_independent_reference_matches_thermal_for_equal_modes():
    ref = exact_independent_click_total([ModeSpec.thermal(0.5)] * 6)
    assert np.allclose(ref.probabilities, exact_thermal_total(6, 0.5).probabilities, atol=1e-15)


def test_chi_square_by_hand():
    ref = ReferenceDistribution([0.5, 0.3, 0.2], [0.0, 0.01, 0.0], event_count=100)

    class Sim:
        probabilities = np.array([0.52, 0.27, 0.21])
        std_errors = np.array([0.01, 0.02, 0.01])

    rep = chi_square(Sim, ref)
    expected = 0.02 ** 2 / 0.01 ** 2 + 0.03 ** 2 / (0.01 ** 2 + 0.02 ** 2) + 0.01 ** 2 / 0.01 ** 2
    assert rep.k_valid == 3
    assert rep.chi2 == pytest.approx(expected, rel=1e-12)
    assert rep.chi2_per_k == pytest.approx(expected / 3, rel=1e-12)
    assert rep.excluded_bins == []


def test_chi_square_excludes_low_count_bins():
    ref = ReferenceDistribution([0.95, 0.05], event_count=100)

    class Sim:
        probabilities = np.array([0.9, 0.1])
        std_errors = np.array([0.05, 0.05])

    rep = chi_square(Sim, ref)
    assert rep.k_valid == 1 and rep.excluded_bins == [(1,)]
    assert rep.as_dict()["excluded_bins"] == [[1]]


def test_chi_square_errors():
    ref = ReferenceDistribution([0.5, 0.5], event_count=10)

    class Sim:
        probabilities = np.array([0.5, 0.5])
        std_errors = np.array([0.1, 0.1])

    with pytest.raises(ValueError, match="no valid bins"):
        chi_square(Sim, ref)
    with pytest.raises(ValueError, match="shape"):
        chi_square(Sim, ReferenceDistribution([1.0], event_count=1e6))


def test_reference_validation():
    with pytest.raises(ValueError):
        ReferenceDistribution([-0.1, 0.5])
    with pytest.raises(ValueError):
        ReferenceDistribution([0.7, 0.7])
    with pytest.raises(ValueError):
        ReferenceDistribution([0.5, 0.5], std_errors=[0.1])
