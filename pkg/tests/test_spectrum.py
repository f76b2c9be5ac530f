import itertools
import math
from collections import Counter

import numpy as np
import pytest

from spinbath.couplings import CouplingScheme as C
from spinbath.errors import DegenerateFitError, InvalidParameterError, SizeLimitError, UnsupportedSchemeError
from spinbath.spectrum import (
    bath_energy,
    box_count,
    box_counting_dimension,
    cantor_intervals,
    enumerate_spectrum,
    natural_scales,
    spectrum_in_cantor_check,
)


def test_constant_spectrum_is_binomial():
    s = enumerate_spectrum(C.constant(1), 3)
    assert s.energies.tolist() == [-3, -1, 1, 3]
    assert s.multiplicities.tolist() == [1, 3, 3, 1]


def test_geometric_spectrum_examples():
    s = enumerate_spectrum(C.geometric_decaying(3), 2)
    assert s.energies == pytest.approx([-4 / 9, -2 / 9, 2 / 9, 4 / 9], abs=1e-16)
    assert s.multiplicities.tolist() == [1, 1, 1, 1]
    assert len(enumerate_spectrum(C.geometric_decaying(3), 12)) == 4096


def test_spectrum_against_sign_pattern_oracle():
    e = [0.5, 1.0, 1.5, 0.5]
    counts = Counter(round(sum(s * x for s, x in zip(signs, e)), 9) for signs in itertools.product((1, -1), repeat=4))
    s = enumerate_spectrum(C.explicit(e), 4)
    assert dict(zip(np.round(s.energies, 9).tolist(), s.multiplicities.tolist())) == counts
    assert s.multiplicities.sum() == 16


def test_spectrum_size_limit():
    with pytest.raises(SizeLimitError):
        enumerate_spectrum(C.constant(1), 25)


def test_bath_energy_interval():
    iv = bath_energy([1, -1], C.geometric_decaying(3))
    assert iv.center == pytest.approx(2 / 9)
    assert iv.radius == pytest.approx(1 / 18)
    assert 2 / 9 + 1 / 20 in iv
    assert bath_energy([1, 1], C.explicit([3, 4]), infinite=False).center == 7
    with pytest.raises(UnsupportedSchemeError):
        bath_energy([1], C.constant(1))
    with pytest.raises(InvalidParameterError):
        bath_energy([1, 0], C.geometric_decaying(3))


def test_cantor_level_one():
    m = cantor_intervals(3, 1)
    assert np.ravel(m.intervals) == pytest.approx([-0.5, -1 / 6, 1 / 6, 0.5])
    assert m.hull == (-0.5, 0.5)
    assert len(cantor_intervals(3, 10).intervals) == 1024


def test_cantor_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        cantor_intervals(2, 3)
    with pytest.raises(InvalidParameterError):
        cantor_intervals(3, 31)


@pytest.mark.parametrize("theta, N, depth", [(3, 18, 10), (4, 8, 8), (3, 10, 5), (2.5, 12, 12)])
def test_spectrum_contained_in_cantor_intervals(theta, N, depth):
    assert spectrum_in_cantor_check(theta, N, depth).contained


def test_box_counting_dimension_on_uniform_grid():
    pts = np.linspace(0, 1, 4097)
    est, counts, _ = box_counting_dimension(pts, 2.0 ** -np.arange(2, 11))
    assert est == pytest.approx(1.0, abs=0.02)
    assert counts == [2**j for j in range(2, 11)]


def test_box_counting_dimension_of_cantor_midpoints():
    theta = 3
    m = cantor_intervals(theta, 12)
    lo, hi = m.hull
    fit = box_counting_dimension(m.midpoints(), natural_scales(theta, 2, 9), anchor=lo, hull_max=hi)
    assert fit.estimate == pytest.approx(math.log(2) / math.log(3), abs=1e-9)
    assert list(fit.counts) == [2**j for j in range(2, 10)]


def test_box_count_single_point_and_degenerate_fit():
    assert box_count(np.array([0.3]), 0.1, 0.0) == 1
    with pytest.raises(DegenerateFitError):
        box_counting_dimension([0.5], [0.1, 0.01])
    with pytest.raises(InvalidParameterError):
        box_counting_dimension([0.0, 1.0], [0.1])
