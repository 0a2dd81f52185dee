import numpy as np
import pytest

from hsic.errors import ValidationError
from hsic.fixtures import DEFAULT_SPEC, SyntheticSpec, gen_smooth_cube


def test_default_shape():
    cube = gen_smooth_cube()
    assert cube.shape == (8, 32, 32)
    assert cube.norm is None


def test_zero_frequencies_constant():
    spec = SyntheticSpec(4, 5, 3, band_freqs=(((0.0, 0.0),),) * 3)
    samples = gen_smooth_cube(spec).samples
    # sin(phi) is the same at every pixel: constant per band, and exactly 0.5 with no terms
    assert all(np.ptp(b) == 0 for b in samples)
    empty = gen_smooth_cube(SyntheticSpec(4, 5, 3, band_freqs=((),) * 3))
    assert np.all(empty.samples == 0.5)


def test_no_components_is_constant():
    assert np.all(gen_smooth_cube(SyntheticSpec(6, 6, 2, components=0)).samples == 0.5)


def test_deterministic():
    a, b = gen_smooth_cube(), gen_smooth_cube()
    assert np.array_equal(a.samples, b.samples)
    c = gen_smooth_cube(SyntheticSpec(seed=1))
    assert not np.array_equal(a.samples, c.samples)


def test_range_over_100_seeds():
    for seed in range(100):
        s = gen_smooth_cube(SyntheticSpec(16, 16, 6, seed=seed)).samples
        assert s.min() >= 0.0 and s.max() <= 1.0, seed


def test_adjacent_bands_correlated():
    s = gen_smooth_cube(DEFAULT_SPEC).samples.reshape(DEFAULT_SPEC.bands, -1)
    for c in range(DEFAULT_SPEC.bands - 1):
        assert np.corrcoef(s[c], s[c + 1])[0, 1] > 0.5, c


def test_frequency_cap():
    s = gen_smooth_cube(SyntheticSpec(seed=3))
    assert s.samples.std() > 0.05
    with pytest.raises(ValidationError):
        SyntheticSpec(2, 2, 1, band_freqs=(((4.0, 0.0),),))


def test_band_freqs_length_checked():
    with pytest.raises(ValidationError):
        SyntheticSpec(2, 2, 2, band_freqs=(((1.0, 0.0),),))
