import numpy as np
import pytest

from matprod.rng import RngStream, as_generator


def test_identical_seed_path_bit_identical():
    a = RngStream(123, (4, 5)).generator().standard_normal(1000)
    b = RngStream(123, (4, 5)).generator().standard_normal(1000)
    assert np.array_equal(a, b)


def test_distinct_paths_differ():
    a = RngStream(123).derive(0).generator().standard_normal(100)
    b = RngStream(123).derive(1).generator().standard_normal(100)
    c = RngStream(124).derive(0).generator().standard_normal(100)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_derive_appends_path():
    s = RngStream(7).derive(1, 2).derive(3)
    assert s.path == (1, 2, 3)
    assert s.seed == 7


def test_derived_streams_uncorrelated():
    base = RngStream(99)
    x = base.derive(0).generator().standard_normal(200_000)
    y = base.derive(1).generator().standard_normal(200_000)
    corr = np.corrcoef(x, y)[0, 1]
    assert abs(corr) < 3 / np.sqrt(len(x))


def test_seed_validation():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(2**64)
    with pytest.raises(ValueError):
        RngStream(1, (-2,))


def test_as_generator_accepts_both():
    s = RngStream(5)
    gen = s.generator()
    assert as_generator(gen) is gen
    assert isinstance(as_generator(s), np.random.Generator)
    with pytest.raises(TypeError):
        as_generator(42)


def test_generator_restarts_at_origin():
    s = RngStream(11, (3,))
    first = s.generator().standard_normal(10)
    again = s.generator().standard_normal(10)
    assert np.array_equal(first, again)
