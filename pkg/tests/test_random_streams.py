import numpy as np
import pytest

from services.random_streams import (
    RngStream, StreamFactory, pareto_scale, sample_exponential, sample_pareto_burst,
)
from utils.errors import ValidationError


def test_same_seed_and_label_give_same_sequence():
    a = RngStream(42, 'burst_size:0').uniform(5)
    b = RngStream(42, 'burst_size:0').uniform(5)
    np.testing.assert_array_equal(a, b)


def test_labels_are_independent_streams():
    a = RngStream(42, 'burst_size:0').uniform(5)
    b = RngStream(42, 'burst_size:1').uniform(5)
    assert not np.array_equal(a, b)


def test_factory_returns_one_stream_per_label():
    factory = StreamFactory(3)
    assert factory.stream('x') is factory.stream('x')
    assert factory.stream('x') is not factory.stream('y')


def test_seed_outside_u64_is_rejected():
    with pytest.raises(ValidationError):
        RngStream(-1, 'x')
    with pytest.raises(ValidationError):
        RngStream(2**64, 'x')


def test_pareto_scale_matches_mean():
    assert pareto_scale(1.1, 110.0) == pytest.approx(10.0)
    with pytest.raises(ValidationError):
        pareto_scale(1.0, 10.0)


def test_pareto_median_matches_closed_form():
    shape, mean = 1.1, 30000 / 280
    x_m = pareto_scale(shape, mean)
    stream = RngStream(11, 'pareto-check')
    raw = (stream.generator.pareto(shape, 1_000_000) + 1.0) * x_m
    expected = x_m * 2 ** (1 / shape)
    assert np.median(raw) == pytest.approx(expected, rel=0.05)


def test_pareto_bursts_are_positive_integers():
    sizes = sample_pareto_burst(RngStream(5, 'sizes'), 1.1, 30000 / 280, size=10_000)
    assert sizes.dtype == np.int64
    assert sizes.min() >= 1
    single = sample_pareto_burst(RngStream(5, 'sizes'), 1.1, 30000 / 280)
    assert isinstance(single, int) and single >= 1


@pytest.mark.parametrize('mean', [0.3, 5.0])
def test_exponential_mean(mean):
    draws = sample_exponential(RngStream(8, f'exp:{mean}'), mean, size=1_000_000)
    assert draws.mean() == pytest.approx(mean, rel=0.01)


def test_exponential_rejects_non_positive_mean():
    with pytest.raises(ValidationError):
        sample_exponential(RngStream(1, 'x'), 0.0)


def test_off_transition_frequency():
    draws = RngStream(9, 'off_decision:0').uniform(1_000_000)
    assert (draws < 0.33).mean() == pytest.approx(0.33, abs=0.005)
