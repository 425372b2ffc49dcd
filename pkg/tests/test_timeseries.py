"""
Tests de ingesta, preprocesamiento y métrica de error.
"""
import numpy as np
import pytest

from spade4.exceptions import (
    DimensionMismatchError,
    EmptySeriesError,
    InvalidSamplingError,
    MalformedRowError,
    MissingFileError,
    NonNumericValueError,
    NonUniformStepError,
    WindowError,
    ZeroDenominatorError,
)
from spade4.models import NoiseSpec, NormalizationSpec, TimeSeries
from spade4.services.timeseries import (
    denormalize,
    extract_window,
    inject_noise,
    load_csv,
    normalize,
    relative_error,
    seven_day_average,
    train_holdout_split,
    write_csv,
)


def test_load_csv_reads_day_value_file(write_series):
    path = write_series("day,value\n0,1\n1,3\n2,5")
    series = load_csv(path)
    assert series.t0 == 0
    assert series.dt == 1
    np.testing.assert_array_equal(series.values, [1.0, 3.0, 5.0])


def test_load_csv_accepts_crlf_and_step(write_series):
    path = write_series("day,value\r\n10,0.5\r\n12,0.25\r\n14,0\r\n")
    series = load_csv(path)
    assert series.t0 == 10
    assert series.dt == 2
    assert series.m == 3


def test_load_csv_gap_reports_line(write_series):
    path = write_series("day,value\n0,1\n1,3\n3,5\n")
    with pytest.raises(NonUniformStepError) as exc_info:
        load_csv(path)
    assert exc_info.value.line == 4
    assert "line 4" in str(exc_info.value)


def test_load_csv_header_only_is_empty(write_series):
    with pytest.raises(EmptySeriesError):
        load_csv(write_series("day,value\n"))


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(MissingFileError):
        load_csv(tmp_path / "nope.csv")


def test_load_csv_non_numeric_value(write_series):
    with pytest.raises(NonNumericValueError) as exc_info:
        load_csv(write_series("day,value\n0,1\n1,abc\n"))
    assert exc_info.value.line == 3


def test_load_csv_extra_field(write_series):
    with pytest.raises(MalformedRowError) as exc_info:
        load_csv(write_series("day,value\n0,1\n1,2,3\n"))
    assert exc_info.value.line == 3


def test_load_csv_wrong_header(write_series):
    with pytest.raises(MalformedRowError) as exc_info:
        load_csv(write_series("date,cases\n0,1\n"))
    assert exc_info.value.line == 1


def test_write_csv_output_is_loadable(tmp_path):
    series = TimeSeries(t0=5, dt=1, values=[0.1, 1 / 3, 2e-7])
    loaded = load_csv(write_csv(series, tmp_path / "out" / "s.csv"))
    assert loaded.t0 == 5
    np.testing.assert_array_equal(loaded.values, series.values)


def test_seven_day_average_constant_unchanged():
    series = TimeSeries(values=[5.0] * 8)
    np.testing.assert_allclose(seven_day_average(series).values, series.values)


def test_seven_day_average_truncated_start():
    averaged = seven_day_average(TimeSeries(values=[7, 0, 0, 0, 0, 0, 0]))
    np.testing.assert_allclose(
        averaged.values, [7, 3.5, 7 / 3, 7 / 4, 7 / 5, 7 / 6, 1], rtol=1e-12
    )


def test_seven_day_average_leading_zeros():
    averaged = seven_day_average(TimeSeries(values=[0, 0, 0, 0, 0, 0, 0, 7]))
    assert averaged.m == 8
    np.testing.assert_array_equal(averaged.values[:7], np.zeros(7))
    assert averaged.values[-1] == pytest.approx(1.0)


def test_seven_day_average_needs_daily_sampling():
    with pytest.raises(InvalidSamplingError):
        seven_day_average(TimeSeries(dt=2.0, values=[1, 2, 3]))


def test_normalize_covid_canada():
    spec = NormalizationSpec(population=3.8e7, scale_fraction=0.1)
    assert normalize(TimeSeries(values=[380]), spec).values[0] == pytest.approx(1e-4)


def test_normalize_identity_and_ebola_divisor():
    series = TimeSeries(values=[1.5, 2.5])
    np.testing.assert_array_equal(
        normalize(series, NormalizationSpec(population=1, scale_fraction=1)).values,
        series.values,
    )
    assert NormalizationSpec(population=135e6, scale_fraction=1e-3).divisor == pytest.approx(135e3)


def test_denormalize_inverts_normalize():
    spec = NormalizationSpec(population=7e8, scale_fraction=1e-5)
    series = TimeSeries(values=np.linspace(0, 5000, 11))
    restored = denormalize(normalize(series, spec), spec)
    np.testing.assert_allclose(restored.values, series.values, rtol=1e-14, atol=1e-12)


def test_inject_noise_zero_eta_is_identity():
    series = TimeSeries(values=[1.0, 2.0, 3.0])
    assert inject_noise(series, NoiseSpec(eta=0.0, seed=1)) is series


def test_inject_noise_statistics():
    n, eta = 100_000, 0.05
    series = TimeSeries(values=np.ones(n))
    noisy = inject_noise(series, NoiseSpec(eta=eta, seed=11))
    eps = (noisy.values - series.values) / np.max(np.abs(series.values))
    assert abs(eps.mean()) < 3 * eta / np.sqrt(n)
    assert eps.std() == pytest.approx(eta, rel=0.02)


def test_inject_noise_same_seed_reproducible():
    series = TimeSeries(values=np.linspace(0, 1, 50))
    a = inject_noise(series, NoiseSpec(eta=0.02, seed=4))
    b = inject_noise(series, NoiseSpec(eta=0.02, seed=4))
    c = inject_noise(series, NoiseSpec(eta=0.02, seed=5))
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_extract_window_full_series_resets_t0():
    series = TimeSeries(t0=3, values=[1, 2, 3])
    window = extract_window(series, 3, 5)
    assert window.t0 == 0
    np.testing.assert_array_equal(window.values, series.values)


def test_extract_window_covid_wave_two():
    series = TimeSeries(values=np.arange(705, dtype=float))
    wave = extract_window(series, 200, 380)
    assert wave.m == 181
    assert wave.values[0] == 200
    assert wave.values[-1] == 380


@pytest.mark.parametrize("start,end", [(10, 5), (-1, 5), (0, 20)])
def test_extract_window_bad_bounds(start, end):
    with pytest.raises(WindowError):
        extract_window(TimeSeries(values=np.arange(10.0)), start, end)


def test_train_holdout_split():
    series = TimeSeries(values=np.arange(10.0))
    train, holdout = train_holdout_split(series, 6, 3)
    np.testing.assert_array_equal(train.values, [0, 1, 2, 3, 4, 5])
    np.testing.assert_array_equal(holdout.values, [6, 7, 8])
    assert holdout.t0 == 6
    with pytest.raises(WindowError):
        train_holdout_split(series, 8, 3)


def test_relative_error_examples():
    truth = TimeSeries(values=[1.0, 2.0, 3.0])
    assert relative_error(truth, truth) == 0.0
    assert relative_error(truth, truth.with_values(2 * truth.values)) == pytest.approx(1.0)


def test_relative_error_scale_invariant():
    rng = np.random.default_rng(0)
    a, b = rng.random(7), rng.random(7)
    assert relative_error(-3.5 * a, -3.5 * b) == pytest.approx(relative_error(a, b))


def test_relative_error_guards():
    with pytest.raises(ZeroDenominatorError):
        relative_error([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(DimensionMismatchError):
        relative_error([1.0, 2.0], [1.0])
