"""
Tests de los modelos compartimentales, Legendre y el integrador RK4.
"""
import numpy as np
import pytest

from spade4.exceptions import DivergenceError, DomainError
from spade4.models import (
    CompartmentState,
    SeirParams,
    SueirParams,
    TargetKind,
    TransmissionBasis,
)
from spade4.services.ode import (
    beta_of_t,
    decimate,
    integrate,
    integrate_compartments,
    legendre_eval,
    seir_rhs,
    simulate_observable,
    sueir_rhs,
)
from tests.conftest import SYNTHETIC_INITIAL, SYNTHETIC_PARAMS


def test_legendre_examples():
    assert legendre_eval(0, 0.3) == 1.0
    assert legendre_eval(1, 0.3) == pytest.approx(0.3)
    assert legendre_eval(2, 0.5) == pytest.approx(-0.125)
    assert legendre_eval(3, 0.5) == pytest.approx(-0.4375)
    for k in range(11):
        assert legendre_eval(k, 1.0) == pytest.approx(1.0)
        assert legendre_eval(k, -1.0) == pytest.approx((-1.0) ** k)


def test_legendre_bonnet_and_bounds():
    rng = np.random.default_rng(7)
    for _ in range(200):
        x = rng.uniform(-1, 1)
        k = int(rng.integers(1, 10))
        lhs = (k + 1) * legendre_eval(k + 1, x)
        rhs = (2 * k + 1) * x * legendre_eval(k, x) - k * legendre_eval(k - 1, x)
        assert lhs == pytest.approx(rhs, abs=1e-12)
    grid = np.linspace(-1, 1, 401)
    for k in range(11):
        assert np.all(np.abs(legendre_eval(k, grid)) <= 1 + 1e-12)


def test_legendre_negative_order():
    with pytest.raises(DomainError):
        legendre_eval(-1, 0.0)


def test_beta_of_t_linear_basis():
    basis = TransmissionBasis(coeffs=(0.2, 0.1), t_min=0, t_max=10)
    assert beta_of_t(basis, 0.0) == pytest.approx(0.1)
    assert beta_of_t(basis, 5.0) == pytest.approx(0.2)
    assert beta_of_t(basis, 10.0) == pytest.approx(0.3)
    with pytest.raises(DomainError):
        beta_of_t(basis, 11.0)


def test_constant_basis_matches_constant_seir():
    basis = TransmissionBasis(coeffs=(0.3,), t_min=0, t_max=50)
    varying = SeirParams(beta=basis, sigma=0.2, gamma=0.1, population=1000)
    constant = SeirParams(beta=0.3, sigma=0.2, gamma=0.1, population=1000)
    state = CompartmentState(S=990, E=5, I=5, R=0, t=80.0)
    np.testing.assert_allclose(seir_rhs(state, varying), seir_rhs(state, constant))


def test_rhs_conservation():
    rng = np.random.default_rng(0)
    for _ in range(200):
        S, E, I, R = rng.uniform(0, 1000, size=4)  # noqa: E741
        state = CompartmentState(S=S, E=E, I=I, R=R)
        sigma, gamma, beta = rng.uniform(0.05, 1.0, size=3)
        mu = rng.uniform(0, 1)
        seir = SeirParams(beta=beta, sigma=sigma, gamma=gamma, population=state.total + 1)
        assert np.sum(seir_rhs(state, seir)) == pytest.approx(0.0, abs=1e-9)
        sueir = SueirParams(
            beta=beta, sigma=sigma, gamma=gamma, mu=mu, population=state.total + 1
        )
        assert np.sum(sueir_rhs(state, sueir)) == pytest.approx(
            -(1 - mu) * sigma * E, abs=1e-9
        )


def test_rk4_exponential_decay():
    trajectory = integrate(lambda t, y: -y, np.array([1.0]), step=0.01, horizon=1.0)
    assert trajectory.states[-1, 0] == pytest.approx(np.exp(-1.0), abs=1e-8)
    assert trajectory.times[-1] == pytest.approx(1.0)


def test_rk4_fourth_order():
    errors = []
    for step in (0.1, 0.05):
        end = integrate(lambda t, y: -y, np.array([1.0]), step=step, horizon=1.0)
        errors.append(abs(end.states[-1, 0] - np.exp(-1.0)))
    order = np.log2(errors[0] / errors[1])
    assert 3.7 <= order <= 4.3


def test_rk4_reports_divergence():
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(DivergenceError) as exc_info:
            integrate(lambda t, y: y**2, np.array([1.0]), step=0.01, horizon=2.0)
    assert exc_info.value.t > 0.9


def test_integrate_rejects_bad_step():
    with pytest.raises(DomainError):
        integrate(lambda t, y: -y, np.array([1.0]), step=0.0, horizon=1.0)


def test_decimate_daily():
    trajectory = integrate(lambda t, y: -y, np.array([1.0]), step=0.01, horizon=3.0)
    daily = decimate(trajectory)
    np.testing.assert_allclose(daily.times, [0, 1, 2, 3])
    with pytest.raises(DomainError):
        decimate(trajectory, every=0.015)


def test_synthetic_series_shape(synthetic_truth):
    assert synthetic_truth.m == 181
    assert synthetic_truth.values[0] == pytest.approx(1 / SYNTHETIC_PARAMS.population, abs=1e-9)
    assert np.all(synthetic_truth.values > 0)
    assert np.all(synthetic_truth.values < 1)
    assert 97 <= int(np.argmax(synthetic_truth.values)) <= 111


def test_synthetic_states_non_negative():
    trajectory = integrate(SYNTHETIC_PARAMS, SYNTHETIC_INITIAL, horizon=180.0)
    assert np.all(trajectory.states >= -1e-9)


def test_cumulative_target_dominates_active():
    active = simulate_observable(SYNTHETIC_PARAMS, SYNTHETIC_INITIAL, 60)
    cumulative = simulate_observable(
        SYNTHETIC_PARAMS, SYNTHETIC_INITIAL, 60, target=TargetKind.CUMULATIVE
    )
    assert np.all(cumulative.values >= active.values)
    assert np.all(np.diff(cumulative.values) >= 0)


def test_compiled_kernel_matches_python_sueir():
    expected = decimate(integrate(SYNTHETIC_PARAMS, SYNTHETIC_INITIAL, horizon=30.0)).states
    compiled = integrate_compartments(SYNTHETIC_PARAMS, SYNTHETIC_INITIAL, n_samples=31)
    np.testing.assert_allclose(compiled, expected, rtol=1e-9, atol=1e-9)


def test_compiled_kernel_matches_python_time_varying_seir():
    basis = TransmissionBasis(coeffs=(0.3, -0.05, 0.02), t_min=0, t_max=20)
    params = SeirParams(beta=basis, sigma=0.25, gamma=0.1, population=1e4)
    initial = CompartmentState(S=9990, E=5, I=5, R=0)
    expected = decimate(integrate(params, initial, horizon=30.0)).states
    compiled = integrate_compartments(params, initial, n_samples=31)
    np.testing.assert_allclose(compiled, expected, rtol=1e-9, atol=1e-9)
