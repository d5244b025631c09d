import numpy as np
import pytest

from csdyn.errors import NumericalError, SingularMapError
from csdyn.generator import (
    CanonicalRates,
    canonical_rates,
    characteristic_period,
    f_dot,
    finite_difference_f_dot,
    generator_from_rates,
    integrate_master,
    l_matrix,
    lindblad_rhs,
    rates_on_grid,
    rk4_propagators,
)
from csdyn.qmap import apply_map, density_matrix, pauli_vector, tomographic_states
from csdyn.spectrum import CoefficientDerivatives, MapCoefficients

T_GRID = np.linspace(0.5, 400, 800)


def numeric_derivative(fun, t, h=1e-4):
    return (fun(t - 2 * h) - 8 * fun(t - h) + 8 * fun(t + h) - fun(t + 2 * h)) / (12 * h)


def test_unitary_derivatives(unitary_dyn):
    d = unitary_dyn.derivatives(T_GRID)
    assert np.max(np.abs(d.alpha1_dot)) == 0.0 and np.max(np.abs(d.alpha2_dot)) == 0.0
    c = unitary_dyn.coefficients(T_GRID)
    d_abs = np.real(np.conj(c.zeta) * d.zeta_dot) / np.abs(c.zeta)
    assert np.max(np.abs(d_abs)) <= 1e-12


def test_derivatives_vanish_at_start(dyn):
    d = dyn.derivatives(0.0)
    assert d.alpha1_dot == 0.0 and d.alpha2_dot == 0.0


def test_analytic_matches_finite_difference(dyn):
    t = np.concatenate([[0.0, 1e-6], T_GRID])
    exact = f_dot(dyn, t)
    approx, one_sided = finite_difference_f_dot(dyn, t)
    assert one_sided[0] and one_sided[1] and not one_sided[2:].any()
    scale = np.max(np.abs(exact))
    assert np.max(np.abs(exact - approx)) <= 1e-7 * scale
    assert np.allclose(f_dot(dyn, 3.0, method="fd"), f_dot(dyn, 3.0), atol=1e-7 * scale)
    with pytest.raises(ValueError):
        f_dot(dyn, 1.0, method="spline")


def test_default_step_scale(fig1):
    assert characteristic_period(fig1) == pytest.approx(2 * np.pi)


def test_generator_structure(dyn):
    lm, bad = l_matrix(dyn, T_GRID, singular="mask")
    assert not bad.any()
    assert np.max(np.abs(lm[:, 0, :])) <= 1e-9
    assert np.max(np.abs(lm[:, 1, 1] - lm[:, 2, 2])) <= 1e-9
    c, d = dyn.coefficients_and_derivatives(T_GRID)
    lzz = -(d.alpha1_dot + d.alpha2_dot) / (1 - c.alpha1 - c.alpha2)
    assert np.allclose(lm[:, 3, 3], lzz, rtol=1e-10, atol=1e-14)


def test_lxx_is_log_derivative_of_coherence(dyn):
    t = np.linspace(1, 300, 60)
    numeric = numeric_derivative(lambda x: np.log(np.abs(dyn.coefficients(x).zeta)), t)
    assert np.max(np.abs(l_matrix(dyn, t)[:, 1, 1] - numeric)) <= 1e-7


def test_unitary_generator_is_rotation(unitary_dyn):
    lm = l_matrix(unitary_dyn, T_GRID)
    rot = np.zeros((4, 4))
    rot[1, 2], rot[2, 1] = 1.0, -1.0
    expected = lm[:, 1, 2][:, None, None] * rot
    assert np.max(np.abs(lm - expected)) <= 1e-12
    assert np.all(np.abs(lm[:, 1, 2]) > 0.9)


class _Collapsed:
    """Stand-in dynamics whose coherence vanishes at every time."""

    def coefficients_and_derivatives(self, t):
        z = np.zeros_like(np.asarray(t, dtype=float))
        return MapCoefficients(t, z + 0.1, z + 0.1, z + 0j), CoefficientDerivatives(t, z, z, z + 0j)


def test_singular_transfer_matrix():
    with pytest.raises(SingularMapError) as info:
        l_matrix(_Collapsed(), 2.5)
    assert info.value.t == 2.5
    lm, bad = l_matrix(_Collapsed(), np.array([1.0, 2.0]), singular="mask")
    assert bad.all() and np.isnan(lm).all()


def test_zero_generator_has_zero_rates():
    r = canonical_rates(np.zeros((4, 4)))
    assert r.as_array().tolist() == [0.0, 0.0, 0.0, 0.0]


def test_unitary_rates(unitary_dyn):
    lm = l_matrix(unitary_dyn, T_GRID)
    r = canonical_rates(lm, T_GRID)
    for name in ("gamma_minus", "gamma_plus", "gamma_d"):
        assert np.max(np.abs(getattr(r, name))) <= 1e-9
    c, d = unitary_dyn.coefficients_and_derivatives(T_GRID)
    arg_rate = np.imag(d.zeta_dot / c.zeta)
    assert np.allclose(r.omega, -0.5 * arg_rate, atol=1e-12)


def test_rates_reconstruct_generator(dyn):
    lm = l_matrix(dyn, T_GRID)
    rates = canonical_rates(lm, T_GRID)
    rebuilt = generator_from_rates(rates)
    for rho in tomographic_states().values():
        r = pauli_vector(rho)
        lhs = pauli_vector(lindblad_rhs(rates, np.broadcast_to(rho, (T_GRID.size, 2, 2))))
        assert np.max(np.abs(lhs - lm @ r)) <= 1e-8
        assert np.max(np.abs(rebuilt @ r - lm @ r)) <= 1e-8
    assert np.allclose(rates.gamma_minus + rates.gamma_plus, -lm[:, 3, 3])
    assert np.allclose(rates.gamma_minus - rates.gamma_plus, -lm[:, 3, 0])
    assert np.allclose(lm[:, 1, 1], -(rates.gamma_minus + rates.gamma_plus) / 2 - 2 * rates.gamma_d)


def test_non_canonical_generator_rejected():
    lm = np.zeros((4, 4))
    lm[1, 0] = 1.0  # an x drive has no place in the three-channel form
    with pytest.raises(NumericalError):
        canonical_rates(lm)


def test_dephasing_identity(dyn):
    t = np.linspace(1, 300, 60)
    r = canonical_rates(l_matrix(dyn, t), t)

    def log_ratio(x):
        c = dyn.coefficients(x)
        return np.log((1 - c.alpha1 - c.alpha2) / np.abs(c.zeta) ** 2)

    assert np.max(np.abs(r.gamma_d - 0.25 * numeric_derivative(log_ratio, t))) <= 1e-7


def test_rates_on_grid_flags(dyn):
    rates, bad = rates_on_grid(dyn, np.array([0.0, 1.0]))
    assert not bad.any()
    assert rates.at(0).gamma_minus == pytest.approx(0.0, abs=1e-15)


def test_lindblad_rhs_examples():
    rho = tomographic_states()["plusx"]
    assert np.array_equal(lindblad_rhs(CanonicalRates.zero(), rho), np.zeros((2, 2)))
    only_d = CanonicalRates(0.0, 0.0, 0.0, 0.0, 0.7)
    assert np.allclose(lindblad_rhs(only_d, np.eye(2) / 2), 0.0)
    decay = CanonicalRates(0.0, 0.0, 0.3, 0.0, 0.0)
    out = lindblad_rhs(decay, tomographic_states()["excited"])
    assert out[0, 0].real == pytest.approx(-0.3)
    mixed = CanonicalRates(0.0, 0.4, 0.3, 0.2, 0.1)
    out = lindblad_rhs(mixed, density_matrix(0.6, 0.2 - 0.1j))
    assert abs(np.trace(out)) <= 1e-15
    assert np.allclose(out, out.conj().T, atol=1e-15)


def test_rk4_propagator_constant_generator():
    lm = np.zeros((4, 4))
    lm[1, 2], lm[2, 1] = 1.0, -1.0
    dt = 0.1
    p = rk4_propagators(lm, lm, lm, dt)
    series = sum(np.linalg.matrix_power(dt * lm, k) / np.prod(range(1, k + 1)) for k in range(5))
    assert np.allclose(p, series, atol=1e-15)


def test_integrate_unitary_precession(unitary_dyn):
    traj = integrate_master(unitary_dyn, tomographic_states()["plusx"], 20.0, 1e-2)
    pops = traj.states[:, 0, 0].real
    assert np.max(np.abs(pops - 0.5)) <= 1e-10
    assert np.max(np.abs(np.abs(traj.states[:, 0, 1]) - 0.5)) <= 1e-10


def test_integrate_matches_exact_map(dyn):
    rho0 = np.stack([tomographic_states()["excited"], density_matrix(0.5)])
    traj = integrate_master(dyn, rho0, 20.0, 1e-3, record_every=1000)
    assert traj.singular_fraction == 0.0 and traj.singular_intervals == []
    exact = apply_map(dyn.coefficients(20.0), rho0)
    assert np.max(np.abs(traj.states[-1] - exact)) <= 1e-6
    c = dyn.coefficients(20.0)
    assert traj.states[-1, 0, 0, 0].real == pytest.approx(1 - c.alpha1, abs=1e-6)
    traces = np.trace(traj.states, axis1=-2, axis2=-1)
    assert np.max(np.abs(traces - 1)) <= 1e-10


def test_integrate_grid_validation(dyn):
    with pytest.raises(ValueError):
        integrate_master(dyn, tomographic_states()["excited"], 1.05, 0.1 + 1e-3)
