import numpy as np
import pytest

from csdyn.errors import NotCompletelyPositiveError
from csdyn.oracle import exact_reduced_state
from csdyn.qmap import (
    PAULI_BASIS,
    apply_map,
    check_density_matrix,
    choi,
    choi_from_transfer,
    closed_form_parameters,
    coefficients_from_transfer,
    density_matrix,
    from_pauli_vector,
    kraus_closed_form,
    kraus_from_choi,
    map_superoperator,
    pauli_vector,
    reshuffle,
    tomographic_states,
    transfer_matrix,
    validate_cptp,
)
from csdyn.spectrum import MapCoefficients, ModelParams, ReducedDynamics

from conftest import random_states

IDENT = MapCoefficients.identity()


def random_coeffs(rng, size=None):
    """Coefficients of valid phase-covariant channels."""
    a1 = rng.uniform(0, 1, size)
    a2 = rng.uniform(0, 1, size)
    bound = np.sqrt((1 - a1) * (1 - a2))
    z = bound * rng.uniform(0, 1, size) * np.exp(2j * np.pi * rng.uniform(size=size))
    return MapCoefficients(None, a1, a2, z)


def test_pauli_basis_orthonormal():
    gram = np.einsum("kab,lba->kl", PAULI_BASIS, PAULI_BASIS)
    assert np.allclose(gram, np.eye(4), atol=1e-15)


def test_pauli_vector_roundtrip(rng):
    rho = random_states(rng, 50)
    r = pauli_vector(rho)
    assert np.allclose(r[:, 0], 1 / np.sqrt(2))
    assert np.all(np.sum(r[:, 1:] ** 2, axis=1) <= 0.5 + 1e-10)
    assert np.allclose(from_pauli_vector(r), rho, atol=1e-15)


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        density_matrix(1.2)
    with pytest.raises(ValueError):
        density_matrix(0.5, 0.6)
    with pytest.raises(ValueError):
        check_density_matrix(np.eye(2))
    assert len(tomographic_states()) == 6


def test_identity_map(rng):
    rho = random_states(rng, 10)
    assert np.allclose(apply_map(IDENT, rho), rho, atol=1e-15)


def test_excited_population():
    c = MapCoefficients(None, 0.3, 0.1, 0.5 + 0.2j)
    out = apply_map(c, tomographic_states()["excited"])
    assert out[0, 0].real == pytest.approx(0.7, abs=1e-15)


def test_mixed_state_against_sector_oracle():
    p = ModelParams(1.0, 1.0, 0.01, 20, 1.0)
    rho0 = density_matrix(0.5)
    c = ReducedDynamics(p, model="sector").coefficients(25.0)
    out = apply_map(c, rho0)
    assert out[0, 0].real == pytest.approx((1 - c.alpha1 + c.alpha2) / 2, abs=1e-15)
    assert out[0, 1] == 0
    exact = exact_reduced_state(p, rho0, 25.0)
    assert np.max(np.abs(out - exact)) <= 1e-8


def test_apply_map_rejects_non_positive_output():
    with pytest.raises(NotCompletelyPositiveError):
        apply_map(MapCoefficients(None, 0.0, 0.0, 1.5), tomographic_states()["plusx"])


def test_apply_map_preserves_trace_and_hermiticity(rng):
    rho = random_states(rng, 1000)
    c = random_coeffs(rng, 1000)
    out = apply_map(c, rho)
    assert np.allclose(np.trace(out, axis1=1, axis2=2), 1.0, atol=1e-14)
    assert np.max(np.abs(out - np.swapaxes(out.conj(), 1, 2))) <= 1e-15


def test_transfer_matrix_examples():
    assert np.array_equal(transfer_matrix(IDENT), np.eye(4))
    f = transfer_matrix(MapCoefficients(None, 0.5, 0.5, 0.0))
    assert np.array_equal(f, np.diag([1.0, 0.0, 0.0, 0.0]))
    # fixed point of the depolarizing map
    assert np.allclose(apply_map(MapCoefficients(None, 0.5, 0.5, 0.0), tomographic_states()["excited"]), np.eye(2) / 2)


def test_transfer_matrix_matches_apply_map(rng):
    rho = random_states(rng, 1000)
    c = random_coeffs(rng, 1000)
    f = transfer_matrix(c)
    lhs = np.einsum("nkl,nl->nk", f, pauli_vector(rho))
    rhs = pauli_vector(apply_map(c, rho))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12
    assert np.array_equal(f[:, 0], np.broadcast_to([1.0, 0, 0, 0], (1000, 4)))


def test_transfer_roundtrip(rng):
    c = random_coeffs(rng, 20)
    back = coefficients_from_transfer(transfer_matrix(c))
    assert np.allclose(back.alpha1, c.alpha1) and np.allclose(back.alpha2, c.alpha2)
    assert np.allclose(back.zeta, c.zeta)


def test_choi_examples():
    c = choi(IDENT)
    assert np.allclose(np.linalg.eigvalsh(c), [0, 0, 0, 1], atol=1e-15)
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(c, np.outer(psi, psi))
    assert np.allclose(choi(MapCoefficients(None, 0.5, 0.5, 0.0)), np.eye(4) / 4)


def test_choi_entries_and_definition(rng):
    c0 = random_coeffs(rng)
    c = choi(c0)
    a1, a2, z = c0.alpha1, c0.alpha2, c0.zeta
    assert np.allclose(np.diag(c).real, [(1 - a1) / 2, a1 / 2, a2 / 2, (1 - a2) / 2])
    assert c[0, 3] == pytest.approx(z / 2) and c[3, 0] == pytest.approx(np.conj(z) / 2)
    # (id x Phi) on the maximally entangled state
    direct = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            r = np.einsum("kab,ba->k", PAULI_BASIS, e)
            direct += 0.5 * np.kron(e, from_pauli_vector(transfer_matrix(c0) @ r))
    assert np.allclose(c, direct, atol=1e-15)


def test_choi_transfer_duality(rng):
    c = random_coeffs(rng, 200)
    f = transfer_matrix(c)
    assert np.max(np.abs(choi_from_transfer(f) - choi(c))) <= 1e-12
    assert np.max(np.abs(0.5 * reshuffle(map_superoperator(c)) - choi(c))) <= 1e-12


def test_kraus_from_choi_identity():
    ks = kraus_from_choi(choi(IDENT))
    assert len(ks) == 1
    assert np.allclose(ks.operators[0], np.eye(2), atol=1e-15)


def test_kraus_from_choi_reconstructs(rng):
    c = random_coeffs(rng)
    ks = kraus_from_choi(choi(c))
    rho = random_states(rng, 100)
    assert ks.completeness_residual() <= 1e-10
    assert np.max(np.abs(ks.apply(rho) - apply_map(c, rho))) <= 1e-10


def test_kraus_from_choi_rejects_non_cp():
    with pytest.raises(NotCompletelyPositiveError, match="not CP"):
        kraus_from_choi(choi(MapCoefficients(None, 0.0, 0.0, 1.5)))


def test_closed_form_at_start():
    g1, g2, l1, l2, theta = closed_form_parameters(IDENT)
    assert (g1, g2, l1, theta) == (2.0, 0.0, 1.0, 0.0)
    ks = kraus_closed_form(IDENT)
    assert np.allclose(ks.operators[2], np.eye(2), atol=1e-15)
    for k in (0, 1, 3):
        assert np.allclose(ks.operators[k], 0.0, atol=1e-15)


def test_closed_form_symmetric_case():
    a, z = 0.2, 0.5 * np.exp(0.3j)
    g1, g2, l1, l2, _ = closed_form_parameters(MapCoefficients(None, a, a, z))
    assert (l1, l2) == (pytest.approx(1.0), pytest.approx(1.0))
    assert g1 == pytest.approx(1 - a + abs(z)) and g2 == pytest.approx(1 - a - abs(z))


def test_closed_form_singular():
    with pytest.raises(ValueError, match="kraus_from_choi"):
        kraus_closed_form(MapCoefficients(None, 0.5, 0.5, 0.0))


def test_kraus_constructions_agree(rng):
    rho = random_states(rng, 50)
    for _ in range(50):
        c = random_coeffs(rng)
        a = kraus_closed_form(c)
        b = kraus_from_choi(choi(c))
        assert a.completeness_residual() <= 1e-10
        assert np.max(np.abs(a.superoperator() - b.superoperator())) <= 1e-10
        assert np.max(np.abs(a.apply(rho) - apply_map(c, rho))) <= 1e-10


def test_validate_cptp_examples(dyn):
    r = validate_cptp(IDENT)
    assert r.is_cp and abs(r.min_choi_eig) <= 1e-15 and r.trace_dev == 0.0
    bad = validate_cptp(MapCoefficients(None, 0.0, 0.0, 1.5))
    assert not bad.is_cp and bad.min_choi_eig < 0
    report = validate_cptp(dyn.coefficients(np.linspace(0, 400, 401)))
    assert report.is_cp and report.trace_dev <= 1e-10 and report.kraus_residual <= 1e-10
