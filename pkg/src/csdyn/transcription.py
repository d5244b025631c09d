"""Literal readings of formulas whose printed form disagrees with the model.

Nothing in the library computes with these.  They exist so the adjudication
report can quote how far each literal reading is from the resolved one.
Each function takes the same inputs as its resolved counterpart.
"""

import numpy as np

from .qmap import SIGMA_MINUS, SIGMA_PLUS, KrausSet, closed_form_parameters
from .spectrum import sinc2_half


def kraus_literal(coeffs):
    """Diagonal Kraus pair with ``+Lambda2`` and ``theta = arctan(Im/Re)``."""
    g1, g2, l1, l2, _ = closed_form_parameters(coeffs)
    z = complex(coeffs.zeta)
    theta = float(np.arctan(z.imag / z.real)) if z.real != 0 else np.copysign(np.pi / 2, z.imag)
    ph = np.exp(1j * theta)
    a1, a2 = float(coeffs.alpha1), float(coeffs.alpha2)
    g2 = max(g2, 0.0)
    ops = [
        np.sqrt(max(a2, 0.0)) * SIGMA_PLUS,
        np.sqrt(max(a1, 0.0)) * SIGMA_MINUS,
        np.sqrt(g1 / (1 + l1**2)) * np.diag([l1 * ph, 1.0]),
        np.sqrt(g2 / (1 + l2**2)) * np.diag([l2 * ph, 1.0]),
    ]
    return KrausSet(np.array(ops), np.array([a2, a1, g1, g2]))


def _parts(coeffs, derivs):
    a1 = np.asarray(coeffs.alpha1, dtype=float)
    a2 = np.asarray(coeffs.alpha2, dtype=float)
    z = np.asarray(coeffs.zeta, dtype=complex)
    a1d = np.asarray(derivs.alpha1_dot, dtype=float)
    a2d = np.asarray(derivs.alpha2_dot, dtype=float)
    zd = np.asarray(derivs.zeta_dot, dtype=complex)
    return a1, a2, z, a1d, a2d, zd


def _dlog_ratio_sq(z, zd):
    """``d/dt ln(1 + (Re z / Im z)^2)``."""
    u = z.real / z.imag
    ud = (zd.real * z.imag - z.real * zd.imag) / z.imag**2
    return 2 * u * ud / (1 + u**2)


def generator_literal(coeffs, derivs):
    """Generator entries as printed: ``(L_xx, L_xy, L_z0, L_zz)``.

    ``L_zz`` carries ``2 * alpha2_dot`` in place of ``alpha1_dot +
    alpha2_dot`` and ``L_z0`` multiplies by ``alpha1 + alpha2``.
    """
    a1, a2, z, a1d, a2d, zd = _parts(coeffs, derivs)
    s = 1 - (a1 + a2)
    lxx = np.real(zd / z)
    lxy = -_dlog_ratio_sq(z, zd)
    lzz = -(a2d + a2d) / s
    lz0 = a2d - a1d - (a2d + a2d) / s * (a1 + a2)
    return lxx, lxy, lz0, lzz


def generator_typo_fixed(coeffs, derivs):
    """As :func:`generator_literal` but with ``alpha1_dot + alpha2_dot``."""
    a1, a2, z, a1d, a2d, zd = _parts(coeffs, derivs)
    s = 1 - (a1 + a2)
    lzz = -(a1d + a2d) / s
    lz0 = a2d - a1d - (a1d + a2d) / s * (a1 + a2)
    return lz0, lzz


def rates_literal(coeffs, derivs):
    """Printed rates under the literal operator precedence.

    ``gamma_- = d/dt (a1 - a2)/2 - ((a1 - a2) + d/dt ln s) / 2`` and the
    analogous ``gamma_+``; ``Omega`` from the arctangent-free log form.
    Returns ``(omega, gamma_minus, gamma_plus, gamma_d)``.
    """
    a1, a2, z, a1d, a2d, zd = _parts(coeffs, derivs)
    s = 1 - a1 - a2
    dln_s = -(a1d + a2d) / s
    diff, diffd = a1 - a2, a1d - a2d
    omega = -0.5 * _dlog_ratio_sq(z, zd)
    gm = 0.5 * diffd - 0.5 * (diff + dln_s)
    gp = -(0.5 * diffd - 0.5 * (diff - dln_s))
    gd = 0.25 * (dln_s - 2 * np.real(zd / z))
    return omega, gm, gp, gd


def rates_grouped(coeffs, derivs):
    """Printed rates with ``(a1 - a2 +/- 1)`` grouped as one factor."""
    a1, a2, z, a1d, a2d, zd = _parts(coeffs, derivs)
    s = 1 - a1 - a2
    dln_s = -(a1d + a2d) / s
    diff, diffd = a1 - a2, a1d - a2d
    gm = 0.5 * diffd - 0.5 * (diff + 1) * dln_s
    gp = -(0.5 * diffd - 0.5 * (diff - 1) * dln_s)
    return gm, gp


def absorption_block_literal(p, n, t):
    """Literal absorption-block probability ``sin^2(b' t/2)/b'^2`` with the
    printed ``b'`` (detuning at ``n - 1/2``, no coupling prefactor)."""
    n = np.asarray(n, dtype=float)
    det = p.omega0 - p.omega / (2 * p.n_spins) + p.delta * (1 - n / p.n_spins)
    bp = np.sqrt(det**2 + 4 * p.delta**2 * n * (1 - (n - 1) / (2 * p.n_spins)))
    return sinc2_half(bp, t)


def decay_block_literal(p, n, t):
    """Literal ``|M2'|^2 = sin^2(b t/2)/b^2`` without the coupling prefactor."""
    n = np.asarray(n, dtype=float)
    det = p.omega0 - p.omega / (2 * p.n_spins) + p.delta * (1 - (2 * n + 1) / (2 * p.n_spins))
    b = np.sqrt(det**2 + 4 * p.delta**2 * (n + 1) * (1 - n / (2 * p.n_spins)))
    return sinc2_half(b, t)


def absorption_odes_literal(p, n):
    """Generators of the absorption-block ODEs exactly as printed.

    Returns ``(m, 2, 2)`` complex matrices ``A`` with ``d/dt (M3', M4') =
    A (M3', M4')``.
    """
    n = np.asarray(n, dtype=float)
    nn = p.n_spins
    e3 = p.omega0 / 2 + (p.omega + p.delta) / 2 * (1 - n / nn)
    e4 = p.omega0 / 2 - (p.omega - p.delta) / 2 * (1 - n / nn)
    c = p.delta * n * (1 - (n - 1) / (2 * nn))
    a = np.empty(n.shape + (2, 2), dtype=complex)
    a[..., 0, 0] = 1j * e3
    a[..., 0, 1] = -1j * c
    a[..., 1, 0] = -1j * c
    a[..., 1, 1] = 1j * e4
    return a
