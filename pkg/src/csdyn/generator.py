"""Time-local generator of the reduced dynamics and its canonical form.

``L(t) = dF/dt F(t)^-1`` in the Pauli basis, decomposed into

    d rho/dt = i Omega [rho, sigma_z] + gamma_d (sigma_z rho sigma_z - rho)
               + gamma_- (sigma_- rho sigma_+ - {sigma_+ sigma_-, rho}/2)
               + gamma_+ (sigma_+ rho sigma_- - {sigma_- sigma_+, rho}/2).

In Bloch coordinates this gives ``L_zz = -(gamma_- + gamma_+)``,
``L_z0 = gamma_+ - gamma_-``, ``L_xx = L_yy = -(gamma_- + gamma_+)/2 -
2 gamma_d`` and ``L_yx = -L_xy = 2 Omega``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, SingularMapError
from .qmap import PAULI_BASIS, SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z, pauli_vector, from_pauli_vector, transfer_matrix

SINGULAR_DET = 1e-12


def characteristic_period(params):
    scale = abs(params.omega0) or 1.0
    return 2 * np.pi / scale


def _analytic_f_dot(derivs):
    a1d = np.asarray(derivs.alpha1_dot, dtype=float)
    a2d = np.asarray(derivs.alpha2_dot, dtype=float)
    zd = np.asarray(derivs.zeta_dot, dtype=complex)
    fd = np.zeros(a1d.shape + (4, 4))
    fd[..., 1, 1] = zd.real
    fd[..., 1, 2] = zd.imag
    fd[..., 2, 1] = -zd.imag
    fd[..., 2, 2] = zd.real
    fd[..., 3, 0] = a2d - a1d
    fd[..., 3, 3] = -a1d - a2d
    return fd


def finite_difference_f_dot(dyn, t, h=None):
    """Five-point difference of ``F``; returns ``(F_dot, one_sided)``.

    Falls back to the forward five-point stencil where ``t - 2h < 0``.
    """
    if h is None:
        h = 1e-5 * characteristic_period(dyn.params)
    t = np.asarray(t, dtype=float)
    one_sided = t - 2 * h < 0

    def F(x):
        return transfer_matrix(dyn.coefficients(x, check=False))

    # clamp so the central stencil never asks for negative times; those
    # entries are replaced by the forward stencil below
    tc = np.maximum(t, 2 * h)
    central = (-F(tc + 2 * h) + 8 * F(tc + h) - 8 * F(tc - h) + F(tc - 2 * h)) / (12 * h)
    if np.any(one_sided):
        forward = (
            -25 * F(t) + 48 * F(t + h) - 36 * F(t + 2 * h) + 16 * F(t + 3 * h) - 3 * F(t + 4 * h)
        ) / (12 * h)
        central = np.where(one_sided[..., None, None], forward, central)
    return central, one_sided


def f_dot(dyn, t, method="analytic", h=None):
    """Time derivative of the transfer matrix.

    ``method="analytic"`` differentiates the mode sums term by term;
    ``method="fd"`` uses :func:`finite_difference_f_dot` and is meant as a
    cross-check.
    """
    if method == "analytic":
        return _analytic_f_dot(dyn.derivatives(t))
    if method == "fd":
        return finite_difference_f_dot(dyn, t, h)[0]
    raise ValueError(f"unknown derivative method {method!r}")


def transfer_det(f):
    return np.linalg.det(np.asarray(f))


def _l_from(f, fd, t, singular):
    det = transfer_det(f)
    bad = np.abs(det) <= SINGULAR_DET
    if np.any(bad) and singular == "raise":
        i = np.flatnonzero(np.ravel(bad))[0]
        t_bad = np.ravel(np.broadcast_to(t, np.shape(det)))[i] if np.ndim(det) else t
        raise SingularMapError(float(t_bad), float(np.ravel(det)[i]))
    safe_f = np.where(bad[..., None, None], np.eye(4), f)
    # L F = F_dot  =>  F^T L^T = F_dot^T
    lm = np.swapaxes(np.linalg.solve(np.swapaxes(safe_f, -1, -2), np.swapaxes(fd, -1, -2)), -1, -2)
    lm = np.where(bad[..., None, None], np.nan, lm)
    return lm, bad


def l_matrix(dyn, t, singular="raise"):
    """Generator matrix ``L_kl = Tr[G_k L(G_l)]`` at ``t`` (scalar or grid).

    Parameters
    ----------
    singular : {"raise", "mask"}
        With ``"mask"`` the return value is ``(L, singular_mask)`` and
        singular entries are NaN.
    """
    coeffs, derivs = dyn.coefficients_and_derivatives(t)
    lm, bad = _l_from(transfer_matrix(coeffs), _analytic_f_dot(derivs), t, singular)
    if singular == "mask":
        return lm, bad
    return lm


@dataclass(frozen=True, eq=False)
class CanonicalRates:
    t: object
    omega: object
    gamma_minus: object
    gamma_plus: object
    gamma_d: object

    @classmethod
    def zero(cls, t=0.0):
        return cls(t, 0.0, 0.0, 0.0, 0.0)

    def as_array(self):
        """Columns ``(omega, gamma_minus, gamma_plus, gamma_d)``."""
        return np.stack(
            [np.asarray(x, dtype=float) for x in (self.omega, self.gamma_minus, self.gamma_plus, self.gamma_d)],
            axis=-1,
        )

    def at(self, i):
        def pick(a):
            return float(np.asarray(a).reshape(-1)[i]) if np.ndim(a) else float(a)

        t = np.asarray(self.t).reshape(-1)[i] if np.ndim(self.t) else self.t
        return CanonicalRates(t, pick(self.omega), pick(self.gamma_minus), pick(self.gamma_plus), pick(self.gamma_d))


def lindblad_rhs(rates, rho):
    """Right-hand side of the canonical master equation.

    Broadcasts: rate fields of shape ``S`` act on ``rho`` of shape
    ``S + (2, 2)`` (or any shape broadcastable to it).
    """
    rho = np.asarray(rho, dtype=complex)

    def r(x):
        return np.asarray(x, dtype=float)[..., None, None]

    om, gd, gm, gp = r(rates.omega), r(rates.gamma_d), r(rates.gamma_minus), r(rates.gamma_plus)
    pm = SIGMA_PLUS @ SIGMA_MINUS
    mp = SIGMA_MINUS @ SIGMA_PLUS
    unitary = 1j * om * (rho @ SIGMA_Z - SIGMA_Z @ rho)
    dephase = gd * (SIGMA_Z @ rho @ SIGMA_Z - rho)
    decay = gm * (SIGMA_MINUS @ rho @ SIGMA_PLUS - 0.5 * (pm @ rho + rho @ pm))
    absorb = gp * (SIGMA_PLUS @ rho @ SIGMA_MINUS - 0.5 * (mp @ rho + rho @ mp))
    return unitary + dephase + decay + absorb


def generator_from_rates(rates):
    """Generator matrix implied by the rates, built from :func:`lindblad_rhs`."""
    basis = PAULI_BASIS.reshape((4,) + (1,) * np.ndim(rates.omega) + (2, 2))
    images = lindblad_rhs(rates, basis)  # (4, ..., 2, 2): image of G_l
    lm = np.einsum("kab,l...ba->...kl", PAULI_BASIS, images)
    return lm.real


def canonical_rates(lm, t=None, check=True, tol=1e-8):
    """Decompose a generator matrix into ``(Omega, gamma_-, gamma_+, gamma_d)``.

    Raises :class:`NumericalError` when the rates do not reproduce ``lm``
    (the generator is then not of the canonical three-channel form).
    """
    lm = np.asarray(lm, dtype=float)
    lzz = lm[..., 3, 3]
    lz0 = lm[..., 3, 0]
    lxx_avg = 0.5 * (lm[..., 1, 1] + lm[..., 2, 2])
    rates = CanonicalRates(
        t,
        omega=0.25 * (lm[..., 2, 1] - lm[..., 1, 2]),
        gamma_minus=0.5 * (-lzz - lz0),
        gamma_plus=0.5 * (-lzz + lz0),
        gamma_d=0.25 * lzz - 0.5 * lxx_avg,
    )
    if check:
        finite = np.all(np.isfinite(lm), axis=(-1, -2))
        if np.any(finite):
            rebuilt = generator_from_rates(rates)
            err = np.abs(rebuilt - lm)[finite]
            scale = np.max(np.abs(lm[finite]), initial=1.0)
            if np.max(err, initial=0.0) > tol * max(1.0, scale):
                raise NumericalError(
                    f"rates do not reproduce the generator (residual {np.max(err):.3e})"
                )
    return rates


def rates_on_grid(dyn, t):
    """Canonical rates on a grid; singular points are NaN and flagged."""
    lm, bad = l_matrix(dyn, t, singular="mask")
    return canonical_rates(lm, t), bad


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    singular_intervals: list = field(default_factory=list)
    singular_fraction: float = 0.0


def rk4_propagators(l0, lh, l1, dt):
    """One-step RK4 propagators for ``dr/dt = L(t) r`` with linear ``L``.

    ``l0``, ``lh`` and ``l1`` are the generators at the start, midpoint and
    end of each step.  The product is exactly what the four RK4 stages
    compute for a linear right-hand side.
    """
    eye = np.eye(l0.shape[-1])
    k1 = l0
    k2 = lh @ (eye + 0.5 * dt * k1)
    k3 = lh @ (eye + 0.5 * dt * k2)
    k4 = l1 @ (eye + dt * k3)
    return eye + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_master(dyn, rho0, t_max, dt, record_every=1, max_singular_fraction=0.01):
    """Integrate the canonical master equation with classical RK4.

    The rates are evaluated afresh at each RK4 stage time and turned back
    into a generator with :func:`generator_from_rates`, so the integration
    sees only the canonical form.  Steps whose stage times hit a singular
    ``F`` are bridged with the exact intermediate map ``F(t_b) F(t_a)^-1``
    and reported in ``singular_intervals``.

    ``rho0`` may be a single state or a stack ``(k, 2, 2)``.
    """
    n_steps = int(round(t_max / dt))
    if n_steps < 1 or abs(n_steps * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError("t_max must be a positive integer multiple of dt")
    half = np.arange(2 * n_steps + 1) * (0.5 * dt)
    lm, bad = l_matrix(dyn, half, singular="mask")
    gen = generator_from_rates(canonical_rates(lm, half))
    step_bad = bad[0:-1:2] | bad[1::2] | bad[2::2]
    frac = float(np.mean(step_bad))
    if frac > max_singular_fraction:
        raise NumericalError(f"{frac:.2%} of steps hit a singular transfer matrix")
    gen = np.where(np.isfinite(gen), gen, 0.0)
    props = rk4_propagators(gen[0:-1:2], gen[1::2], gen[2::2], dt)

    r = pauli_vector(np.asarray(rho0, dtype=complex))
    times = [0.0]
    states = [r]
    intervals = []
    bridge_start = None
    for i in range(n_steps):
        if step_bad[i]:
            if bridge_start is None:
                bridge_start = i
            continue
        if bridge_start is not None:
            r = _bridge(dyn, r, bridge_start * dt, i * dt)
            intervals.append((bridge_start * dt, i * dt))
            bridge_start = None
        r = r @ props[i].T
        if (i + 1) % record_every == 0:
            times.append((i + 1) * dt)
            states.append(r)
    if bridge_start is not None:
        r = _bridge(dyn, r, bridge_start * dt, n_steps * dt)
        intervals.append((bridge_start * dt, n_steps * dt))
        times.append(n_steps * dt)
        states.append(r)
    return Trajectory(np.array(times), from_pauli_vector(np.array(states)), intervals, frac)


def _bridge(dyn, r, t_a, t_b):
    fa = transfer_matrix(dyn.coefficients(t_a))
    fb = transfer_matrix(dyn.coefficients(t_b))
    if abs(transfer_det(fa)) <= SINGULAR_DET:
        raise SingularMapError(t_a, float(transfer_det(fa)))
    inter = fb @ np.linalg.inv(fa)
    return r @ inter.T
