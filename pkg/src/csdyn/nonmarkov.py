"""Non-Markovianity diagnostics.

Two views of the same property are provided.  The RHP indicator measures how
far the intermediate map ``Phi(t + tau, t)`` is from complete positivity
through the trace norm of its Choi matrix.  The rate view looks for negative
canonical rates.  For small ``tau`` they are tied together by

    N(t) ~ max(0, -gamma_-) + max(0, -gamma_+) + 2 max(0, -gamma_d),

which follows from first-order perturbation of the identity's Choi matrix.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, SingularMapError
from .generator import SINGULAR_DET, canonical_rates, l_matrix, transfer_det
from .linalg import trace_norm
from .qmap import choi_from_transfer, transfer_matrix
from .spectrum import ReducedDynamics

DEFAULT_TAU = 1e-3
# rates below -NEG_TOL count as negative; smaller values are round-off
NEG_TOL = 1e-12
RATE_NAMES = ("gamma_minus", "gamma_plus", "gamma_d")


def intermediate_map(dyn, t, tau):
    """Transfer matrix of ``Phi(t + tau, t) = F(t + tau) F(t)^-1``.

    Broadcasts over ``t``.  Raises :class:`SingularMapError` if ``F(t)`` is
    not invertible.
    """
    t = np.asarray(t, dtype=float)
    f0 = transfer_matrix(dyn.coefficients(t))
    f1 = transfer_matrix(dyn.coefficients(t + tau))
    det = transfer_det(f0)
    bad = np.abs(det) <= SINGULAR_DET
    if np.any(bad):
        i = int(np.flatnonzero(np.ravel(bad))[0])
        raise SingularMapError(float(np.ravel(t)[i] if t.ndim else t), float(np.ravel(det)[i]))
    # X F0 = F1  =>  F0^T X^T = F1^T
    return np.swapaxes(np.linalg.solve(np.swapaxes(f0, -1, -2), np.swapaxes(f1, -1, -2)), -1, -2)


@dataclass(frozen=True)
class RhpSample:
    t: object
    tau: float
    n_value: object
    min_choi_eig: object


def _rhp_from_maps(inter, tau):
    c = choi_from_transfer(inter)
    c = 0.5 * (c + np.swapaxes(c.conj(), -1, -2))
    eig = np.linalg.eigvalsh(c)
    excess = trace_norm(c) - 1.0
    return np.maximum(excess / tau, 0.0), eig[..., 0]


def rhp_on_grid(dyn, t, tau=DEFAULT_TAU, mask=None):
    """``N`` and the minimal Choi eigenvalue on a grid, NaN where ``F(t)`` is
    singular.  Returns ``(n_values, min_choi_eig, singular_mask)``."""
    t = np.asarray(t, dtype=float)
    f0 = transfer_matrix(dyn.coefficients(t))
    f1 = transfer_matrix(dyn.coefficients(t + tau))
    bad = np.abs(transfer_det(f0)) <= SINGULAR_DET if mask is None else np.asarray(mask)
    f0 = np.where(bad[..., None, None], np.eye(4), f0)
    inter = np.swapaxes(np.linalg.solve(np.swapaxes(f0, -1, -2), np.swapaxes(f1, -1, -2)), -1, -2)
    n_val, low = _rhp_from_maps(inter, tau)
    return np.where(bad, np.nan, n_val), np.where(bad, np.nan, low), bad


def rhp_indicator(dyn, t, tau=DEFAULT_TAU):
    """RHP indicator ``N(t) = (||(id x Phi(t+tau,t))|psi><psi|||_1 - 1) / tau``.

    ``t`` may be a scalar or an array; the fields of the returned sample have
    the same shape.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    n_value, low = _rhp_from_maps(intermediate_map(dyn, t, tau), tau)
    if np.ndim(n_value) == 0:
        n_value, low = float(n_value), float(low)
    return RhpSample(t, tau, n_value, low)


def richardson(dyn, t, tau=DEFAULT_TAU):
    """Richardson-extrapolated ``N(t)`` from ``tau`` and ``tau / 2``.

    Returns ``(extrapolated, n_tau, n_half, c)`` where ``c`` is the fitted
    first-order constant ``|N_tau - N_half| / (tau / 2)``.
    """
    n1 = np.asarray(rhp_indicator(dyn, t, tau).n_value)
    n2 = np.asarray(rhp_indicator(dyn, t, 0.5 * tau).n_value)
    c = np.abs(n1 - n2) / (0.5 * tau)
    return 2 * n2 - n1, n1, n2, c


def rate_based_estimate(rates):
    """Small-``tau`` value of ``N`` implied by the canonical rates."""
    gm = np.asarray(rates.gamma_minus)
    gp = np.asarray(rates.gamma_plus)
    gd = np.asarray(rates.gamma_d)
    return np.maximum(0.0, -gm) + np.maximum(0.0, -gp) + 2 * np.maximum(0.0, -gd)


def _negative_part(x):
    x = np.asarray(x, dtype=float)
    return np.where(-x > NEG_TOL, -x, 0.0)


@dataclass(frozen=True, eq=False)
class NonMarkovSummary:
    """Grid summary of rate negativity and of the RHP indicator.

    ``neg_gamma_integrals`` and ``first_negative_time`` are keyed by
    ``"gamma_minus"``, ``"gamma_plus"`` and ``"gamma_d"``; a first negative
    time of ``nan`` means the rate never went negative on the grid.
    """

    params: object
    grid: np.ndarray
    integral_n: float
    neg_gamma_integrals: dict
    first_negative_time: dict
    singular_count: int = 0
    model: str = "hp"
    rates: object = field(default=None, repr=False)
    n_values: np.ndarray = field(default=None, repr=False)


def rate_negativity_scan(dyn, grid, tau=DEFAULT_TAU, with_rhp=True, max_singular_fraction=0.01):
    """Scan canonical rates (and optionally ``N``) over ``grid``.

    Singular grid points are dropped from the integrals.  More than
    ``max_singular_fraction`` of them raises :class:`NumericalError`.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least two points")
    lm, bad = l_matrix(dyn, grid, singular="mask")
    if np.mean(bad) > max_singular_fraction:
        raise NumericalError(f"{np.mean(bad):.2%} of grid points have a singular transfer matrix")
    rates = canonical_rates(lm, grid)
    ok = ~bad
    tg = grid[ok]
    integrals = {}
    first = {}
    for name in RATE_NAMES:
        neg = _negative_part(getattr(rates, name))[ok]
        integrals[name] = float(np.trapezoid(neg, tg))
        hits = np.flatnonzero(neg > 0)
        first[name] = float(tg[hits[0]]) if hits.size else float("nan")
    n_values = None
    integral_n = 0.0
    if with_rhp:
        n_values, _, _ = rhp_on_grid(dyn, grid, tau, mask=bad)
        integral_n = float(np.trapezoid(n_values[ok], tg))
    return NonMarkovSummary(
        params=dyn.params,
        grid=grid,
        integral_n=integral_n,
        neg_gamma_integrals=integrals,
        first_negative_time=first,
        singular_count=int(np.sum(bad)),
        model=dyn.model.name,
        rates=rates,
        n_values=n_values,
    )


SWEEP_AXES = {"delta": "delta", "temp": "temperature", "n": "n_spins"}


def _sweep_point(args):
    params, model, grid, tau, with_rhp = args
    return rate_negativity_scan(ReducedDynamics(params, model=model), grid, tau=tau, with_rhp=with_rhp)


def default_jobs():
    env = os.environ.get("CSDYN_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep(base, axis, values, grid, model="hp", tau=DEFAULT_TAU, jobs=None, with_rhp=True):
    """Run :func:`rate_negativity_scan` over one parameter axis.

    ``axis`` is one of ``"delta"``, ``"temp"`` or ``"n"``.  Points run in a
    process pool of ``jobs`` workers; results come back in the order of
    ``values`` regardless of completion order.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    field_name = SWEEP_AXES[axis]
    cast = int if axis == "n" else float
    tasks = [(base.replace(**{field_name: cast(v)}), model, np.asarray(grid, dtype=float), tau, with_rhp) for v in values]
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    jobs = min(jobs, len(tasks))
    if jobs == 1:
        return [_sweep_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_point, tasks))
