"""Per-mode spectra and the thermally averaged map coefficients.

The reduced dynamics of the central spin is fixed by three functions of
time: the decay probability ``alpha1`` (excited -> ground), the absorption
probability ``alpha2`` (ground -> excited) and the coherence factor ``zeta``.
Each is a thermal average over bath modes ``n = 0..N`` of a two-level
(Rabi-type) block.

Two coefficient models are available:

``"hp"``
    The bosonised (Holstein-Primakoff) bath, whose blocks couple
    ``|e, n>`` to ``|g, n+1>`` with strength ``4 D^2 (n+1)(1 - n/2N)``.
    This is the default and what the figure sweeps use.
``"sector"``
    The same block structure with the matrix elements of the collective
    spin operators in the symmetric ``j = N/2`` multiplet.  It reproduces
    brute-force evolution of the full system-plus-sector Hamiltonian.

Both models share :class:`ZetaConvention`, the resolution of the ways the
coherence factor can be transcribed.  :data:`RESOLVED` is the convention
selected by the oracle adjudication (see :mod:`csdyn.oracle`).
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

SERIES_CUTOFF = 1e-6
_CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters with hbar = k_B = 1.

    Attributes
    ----------
    omega0 : float
        System splitting.
    omega : float
        Bath Zeeman frequency (rescaled by ``1/N`` in the Hamiltonian).
    delta : float
        System-bath coupling (rescaled by ``1/sqrt(N)``).
    n_spins : int
        Number of bath spins ``N``.
    temperature : float
        Bath temperature ``T``.
    """

    omega0: float = 1.0
    omega: float = 1.0
    delta: float = 0.01
    n_spins: int = 100
    temperature: float = 1.0

    def __post_init__(self):
        for name in ("omega0", "omega", "delta", "temperature"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val!r}")
        if int(self.n_spins) != self.n_spins or self.n_spins < 1:
            raise ValueError(f"n_spins must be a positive integer, got {self.n_spins!r}")
        object.__setattr__(self, "n_spins", int(self.n_spins))
        if self.temperature <= 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature!r}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta!r}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def _readonly(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ThermalWeights:
    """Boltzmann weights of the bath modes.

    ``log_weights`` is the exact exponent; ``weights`` and ``partition`` are
    the unnormalised values (they can overflow for extreme ``omega/T``, the
    normalised ``probabilities`` cannot).
    """

    log_weights: np.ndarray

    def __post_init__(self):
        lw = _readonly(np.asarray(self.log_weights, dtype=float))
        if lw.ndim != 1 or lw.size == 0:
            raise ValueError("log_weights must be a non-empty vector")
        if not np.any(np.isfinite(lw)):
            raise ValueError("at least one weight must be positive")
        object.__setattr__(self, "log_weights", lw)
        shifted = np.exp(lw - np.max(lw))
        object.__setattr__(self, "_probs", _readonly(shifted / np.sum(shifted)))

    @classmethod
    def from_weights(cls, weights):
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        with np.errstate(divide="ignore"):
            return cls(np.log(w))

    @property
    def weights(self):
        return np.exp(self.log_weights)

    @property
    def partition(self):
        return float(np.sum(self.weights))

    @property
    def probabilities(self):
        return self._probs


class HolsteinPrimakoff:
    """Bosonised bath: mode ``n`` is the boson occupation ``b^dag b``."""

    name = "hp"

    def detuning(self, p, x):
        n_ = p.n_spins
        return p.omega0 - p.omega / (2 * n_) + p.delta * (1 - (2 * x + 1) / (2 * n_))

    def strength(self, p, x):
        """``4 D^2 (x+1)(1 - x/2N)``: squared Rabi coupling of the ``x -> x+1`` block."""
        return 4 * p.delta**2 * (x + 1) * (1 - x / (2 * p.n_spins))

    def log_weight(self, p, n):
        return -(p.omega / (2 * p.temperature)) * (n / p.n_spins - 1)

    def bath_step(self, p):
        return p.omega / (2 * p.n_spins)


class SymmetricSector:
    """Collective-spin bath in the ``j = N/2`` multiplet.

    Mode ``n`` is the number of up spins, ``J_z = 2n - N`` in Pauli-sum units.
    """

    name = "sector"

    def detuning(self, p, x):
        n_ = p.n_spins
        return p.omega0 - p.omega / n_ + (p.delta / math.sqrt(n_)) * (2 * x + 1 - n_)

    def strength(self, p, x):
        return 4 * p.delta**2 * (x + 1) * (1 - x / p.n_spins)

    def log_weight(self, p, n):
        return -(p.omega / (2 * p.n_spins * p.temperature)) * (2 * n - p.n_spins)

    def bath_step(self, p):
        return p.omega / p.n_spins


MODELS = {"hp": HolsteinPrimakoff(), "sector": SymmetricSector()}


def get_model(model):
    if isinstance(model, str):
        try:
            return MODELS[model]
        except KeyError:
            raise ValueError(f"unknown coefficient model {model!r}; choose from {sorted(MODELS)}") from None
    return model


@dataclass(frozen=True)
class ZetaConvention:
    """One way of reading the coherence-factor formula.

    prefactor : {"phase", "decay"}
        ``exp(-i s t)`` or ``exp(-s t)`` with ``s`` the bath level spacing.
    beta_division : {1, 2}
        How many times the detuning is divided by ``beta`` in front of
        ``sin(beta t / 2)``.
    eps_prime_sign : {-1, +1}
        Sign of the ``i sin(beta' t/2)`` term in the absorption-block factor.
    eps_prime_index : {"block", "printed"}
        ``"block"`` evaluates the absorption block at ``x = n - 1`` (the
        ``|g,n> <-> |e,n-1>`` block), ``"printed"`` at ``x = n - 1/2``.
    """

    prefactor: str = "phase"
    beta_division: int = 1
    eps_prime_sign: int = -1
    eps_prime_index: str = "block"

    def __post_init__(self):
        if self.prefactor not in ("phase", "decay"):
            raise ValueError(f"bad prefactor {self.prefactor!r}")
        if self.beta_division not in (1, 2):
            raise ValueError(f"bad beta_division {self.beta_division!r}")
        if self.eps_prime_sign not in (-1, 1):
            raise ValueError(f"bad eps_prime_sign {self.eps_prime_sign!r}")
        if self.eps_prime_index not in ("block", "printed"):
            raise ValueError(f"bad eps_prime_index {self.eps_prime_index!r}")

    @property
    def label(self):
        return (
            f"{self.prefactor}/div{self.beta_division}/"
            f"{'minus' if self.eps_prime_sign < 0 else 'plus'}/{self.eps_prime_index}"
        )


RESOLVED = ZetaConvention()
AS_PRINTED = ZetaConvention("decay", 2, +1, "printed")


def candidate_conventions():
    """All 16 readings of the coherence formula, in a fixed order."""
    return [
        ZetaConvention(pre, div, sign, idx)
        for pre in ("phase", "decay")
        for div in (1, 2)
        for sign in (-1, 1)
        for idx in ("block", "printed")
    ]


def thermal_weights(p, model="hp"):
    """Boltzmann weights of modes ``n = 0..N``.

    For the default model ``w_n = exp(-(omega / 2T)(n/N - 1))``.
    """
    if p.temperature <= 0:
        raise ValueError("temperature must be > 0")
    n = np.arange(p.n_spins + 1, dtype=float)
    return ThermalWeights(get_model(model).log_weight(p, n))


@dataclass(frozen=True)
class ModeTerm:
    """Spectral data of one bath mode.

    ``eps``/``beta`` belong to the decay block (``|e,n> <-> |g,n+1>``),
    ``eps_prime``/``beta_prime`` to the absorption block.  ``strength`` and
    ``strength_prime`` are the squared couplings entering ``beta**2`` and
    ``beta_prime**2``.
    """

    n: int
    beta: float
    beta_prime: float
    eps: float
    eps_prime: float
    strength: float
    strength_prime: float


@dataclass(frozen=True, eq=False)
class ModeTable:
    """Vectorised :class:`ModeTerm` over all modes plus their probabilities."""

    n: np.ndarray
    eps: np.ndarray
    beta: np.ndarray
    strength: np.ndarray
    eps_prime: np.ndarray
    beta_prime: np.ndarray
    strength_prime: np.ndarray
    step: float


def _block_arrays(p, n, model, convention):
    m = get_model(model)
    eps = m.detuning(p, n)
    strength = m.strength(p, n)
    x_abs = n - 1.0 if convention.eps_prime_index == "block" else n - 0.5
    eps_prime = m.detuning(p, x_abs)
    strength_prime = m.strength(p, n - 1.0)
    beta = np.sqrt(eps**2 + strength)
    beta_prime = np.sqrt(eps_prime**2 + strength_prime)
    return eps, beta, strength, eps_prime, beta_prime, strength_prime


def mode_term(p, n, model="hp", convention=RESOLVED):
    if int(n) != n or not 0 <= n <= p.n_spins:
        raise ValueError(f"mode index must be an integer in [0, {p.n_spins}], got {n!r}")
    eps, beta, s, epsp, betap, sp = _block_arrays(p, float(n), model, convention)
    return ModeTerm(int(n), float(beta), float(betap), float(eps), float(epsp), float(s), float(sp))


def mode_table(p, model="hp", convention=RESOLVED):
    n = np.arange(p.n_spins + 1, dtype=float)
    eps, beta, s, epsp, betap, sp = _block_arrays(p, n, model, convention)
    return ModeTable(
        n=_readonly(n),
        eps=_readonly(eps),
        beta=_readonly(beta),
        strength=_readonly(s),
        eps_prime=_readonly(epsp),
        beta_prime=_readonly(betap),
        strength_prime=_readonly(sp),
        step=get_model(model).bath_step(p),
    )


def sinc2_half(x, t):
    """``sin(x t / 2)**2 / x**2`` with the ``x -> 0`` limit ``t**2 / 4``."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    xt = x * t
    small = np.abs(xt) < SERIES_CUTOFF
    safe_x = np.where(small, 1.0, x)
    direct = np.sin(0.5 * xt) ** 2 / safe_x**2
    series = 0.25 * t**2 * (1.0 - xt**2 / 12.0)
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


def sin_half_over(x, t):
    """``sin(x t / 2) / x`` with the ``x -> 0`` limit ``t / 2``."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    xt = x * t
    small = np.abs(xt) < SERIES_CUTOFF
    safe_x = np.where(small, 1.0, x)
    out = np.where(small, 0.5 * t * (1.0 - xt**2 / 24.0), np.sin(0.5 * xt) / safe_x)
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class MapCoefficients:
    """``(alpha1, alpha2, zeta)`` at one time or on a time grid.

    Fields are scalars or equally shaped arrays.
    """

    t: object
    alpha1: object
    alpha2: object
    zeta: object

    @classmethod
    def identity(cls, t=0.0):
        return cls(t, 0.0, 0.0, 1.0 + 0.0j)

    def __len__(self):
        return np.size(self.alpha1)

    def at(self, i):
        """Scalar coefficients at flat index ``i`` of the grid."""

        def pick(a):
            return np.asarray(a).reshape(-1)[i] if np.ndim(a) else a

        return MapCoefficients(
            pick(self.t), float(pick(self.alpha1)), float(pick(self.alpha2)), complex(pick(self.zeta))
        )


@dataclass(frozen=True, eq=False)
class CoefficientDerivatives:
    t: object
    alpha1_dot: object
    alpha2_dot: object
    zeta_dot: object


def _chunks(t, n_modes):
    size = max(1, _CHUNK_ELEMENTS // max(n_modes, 1))
    for start in range(0, t.size, size):
        yield slice(start, start + size)


def _mode_sums(modes, prob, t, convention, derivative=False):
    """Thermal sums over modes; returns (a1, a2, zeta[, a1dot, a2dot, zetadot])."""
    t = np.asarray(t, dtype=float)
    flat = t.reshape(-1)
    n_out = 6 if derivative else 3
    out = [np.empty(flat.shape, dtype=complex if k in (2, 5) else float) for k in range(n_out)]
    beta, betap = modes.beta, modes.beta_prime
    if convention.beta_division == 1:
        c1, c2 = modes.eps, modes.eps_prime
    else:
        c1 = np.where(beta > 0, modes.eps / np.where(beta > 0, beta, 1.0), 0.0)
        c2 = np.where(betap > 0, modes.eps_prime / np.where(betap > 0, betap, 1.0), 0.0)
    sgn = convention.eps_prime_sign
    for sl in _chunks(flat, beta.size):
        tt = flat[sl][:, None]
        s1 = sin_half_over(beta, tt)
        s2 = sin_half_over(betap, tt)
        cos1 = np.cos(0.5 * beta * tt)
        cos2 = np.cos(0.5 * betap * tt)
        out[0][sl] = np.sum(prob * modes.strength * s1**2, axis=-1)
        out[1][sl] = np.sum(prob * modes.strength_prime * s2**2, axis=-1)
        fac1 = cos1 - 1j * c1 * s1
        fac2 = cos2 + 1j * sgn * c2 * s2
        if convention.prefactor == "phase":
            rate = 1j * modes.step
        else:
            rate = modes.step
        pref = np.exp(-rate * tt)
        out[2][sl] = np.sum(prob * pref * fac1 * fac2, axis=-1)
        if derivative:
            out[3][sl] = np.sum(prob * modes.strength * s1 * cos1, axis=-1)
            out[4][sl] = np.sum(prob * modes.strength_prime * s2 * cos2, axis=-1)
            dfac1 = -0.5 * beta**2 * s1 - 0.5j * c1 * cos1
            dfac2 = -0.5 * betap**2 * s2 + 0.5j * sgn * c2 * cos2
            out[5][sl] = np.sum(
                prob * pref * (-rate * fac1 * fac2 + dfac1 * fac2 + fac1 * dfac2), axis=-1
            )
    # the map is exactly the identity at t = 0; avoid round-off in sum(p)
    start = flat == 0.0
    out[0][start] = 0.0
    out[1][start] = 0.0
    out[2][start] = 1.0
    shaped = [o.reshape(t.shape) for o in out]
    if t.ndim == 0:
        shaped = [o[()] for o in shaped]
    return shaped


def _check_alphas(a1, a2):
    lo = min(np.min(a1), np.min(a2))
    hi = max(np.max(a1), np.max(a2))
    if lo < -1e-12 or hi > 1 + 1e-9:
        raise NumericalError(f"alpha outside [0, 1]: range [{lo!r}, {hi!r}]")


def _check_zeta(z):
    mag = np.max(np.abs(z))
    if mag > 1 + 1e-9:
        raise NumericalError(f"|zeta| = {mag!r} exceeds 1")


def alphas(p, w, t, model="hp", convention=RESOLVED):
    """Thermally weighted decay/absorption probabilities ``(alpha1, alpha2)``."""
    modes = mode_table(p, model, convention)
    a1, a2, _ = _mode_sums(modes, w.probabilities, t, convention)
    _check_alphas(a1, a2)
    return a1, a2


def zeta(p, w, t, model="hp", convention=RESOLVED):
    """Coherence factor ``rho_eg(t) / rho_eg(0)``."""
    modes = mode_table(p, model, convention)
    _, _, z = _mode_sums(modes, w.probabilities, t, convention)
    _check_zeta(z)
    return z


class ReducedDynamics:
    """Map coefficients for one parameter set, with cached mode tables.

    Parameters
    ----------
    params : ModelParams
    model : {"hp", "sector"} or model object
    convention : ZetaConvention
    weights : ThermalWeights, optional
        Defaults to the model's Boltzmann weights.
    """

    def __init__(self, params, model="hp", convention=RESOLVED, weights=None):
        self.params = params
        self.model = get_model(model)
        self.convention = convention
        self.weights = weights if weights is not None else thermal_weights(params, self.model)
        self.modes = mode_table(params, self.model, convention)
        if self.weights.log_weights.size != self.modes.n.size:
            raise ValueError("weights do not match the number of modes")

    def __repr__(self):
        return f"ReducedDynamics({self.params!r}, model={self.model.name!r}, convention={self.convention.label!r})"

    def coefficients(self, t, check=True):
        a1, a2, z = _mode_sums(self.modes, self.weights.probabilities, t, self.convention)
        if check:
            _check_alphas(a1, a2)
            _check_zeta(z)
        return MapCoefficients(t, a1, a2, z)

    def derivatives(self, t):
        res = _mode_sums(self.modes, self.weights.probabilities, t, self.convention, derivative=True)
        return CoefficientDerivatives(t, res[3], res[4], res[5])

    def coefficients_and_derivatives(self, t):
        res = _mode_sums(self.modes, self.weights.probabilities, t, self.convention, derivative=True)
        return MapCoefficients(t, *res[:3]), CoefficientDerivatives(t, *res[3:])
