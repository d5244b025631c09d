"""The qubit dynamical map in its four representations.

Conventions (fixed for the whole package):

* Matrix index 0 is the excited state ``|e>``, index 1 the ground state
  ``|g>``; ``sigma_z = diag(1, -1)``, ``sigma_+ = |e><g|``.
* Operator basis ``G = (I, sigma_x, sigma_y, sigma_z) / sqrt(2)``; Pauli
  coordinates are ``r_k = Tr[G_k rho]`` and the transfer matrix is
  ``F_kl = Tr[G_k Phi(G_l)]``.
* The Choi matrix is ``(id (x) Phi)(|psi><psi|)`` with
  ``|psi> = (|ee> + |gg>) / sqrt(2)``, row index ``2 i + a`` for input
  index ``i`` and output index ``a``.
* Superoperators act on row-major vectorised matrices,
  ``vec(A B C) = (A (x) C^T) vec(B)``.

Every function broadcasts over leading time axes when handed
:class:`~csdyn.spectrum.MapCoefficients` built on a grid.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NotCompletelyPositiveError
from .linalg import fix_phase

SQRT2 = np.sqrt(2.0)
IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
PAULI_BASIS = np.stack([IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z]) / SQRT2
for _m in (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, SIGMA_PLUS, SIGMA_MINUS, PAULI_BASIS):
    _m.setflags(write=False)

KRAUS_THRESHOLD = 1e-12
CP_TOL = 1e-10


def density_matrix(rho11, rho12=0.0):
    """Qubit state from the excited population and the coherence ``rho_eg``."""
    rho11 = float(rho11)
    rho12 = complex(rho12)
    rho = np.array([[rho11, rho12], [np.conj(rho12), 1.0 - rho11]], dtype=complex)
    check_density_matrix(rho)
    return rho


def check_density_matrix(rho, tol=1e-10):
    rho = np.asarray(rho)
    if rho.shape[-2:] != (2, 2):
        raise ValueError(f"expected 2x2 density matrices, got shape {rho.shape}")
    if np.max(np.abs(rho - np.swapaxes(rho.conj(), -1, -2))) > 1e-12:
        raise ValueError("density matrix is not Hermitian")
    if np.max(np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1.0)) > 1e-12:
        raise ValueError("density matrix trace deviates from 1")
    if np.min(np.linalg.eigvalsh(rho)) < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def tomographic_states():
    """The six Pauli eigenstates, keyed by name (entries exact in binary)."""
    return {
        "excited": density_matrix(1.0),
        "ground": density_matrix(0.0),
        "plusx": density_matrix(0.5, 0.5),
        "minusx": density_matrix(0.5, -0.5),
        "plusy": density_matrix(0.5, -0.5j),
        "minusy": density_matrix(0.5, 0.5j),
    }


def pauli_vector(rho):
    """Coordinates ``Tr[G_k rho]`` (real for Hermitian input)."""
    r = np.einsum("kab,...ba->...k", PAULI_BASIS, np.asarray(rho, dtype=complex))
    return r.real


def from_pauli_vector(r):
    return np.einsum("...k,kab->...ab", np.asarray(r, dtype=complex), PAULI_BASIS)


def apply_map(coeffs, rho0, check=True):
    """Evolve ``rho0`` with the map defined by ``coeffs``.

    ``rho_ee(t) = (1 - alpha1) rho_ee(0) + alpha2 rho_gg(0)`` and
    ``rho_eg(t) = zeta rho_eg(0)``.  Broadcasts over the shape of the
    coefficients.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    a1 = np.asarray(coeffs.alpha1, dtype=float)[..., None, None]
    a2 = np.asarray(coeffs.alpha2, dtype=float)[..., None, None]
    z = np.asarray(coeffs.zeta, dtype=complex)[..., None, None]
    r11 = (1 - a1) * rho0[..., 0:1, 0:1] + a2 * rho0[..., 1:2, 1:2]
    r12 = z * rho0[..., 0:1, 1:2]
    out = np.concatenate(
        [np.concatenate([r11, r12], axis=-1), np.concatenate([r12.conj(), 1 - r11], axis=-1)],
        axis=-2,
    )
    if check:
        low = np.min(np.linalg.eigvalsh(out))
        if low < -1e-8:
            raise NotCompletelyPositiveError(f"map output has eigenvalue {low:.3e}")
    return out


def transfer_matrix(coeffs):
    """Real 4x4 matrix ``F_kl = Tr[G_k Phi(G_l)]``, stacked over time."""
    a1 = np.asarray(coeffs.alpha1, dtype=float)
    a2 = np.asarray(coeffs.alpha2, dtype=float)
    z = np.asarray(coeffs.zeta, dtype=complex)
    f = np.zeros(a1.shape + (4, 4))
    f[..., 0, 0] = 1.0
    f[..., 1, 1] = z.real
    f[..., 1, 2] = z.imag
    f[..., 2, 1] = -z.imag
    f[..., 2, 2] = z.real
    f[..., 3, 0] = a2 - a1
    f[..., 3, 3] = 1.0 - a1 - a2
    return f


def coefficients_from_transfer(f):
    """Inverse of :func:`transfer_matrix` for maps of the same (phase-covariant) form."""
    from .spectrum import MapCoefficients

    f = np.asarray(f)
    fz0 = f[..., 3, 0]
    fzz = f[..., 3, 3]
    a1 = 0.5 * (1.0 - fzz - fz0)
    a2 = 0.5 * (1.0 - fzz + fz0)
    return MapCoefficients(None, a1, a2, f[..., 1, 1] + 1j * f[..., 1, 2])


def choi(coeffs):
    """Choi matrix with the entry layout of the closed form:
    diagonal ``((1-a1), a1, a2, (1-a2)) / 2`` and corners ``zeta / 2``."""
    a1 = np.asarray(coeffs.alpha1, dtype=float)
    a2 = np.asarray(coeffs.alpha2, dtype=float)
    z = np.asarray(coeffs.zeta, dtype=complex)
    c = np.zeros(a1.shape + (4, 4), dtype=complex)
    c[..., 0, 0] = 0.5 * (1 - a1)
    c[..., 1, 1] = 0.5 * a1
    c[..., 2, 2] = 0.5 * a2
    c[..., 3, 3] = 0.5 * (1 - a2)
    c[..., 0, 3] = 0.5 * z
    c[..., 3, 0] = 0.5 * np.conj(z)
    return c


def choi_from_transfer(f):
    """Choi matrix of an arbitrary map given by its transfer matrix.

    ``Phi(|i><j|) = sum_kl F_kl Tr[G_l |i><j|] G_k`` and
    ``C = 1/2 sum_ij |i><j| (x) Phi(|i><j|)``.
    """
    f = np.asarray(f, dtype=complex)
    blocks = 0.5 * np.einsum("...kl,lji,kab->...iajb", f, PAULI_BASIS, PAULI_BASIS)
    return blocks.reshape(f.shape[:-2] + (4, 4))


def superoperator_from_transfer(f):
    """Row-major Liouville superoperator ``S`` with ``vec(Phi(X)) = S vec(X)``."""
    vecs = PAULI_BASIS.reshape(4, 4).T  # column l is vec(G_l)
    return np.einsum("al,...lk,bk->...ab", vecs, np.asarray(f, dtype=complex), vecs.conj())


def reshuffle(s):
    """Realignment ``S[(a,b),(c,d)] -> R[(c,a),(d,b)]``; maps a row-major
    superoperator to ``2 x`` its Choi matrix."""
    s = np.asarray(s)
    lead = s.shape[:-2]
    split = s.reshape(lead + (2, 2, 2, 2))
    k = len(lead)
    axes = tuple(range(k)) + (k + 2, k, k + 3, k + 1)
    return np.transpose(split, axes).reshape(lead + (4, 4))


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Operators ``K_i`` with ``Phi(rho) = sum_i K_i rho K_i^dag``.

    ``weights`` carries the Choi eigenvalue (or the closed-form ``Gamma``)
    each operator was built from.
    """

    operators: np.ndarray
    weights: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.operators)

    def apply(self, rho):
        k = self.operators
        return np.einsum("iab,...bc,idc->...ad", k, np.asarray(rho, dtype=complex), k.conj())

    def completeness_residual(self):
        k = self.operators
        total = np.einsum("iba,ibc->ac", k.conj(), k)
        return float(np.max(np.abs(total - IDENTITY)))

    def superoperator(self):
        k = self.operators
        return np.einsum("iab,icd->acbd", k, k.conj()).reshape(4, 4)


def kraus_from_choi(c, threshold=KRAUS_THRESHOLD):
    """Kraus operators from the eigendecomposition of a Choi matrix.

    ``K_i = sqrt(2 lambda_i) * unvec(v_i)`` where ``unvec`` lays the
    eigenvector out row-wise over ``(input, output)`` and transposes, so that
    ``K_i[a, i] = sqrt(2 lambda_i) v_i[2 i + a]``.  Eigenvector phases are
    fixed with :func:`~csdyn.linalg.fix_phase`.
    """
    c = np.asarray(c, dtype=complex)
    vals, vecs = np.linalg.eigh(0.5 * (c + c.conj().T))
    if vals[0] < -CP_TOL:
        raise NotCompletelyPositiveError(f"map not CP at this time (Choi eigenvalue {vals[0]:.3e})")
    vecs = fix_phase(vecs)
    keep = np.nonzero(vals > threshold)[0][::-1]
    ops = np.array(
        [np.sqrt(2 * vals[i]) * vecs[:, i].reshape(2, 2).T for i in keep], dtype=complex
    ).reshape(-1, 2, 2)
    return KrausSet(ops, vals[keep])


def closed_form_parameters(coeffs):
    """``(Gamma1, Gamma2, Lambda1, Lambda2, theta)`` of the diagonal Kraus pair.

    ``Lambda1, Lambda2`` are both returned positive; the second diagonal
    operator carries ``-Lambda2``.
    """
    a1, a2, z = float(coeffs.alpha1), float(coeffs.alpha2), complex(coeffs.zeta)
    mag = abs(z)
    if mag < 1e-14:
        raise ZeroDivisionError("closed form singular at zeta = 0, use kraus_from_choi")
    diff = a1 - a2
    root = np.sqrt(diff**2 + 4 * mag**2)
    g1 = (1 - 0.5 * (a1 + a2)) + 0.5 * root
    g2 = (1 - 0.5 * (a1 + a2)) - 0.5 * root
    l1 = (root - diff) / (2 * mag)
    l2 = (root + diff) / (2 * mag)
    theta = float(np.arctan2(z.imag, z.real))
    return g1, g2, l1, l2, theta


def kraus_closed_form(coeffs):
    """The four operators: two jumps and two diagonal dephasing operators."""
    try:
        g1, g2, l1, l2, theta = closed_form_parameters(coeffs)
    except ZeroDivisionError as exc:
        raise ValueError(str(exc)) from None
    a1, a2 = float(coeffs.alpha1), float(coeffs.alpha2)
    ph = np.exp(1j * theta)
    g2 = max(g2, 0.0)
    k1 = np.sqrt(max(a2, 0.0)) * SIGMA_PLUS
    k2 = np.sqrt(max(a1, 0.0)) * SIGMA_MINUS
    k3 = np.sqrt(g1 / (1 + l1**2)) * np.diag([l1 * ph, 1.0])
    k4 = np.sqrt(g2 / (1 + l2**2)) * np.diag([-l2 * ph, 1.0])
    return KrausSet(np.array([k1, k2, k3, k4]), np.array([a2, a1, g1, g2]))


def map_superoperator(coeffs):
    return superoperator_from_transfer(transfer_matrix(coeffs))


@dataclass(frozen=True)
class CptpReport:
    is_cp: bool
    min_choi_eig: float
    trace_dev: float
    kraus_residual: float


def validate_cptp(coeffs, tol=CP_TOL):
    """Check complete positivity and trace preservation; never raises."""
    c = choi(coeffs)
    vals = np.linalg.eigvalsh(c)
    min_eig = float(np.min(vals))
    trace_dev = float(np.max(np.abs(np.trace(c, axis1=-2, axis2=-1) - 1.0)))
    is_cp = min_eig >= -tol
    residual = float("nan")
    if is_cp and c.ndim == 2:
        residual = kraus_from_choi(c).completeness_residual()
    elif is_cp:
        residual = max(kraus_from_choi(ci).completeness_residual() for ci in c)
    return CptpReport(bool(is_cp), min_eig, trace_dev, residual)
