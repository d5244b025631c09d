"""Small dense complex linear algebra.

Matrices are plain ``numpy.ndarray`` objects.  Every function here is pure:
inputs are never modified, so the helpers can be used from worker processes
without coordination.

Two Hermitian eigensolvers are provided.  ``hermitian_eig`` defaults to
LAPACK (``numpy.linalg.eigh``); ``jacobi_eigh`` is a cyclic complex Jacobi
solver kept for small matrices and as an independent check of the LAPACK
path.
"""

import numpy as np

from .errors import ConvergenceError, HermitianError

HERMITIAN_RTOL = 1e-12


def hermitian_residual(a):
    """Return ``max|A - A^H|`` for a square matrix."""
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def check_hermitian(a, rtol=HERMITIAN_RTOL):
    """Raise :class:`HermitianError` unless ``a`` is Hermitian within ``rtol``."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    resid = hermitian_residual(a)
    if resid > rtol * max(1.0, scale):
        raise HermitianError(resid, scale)
    return a


def jacobi_eigh(a, tol=1e-13, max_sweeps=100):
    """Cyclic Jacobi eigensolver for a complex Hermitian matrix.

    Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm
    drops below ``tol * ||A||_F``.

    Returns
    -------
    eigenvalues : ndarray, ascending
    eigenvectors : ndarray, columns
    """
    a = check_hermitian(a)
    n = a.shape[0]
    work = np.array(a, dtype=complex)
    work = 0.5 * (work + work.conj().T)
    vecs = np.eye(n, dtype=complex)
    fro = np.linalg.norm(work)
    if n < 2 or fro == 0.0:
        return _sorted_eig(work.diagonal().real, vecs)

    def off_norm(m):
        return np.linalg.norm(m - np.diag(m.diagonal()))

    for _ in range(max_sweeps):
        if off_norm(work) < tol * fro:
            return _sorted_eig(work.diagonal().real, vecs)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                r = abs(apq)
                if r <= 1e-18 * fro:
                    continue
                phase = apq / r
                app = work[p, p].real
                aqq = work[q, q].real
                theta = (aqq - app) / (2.0 * r)
                t = 1.0 / (abs(theta) + np.hypot(theta, 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.array([[c, s * phase], [-s * np.conj(phase), c]])
                idx = [p, q]
                work[:, idx] = work[:, idx] @ rot
                work[idx, :] = rot.conj().T @ work[idx, :]
                work[p, q] = work[q, p] = 0.0
                work[p, p] = work[p, p].real
                work[q, q] = work[q, q].real
                vecs[:, idx] = vecs[:, idx] @ rot
    raise ConvergenceError(
        f"Jacobi did not converge in {max_sweeps} sweeps "
        f"(off-diagonal norm {off_norm(work):.3e}, target {tol * fro:.3e})"
    )


def _sorted_eig(vals, vecs):
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs[:, order]


def hermitian_eig(a, method="lapack"):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Hermitian within ``1e-12 * max(1, max|a|)``; otherwise
        :class:`~csdyn.errors.HermitianError` is raised.
    method : {"lapack", "jacobi"}

    Returns
    -------
    eigenvalues : ndarray
        Real, ascending.
    eigenvectors : ndarray
        Orthonormal columns, ``a @ v == v * eigenvalues``, phases fixed by
        :func:`fix_phase`.
    """
    if method == "jacobi":
        vals, vecs = jacobi_eigh(a)
    elif method == "lapack":
        a = check_hermitian(a)
        vals, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return vals, fix_phase(vecs)


def fix_phase(vecs):
    """Rotate each column so its largest-magnitude entry is real and positive.

    Ties between equal magnitudes go to the lowest index.
    """
    vecs = np.array(vecs, dtype=complex)
    mags = np.abs(vecs)
    # round so that entries equal up to noise resolve to the same first index
    idx = np.argmax(np.round(mags, 12), axis=-2)
    pivot = np.take_along_axis(vecs, idx[..., None, :], axis=-2)
    absp = np.abs(pivot)
    safe = np.where(absp > 0, absp, 1.0)
    phase = np.where(absp > 0, pivot / safe, 1.0)
    return vecs / phase


def trace_norm(a):
    """Sum of singular values.

    Works on a single square matrix or a stack ``(..., n, n)``.  Hermitian
    inputs use ``sum |lambda_i|`` which is cheaper and slightly more accurate.
    """
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"trace norm needs square matrices, got shape {a.shape}")
    herm = np.max(np.abs(a - np.swapaxes(a.conj(), -1, -2)), initial=0.0)
    if herm <= HERMITIAN_RTOL * max(1.0, float(np.max(np.abs(a), initial=0.0))):
        h = 0.5 * (a + np.swapaxes(a.conj(), -1, -2))
        return np.sum(np.abs(np.linalg.eigvalsh(h)), axis=-1)
    return np.sum(np.linalg.svd(a, compute_uv=False), axis=-1)


def evolve_unitary(h, t, v, eig=None):
    """Apply ``exp(-i h t)`` to ``v`` through the spectral decomposition of ``h``.

    ``v`` may be a vector or a matrix whose columns are evolved
    independently.  A precomputed ``eig = (vals, vecs)`` skips the
    eigensolve, which is how the joint-evolution oracle amortises one
    decomposition over a whole time grid.
    """
    h = np.asarray(h)
    v = np.asarray(v, dtype=complex)
    if v.shape[0] != h.shape[0]:
        raise ValueError(f"dimension mismatch: h is {h.shape}, v is {v.shape}")
    vals, vecs = eig if eig is not None else hermitian_eig(h)
    coeff = vecs.conj().T @ v
    phases = np.exp(-1j * vals * t)
    if v.ndim == 1:
        return vecs @ (phases * coeff)
    return vecs @ (phases[:, None] * coeff)


def partial_trace_bath(rho_joint, bath_dim, system_dim=2):
    """Trace out the bath factor of a ``system (x) bath`` density matrix."""
    rho_joint = np.asarray(rho_joint)
    dim = system_dim * bath_dim
    if rho_joint.shape[-2:] != (dim, dim):
        raise ValueError(
            f"expected trailing shape {(dim, dim)}, got {rho_joint.shape[-2:]}"
        )
    tr = np.trace(rho_joint, axis1=-2, axis2=-1)
    if np.max(np.abs(tr - 1.0)) > 1e-8:
        raise ValueError(f"joint state trace deviates from 1 by {np.max(np.abs(tr - 1.0)):.3e}")
    shape = rho_joint.shape[:-2] + (system_dim, bath_dim, system_dim, bath_dim)
    return np.einsum("...ikjk->...ij", rho_joint.reshape(shape))


def random_hermitian(n, rng):
    """Random Hermitian matrix with Gaussian entries (GUE up to scale)."""
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (x + x.conj().T)


def random_unitary(n, rng):
    """Haar-random unitary via QR with phase correction."""
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(x)
    d = np.diag(r)
    return q * (d / np.abs(d))
