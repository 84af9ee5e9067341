"""Dense complex matrix primitives.

Everything here operates on plain ``numpy`` arrays. The Hermitian eigensolver
is a cyclic complex Jacobi iteration rather than a LAPACK call: Jacobi never
rotates a pair of indices whose coupling is exactly zero, so a matrix that is
a direct sum in the computational basis keeps eigenvectors supported on its
blocks even when eigenvalues are degenerate across blocks. The Kraus and
classification code relies on that.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonHermitianInput

HERMITIAN_TOL = 1e-12
PSD_TOL = -1e-10


@dataclass(frozen=True, eq=False)
class HermitianEigenSystem:
    """Eigenvalues (descending) with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def __iter__(self):
        yield self.eigenvalues
        yield self.eigenvectors


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def as_square(m, name="matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def hermiticity_residual(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - dagger(m)), initial=0.0))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_residual(m) <= tol


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: n-1 rounds of disjoint index pairs covering all pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        if pairs:
            p, q = (np.array(x) for x in zip(*pairs))
            rounds.append((p, q))
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


def _jacobi_sweeps(a: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, np.ndarray]:
    # Cyclic Jacobi in parallel (round-robin) ordering: every round rotates a
    # set of disjoint index pairs at once. A pair with zero coupling gets the
    # identity rotation, so exact zeros between blocks are never filled in.
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if scale == 0.0 or n == 1:
        return np.real(np.diag(a)).copy(), v
    schedule = _round_robin(n)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= 1e-15 * scale:
            break
        for p, q in schedule:
            b = a[p, q]
            mod = np.abs(b)
            active = mod > 1e-300
            if not active.any():
                continue
            safe = np.where(active, mod, 1.0)
            phase = np.where(active, b / safe, 1.0)
            with np.errstate(over="ignore"):
                tau = (a[q, q].real - a[p, p].real) / (2.0 * safe)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # per pair G = diag(1, conj(phase)) @ [[c, s], [-s, c]] on (p, q)
            g00, g01 = c, s
            g10, g11 = -s * np.conj(phase), c * np.conj(phase)

            ap = a[:, p]
            aq = a[:, q]
            a[:, p] = ap * g00 + aq * g10
            a[:, q] = ap * g01 + aq * g11
            rp = a[p, :]
            rq = a[q, :]
            a[p, :] = np.conj(g00)[:, None] * rp + np.conj(g10)[:, None] * rq
            a[q, :] = np.conj(g01)[:, None] * rp + np.conj(g11)[:, None] * rq
            a[p, q] = 0.0
            a[q, p] = 0.0
            a[p, p] = a[p, p].real
            a[q, q] = a[q, q].real

            vp = v[:, p]
            vq = v[:, q]
            v[:, p] = vp * g00 + vq * g10
            v[:, q] = vp * g01 + vq * g11
    return np.real(np.diag(a)).copy(), v


def herm_eig(m, max_sweeps: int = 100) -> HermitianEigenSystem:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues come back sorted descending; ties keep the order in which
    they sit on the converged diagonal, which makes the output reproducible.

    Raises:
        DimensionMismatch: if ``m`` is not square.
        NonHermitianInput: if the largest entry of ``m - m^H`` exceeds 1e-12.
    """
    m = as_square(m)
    if not is_hermitian(m):
        raise NonHermitianInput(
            f"matrix is not Hermitian (asymmetry {hermiticity_residual(m):.3e})"
        )
    a = 0.5 * (m + m.conj().T)
    evals, evecs = _jacobi_sweeps(a, max_sweeps)
    order = np.argsort(-evals, kind="stable")
    return HermitianEigenSystem(evals[order], evecs[:, order])


def eigvalsh(m) -> np.ndarray:
    return herm_eig(m).eigenvalues


def min_eigenvalue(m) -> float:
    return float(herm_eig(m).eigenvalues[-1])


def is_psd(m, tol: float = PSD_TOL) -> bool:
    return min_eigenvalue(m) >= tol


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``(a⊗b)[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    return np.kron(a, b)


def partial_trace(m, dims: tuple[int, int], keep: int = 0) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Args:
        m: operator on ``H_A ⊗ H_B`` with the A index most significant.
        dims: ``(d_A, d_B)``.
        keep: 0 keeps A (traces B), 1 keeps B (traces A).
    """
    m = np.asarray(m, dtype=complex)
    d_a, d_b = (int(d) for d in dims)
    if m.shape != (d_a * d_b, d_a * d_b):
        raise DimensionMismatch(f"operator of shape {m.shape} does not match dims {dims}")
    t = m.reshape(d_a, d_b, d_a, d_b)
    if keep == 0:
        return np.einsum("ikjk->ij", t)
    if keep == 1:
        return np.einsum("kikj->ij", t)
    raise ValueError("keep must be 0 (subsystem A) or 1 (subsystem B)")


def trace_norm(m) -> float:
    """Sum of singular values."""
    m = as_square(m)
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def psd_sqrt(m) -> np.ndarray:
    evals, evecs = herm_eig(m)
    return (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def closest_isometry(m: np.ndarray) -> np.ndarray:
    """Polar factor ``U`` of ``m = U P`` (columns orthonormal)."""
    u, _, vh = np.linalg.svd(m, full_matrices=False)
    return u @ vh
