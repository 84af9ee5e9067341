"""Density matrices, pure states, maximally coherent states and purification.

The incoherent (reference) basis is always the computational basis, which is
also the basis of stored attractors.
"""
from __future__ import annotations

import numpy as np

from .errors import BadDimension, BadRank, DimensionMismatch
from .linalg import HERMITIAN_TOL, PSD_TOL, as_square, herm_eig, hermiticity_residual

TRACE_TOL = 1e-10
RANK_TOL = 1e-12


def validate_density(rho, name: str = "rho") -> np.ndarray:
    """Return ``rho`` as a complex array, raising if it is not a density matrix."""
    rho = as_square(rho, name)
    if hermiticity_residual(rho) > HERMITIAN_TOL:
        raise ValueError(f"{name} is not Hermitian")
    if abs(np.trace(rho) - 1.0) > TRACE_TOL:
        raise ValueError(f"{name} does not have unit trace (trace={np.trace(rho).real:.12g})")
    if herm_eig(rho).eigenvalues[-1] < PSD_TOL:
        raise ValueError(f"{name} is not positive semidefinite")
    return rho


def is_density(rho) -> bool:
    try:
        validate_density(rho)
    except ValueError:
        return False
    return True


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def basis_state(index: int, dim: int) -> np.ndarray:
    """Projector ``|index><index|``."""
    return projector(ket(index, dim))


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def matrix_unit(i: int, j: int, dim: int) -> np.ndarray:
    e = np.zeros((dim, dim), dtype=complex)
    e[i, j] = 1.0
    return e


def dephase(rho) -> np.ndarray:
    """Complete dephasing in the computational basis: keep only the diagonal."""
    rho = np.asarray(rho, dtype=complex)
    return np.diag(np.diagonal(rho)).astype(complex)


def is_incoherent(rho, tol: float = 1e-12) -> bool:
    rho = np.asarray(rho)
    off = rho - np.diag(np.diagonal(rho))
    return bool(np.max(np.abs(off), initial=0.0) <= tol)


def mcs_vector(dim: int, phases=None) -> np.ndarray:
    if dim < 2:
        raise BadDimension("maximally coherent states need dim >= 2")
    phases = np.zeros(dim) if phases is None else np.asarray(phases, dtype=float)
    if phases.shape != (dim,):
        raise DimensionMismatch(f"expected {dim} phases, got {phases.shape}")
    return np.exp(1j * phases) / np.sqrt(dim)


def maximally_coherent(dim: int, phases=None) -> np.ndarray:
    """Projector onto ``(1/sqrt(N)) Σ_j exp(iθ_j)|j>``; zero phases by default."""
    return projector(mcs_vector(dim, phases))


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def bell_state() -> np.ndarray:
    return projector(np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))


def maximally_entangled(dim: int) -> np.ndarray:
    """Normalized projector onto ``Σ_i |ii> / sqrt(dim)``."""
    return projector(np.eye(dim, dtype=complex).ravel() / np.sqrt(dim))


def purify(rho) -> np.ndarray:
    """Minimal purification ``Σ_k sqrt(p_k)|φ_k>|k>`` of ``rho``.

    The ancilla dimension equals the rank of ``rho`` (eigenvalues below 1e-12
    count as zero). The returned vector lives on ``H ⊗ A`` with the system
    index most significant, so ``partial_trace(projector(psi), (N, r), keep=0)``
    recovers ``rho``.
    """
    rho = as_square(rho)
    evals, evecs = herm_eig(rho)
    keep = evals > RANK_TOL
    p = evals[keep]
    phi = evecs[:, keep]
    rank = int(keep.sum())
    if rank == 0:
        raise ValueError("cannot purify the zero matrix")
    # psi[i*r + k] = sqrt(p_k) <i|φ_k>
    return (phi * np.sqrt(p)).reshape(-1).astype(complex)


def ancilla_dim(psi, dim: int) -> int:
    size = np.asarray(psi).size
    if size % dim:
        raise DimensionMismatch(f"vector of length {size} is not on a {dim}-dim system")
    return size // dim


def random_density(dim: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Hilbert-Schmidt (Ginibre) random density matrix ``G G^H / Tr``.

    ``G`` is ``dim × rank`` with standard complex Gaussian entries; the same
    seed always yields the same matrix.
    """
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise BadRank(f"rank must lie in [1, {dim}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_pure(dim: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


# JSON helpers --------------------------------------------------------------

def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise ValueError("real and imaginary parts differ in shape")
    return re + 1j * im


def density_to_json(rho) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {"dim": int(rho.shape[0]), **matrix_to_json(rho)}


def density_from_json(obj, validate: bool = True) -> np.ndarray:
    rho = matrix_from_json(obj)
    dim = int(obj.get("dim", rho.shape[0]))
    if rho.shape != (dim, dim):
        raise DimensionMismatch(f"declared dim {dim} but matrix has shape {rho.shape}")
    return validate_density(rho) if validate else rho
