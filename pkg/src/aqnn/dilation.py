"""Stinespring dilations: GIO block form, SIO permutation form and the generic
Kraus isometry, plus unitary completion and round-trip verification.

Index convention: the dilated space is H ⊗ A with the system index most
significant, so basis vector |i>|a> sits at position ``i * d_A + a``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .channels import ChannelSpec, Variant, act, kraus, require_cptp
from .errors import ConstraintInfeasible, DimensionMismatch, NotPSD, WrongVariant
from .linalg import PSD_TOL, herm_eig, partial_trace, trace_norm
from .states import matrix_to_json, random_density

RANK_TOL = 1e-10
CONSTRAINT_TOL = 1e-10


# Gram factorization -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GramVectors:
    """Unit vectors ``c_μ`` (rows of ``vectors``) with <c_ν|c_μ> = 1 + α_μν."""

    dim: int
    ancilla_dim: int
    vectors: np.ndarray

    def gram(self) -> np.ndarray:
        """Matrix with entry [ν, μ] = <c_ν|c_μ>."""
        c = self.vectors
        return c.conj() @ c.T


def gram_factorize(alpha) -> GramVectors:
    """Factor G (G_μμ = 1, G_νμ = 1 + α_μν) into unit vectors.

    Uses the Hermitian eigendecomposition ``G = V Λ V^H`` and keeps the
    eigenvalues above 1e-10, so ``d_A`` is the numerical rank of G.

    Raises:
        NotPSD: if G has an eigenvalue below -1e-10 (the channel is not CP).
    """
    alpha = np.asarray(alpha, dtype=complex)
    n = alpha.shape[0]
    g = (1.0 + alpha).T
    np.fill_diagonal(g, 1.0)
    lam, v = herm_eig(g)
    if lam[-1] < PSD_TOL:
        raise NotPSD(f"Gram matrix has eigenvalue {lam[-1]:.3e}; channel is not CP")
    keep = lam > RANK_TOL
    lam, v = lam[keep], v[:, keep]
    # Fix each eigenvector's phase so that c_0 has real non-negative entries.
    lead = v[0]
    phase = np.where(np.abs(lead) > 1e-12, np.abs(lead) / np.where(lead == 0, 1, lead), 1.0)
    v = v * phase.conj()
    # c_μ[k] = sqrt(λ_k) conj(V[μ, k]), i.e. columns of sqrt(Λ) V^H
    vectors = (np.sqrt(lam) * v).conj()
    return GramVectors(n, int(keep.sum()), vectors)


# dilation container -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DilationUnitary:
    system_dim: int
    ancilla_dim: int
    matrix: np.ndarray
    ancilla_start_index: int = 0

    def __post_init__(self):
        size = self.system_dim * self.ancilla_dim
        if self.matrix.shape != (size, size):
            raise DimensionMismatch(f"matrix of shape {self.matrix.shape} does not fit "
                                    f"{self.system_dim} x {self.ancilla_dim}")

    def unitarity_residual(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))

    def to_json(self) -> dict:
        return {"system_dim": self.system_dim, "ancilla_dim": self.ancilla_dim,
                "ancilla_start_index": self.ancilla_start_index, **matrix_to_json(self.matrix)}


def _rotation_to(c: np.ndarray) -> np.ndarray:
    """Unitary sending e_0 to the unit vector ``c``, acting only on span{e_0, c}."""
    d = c.size
    c0 = c[0]
    perp = c.copy()
    perp[0] = 0.0
    s = np.linalg.norm(perp)
    u = np.eye(d, dtype=complex)
    if s <= 1e-15:
        u[0, 0] = c0 / abs(c0)
        return u
    basis = np.zeros((d, 2), dtype=complex)
    basis[0, 0] = 1.0
    basis[:, 1] = perp / s
    rot = np.array([[c0, -s], [s, np.conj(c0)]])
    return u - basis @ basis.conj().T + basis @ rot @ basis.conj().T


def build_gio_dilation(spec: ChannelSpec) -> DilationUnitary:
    """Block-diagonal dilation ``U = Σ_μ |μ><μ| ⊗ U_μ`` with U_μ|a_0> = |c_μ>."""
    if spec.variant is not Variant.IDEAL:
        raise WrongVariant("the GIO dilation needs an ideal channel")
    require_cptp(spec)
    gv = gram_factorize(spec.alpha)
    n, d = spec.dim, gv.ancilla_dim
    u = np.zeros((n * d, n * d), dtype=complex)
    for mu in range(n):
        u[mu * d:(mu + 1) * d, mu * d:(mu + 1) * d] = _rotation_to(gv.vectors[mu])
    return DilationUnitary(n, d, u, 0)


def complete_isometry(columns: np.ndarray, positions) -> np.ndarray:
    """Square unitary whose columns at ``positions`` are the given orthonormal ones.

    The remaining columns come from Gram-Schmidt over the canonical basis
    vectors, taken in index order.
    """
    columns = np.asarray(columns, dtype=complex)
    size = columns.shape[0]
    positions = list(positions)
    u = np.zeros((size, size), dtype=complex)
    u[:, positions] = columns
    free = [p for p in range(size) if p not in set(positions)]
    basis = [columns[:, i] for i in range(columns.shape[1])]
    slot = iter(free)
    for e in range(size):
        if len(basis) == size:
            break
        v = np.zeros(size, dtype=complex)
        v[e] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - (b.conj() @ v) * b
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            v = v / nrm
            basis.append(v)
            u[:, next(slot)] = v
    return u


def build_generic_dilation(ops) -> DilationUnitary:
    """Dilation from the isometry ``V = Σ_α K_α ⊗ |a_α>`` completed to a unitary."""
    ks = np.asarray([np.asarray(k, dtype=complex) for k in ops])
    m, n, _ = ks.shape
    # V[(i*m + α), j] = K_α[i, j]
    v = ks.transpose(1, 0, 2).reshape(n * m, n)
    return DilationUnitary(n, m, complete_isometry(v, [j * m for j in range(n)]), 0)


def sio_dilation_kraus(spec: ChannelSpec) -> list[np.ndarray]:
    """Kraus operators Σ_μ c_μ^(k) |π_k(μ)><μ| of the permutation dilation.

    k = 0 is the identity permutation; k >= 1 runs over the transpositions
    (μ, ν), μ < ν, in lexicographic order. Points fixed by a transposition get
    coefficient zero.

    Raises:
        ConstraintInfeasible: when the product constraints have no solution,
            which is everything except |1+α_μν| = 1-ε, |γ| = ε/(N-1) with
            consistent phases.
    """
    if spec.variant is not Variant.EPS_GAMMA:
        raise WrongVariant("the SIO dilation is defined for eps_gamma channels")
    require_cptp(spec)
    n, eps, gamma = spec.dim, spec.epsilon, spec.gamma
    target = 1.0 + spec.alpha
    np.fill_diagonal(target, 1.0 - eps)

    if eps < 1.0:
        c0 = target[:, 0] / np.sqrt(1.0 - eps)
    else:
        c0 = np.zeros(n, dtype=complex)
    achieved = np.outer(c0, c0.conj())
    err = np.abs(achieved - target)
    if err.max() > CONSTRAINT_TOL:
        mu, nu = np.unravel_index(int(np.argmax(err)), err.shape)
        raise ConstraintInfeasible(
            f"c_{mu}^(0) conj(c_{nu}^(0)) must equal {target[mu, nu]:.6g} but the moduli force "
            f"{achieved[mu, nu]:.6g}; use build_generic_dilation",
            diagnostic={"term": 0, "pair": (int(mu), int(nu)), "required": complex(target[mu, nu]),
                        "achievable": complex(achieved[mu, nu])})
    e = eps / (n - 1)
    if abs(abs(gamma) - e) > CONSTRAINT_TOL:
        raise ConstraintInfeasible(
            f"|c^(k)|^2 = {e:.6g} forces |gamma| = {e:.6g}, got {abs(gamma):.6g}; "
            "use build_generic_dilation",
            diagnostic={"term": "swap", "required": complex(gamma), "achievable_modulus": e})
    ops = [np.diag(c0)]
    if e > 0:
        phase = gamma / abs(gamma)
        for mu, nu in combinations(range(n), 2):
            k = np.zeros((n, n), dtype=complex)
            k[nu, mu] = np.sqrt(e) * phase   # c_μ^(k), sends μ to ν
            k[mu, nu] = np.sqrt(e)           # c_ν^(k), sends ν to μ
            ops.append(k)
    return ops


def build_sio_dilation(spec: ChannelSpec) -> DilationUnitary:
    """Permutation-form dilation of a boundary faulty channel."""
    return build_generic_dilation(sio_dilation_kraus(spec))


def build_dilation_for(spec: ChannelSpec) -> DilationUnitary:
    """Generic dilation from the canonical Kraus operators of ``spec``."""
    require_cptp(spec)
    return build_generic_dilation(kraus(spec))


# round trip -------------------------------------------------------------------

def dilation_channel(u: DilationUnitary, rho) -> np.ndarray:
    """Tr_A[U (ρ ⊗ |a_0><a_0|) U^H]."""
    rho = np.asarray(rho, dtype=complex)
    n, d = u.system_dim, u.ancilla_dim
    if rho.shape != (n, n):
        raise DimensionMismatch(f"state of shape {rho.shape} vs system dim {n}")
    # U (ρ ⊗ |a0><a0|) U^H only touches the columns i*d + a0.
    cols = u.matrix[:, np.arange(n) * d + u.ancilla_start_index]
    return partial_trace(cols @ rho @ cols.conj().T, (n, d), keep=0)


def verify_dilation(u: DilationUnitary, spec: ChannelSpec, trials: int = 100, seed=0) -> float:
    """Largest trace-norm gap between the dilation and the channel on random states."""
    if u.system_dim != spec.dim:
        raise DimensionMismatch(f"dilation acts on dim {u.system_dim}, channel on {spec.dim}")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(trials):
        rank = spec.dim if t % 2 == 0 else 1
        rho = random_density(spec.dim, rank, seed=rng.integers(2**63))
        worst = max(worst, trace_norm(dilation_channel(u, rho) - act(spec, rho)))
    return worst
