"""Coherence measures, the closest-attractor property, decohering power and depth.

Entropies use base-2 logarithms throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ChannelSpec, Variant, act, require_cptp
from .errors import DepthExceeded, WrongVariant
from .linalg import as_square, herm_eig
from .states import dephase, maximally_coherent, mcs_vector

SUPPORT_EIG_TOL = 1e-15
SUPPORT_WEIGHT_TOL = 1e-12
MAX_DEPTH = 10**6


def c_l1(rho) -> float:
    """l1 coherence: sum of moduli of the off-diagonal entries."""
    rho = np.asarray(rho)
    a = np.abs(rho)
    return float(a.sum() - np.trace(a))


def _c_l1_stack(rhos: np.ndarray) -> np.ndarray:
    a = np.abs(rhos)
    return a.sum(axis=(-2, -1)) - np.trace(a, axis1=-2, axis2=-1)


def _entropy_of_spectrum(p: np.ndarray) -> float:
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho) -> float:
    """S(ρ) = -Tr ρ log2 ρ, with 0 log 0 = 0."""
    return _entropy_of_spectrum(herm_eig(as_square(rho)).eigenvalues)


def c_relative_entropy(rho) -> float:
    """Relative entropy of coherence S(Δ(ρ)) - S(ρ)."""
    rho = as_square(rho)
    return _entropy_of_spectrum(np.real(np.diagonal(rho))) - von_neumann_entropy(rho)


def relative_entropy(rho, sigma) -> float:
    """Quantum relative entropy S(ρ‖σ) in bits; ``inf`` when supp ρ ⊄ supp σ.

    σ eigenvalues at or below 1e-15 are treated as exact zeros.
    """
    rho = as_square(rho, "rho")
    sigma = as_square(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise ValueError("rho and sigma must share a dimension")
    lam, w = herm_eig(sigma)
    weights = np.real(np.einsum("ik,ij,jk->k", w.conj(), rho, w))
    kernel = lam <= SUPPORT_EIG_TOL
    if np.any(weights[kernel] > SUPPORT_WEIGHT_TOL):
        return math.inf
    cross = float(np.sum(weights[~kernel] * np.log2(lam[~kernel])))
    return -von_neumann_entropy(rho) - cross


def closest_attractor(rho) -> tuple[np.ndarray, float]:
    """Incoherent state minimizing S(ρ‖δ), with the minimum value.

    This is the dephased state Δ(ρ), reached by iterating any ideal network,
    and the minimum equals the relative entropy of coherence.
    """
    rho = as_square(rho)
    return dephase(rho), c_relative_entropy(rho)


# decohering power ---------------------------------------------------------------

def decohering_power(spec: ChannelSpec) -> float:
    """Closed-form l1 decohering power of an ideal network.

    ``N - 1 - (1/N) Σ_{μ≠ν} |1 + α_μν|``.
    """
    if spec.variant is not Variant.IDEAL:
        raise WrongVariant("closed-form decohering power is only defined for ideal channels; "
                           "use estimate_decohering_power")
    n = spec.dim
    off = ~np.eye(n, dtype=bool)
    return float(n - 1 - np.abs(1.0 + spec.alpha[off]).sum() / n)


def estimate_decohering_power(spec: ChannelSpec, samples: int = 1000, seed=0) -> float:
    """Brute-force decohering power over sampled maximally coherent inputs.

    The zero-phase state is always included. Works for every variant; for
    ideal channels it serves as an oracle for :func:`decohering_power`.
    """
    n = spec.dim
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2 * np.pi, size=(samples, n))
    phases[0] = 0.0
    vecs = np.exp(1j * phases) / np.sqrt(n)
    states = vecs[:, :, None] * vecs.conj()[:, None, :]
    outs = act(spec, states)
    return float(n - 1 - _c_l1_stack(outs).min())


# depth ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DepthQuery:
    spec: ChannelSpec
    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")

    @property
    def dim(self) -> int:
        return self.spec.dim


@dataclass(frozen=True)
class DepthReport:
    analytic_bound: int | None
    simulated_depth: int
    decohering_power: float
    agreement: bool | None


def analytic_depth(dim: int, power: float, eta: float) -> int | None:
    """Ceiling formula for the depth of a uniformly decohering network.

    Returns ``None`` when the network does not decohere at all (zero power).
    """
    n1 = dim - 1
    residual = n1 - power
    if residual <= 0.0:
        return 1
    if residual >= n1:
        return None
    r = math.ceil(math.log(eta / n1) / math.log(residual / n1))
    return max(1, r)


def uniform_iteration_coherence(dim: int, power: float, r: int) -> float:
    """C_l1(Λ^r(Ψ_N)) = (N-1)^(1-r) (N-1-D)^r for uniform decoherence."""
    n1 = dim - 1
    # ratio form avoids overflow of n1**(1-r) at large r
    return n1 * ((n1 - power) / n1) ** r


def simulated_depth(spec: ChannelSpec, eta: float, max_iterations: int = MAX_DEPTH) -> int:
    """Smallest r with C_l1(Λ^r(Ψ_N)) <= η, starting from the zero-phase MCS.

    Raises ``DepthExceeded`` after ``max_iterations`` or as soon as one step
    fails to lower the coherence (it then never will).
    """
    rho = maximally_coherent(spec.dim)
    prev = c_l1(rho)
    for r in range(1, max_iterations + 1):
        rho = act(spec, rho)
        cur = c_l1(rho)
        if cur <= eta:
            return r
        if cur >= prev:
            raise DepthExceeded(f"coherence stalled at {cur:.6g} after {r} steps")
        prev = cur
    raise DepthExceeded(f"no convergence within {max_iterations} iterations")


def depth(query: DepthQuery) -> DepthReport:
    spec = query.spec
    if spec.variant is not Variant.IDEAL:
        raise WrongVariant("depth is defined for ideal channels")
    require_cptp(spec)
    power = decohering_power(spec)
    sim = simulated_depth(spec, query.eta)
    if not spec.is_uniform():
        return DepthReport(None, sim, power, None)
    bound = analytic_depth(spec.dim, power, query.eta)
    return DepthReport(bound, sim, power, bound == sim)


def uniform_spec_for_power(dim: int, power: float) -> ChannelSpec:
    """Ideal uniform-α channel with the requested l1 decohering power.

    Uses real α = -D/(N-1) in [-1, 0].
    """
    return ChannelSpec.ideal(dim, uniform=-power / (dim - 1))


__all__ = [
    "c_l1", "von_neumann_entropy", "c_relative_entropy", "relative_entropy", "closest_attractor",
    "decohering_power", "estimate_decohering_power", "DepthQuery", "DepthReport", "analytic_depth",
    "uniform_iteration_coherence", "simulated_depth", "depth", "uniform_spec_for_power", "mcs_vector",
]
