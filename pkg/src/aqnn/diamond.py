"""Diamond distance between channels from the Choi-matrix semidefinite program

    minimize λ  subject to  Z ⪰ J_A - J_B,  λ·1 ⪰ Tr_out Z,  Z ⪰ 0,

whose optimum is ½‖A - B‖_⋄ for unnormalized Choi matrices. The program is
solved by a primal log-det barrier method written for these tiny sizes.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy import sparse

from .channels import ChannelSpec, act, choi, choi_closed_form, require_cptp
from .errors import DimensionMismatch, DimensionTooLarge, SolverDidNotConverge
from .linalg import min_eigenvalue, partial_trace, trace_norm
from .states import projector

MAX_SDP_DIM = 6
FEAS_TOL = 1e-8


class Method(str, enum.Enum):
    ANALYTIC = "analytic"
    INTERIOR_POINT = "interior_point"


@dataclass(frozen=True, eq=False)
class DiamondResult:
    value: float
    Z_opt: np.ndarray
    lambda_opt: float
    dual_gap_estimate: float
    method: Method
    residuals: dict = field(default_factory=dict)


def _check_pair(spec_a: ChannelSpec, spec_b: ChannelSpec):
    if spec_a.dim != spec_b.dim:
        raise DimensionMismatch(f"channels act on dims {spec_a.dim} and {spec_b.dim}")


def choi_difference(spec_a: ChannelSpec, spec_b: ChannelSpec) -> np.ndarray:
    _check_pair(spec_a, spec_b)
    return choi(spec_a) - choi(spec_b)


def feasibility_residuals(j_diff, z, lam, dim) -> dict:
    """Smallest eigenvalues of the three slack matrices (negative means infeasible)."""
    return {
        "z_minus_j": min_eigenvalue(z - j_diff),
        "lambda_minus_trace": min_eigenvalue(lam * np.eye(dim) - partial_trace(z, (dim, dim), keep=0)),
        "z": min_eigenvalue(z),
    }


# analytic path ------------------------------------------------------------------

def diamond_analytic_diagonal(spec_a: ChannelSpec, spec_b: ChannelSpec) -> DiamondResult | None:
    """Closed-form optimum when J_A - J_B is diagonal; ``None`` otherwise.

    Z keeps the positive diagonal entries of the difference and λ is the
    largest entry of Tr_out Z.
    """
    _check_pair(spec_a, spec_b)
    n = spec_a.dim
    j = choi_closed_form(spec_a) - choi_closed_form(spec_b)
    if np.max(np.abs(j - np.diag(np.diagonal(j))), initial=0.0) > 1e-12:
        return None
    z = np.diag(np.clip(np.diagonal(j).real, 0.0, None)).astype(complex)
    lam = float(np.max(partial_trace(z, (n, n), keep=0).diagonal().real))
    return DiamondResult(lam, z, lam, 0.0, Method.ANALYTIC)


# interior point -------------------------------------------------------------------

def _hermitian_basis(n: int) -> sparse.csr_matrix:
    """Sparse T with vec(Z) = T x for the real coordinates x of a Hermitian Z.

    Coordinates: the n diagonal entries, then Re and Im of the strict upper
    triangle in row-major order.
    """
    iu, ju = np.triu_indices(n, 1)
    k = iu.size
    rows, cols, vals = [], [], []
    d = np.arange(n)
    rows.append(d * n + d); cols.append(d); vals.append(np.ones(n, dtype=complex))
    re = n + np.arange(k)
    rows += [iu * n + ju, ju * n + iu]; cols += [re, re]
    vals += [np.ones(k, dtype=complex), np.ones(k, dtype=complex)]
    im = n + k + np.arange(k)
    rows += [iu * n + ju, ju * n + iu]; cols += [im, im]
    vals += [np.full(k, 1j), np.full(k, -1j)]
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(n * n, n * n))


def _trace_out_map(dim: int) -> sparse.csr_matrix:
    """Sparse P with vec(Tr_out Z) = P vec(Z), Z on (in ⊗ out)."""
    n = dim * dim
    i, j, k = np.meshgrid(np.arange(dim), np.arange(dim), np.arange(dim), indexing="ij")
    rows = (i * dim + j).ravel()
    cols = ((i * dim + k) * n + (j * dim + k)).ravel()
    return sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(dim * dim, n * n))


class _Barrier:
    """−Σ log det S_s(x) for affine Hermitian blocks vec(S_s) = c_s + A_s x."""

    def __init__(self, blocks):
        self.blocks = blocks  # list of (size, c_vec, A sparse)

    def slacks(self, x):
        return [(c + a @ x).reshape(m, m) for m, c, a in self.blocks]

    def value(self, x) -> float:
        total = 0.0
        for s in self.slacks(x):
            try:
                chol = np.linalg.cholesky(0.5 * (s + s.conj().T))
            except np.linalg.LinAlgError:
                return np.inf
            total -= 2.0 * np.sum(np.log(np.diagonal(chol).real))
        return total

    def derivatives(self, x):
        p = x.size
        grad = np.zeros(p)
        hess = np.zeros((p, p))
        for (m, _, a), s in zip(self.blocks, self.slacks(x)):
            w = np.linalg.inv(0.5 * (s + s.conj().T))
            w = 0.5 * (w + w.conj().T)
            grad -= (a.T @ w.T.reshape(-1)).real
            # H_ij = tr(W A_i W A_j) = vec(A_i)^T M vec(A_j), M[(a,b),(c,d)] = W[b,c] W[d,a]
            mm = np.einsum("bc,da->abcd", w, w).reshape(m * m, m * m)
            hess += (a.T @ (a.T @ mm.T).T).real
        return grad, hess


def _solve_sdp(j_diff: np.ndarray, dim: int, mu_final: float = 1e-9, max_newton: int = 200):
    n = dim * dim
    t_map = _hermitian_basis(n)
    p_z = n * n
    zero_col = sparse.csr_matrix((n * n, 1))
    a_z = sparse.hstack([t_map, zero_col]).tocsr()
    tr_map = _trace_out_map(dim)
    eye_vec = sparse.csr_matrix(np.eye(dim).reshape(-1, 1))
    a_2 = sparse.hstack([-(tr_map @ t_map), eye_vec]).tocsr()
    blocks = [
        (n, -j_diff.reshape(-1), a_z),                 # Z - J
        (dim, np.zeros(dim * dim, dtype=complex), a_2),  # λ·1 - Tr_out Z
        (n, np.zeros(n * n, dtype=complex), a_z),      # Z
    ]
    barrier = _Barrier(blocks)
    theta = 2 * n + dim  # barrier parameter: sum of block sizes

    # Strictly feasible start: Z0 = (‖J‖_1 + 1)·1 dominates J, λ0 = 2 max diag Tr_out Z0.
    scale = trace_norm(j_diff) + 1.0
    x = np.zeros(p_z + 1)
    x[:n] = scale
    x[-1] = 2.0 * scale * dim
    c = np.zeros(p_z + 1)
    c[-1] = 1.0

    history = []
    mu = 1.0
    newton_total = 0
    while True:
        t = 1.0 / mu
        f_val = t * x[-1] + barrier.value(x)
        for _ in range(max_newton):
            grad, hess = barrier.derivatives(x)
            g = t * c + grad
            try:
                with warnings.catch_warnings():
                    # the Hessian is badly conditioned near the optimum by design;
                    # feasibility of the final iterate is checked separately
                    warnings.simplefilter("ignore", sla.LinAlgWarning)
                    step = -sla.solve(hess, g, assume_a="pos", check_finite=False)
            except (np.linalg.LinAlgError, ValueError):
                step = -np.linalg.lstsq(hess, g, rcond=None)[0]
            decrement = float(-g @ step)
            newton_total += 1
            if not np.isfinite(decrement):
                raise SolverDidNotConverge("Newton system became singular",
                                           residuals={"mu": mu, "newton_steps": newton_total})
            if decrement / 2 <= 1e-10:
                break
            s = 1.0
            while True:
                cand = x + s * step
                f_cand = t * cand[-1] + barrier.value(cand)
                if np.isfinite(f_cand) and f_cand <= f_val - 0.25 * s * decrement:
                    break
                s *= 0.5
                if s < 1e-14:
                    break
            if s < 1e-14:
                break
            x, f_val = cand, f_cand
        history.append(x[-1])
        if mu <= mu_final and len(history) > 1 and abs(history[-1] - history[-2]) < 1e-8:
            break
        if mu < mu_final * 1e-4:
            raise SolverDidNotConverge("objective did not settle",
                                       residuals={"mu": mu, "lambda_history": history[-3:]})
        mu /= 10.0

    z = (t_map @ x[:p_z]).reshape(n, n)
    return z, float(x[-1]), theta * mu, newton_total


def diamond_distance(spec_a: ChannelSpec, spec_b: ChannelSpec) -> DiamondResult:
    """½‖A - B‖_⋄ from the Choi SDP via the barrier interior-point solver.

    Raises:
        NotCPTP: if either channel fails the CPTP test.
        DimensionTooLarge: for N > 6.
        SolverDidNotConverge: if the iterates end up infeasible or stall.
    """
    _check_pair(spec_a, spec_b)
    require_cptp(spec_a)
    require_cptp(spec_b)
    n = spec_a.dim
    if n > MAX_SDP_DIM:
        raise DimensionTooLarge(f"interior-point path supports N <= {MAX_SDP_DIM}, got {n}")
    j = choi(spec_a) - choi(spec_b)
    j = 0.5 * (j + j.conj().T)
    z, lam, gap, steps = _solve_sdp(j, n)
    res = feasibility_residuals(j, z, lam, n)
    if min(res.values()) < -FEAS_TOL:
        raise SolverDidNotConverge("final iterate violates the constraints", residuals=res)
    res["newton_steps"] = steps
    return DiamondResult(lam, z, lam, gap, Method.INTERIOR_POINT, res)


# lower bound ------------------------------------------------------------------------

def _output_gap(spec_a, spec_b, psi_vec: np.ndarray) -> float:
    n = spec_a.dim
    rho = projector(psi_vec)
    blocks = rho.reshape(n, n, n, n).transpose(1, 3, 0, 2)
    diff = act(spec_a, blocks) - act(spec_b, blocks)
    out = diff.transpose(2, 0, 3, 1).reshape(n * n, n * n)
    return 0.5 * trace_norm(out)


def diamond_lower_bound(spec_a: ChannelSpec, spec_b: ChannelSpec, trials: int = 200, seed=0) -> float:
    """½ max ‖((A - B) ⊗ id)(ψ)‖_1 over sampled pure inputs on H ⊗ H.

    The sample always includes the maximally entangled state and the product
    basis states |i>|0>.
    """
    _check_pair(spec_a, spec_b)
    n = spec_a.dim
    phi = np.eye(n, dtype=complex).reshape(-1) / np.sqrt(n)
    best = _output_gap(spec_a, spec_b, phi)
    for i in range(n):
        v = np.zeros(n * n, dtype=complex)
        v[i * n] = 1.0
        best = max(best, _output_gap(spec_a, spec_b, v))
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        v = rng.standard_normal(n * n) + 1j * rng.standard_normal(n * n)
        best = max(best, _output_gap(spec_a, spec_b, v / np.linalg.norm(v)))
    return best
