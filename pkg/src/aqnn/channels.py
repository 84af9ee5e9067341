"""The attractor-network channel families and their Choi / Kraus descriptions.

Three variants share one parameterization:

``ideal``
    Λ(ρ) keeps the diagonal and multiplies ρ_μν by (1 + α_μν).
``eps_gamma``
    Λ_{ε,γ}: a fraction ε of every population leaks uniformly to the other
    N-1 levels, and each coherence ρ_μν (μ<ν) additionally feeds γ|ν><μ|.
``eps_gamma_lambda``
    Λ_{ε,γ,λ} = Λ_{ε,γ} plus λ ρ_μν |μ+1><ν+1| (μ<ν, indices mod N) and its
    Hermitian conjugate.

All maps are implemented through their linear extension to arbitrary
(non-Hermitian) operators, which is what the Choi construction needs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import DimensionMismatch, NotCPTP, NotPSD
from .linalg import PSD_TOL, as_square, dagger, herm_eig, hermiticity_residual, partial_trace
from .states import matrix_from_json, matrix_to_json

TP_TOL = 1e-10
KRAUS_EIG_TOL = 1e-10


class Variant(str, enum.Enum):
    IDEAL = "ideal"
    EPS_GAMMA = "eps_gamma"
    EPS_GAMMA_LAMBDA = "eps_gamma_lambda"


def alpha_matrix(dim: int, uniform=None, upper=None) -> np.ndarray:
    """Build a Hermitian α matrix with zero diagonal.

    Either pass ``uniform`` (one value for every μ<ν) or ``upper``, a mapping
    or array giving α_μν for μ<ν. The lower triangle is the conjugate.
    """
    a = np.zeros((dim, dim), dtype=complex)
    iu = np.triu_indices(dim, 1)
    if uniform is not None:
        a[iu] = uniform
    elif upper is not None:
        if isinstance(upper, dict):
            for (mu, nu), value in upper.items():
                if not mu < nu:
                    raise ValueError("upper-triangle keys need mu < nu")
                a[mu, nu] = value
        else:
            up = np.asarray(upper, dtype=complex)
            a[iu] = up[iu] if up.ndim == 2 else up
    a[(iu[1], iu[0])] = np.conj(a[iu])
    return a


def alpha_from_gram(vectors) -> np.ndarray:
    """α_μν = <c_ν|c_μ> - 1 for unit vectors given as rows ``c_μ``."""
    c = np.asarray(vectors, dtype=complex)
    gram = c.conj() @ c.T  # gram[ν, μ] = <c_ν|c_μ>
    a = gram.T - 1.0
    np.fill_diagonal(a, 0.0)
    return a


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Immutable description of one member of the channel families.

    Structural invariants (zero diagonal, Hermitian α, variant consistency,
    ε in [0, 1]) are enforced here. The complete-positivity inequalities are
    deliberately left to :func:`is_cptp` so parameter scans may cross them.
    """

    dim: int
    alpha: np.ndarray
    epsilon: float = 0.0
    gamma: complex = 0.0
    lambda_shift: complex = 0.0
    variant: Variant = Variant.IDEAL

    def __post_init__(self):
        dim = int(self.dim)
        if dim < 1:
            raise ValueError("dim must be positive")
        alpha = np.array(self.alpha, dtype=complex)
        if alpha.shape != (dim, dim):
            raise DimensionMismatch(f"alpha has shape {alpha.shape}, expected {(dim, dim)}")
        if np.max(np.abs(np.diagonal(alpha)), initial=0.0) > 0:
            raise ValueError("alpha must have a zero diagonal")
        if hermiticity_residual(alpha) > 1e-12:
            raise ValueError("alpha must satisfy alpha[nu, mu] == conj(alpha[mu, nu])")
        alpha.setflags(write=False)
        variant = Variant(self.variant)
        eps = float(self.epsilon)
        gamma = complex(self.gamma)
        lam = complex(self.lambda_shift)
        if not 0.0 <= eps <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {eps}")
        if variant is Variant.IDEAL and (eps or gamma or lam):
            raise ValueError("ideal channels have epsilon = gamma = lambda = 0")
        if variant is Variant.EPS_GAMMA and lam:
            raise ValueError("eps_gamma channels have lambda = 0")
        if variant is not Variant.IDEAL and dim < 2:
            raise ValueError("faulty channels need dim >= 2")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "lambda_shift", lam)
        object.__setattr__(self, "variant", variant)

    @classmethod
    def ideal(cls, dim: int, alpha=None, uniform=None) -> "ChannelSpec":
        if alpha is None:
            alpha = alpha_matrix(dim, uniform=0.0 if uniform is None else uniform)
        return cls(dim, alpha)

    @classmethod
    def faulty(cls, dim: int, epsilon: float, gamma: complex = 0.0, lambda_shift: complex = 0.0,
               alpha=None, uniform=None) -> "ChannelSpec":
        if alpha is None:
            alpha = alpha_matrix(dim, uniform=0.0 if uniform is None else uniform)
        variant = Variant.EPS_GAMMA_LAMBDA if lambda_shift else Variant.EPS_GAMMA
        return cls(dim, alpha, epsilon, gamma, lambda_shift, variant)

    def with_params(self, **changes) -> "ChannelSpec":
        params = dict(dim=self.dim, alpha=self.alpha, epsilon=self.epsilon, gamma=self.gamma,
                      lambda_shift=self.lambda_shift, variant=self.variant)
        params.update(changes)
        return ChannelSpec(**params)

    @property
    def coherence_factors(self) -> np.ndarray:
        """Matrix with 1 on the diagonal and 1 + α_μν off it."""
        m = 1.0 + self.alpha
        np.fill_diagonal(m, 1.0)
        return m

    def is_uniform(self, tol: float = 1e-12) -> bool:
        """True when every |1 + α_μν| (μ≠ν) takes the same value."""
        if self.dim < 2:
            return True
        mags = np.abs(self.coherence_factors[np.triu_indices(self.dim, 1)])
        return bool(np.ptp(mags) <= tol)

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        out = {"dim": self.dim, "variant": self.variant.value}
        iu = np.triu_indices(self.dim, 1)
        vals = self.alpha[iu]
        if self.dim >= 2 and np.all(vals == vals[0]) and vals[0].imag == 0:
            out["alpha"] = {"uniform": float(vals[0].real)}
        else:
            out["alpha"] = matrix_to_json(self.alpha)
        out["epsilon"] = self.epsilon
        out["gamma"] = {"re": self.gamma.real, "im": self.gamma.imag}
        out["lambda"] = {"re": self.lambda_shift.real, "im": self.lambda_shift.imag}
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ChannelSpec":
        dim = int(obj["dim"])
        variant = Variant(obj.get("variant", "ideal"))
        a = obj.get("alpha", {"uniform": 0.0})
        if "uniform" in a:
            alpha = alpha_matrix(dim, uniform=a["uniform"])
        else:
            alpha = matrix_from_json(a)
        return cls(dim, alpha, float(obj.get("epsilon", 0.0)), _complex_from_json(obj.get("gamma")),
                   _complex_from_json(obj.get("lambda")), variant)


def _complex_from_json(value) -> complex:
    if value is None:
        return 0.0
    if isinstance(value, dict):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    return complex(value)


# channel action --------------------------------------------------------------

def act(spec: ChannelSpec, x) -> np.ndarray:
    """Linear action of the channel on an operator or a stack ``(..., N, N)``.

    No positivity checks; this is the raw linear map used everywhere else.
    """
    x = np.asarray(x, dtype=complex)
    n = spec.dim
    if x.shape[-2:] != (n, n):
        raise DimensionMismatch(f"operator shape {x.shape[-2:]} does not match channel dim {n}")
    out = spec.coherence_factors * x
    if spec.variant is Variant.IDEAL:
        return out

    eps = spec.epsilon
    diag = np.diagonal(x, axis1=-2, axis2=-1)
    leak = eps / (n - 1) * (diag.sum(axis=-1, keepdims=True) - diag)
    idx = np.arange(n)
    out[..., idx, idx] = (1.0 - eps) * diag + leak

    gamma = spec.gamma
    damp = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, 1)
    damp[iu] = np.conj(gamma)          # out_μν (μ<ν) picks up conj(γ) x_νμ
    damp[(iu[1], iu[0])] = gamma       # out_νμ picks up γ x_μν
    out = out + damp * np.swapaxes(x, -1, -2)

    if spec.variant is Variant.EPS_GAMMA_LAMBDA:
        lam = spec.lambda_shift
        weights = np.zeros((n, n), dtype=complex)
        weights[iu] = lam
        weights[(iu[1], iu[0])] = np.conj(lam)
        shifted = np.roll(weights * x, shift=(1, 1), axis=(-2, -1))
        out = out + shifted
    return out


def _check_dims(spec: ChannelSpec, rho: np.ndarray):
    if rho.shape != (spec.dim, spec.dim):
        raise DimensionMismatch(f"state of shape {rho.shape} vs channel dim {spec.dim}")


def apply(spec: ChannelSpec, rho, unsafe: bool = False) -> np.ndarray:
    """Apply the channel to a state.

    Raises ``NotCPTP`` unless the spec passes :func:`is_cptp` or ``unsafe``
    is set.
    """
    rho = as_square(rho, "rho")
    _check_dims(spec, rho)
    if not unsafe:
        require_cptp(spec)
    return act(spec, rho)


def iterate(spec: ChannelSpec, rho, r: int, unsafe: bool = False) -> np.ndarray:
    """``r``-fold composition Λ^r(ρ)."""
    if r < 0:
        raise ValueError("iteration count must be non-negative")
    rho = as_square(rho, "rho")
    _check_dims(spec, rho)
    if not unsafe:
        require_cptp(spec)
    out = rho
    for _ in range(int(r)):
        out = act(spec, out)
    return out


def apply_extended(spec: ChannelSpec, psi, dims: tuple[int, int], unsafe: bool = False) -> np.ndarray:
    """(Λ ⊗ id)(ψ) for an operator on H ⊗ A, H being the first factor."""
    psi = as_square(psi, "psi")
    n, d_a = (int(d) for d in dims)
    if n != spec.dim or psi.shape != (n * d_a, n * d_a):
        raise DimensionMismatch(f"operator of shape {psi.shape} does not fit dims {dims}")
    if not unsafe:
        require_cptp(spec)
    # blocks[a, b] = <.,a| ψ |.,b> as an N×N operator on H
    blocks = psi.reshape(n, d_a, n, d_a).transpose(1, 3, 0, 2)
    out = act(spec, blocks)
    return out.transpose(2, 0, 3, 1).reshape(n * d_a, n * d_a)


def apply_kraus(kraus, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return sum(k @ rho @ k.conj().T for k in kraus)


# Choi / CPTP ----------------------------------------------------------------

def choi_from_action(action, dim: int) -> np.ndarray:
    """``J = Σ_ij |i><j| ⊗ E(|i><j|)``, input factor first, trace ``dim``."""
    units = np.zeros((dim, dim, dim, dim), dtype=complex)
    i, j = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    units[i, j, i, j] = 1.0
    images = np.asarray(action(units))  # images[i, j] = E(|i><j|)
    return images.transpose(0, 2, 1, 3).reshape(dim * dim, dim * dim)


def choi(spec: ChannelSpec) -> np.ndarray:
    """Unnormalized Choi matrix of the channel (trace N, unit diagonal blocks)."""
    return choi_from_action(lambda x: act(spec, x), spec.dim)


def choi_entries(spec: ChannelSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nonzero Choi entries ``(rows, cols, values)`` written from the formulas.

    Independent of :func:`act`, and cheap for large N because the Choi matrix
    of every family here is sparse.
    """
    n = spec.dim
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(np.asarray(r).ravel())
        cols.append(np.asarray(c).ravel())
        vals.append(np.broadcast_to(np.asarray(v, dtype=complex), np.shape(r)).ravel())

    mu = np.arange(n)
    add(mu * n + mu, mu * n + mu, np.full(n, 1.0 - spec.epsilon))
    a, b = np.nonzero(~np.eye(n, dtype=bool))
    add(a * n + a, b * n + b, 1.0 + spec.alpha[a, b])
    if spec.variant is not Variant.IDEAL:
        add(a * n + b, a * n + b, np.full(a.size, spec.epsilon / (n - 1)))
        iu, ju = np.triu_indices(n, 1)
        add(iu * n + ju, ju * n + iu, np.full(iu.size, spec.gamma))
        add(ju * n + iu, iu * n + ju, np.full(iu.size, np.conj(spec.gamma)))
        if spec.variant is Variant.EPS_GAMMA_LAMBDA:
            lam = spec.lambda_shift
            si, sj = (iu + 1) % n, (ju + 1) % n
            add(iu * n + si, ju * n + sj, np.full(iu.size, lam))
            add(ju * n + sj, iu * n + si, np.full(iu.size, np.conj(lam)))
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    return r, c, v


def _choi_sparse(spec: ChannelSpec):
    r, c, v = choi_entries(spec)
    size = spec.dim ** 2
    m = sparse.coo_matrix((v, (r, c)), shape=(size, size)).tocsr()
    m.sum_duplicates()
    m.eliminate_zeros()
    return m


def choi_closed_form(spec: ChannelSpec) -> np.ndarray:
    """Dense Choi matrix assembled from :func:`choi_entries`.

    Kept separate from :func:`choi` so the two constructions can check each other.
    """
    return _choi_sparse(spec).toarray()


def choi_blocks(spec: ChannelSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split the Choi matrix into its direct-sum blocks.

    Returns ``(indices, block)`` pairs covering every row, one per connected
    component of the coupling graph.
    """
    m = _choi_sparse(spec)
    pattern = sparse.csr_matrix((np.ones(m.nnz), m.indices, m.indptr), shape=m.shape)
    _, labels = csgraph.connected_components(pattern, directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.flatnonzero(np.diff(labels[order])) + 1
    diag = m.diagonal()
    out = []
    for idx in np.split(order, bounds):
        if idx.size == 1:
            out.append((idx, diag[idx].reshape(1, 1).astype(complex)))
        else:
            out.append((idx, m[idx][:, idx].toarray()))
    return out


@dataclass(frozen=True)
class CPTPVerdict:
    ok: bool
    min_eigenvalue: float
    tp_residual: float

    def __bool__(self):
        return self.ok


def cptp_verdict_from_choi(j, dim: int) -> CPTPVerdict:
    min_eig = float(herm_eig(j).eigenvalues[-1])
    tp = float(np.max(np.abs(partial_trace(j, (dim, dim), keep=0) - np.eye(dim))))
    return CPTPVerdict(min_eig >= PSD_TOL and tp <= TP_TOL, min_eig, tp)


def is_cptp(spec: ChannelSpec) -> CPTPVerdict:
    """Decide complete positivity and trace preservation from the Choi matrix.

    The smallest Choi eigenvalue is computed block by block over the
    direct-sum structure, which is exact and keeps N = 100 affordable.
    """
    n = spec.dim
    min_eig = min(
        float(block[0, 0].real) if block.shape == (1, 1) else float(herm_eig(block).eigenvalues[-1])
        for _, block in choi_blocks(spec)
    )
    r, c, v = choi_entries(spec)
    same_out = (r % n) == (c % n)
    tr_out = np.zeros((n, n), dtype=complex)
    np.add.at(tr_out, (r[same_out] // n, c[same_out] // n), v[same_out])
    tp = float(np.max(np.abs(tr_out - np.eye(n))))
    return CPTPVerdict(min_eig >= PSD_TOL and tp <= TP_TOL, min_eig, tp)


def require_cptp(spec: ChannelSpec) -> CPTPVerdict:
    verdict = is_cptp(spec)
    if not verdict.ok:
        raise NotCPTP(
            f"channel is not CPTP (min Choi eigenvalue {verdict.min_eigenvalue:.3e}, "
            f"TP residual {verdict.tp_residual:.3e})"
        )
    return verdict


# Kraus ----------------------------------------------------------------------

def _canonical_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.flatnonzero(np.abs(v) > 1e-10)[0])
    return v * (abs(v[k]) / v[k])


def kraus_from_choi(j, dim: int | None = None) -> list[np.ndarray]:
    """Canonical Kraus operators ``K = sqrt(λ) mat(v)`` from the Choi spectrum.

    With the input-first Choi convention, an eigenvector ``v`` maps to the
    operator ``K[k, i] = v[i*N + k]``. Eigenvalues below 1e-10 are dropped.
    Operators are ordered by descending eigenvalue, ties broken by the
    lexicographic order of the (phase-fixed) eigenvectors.
    """
    j = as_square(j, "choi")
    n = dim or int(round(np.sqrt(j.shape[0])))
    if n * n != j.shape[0]:
        raise DimensionMismatch(f"Choi matrix of shape {j.shape} is not N^2 × N^2")
    evals, evecs = herm_eig(j)
    if evals[-1] < PSD_TOL:
        raise NotPSD(f"Choi matrix has eigenvalue {evals[-1]:.3e}")
    entries = []
    for lam, v in zip(evals, evecs.T):
        if lam <= KRAUS_EIG_TOL:
            continue
        v = _canonical_phase(v)
        first = int(np.flatnonzero(np.abs(v) > 1e-10)[0])
        key = (-round(float(lam), 12), first, tuple(np.round(np.abs(v), 12)))
        entries.append((key, np.sqrt(lam) * v.reshape(n, n).T))
    entries.sort(key=lambda e: e[0])
    return [k for _, k in entries]


def kraus(spec: ChannelSpec) -> list[np.ndarray]:
    return kraus_from_choi(choi(spec), spec.dim)


def kraus_completeness_residual(kraus_ops) -> float:
    ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
    n = ops[0].shape[1]
    s = sum(dagger(k) @ k for k in ops)
    return float(np.max(np.abs(s - np.eye(n))))


def is_kraus_set(kraus_ops, tol: float = 1e-8) -> bool:
    return kraus_completeness_residual(kraus_ops) <= tol


def choi_from_kraus(kraus_ops) -> np.ndarray:
    ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
    n = ops[0].shape[0]
    vecs = np.stack([k.T.reshape(-1) for k in ops], axis=1)
    return vecs @ vecs.conj().T if n else vecs


# reference channels used in tests and examples --------------------------------

def unitary_kraus(u) -> list[np.ndarray]:
    return [np.asarray(u, dtype=complex)]


def dephasing_kraus(dim: int) -> list[np.ndarray]:
    out = []
    for i in range(dim):
        k = np.zeros((dim, dim), dtype=complex)
        k[i, i] = 1.0
        out.append(k)
    return out


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
