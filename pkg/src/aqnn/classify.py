"""Membership tests for the incoherent-operation hierarchy MIO ⊇ IO ⊇ SIO ⊇ GIO.

MIO, GIO and coherence activation are decided exactly from the channel's
action on matrix units. IO and SIO can only be *certified*: a Kraus set whose
operators have the right sparsity pattern proves membership, and a seeded
remix search looks for one. A failed search proves nothing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .channels import (
    ChannelSpec, Variant, act, choi, choi_from_kraus, kraus, kraus_completeness_residual,
    kraus_from_choi, require_cptp,
)
from .errors import NotCPTP
from .linalg import closest_isometry, herm_eig, random_unitary
from .states import matrix_to_json

CHECK_TOL = 1e-10
PATTERN_TOL = 1e-10
KRAUS_TOL = 1e-8
DEFAULT_BUDGET = 10**4


@dataclass(frozen=True)
class CheckResult:
    """Outcome of an exact check together with the quantity it thresholded."""

    passed: bool
    residual: float

    def __bool__(self):
        return self.passed

    def __iter__(self):
        yield self.passed
        yield self.residual


def _as_kraus_stack(ops) -> np.ndarray:
    stack = np.asarray([np.asarray(k, dtype=complex) for k in ops])
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise ValueError("Kraus operators must be square and share one shape")
    return stack


def _images(channel, units: np.ndarray) -> np.ndarray:
    """Channel images of a stack of operators; validates CPTP first."""
    if isinstance(channel, ChannelSpec):
        require_cptp(channel)
        return act(channel, units)
    ks = _as_kraus_stack(channel)
    res = kraus_completeness_residual(ks)
    if res > KRAUS_TOL:
        raise NotCPTP(f"Kraus set is not trace preserving (residual {res:.3e})")
    return np.einsum("aij,...jk,alk->...il", ks, units, ks.conj())


def _dim(channel) -> int:
    if isinstance(channel, ChannelSpec):
        return channel.dim
    return np.asarray(channel[0]).shape[0]


def _basis_projectors(n: int) -> np.ndarray:
    units = np.zeros((n, n, n), dtype=complex)
    units[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    return units


def check_mio(channel) -> CheckResult:
    """Non-coherence-generating test: every Λ(|i><i|) must be diagonal."""
    n = _dim(channel)
    out = _images(channel, _basis_projectors(n))
    off = out * (1 - np.eye(n))
    res = float(np.max(np.abs(off), initial=0.0))
    return CheckResult(res <= CHECK_TOL, res)


def check_gio(channel) -> CheckResult:
    """Genuinely incoherent test: Λ(|i><i|) = |i><i| for every basis state."""
    n = _dim(channel)
    units = _basis_projectors(n)
    res = float(np.max(np.abs(_images(channel, units) - units), initial=0.0))
    return CheckResult(res <= CHECK_TOL, res)


def check_activation(channel) -> CheckResult:
    """True when some coherence |i><j| (i≠j) leaks into output populations."""
    n = _dim(channel)
    i, j = np.nonzero(~np.eye(n, dtype=bool))
    units = np.zeros((i.size, n, n), dtype=complex)
    units[np.arange(i.size), i, j] = 1.0
    out = _images(channel, units)
    res = float(np.max(np.abs(np.diagonal(out, axis1=-2, axis2=-1)), initial=0.0))
    return CheckResult(res > CHECK_TOL, res)


# structural certificates -------------------------------------------------------

def _column_ok(k: np.ndarray, tol: float) -> bool:
    return bool(np.all((np.abs(k) > tol).sum(axis=0) <= 1))


def sio_structural_check(ops, tol: float = PATTERN_TOL) -> list[bool]:
    """Per operator: at most one entry above ``tol`` in every row and column."""
    out = []
    for k in ops:
        k = np.asarray(k)
        nz = np.abs(k) > tol
        out.append(bool(np.all(nz.sum(axis=0) <= 1) and np.all(nz.sum(axis=1) <= 1)))
    return out


def io_structural_check(ops, tol: float = PATTERN_TOL) -> list[bool]:
    """Per operator: at most one entry above ``tol`` in every column."""
    return [_column_ok(np.asarray(k), tol) for k in ops]


def _structural(mode: str):
    if mode == "SIO":
        return sio_structural_check
    if mode == "IO":
        return io_structural_check
    raise ValueError("mode must be 'IO' or 'SIO'")


def is_certificate(ops, mode: str) -> bool:
    return all(_structural(mode)(ops)) and kraus_completeness_residual(ops) <= KRAUS_TOL


# remix search ----------------------------------------------------------------

@dataclass
class SearchOutcome:
    kraus: list[np.ndarray] | None
    best_violation: float
    candidates: int


class _Remixer:
    """Alternating projection between pattern subspaces and isometric remixes.

    A remix is ``K'_β = Σ_α V[β, α] K_α`` with ``V^H V = 1``. Each step picks
    the best pattern for every ``K'_β``, projects the row ``V[β]`` onto the
    coefficients whose operator fits that pattern, and restores isometry with
    the polar factor.
    """

    def __init__(self, ks: np.ndarray, mode: str):
        self.ks = ks
        self.m, self.n, _ = ks.shape
        self.mode = mode
        self.kmat = ks.reshape(self.m, -1).T  # vec(K_α) as columns
        self._proj: dict[tuple, np.ndarray] = {}

    def pattern(self, op: np.ndarray) -> tuple:
        w = np.abs(op) ** 2
        if self.mode == "SIO":
            rows, cols = linear_sum_assignment(-w)
            perm = np.empty(self.n, dtype=int)
            perm[cols] = rows
            return tuple(perm)
        return tuple(np.argmax(w, axis=0))

    def projector(self, pat: tuple) -> np.ndarray:
        p = self._proj.get(pat)
        if p is None:
            mask = np.ones((self.n, self.n), dtype=bool)
            mask[list(pat), np.arange(self.n)] = False
            a = self.kmat[mask.ravel()]
            p = np.eye(self.m) - np.linalg.pinv(a, rcond=1e-12) @ a
            self._proj[pat] = p
        return p

    def violation(self, ops: np.ndarray) -> tuple[float, list[tuple]]:
        total = 0.0
        pats = []
        for op in ops:
            pat = self.pattern(op)
            mask = np.ones((self.n, self.n), dtype=bool)
            mask[list(pat), np.arange(self.n)] = False
            total += float(np.sum(np.abs(op[mask]) ** 2))
            pats.append(pat)
        return total, pats

    def remix(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("ba,aij->bij", v, self.ks)


def search_incoherent_decomposition(ops, mode: str = "SIO", budget: int = DEFAULT_BUDGET,
                                    seed=0, return_outcome: bool = False):
    """Look for an IO or SIO Kraus decomposition of the channel given by ``ops``.

    Returns the certified Kraus list, or ``None`` once ``budget`` candidate
    remixes have been evaluated. ``None`` is not a proof of non-membership.
    With ``return_outcome`` a :class:`SearchOutcome` is returned instead.
    """
    check = _structural(mode)
    ks = _as_kraus_stack(ops)

    def done(kr, viol, count):
        out = SearchOutcome(kr, viol, count)
        return out if return_outcome else kr

    if all(check(ks)):
        return done([k for k in ks], 0.0, 0)
    rng = np.random.default_rng(seed)
    rx = _Remixer(ks, mode)
    m = rx.m
    best = np.inf
    count = 0
    steps_per_start = 250
    start = 0
    while count < budget:
        # Alternate between the input mixing and random isometries of
        # one or two times the input size.
        size = m if start % 2 == 0 else 2 * m
        if start == 0:
            v = np.eye(m, dtype=complex)
        else:
            v = random_unitary(size, rng)[:, :m]
        start += 1
        prev = np.inf
        for _ in range(min(steps_per_start, budget - count)):
            count += 1
            cur = rx.remix(v)
            viol, pats = rx.violation(cur)
            best = min(best, viol)
            if viol < 1e-26 or (viol < 1e-20 and all(check(cur))):
                keep = [k for k in cur if np.linalg.norm(k) > 1e-12]
                if all(check(keep)) and kraus_completeness_residual(keep) <= KRAUS_TOL:
                    return done(keep, viol, count)
            if viol > prev * (1 - 1e-6) and viol > 1e-8:
                break
            prev = viol
            projected = np.stack([rx.projector(p) @ row for p, row in zip(pats, v)])
            v = closest_isometry(projected)
    return done(None, float(best), count)


# explicit certificate for the shifted family ----------------------------------

def _ops_from_block(j: np.ndarray, idx: np.ndarray, n: int) -> list[np.ndarray]:
    lam, vecs = herm_eig(j[np.ix_(idx, idx)])
    out = []
    for val, v in zip(lam, vecs.T):
        if val > 1e-14:
            full = np.zeros(n * n, dtype=complex)
            full[idx] = np.sqrt(val) * v
            out.append(full.reshape(n, n).T)
    return out


def shifted_family_sio_certificate(spec: ChannelSpec) -> list[np.ndarray]:
    """Explicit SIO Kraus set for any CPTP faulty channel, shifted or not.

    The Choi matrix splits into the diagonal block on |μμ>, the cyclic
    block on F = {|μ,μ+1>} (where λ acts), the partners P = {|μ+1,μ>} tied to
    F by γ, and γ-coupled pairs {|μν>, |νμ>} elsewhere. Taking the Schur
    complement of the F ⊕ P block leaves a PSD matrix on F (a cyclic-shift
    pattern) plus rank-one transposition terms, so every piece is a
    generalized permutation.
    """
    if spec.variant is Variant.IDEAL:
        return kraus(spec)
    require_cptp(spec)
    n = spec.dim
    j = choi(spec)
    mu = np.arange(n)
    ops = _ops_from_block(j, mu * n + mu, n)
    if n == 2:
        return ops + _ops_from_block(j, np.array([1, 2]), n)
    f = mu * n + (mu + 1) % n
    p = ((mu + 1) % n) * n + mu
    covered = set(np.concatenate([mu * n + mu, f, p]).tolist())
    for a in range(n):
        for b in range(a + 1, n):
            pair = np.array([a * n + b, b * n + a])
            if not covered.intersection(pair.tolist()):
                ops += _ops_from_block(j, pair, n)
    e = spec.epsilon / (n - 1)
    g = j[p, f]  # γ or its conjugate, one per F state
    schur = j[np.ix_(f, f)].copy()
    if e > 0:
        schur -= np.diag(np.abs(g) ** 2 / e)
        for k in range(n):
            full = np.zeros(n * n, dtype=complex)
            full[f[k]] = np.conj(g[k]) / np.sqrt(e)
            full[p[k]] = np.sqrt(e)
            ops.append(full.reshape(n, n).T)
    lam, vecs = herm_eig(schur)
    for val, v in zip(lam, vecs.T):
        if val > 1e-14:
            full = np.zeros(n * n, dtype=complex)
            full[f] = np.sqrt(val) * v
            ops.append(full.reshape(n, n).T)
    return ops


# report --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClassReport:
    is_ncg: bool
    is_gio: bool
    sio_certificate: list | None
    io_certificate: list | None
    activates_coherence: bool
    residuals: dict

    def to_json(self) -> dict:
        def cert(ops):
            return None if ops is None else [matrix_to_json(k) for k in ops]
        return {
            "is_ncg": self.is_ncg,
            "is_gio": self.is_gio,
            "sio_certificate": cert(self.sio_certificate),
            "io_certificate": cert(self.io_certificate),
            "activates_coherence": self.activates_coherence,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }


def classify(channel, budget: int = DEFAULT_BUDGET, seed=0) -> ClassReport:
    """Place a channel (spec or Kraus list) in the incoherent hierarchy.

    GIO, MIO and activation are exact. SIO/IO certificates come from the
    given Kraus operators, then the canonical ones, then the remix search.
    """
    mio = check_mio(channel)
    gio = check_gio(channel)
    activation = check_activation(channel)
    if isinstance(channel, ChannelSpec):
        candidates = [kraus(channel)]
        if channel.variant is Variant.EPS_GAMMA_LAMBDA:
            candidates.insert(0, shifted_family_sio_certificate(channel))
    else:
        given = [np.asarray(k, dtype=complex) for k in channel]
        candidates = [given, kraus_from_choi(choi_from_kraus(given))]
    residuals = {"mio": mio.residual, "gio": gio.residual, "activation": activation.residual,
                 "completeness": kraus_completeness_residual(candidates[-1])}

    sio = next((c for c in candidates if is_certificate(c, "SIO")), None)
    io = sio if sio is not None else next((c for c in candidates if is_certificate(c, "IO")), None)
    if mio and io is None:
        found = search_incoherent_decomposition(candidates[-1], "IO", budget, seed, return_outcome=True)
        io = found.kraus
        residuals["io_search_violation"] = found.best_violation
        residuals["io_search_candidates"] = found.candidates
    if mio and sio is None and io is not None:
        found = search_incoherent_decomposition(candidates[-1], "SIO", budget, seed, return_outcome=True)
        sio = found.kraus
        residuals["sio_search_violation"] = found.best_violation
        residuals["sio_search_candidates"] = found.candidates
    if sio is not None and io is None:
        io = sio
    return ClassReport(bool(mio), bool(gio), sio, io, bool(activation), residuals)
