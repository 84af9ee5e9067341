"""Seeded generators of valid channels shared by the test modules."""
import numpy as np
from aqnn.channels import ChannelSpec, alpha_from_gram, alpha_matrix, is_cptp


def random_unit_rows(n, d, rng):
    c = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return c / np.linalg.norm(c, axis=1, keepdims=True)


def random_ideal_spec(n, rng):
    """Ideal channel with α from random Gram vectors, CPTP by construction."""
    return ChannelSpec.ideal(n, alpha=alpha_from_gram(random_unit_rows(n, int(rng.integers(1, n + 1)), rng)))


def random_faulty_spec(n, rng, shifted=False):
    """CPTP faulty channel: J block (1-ε)·Gram, |γ| <= ε/(N-1); λ by rejection."""
    while True:
        eps = float(rng.uniform(0.05, 1.0))
        gram = 1.0 + alpha_from_gram(random_unit_rows(n, n, rng))
        alpha = (1 - eps) * gram - 1.0
        np.fill_diagonal(alpha, 0.0)
        e = eps / (n - 1)
        gamma = rng.uniform(0, e) * np.exp(2j * np.pi * rng.uniform())
        lam = rng.uniform(1e-3, e) * np.exp(2j * np.pi * rng.uniform()) if shifted else 0.0
        spec = ChannelSpec.faulty(n, eps, gamma=gamma, lambda_shift=lam, alpha=alpha)
        if is_cptp(spec):
            return spec


def boundary_faulty_spec(n, rng):
    """Faulty channel on the permutation-dilation boundary: |1+α| = 1-ε, |γ| = ε/(N-1)."""
    eps = float(rng.uniform(0.0, 1.0))
    phi = rng.uniform(0, 2 * np.pi, n)
    factors = (1 - eps) * np.exp(1j * (phi[:, None] - phi[None, :]))
    alpha = factors - 1.0
    np.fill_diagonal(alpha, 0.0)
    gamma = eps / (n - 1) * np.exp(2j * np.pi * rng.uniform())
    return ChannelSpec.faulty(n, eps, gamma=gamma, alpha=alpha)


def random_spec(variant, n, rng):
    if variant == "ideal":
        return random_ideal_spec(n, rng)
    return random_faulty_spec(n, rng, shifted=(variant == "eps_gamma_lambda"))


VARIANTS = ("ideal", "eps_gamma", "eps_gamma_lambda")



# criterion number -> (passed, detail), printed at the end of the run
ACCEPTANCE_RESULTS = {}
