import numpy as np
import pytest

from aqnn.channels import ChannelSpec
from aqnn.diamond import (
    Method, choi_difference, diamond_analytic_diagonal, diamond_distance, diamond_lower_bound,
    feasibility_residuals,
)
from aqnn.errors import DimensionMismatch, DimensionTooLarge, NotCPTP
from aqnn.linalg import trace_norm

from helpers import VARIANTS, random_spec
from oracles import diamond_sdp


def prop3_pair(n, eps, gamma=0.0):
    a = -(1 + eps) / 2
    return ChannelSpec.ideal(n, uniform=a), ChannelSpec.faulty(n, eps, gamma=gamma, uniform=a)


def test_identical_channels(rng):
    spec = random_spec("eps_gamma", 3, rng)
    res = diamond_distance(spec, spec)
    assert abs(res.value) < 1e-7
    assert diamond_lower_bound(spec, spec, trials=10) == pytest.approx(0, abs=1e-14)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("eps", [0.2, 0.6])
def test_prop3_value(n, eps):
    res = diamond_distance(*prop3_pair(n, eps))
    assert res.method is Method.INTERIOR_POINT
    assert abs(res.value - eps) < 1e-6
    assert res.value == res.lambda_opt
    assert res.dual_gap_estimate < 1e-6
    assert res.residuals["newton_steps"] > 0


def test_gamma_independence_qubit():
    for gamma in np.linspace(0, 0.3, 5):
        assert abs(diamond_distance(*prop3_pair(2, 0.3, gamma * np.exp(1j))).value - 0.3) < 1e-5


def test_result_is_feasible(rng):
    a, b = random_spec("ideal", 3, rng), random_spec("eps_gamma_lambda", 3, rng)
    res = diamond_distance(a, b)
    j = choi_difference(a, b)
    feas = feasibility_residuals(j, res.Z_opt, res.lambda_opt, 3)
    assert min(feas.values()) >= -1e-8


def test_matches_cvxpy_oracle(rng):
    for variant in VARIANTS:
        for n in (2, 3):
            a, b = random_spec(variant, n, rng), random_spec(VARIANTS[int(rng.integers(3))], n, rng)
            ours = diamond_distance(a, b).value
            assert ours == pytest.approx(diamond_sdp(choi_difference(a, b), n), abs=1e-5)


def test_analytic_examples():
    for n in (2, 3, 5, 8):
        for eps in (0.1, 0.5, 1.0):
            res = diamond_analytic_diagonal(*prop3_pair(n, eps))
            assert res.method is Method.ANALYTIC and abs(res.value - eps) < 1e-12
    assert diamond_analytic_diagonal(*prop3_pair(3, 0.0)).value == 0
    assert diamond_analytic_diagonal(*prop3_pair(3, 1.0)).value == pytest.approx(1)
    assert diamond_analytic_diagonal(*prop3_pair(3, 0.4, gamma=0.1)) is None


def test_analytic_agrees_with_solver():
    for n, eps in [(2, 0.3), (3, 0.75), (4, 1.0)]:
        pair = prop3_pair(n, eps)
        assert abs(diamond_analytic_diagonal(*pair).value - diamond_distance(*pair).value) < 1e-6


def test_lower_bound_maximally_entangled_input():
    a, b = prop3_pair(3, 0.4)
    bound = diamond_lower_bound(a, b, trials=0)
    assert bound <= 0.4 + 1e-12
    assert bound == pytest.approx(0.4, abs=1e-10)


def test_sandwich_and_symmetry(rng):
    for _ in range(8):
        n = int(rng.integers(2, 4))
        a = random_spec(VARIANTS[int(rng.integers(3))], n, rng)
        b = random_spec(VARIANTS[int(rng.integers(3))], n, rng)
        ab = diamond_distance(a, b).value
        assert diamond_lower_bound(a, b, trials=30, seed=2) <= ab + 1e-7
        assert ab <= min(2.0, trace_norm(choi_difference(a, b))) + 1e-6
        assert abs(ab - diamond_distance(b, a).value) < 1e-6


def test_triangle_inequality(rng):
    for _ in range(3):
        a, b, c = (random_spec(VARIANTS[k], 2, rng) for k in range(3))
        ab, bc, ac = (diamond_distance(x, y).value for x, y in ((a, b), (b, c), (a, c)))
        assert ac <= ab + bc + 1e-6


def test_errors():
    with pytest.raises(DimensionMismatch):
        diamond_distance(ChannelSpec.ideal(2), ChannelSpec.ideal(3))
    with pytest.raises(NotCPTP):
        diamond_distance(ChannelSpec.ideal(2), ChannelSpec.ideal(2, uniform=-2.5))
    with pytest.raises(DimensionTooLarge):
        diamond_distance(ChannelSpec.ideal(7), ChannelSpec.ideal(7))


@pytest.mark.slow
def test_largest_supported_dimension():
    res = diamond_distance(*prop3_pair(5, 0.5))
    assert abs(res.value - 0.5) < 1e-6
