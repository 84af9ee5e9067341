import numpy as np
import pytest

from aqnn.channels import (
    HADAMARD, ChannelSpec, choi, choi_from_kraus, dephasing_kraus, kraus, kraus_completeness_residual,
)
from aqnn.classify import (
    check_activation, check_gio, check_mio, classify, io_structural_check, is_certificate,
    search_incoherent_decomposition, shifted_family_sio_certificate, sio_structural_check,
)
from aqnn.errors import NotCPTP
from aqnn.linalg import random_unitary

from helpers import VARIANTS, random_faulty_spec, random_ideal_spec, random_spec
from oracles import incoherent_decomposition_gap

PLUS = np.array([1, 1]) / np.sqrt(2)
MINUS = np.array([1, -1]) / np.sqrt(2)
# measure in the ± basis and write the outcome into a basis state
ACTIVATOR = [np.outer([1, 0], PLUS), np.outer([0, 1], MINUS)]


def remix(ops, rng, extra=0):
    m = len(ops)
    v = random_unitary(m + extra, rng)[:, :m]
    return list(np.einsum("ba,aij->bij", v, np.asarray(ops)))


def test_check_mio_examples(rng):
    assert check_mio(random_ideal_spec(3, rng))
    assert check_mio(random_faulty_spec(3, rng))
    passed, residual = check_mio([HADAMARD])
    assert not passed and residual == pytest.approx(0.5)


def test_check_gio_examples(rng):
    assert check_gio(random_ideal_spec(4, rng))
    assert not check_gio(ChannelSpec.faulty(3, 0.1, uniform=-0.6))
    assert check_gio(dephasing_kraus(3))


def test_check_activation_examples(rng):
    assert not check_activation(random_ideal_spec(3, rng))
    assert not check_activation(random_faulty_spec(3, rng))
    assert check_mio(ACTIVATOR)
    passed, residual = check_activation(ACTIVATOR)
    assert passed and residual == pytest.approx(0.5)


def test_checks_reject_non_channels():
    with pytest.raises(NotCPTP):
        check_mio(ChannelSpec.ideal(2, uniform=-3.0))
    with pytest.raises(NotCPTP):
        check_gio([np.eye(2), np.eye(2)])


def test_checks_are_decomposition_independent(rng):
    for variant in VARIANTS:
        spec = random_spec(variant, 3, rng)
        ops = kraus(spec)
        other = remix(ops, rng, extra=2)
        for check in (check_mio, check_gio, check_activation):
            a, b = check(ops), check(other)
            assert a.passed == b.passed and a.residual == pytest.approx(b.residual, abs=1e-10)
            assert check(spec).passed == a.passed


def test_structural_check_examples(rng):
    assert all(sio_structural_check(dephasing_kraus(4)))
    assert all(sio_structural_check(kraus(random_faulty_spec(4, rng))))
    spec = ChannelSpec.faulty(3, 0.3, gamma=0.1, lambda_shift=0.05, uniform=-0.6)
    assert not all(sio_structural_check(kraus(spec)))
    k = np.array([[1, 1], [0, 0]])
    assert io_structural_check([k]) == [True] and sio_structural_check([k]) == [False]


def test_hierarchy_consistency(rng):
    for variant in VARIANTS:
        for _ in range(10):
            spec = random_spec(variant, int(rng.integers(2, 5)), rng)
            gio = bool(check_gio(spec))
            sio = all(sio_structural_check(kraus(spec)))
            mio = bool(check_mio(spec))
            assert (not gio or sio) and (not sio or mio)


def test_search_returns_certified_input():
    ops = dephasing_kraus(3)
    out = search_incoherent_decomposition(ops, "SIO", budget=10)
    assert all(np.array_equal(a, b) for a, b in zip(out, ops))


def test_search_gio_remix_stays_diagonal(rng):
    # every Kraus set of a GIO is diagonal, so remixing cannot hide it
    rotated = remix(kraus(random_ideal_spec(3, rng)), rng, extra=1)
    outcome = search_incoherent_decomposition(rotated, "SIO", budget=10, return_outcome=True)
    assert outcome.kraus is not None and outcome.candidates == 0


def test_search_recovers_remixed_sio(rng):
    for n in (2, 3):
        spec = random_faulty_spec(n, rng)
        rotated = remix(kraus(spec), rng)
        assert not all(sio_structural_check(rotated))
        found = search_incoherent_decomposition(rotated, "SIO", budget=10**4, seed=1)
        assert found is not None and is_certificate(found, "SIO")
        assert np.allclose(choi_from_kraus(found), choi(spec), atol=1e-8)


def test_search_finds_io_but_not_sio_for_activator():
    found = search_incoherent_decomposition(ACTIVATOR, "IO", budget=500)
    assert found is not None and is_certificate(found, "IO")
    outcome = search_incoherent_decomposition(ACTIVATOR, "SIO", budget=500, return_outcome=True)
    assert outcome.kraus is None and outcome.candidates <= 500 and outcome.best_violation > 0.1


def test_decomposition_oracle_agrees_with_activator():
    assert incoherent_decomposition_gap(ACTIVATOR, "IO") < 1e-6
    assert incoherent_decomposition_gap(ACTIVATOR, "SIO") > 0.5


def test_shifted_family_certificate(rng):
    for n in (2, 3, 4, 5):
        for _ in range(10):
            spec = random_faulty_spec(n, rng, shifted=True)
            ops = shifted_family_sio_certificate(spec)
            assert all(sio_structural_check(ops))
            assert kraus_completeness_residual(ops) < 1e-10
            assert np.max(np.abs(choi_from_kraus(ops) - choi(spec))) < 1e-12


@pytest.mark.slow
def test_shifted_family_is_sio_by_convex_oracle(rng):
    # independent of the explicit construction: decide existence of an SIO
    # decomposition by a small SDP over the permutation patterns
    for n in (3, 4):
        spec = random_faulty_spec(n, rng, shifted=True)
        assert not all(sio_structural_check(kraus(spec)))
        assert incoherent_decomposition_gap(kraus(spec), "SIO") < 1e-5


def test_shifted_family_search_finds_io(rng):
    spec = random_faulty_spec(3, rng, shifted=True)
    found = search_incoherent_decomposition(kraus(spec), "IO", budget=10**4)
    assert found is not None and is_certificate(found, "IO")
    assert np.allclose(choi_from_kraus(found), choi(spec), atol=1e-8)


def test_classify_reports(rng):
    rep = classify(random_ideal_spec(3, rng))
    assert rep.is_gio and rep.sio_certificate is not None and rep.is_ncg
    assert all(np.allclose(k, np.diag(np.diagonal(k)), atol=1e-10) for k in rep.sio_certificate)

    rep = classify(random_faulty_spec(3, rng))
    assert not rep.is_gio and rep.sio_certificate is not None and not rep.activates_coherence

    rep = classify(random_faulty_spec(4, rng, shifted=True))
    assert rep.is_ncg and rep.sio_certificate is not None and rep.io_certificate is not None

    rep = classify(ACTIVATOR, budget=500)
    assert rep.is_ncg and rep.activates_coherence and rep.sio_certificate is None
    assert rep.io_certificate is not None

    rep = classify([HADAMARD])
    assert not rep.is_ncg and rep.io_certificate is None and rep.sio_certificate is None


def test_class_report_invariants_and_json(rng):
    for variant in VARIANTS:
        rep = classify(random_spec(variant, 3, rng))
        assert not rep.is_gio or rep.sio_certificate is not None
        assert rep.sio_certificate is None or rep.io_certificate is not None
        assert rep.io_certificate is None or rep.is_ncg
        obj = rep.to_json()
        assert set(obj) == {"is_ncg", "is_gio", "sio_certificate", "io_certificate",
                            "activates_coherence", "residuals"}
        assert isinstance(obj["residuals"]["mio"], float)
