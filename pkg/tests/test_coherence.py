import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghostsim.coherence import (
    DensityMatrix,
    coherence,
    conditional_rho,
    config_hash,
    duality_report,
    unconditional_rho,
)
from ghostsim.discrimination import DetectorGram, random_gram, random_probs, uniform_gram
from ghostsim.errors import DegenerateInputError

seeds = st.integers(0, 2**32 - 1)


def test_unconditional_state_has_no_coherence():
    rho = unconditional_rho(uniform_gram(3, 0.7))
    assert coherence(rho) == 0.0
    assert rho.problems() == []


def test_orthogonal_detectors_kill_coherence():
    rho = conditional_rho(uniform_gram(4, 0.0), [0.3, 1.0, 0.2, 0.5])
    assert coherence(rho) == 0.0


def test_identical_detectors_equal_envelopes_full_coherence():
    rho = conditional_rho(uniform_gram(3, 1.0), np.ones(3))
    assert coherence(rho) == pytest.approx(1.0, abs=1e-12)


def test_coherence_of_known_matrix():
    rho = DensityMatrix(np.array([[0.5, 0.25j], [-0.25j, 0.5]]))
    assert coherence(rho) == pytest.approx(0.5)


def test_all_zero_envelopes_rejected():
    with pytest.raises(DegenerateInputError):
        conditional_rho(uniform_gram(3, 0.5), np.zeros(3))


def test_report_falls_back_to_pattern_route():
    det = uniform_gram(2, 0.5)
    rep = duality_report(det, [1.0, 1.0], pattern_c2=0.3, max_psi_overlap=0.2)
    assert not rep.matrix_route
    assert rep.c2_matrix is None
    assert rep.sum == pytest.approx(0.8)
    with pytest.raises(DegenerateInputError):
        duality_report(det, [1.0, 1.0], max_psi_overlap=0.2)


def test_report_json_is_versioned_and_sorted():
    rep = duality_report(uniform_gram(3, 0.0), np.ones(3))
    doc = json.loads(rep.to_json("abc"))
    assert doc["schema"] == 1 and doc["config_hash"] == "abc"
    assert (doc["d_q1"], doc["c2_matrix"]) == (1.0, 0.0)
    assert list(doc) == sorted(doc)


def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})


def test_bound_fails_for_unequal_envelopes():
    # counterexample to D_Q1 + C_2 <= 1: a strong path with no envelope at the
    # fixed detector and two weak paths that share it
    c = np.array([0.98, 0.1, 0.1])
    det = uniform_gram(3, 1.0, probs=c / np.linalg.norm(c))
    rep = duality_report(det, [0.0, 1.0, 1.0])
    assert rep.violated
    assert rep.sum == pytest.approx(1.2902, abs=1e-3)


def test_bound_fails_for_a_sizable_share_of_random_configs():
    rng = np.random.default_rng(7)
    sums = []
    for _ in range(500):
        n = int(rng.integers(2, 7))
        det = random_gram(n, rng, probs=random_probs(n, rng))
        sums.append(duality_report(det, rng.random(n)).sum)
    sums = np.array(sums)
    assert 0.05 < np.mean(sums > 1 + 1e-9) < 0.5


@settings(max_examples=200, deadline=None)
@given(seed=seeds, n=st.integers(2, 6), amp=st.floats(1e-3, 10.0))
def test_equal_envelopes_saturate(seed, n, amp):
    rng = np.random.default_rng(seed)
    det = random_gram(n, rng, probs=random_probs(n, rng))
    rep = duality_report(det, np.full(n, amp))
    assert abs(rep.sum - 1.0) <= 1e-9
    assert rep.saturated and not rep.violated


@settings(max_examples=200, deadline=None)
@given(seed=seeds, n=st.integers(2, 6))
def test_conditional_rho_is_a_state(seed, n):
    rng = np.random.default_rng(seed)
    det = random_gram(n, rng, probs=random_probs(n, rng))
    rho = conditional_rho(det, rng.random(n) + 1e-3, rng.uniform(0, 2 * np.pi, n))
    assert rho.problems() == []
    assert 0.0 <= coherence(rho) <= 1.0 + 1e-12


@settings(max_examples=100, deadline=None)
@given(seed=seeds, n=st.integers(2, 6))
def test_phases_do_not_change_coherence(seed, n):
    rng = np.random.default_rng(seed)
    det = random_gram(n, rng, probs=random_probs(n, rng))
    a = rng.random(n) + 1e-3
    c0 = coherence(conditional_rho(det, a))
    c1 = coherence(conditional_rho(det, a, rng.uniform(0, 2 * np.pi, n)))
    assert c1 == pytest.approx(c0, abs=1e-12)


def test_saturation_flag_needs_equal_envelopes():
    det = uniform_gram(2, 0.0, probs=[1 / np.sqrt(2)] * 2)
    rep = duality_report(det, [1.0, 0.5])
    assert rep.sum == pytest.approx(1.0)
    assert not rep.envelopes_equal and not rep.saturated
