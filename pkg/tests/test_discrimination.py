import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghostsim.discrimination import (
    DetectorGram,
    distinguishability,
    gram_from_json,
    gram_from_vectors,
    load_gram,
    random_gram,
    random_probs,
    uniform_gram,
    validate_gram,
)
from ghostsim.errors import DomainError


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("s", [0.0, 0.25, 0.5, 1.0])
def test_uniform_gram_valid_and_distinguishability(n, s):
    det = uniform_gram(n, s)
    assert validate_gram(det).ok
    assert distinguishability(det) == pytest.approx(1.0 - s, abs=1e-12)


def test_orthogonal_states_fully_distinguishable():
    assert distinguishability(uniform_gram(4, 0.0)) == 1.0


def test_identical_states_give_zero():
    assert distinguishability(uniform_gram(3, 1.0)) == pytest.approx(0.0, abs=1e-15)


def test_uniform_gram_rejects_bad_input():
    with pytest.raises(DomainError):
        uniform_gram(1, 0.5)
    with pytest.raises(DomainError):
        uniform_gram(3, 1.2)


def test_validation_reports_each_failure():
    g = np.array([[1.0, 2.0], [0.5, 0.9]])
    rep = validate_gram(DetectorGram(g, [0.6, 0.6]))
    assert not rep.ok
    text = " ".join(rep.failures)
    for word in ("Hermitian", "diagonal", "semidefinite", "c_k^2", "|G_ij|"):
        assert word in text


def test_gram_is_immutable():
    det = uniform_gram(3, 0.2)
    with pytest.raises(ValueError):
        det.gram[0, 1] = 0.0


def test_json_round_trip(tmp_path, rng):
    det = random_gram(4, rng, probs=random_probs(4, rng))
    path = tmp_path / "gram.json"
    path.write_text(json.dumps(det.to_json_obj()))
    back = load_gram(path)
    assert np.array_equal(back.gram, det.gram)
    assert np.array_equal(back.probs, det.probs)


def test_json_rejects_invalid_gram():
    obj = {"gram": [[[1, 0], [1.5, 0]], [[1.5, 0], [1, 0]]]}
    with pytest.raises(DomainError, match="semidefinite"):
        gram_from_json(obj)


def test_gram_from_vectors_normalizes():
    v = np.array([[3.0, 0.0], [4.0, 2.0]])
    det = gram_from_vectors(v)
    assert det.gram[0, 1] == pytest.approx(0.8)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=100, deadline=None)
@given(seed=seeds, n=st.integers(2, 6), real=st.booleans())
def test_random_detectors_are_valid_and_bounded(seed, n, real):
    rng = np.random.default_rng(seed)
    det = random_gram(n, rng, probs=random_probs(n, rng), complex_states=not real)
    assert validate_gram(det).ok
    d = distinguishability(det)
    assert -1e-12 <= d <= 1 + 1e-12


@settings(max_examples=100, deadline=None)
@given(seed=seeds, n=st.integers(2, 6))
def test_distinguishability_is_relabelling_invariant(seed, n):
    rng = np.random.default_rng(seed)
    det = random_gram(n, rng, probs=random_probs(n, rng))
    perm = rng.permutation(n)
    assert distinguishability(det.permuted(perm)) == pytest.approx(distinguishability(det), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, n=st.integers(2, 6))
def test_more_overlap_is_less_distinguishable(seed, n):
    rng = np.random.default_rng(seed)
    base = random_gram(n, rng, probs=random_probs(n, rng))
    # shrinking every off-diagonal entry keeps the matrix PSD
    shrunk = 0.5 * base.gram + 0.5 * np.eye(n)
    assert distinguishability(DetectorGram(shrunk, base.probs)) >= distinguishability(base) - 1e-12
