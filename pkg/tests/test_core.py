import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antcf.core import EntityState, GlobalStats, ModelParams, cosine_similarity, cutoff, max_magnitude

amounts = st.floats(min_value=-10, max_value=10, allow_nan=False).filter(lambda a: a != 0.0)
vectors = st.dictionaries(st.sampled_from("abcdefgh"), amounts, max_size=8)
nonempty = st.dictionaries(st.sampled_from("abcdefgh"),
                           st.floats(min_value=-10, max_value=10).filter(lambda a: abs(a) > 1e-3),
                           min_size=1, max_size=8)


def test_max_magnitude():
    assert max_magnitude({}) == 0
    assert max_magnitude({"A": 1.0, "B": 0.5}) == 1.0
    assert max_magnitude({"A": -2.0, "B": 0.5}) == 2.0


def test_cosine_examples():
    assert cosine_similarity({"a": 1, "b": 1}, {"a": 1, "b": 1}) == pytest.approx(1.0)
    assert cosine_similarity({"a": 1}, {"b": 1}) == 0.0
    # dot 3, norms 1 and 5
    assert cosine_similarity({"a": 1}, {"a": 3, "b": 4}) == pytest.approx(0.6, abs=1e-12)
    assert cosine_similarity({"a": 1}, {"a": -1}) == pytest.approx(-1.0)


def test_cosine_of_empty_is_zero():
    assert cosine_similarity({}, {"a": 1}) == 0.0
    assert cosine_similarity({}, {}) == 0.0


def test_cutoff_examples():
    assert cutoff({"p1": 0.4, "p2": 0.009}, 0.01) == {"p1": 0.4}
    assert cutoff({"p1": 0.4}, 0.01) == {"p1": 0.4}
    assert cutoff({"p1": -0.005}, 0.01) == {}


def test_cutoff_exact_threshold_is_kept():
    assert cutoff({"a": 0.01, "b": -0.01}, 0.01) == {"a": 0.01, "b": -0.01}


def test_cutoff_type_cap_ties_by_id():
    ph = {"d": 0.5, "b": -0.5, "a": 0.2, "c": 0.5}
    assert cutoff(ph, 0.01, type_cap=2) == {"b": -0.5, "c": 0.5}
    assert cutoff(ph, 0.01, type_cap=10) == ph


def test_cutoff_rejects_negative_sigma():
    with pytest.raises(ValueError):
        cutoff({"a": 1.0}, -0.1)


@given(nonempty)
def test_self_similarity_is_one(a):
    assert cosine_similarity(a, a) == pytest.approx(1.0, abs=1e-9)


@given(vectors, vectors, st.floats(min_value=1e-3, max_value=1e3))
def test_cosine_symmetric_and_scale_invariant(a, b, c):
    s = cosine_similarity(a, b)
    assert s == pytest.approx(cosine_similarity(b, a), abs=1e-9)
    scaled = {k: c * x for k, x in a.items()}
    assert cosine_similarity(scaled, b) == pytest.approx(s, abs=1e-9)
    assert -1.0 <= s <= 1.0


@settings(max_examples=300)
@given(vectors, st.floats(min_value=0, max_value=5), st.one_of(st.none(), st.integers(1, 8)))
def test_cutoff_idempotent_and_shrinking(ph, sigma, cap):
    once = cutoff(ph, sigma, cap)
    assert cutoff(once, sigma, cap) == once
    assert max_magnitude(once) <= max_magnitude(ph)
    assert all(abs(a) >= sigma and a != 0 for a in once.values())


def test_entity_mean_and_global_fallback():
    s = EntityState("u")
    assert s.mean is None
    s.rating_count, s.rating_sum = 2, 7.0
    assert s.mean == 3.5
    p = ModelParams()
    assert GlobalStats().mean(p) == 3.0
    assert GlobalStats(4, 10.0).mean(p) == 2.5


def test_params_defaults():
    p = ModelParams()
    assert (p.gamma, p.lambda_, p.sigma, p.cluster_count, p.neighborhood_size, p.top_n) == (0.2, 1.0, 0.01, 20, 20, 20)
    assert p.type_cap is None


@pytest.mark.parametrize("kw", [
    {"gamma": 0}, {"lambda_": 0}, {"sigma": -1}, {"cluster_count": 0}, {"neighborhood_size": 0},
    {"top_n": 0}, {"rating_min": 5, "rating_max": 5}, {"type_cap": 0}, {"sigma": math.nan},
])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        ModelParams(**kw)
