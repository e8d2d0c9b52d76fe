import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from listsecrecy.prob import (
    AlphabetMismatch,
    Channel,
    Distribution,
    DistortionMatrix,
    InvalidDistribution,
    JointDistribution,
    all_sequences,
    avg_distortion,
    bernoulli,
    conditional_mutual_information,
    empirical_type,
    entropy,
    iid_mass,
    is_typical,
    joint_type,
    kl_divergence,
    mutual_information,
    sequence_index,
    sequence_indices,
    tv_distance,
    uniform,
)

from conftest import h2


def pmfs(k_min=2, k_max=5):
    return st.integers(k_min, k_max).flatmap(
        lambda k: st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k)
    ).map(lambda v: np.asarray(v) / np.sum(v))


@st.composite
def pmf_pairs(draw):
    k = draw(st.integers(2, 5))
    a = np.asarray(draw(st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k))) + 1e-3
    b = np.asarray(draw(st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k))) + 1e-3
    return a / a.sum(), b / b.sum()


# --- construction -----------------------------------------------------------------


def test_distribution_validates():
    with pytest.raises(InvalidDistribution):
        Distribution([0.5, 0.6])
    with pytest.raises(InvalidDistribution):
        Distribution([1.5, -0.5])
    with pytest.raises(InvalidDistribution):
        Distribution([])
    assert Distribution([0.25, 0.75]).alphabet_size == 2


def test_distribution_is_immutable():
    P = Distribution([0.5, 0.5])
    with pytest.raises(ValueError):
        P.mass[0] = 1.0


def test_sum_tolerance_is_tight():
    Distribution([0.5, 0.5 + 1e-13])
    with pytest.raises(InvalidDistribution):
        Distribution([0.5, 0.5 + 1e-9])


def test_distortion_requires_zero_per_row():
    with pytest.raises(ValueError):
        DistortionMatrix([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        DistortionMatrix([[0.0, -1.0], [0.0, 1.0]])
    d = DistortionMatrix.hamming(2, 3)
    assert d.shape == (2, 3) and d.max_entry == 1.0


def test_json_round_trip():
    P = Distribution([0.2, 0.3, 0.5])
    assert Distribution.from_json(json.loads(json.dumps(P.to_json()))) == P
    J = JointDistribution([[0.4, 0.1], [0.1, 0.4]])
    assert np.array_equal(JointDistribution.from_json(J.to_json()).mass, J.mass)
    C = Channel.bsc(0.1)
    assert np.array_equal(Channel.from_json(C.to_json()).rows, C.rows)
    with pytest.raises(InvalidDistribution):
        Distribution.from_json({"alphabet": 3, "mass": [0.5, 0.5]})


# --- tv_distance ------------------------------------------------------------------


def test_tv_examples():
    P = Distribution([0.2, 0.3, 0.5])
    assert tv_distance(P, P) == 0.0
    assert tv_distance(bernoulli(0.5), bernoulli(0.75)) == pytest.approx(0.25, abs=1e-15)
    assert tv_distance(P, Distribution([0.5, 0.3, 0.2])) == pytest.approx(0.3, abs=1e-15)


def test_tv_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        tv_distance(bernoulli(0.5), uniform(3))


@given(pmf_pairs(), st.integers(0, 10_000))
def test_tv_metric_and_channel_contraction(pq, seed):
    p, q = pq
    rng = np.random.default_rng(seed)
    r = rng.dirichlet(np.ones(p.size))
    assert 0 <= tv_distance(p, q) <= 1
    assert tv_distance(p, q) == pytest.approx(tv_distance(q, p))
    assert tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12
    W = Channel(rng.dirichlet(np.ones(3), size=p.size))
    assert tv_distance(W.push(Distribution(p)), W.push(Distribution(q))) <= tv_distance(p, q) + 1e-12


@given(st.integers(0, 10_000))
def test_marginalization_does_not_increase_tv(seed):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(6)).reshape(2, 3)
    b = rng.dirichlet(np.ones(6)).reshape(2, 3)
    assert tv_distance(a.sum(1), b.sum(1)) <= tv_distance(a, b) + 1e-12
    assert tv_distance(a.sum(0), b.sum(0)) <= tv_distance(a, b) + 1e-12


@given(pmf_pairs(), st.integers(0, 10_000))
def test_bounded_function_expectation_gap(pq, seed):
    p, q = pq
    f = np.random.default_rng(seed).uniform(-3, 5, p.size)
    b = f.max() - f.min()
    eps = tv_distance(p, q) + 1e-12
    assert abs(p @ f - q @ f) <= eps * b + 1e-12


# --- entropy and friends -------------------------------------------------------------


def test_entropy_examples():
    assert entropy(bernoulli(0.5)) == 1.0
    assert entropy(Distribution([1.0, 0.0])) == 0.0
    assert entropy(bernoulli(0.3)) == pytest.approx(h2(0.3), abs=1e-14)
    assert entropy(bernoulli(0.3)) == pytest.approx(0.881290899, abs=1e-9)


@given(pmfs())
def test_entropy_bounded_by_log_alphabet(p):
    assert 0 <= entropy(p) <= math.log2(p.size) + 1e-12


def test_mutual_information_examples():
    assert mutual_information(np.outer([0.3, 0.7], [0.6, 0.4])) == pytest.approx(0, abs=1e-14)
    assert mutual_information(np.diag([0.5, 0.5])) == pytest.approx(1.0)
    # direct double sum for [[0.4,0.1],[0.1,0.4]]
    direct = 2 * 0.4 * math.log2(0.4 / 0.25) + 2 * 0.1 * math.log2(0.1 / 0.25)
    assert mutual_information([[0.4, 0.1], [0.1, 0.4]]) == pytest.approx(direct, abs=1e-14)
    assert direct == pytest.approx(0.278072, abs=1e-6)


@given(st.integers(0, 10_000))
def test_conditional_mi_two_formulas(seed):
    rng = np.random.default_rng(seed)
    m = rng.dirichlet(np.ones(12)).reshape(2, 3, 2)  # [x, y, z]

    def H(a):
        a = a[a > 0]
        return -(a * np.log2(a)).sum()

    py = m.sum(axis=(0, 2))
    hx_y = H(m.sum(2).ravel()) - H(py)
    hz_y = H(m.sum(0).ravel()) - H(py)
    hxz_y = H(m.ravel()) - H(py)
    assert conditional_mutual_information(m) == pytest.approx(hx_y + hz_y - hxz_y, abs=1e-10)
    assert conditional_mutual_information(m) >= 0


def test_conditional_mi_degenerate_cases():
    rng = np.random.default_rng(1)
    pxy = rng.dirichlet(np.ones(6)).reshape(2, 3)
    pz = np.array([0.3, 0.7])
    indep = pxy[:, :, None] * pz[None, None, :]
    assert conditional_mutual_information(indep) == pytest.approx(0, abs=1e-12)
    pxz = rng.dirichlet(np.ones(4)).reshape(2, 2)
    assert conditional_mutual_information(pxz[:, None, :]) == pytest.approx(mutual_information(pxz))


def test_kl_examples():
    P = Distribution([0.2, 0.8])
    assert kl_divergence(P, P) == 0.0
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(1.0)
    assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf


@given(pmf_pairs())
def test_kl_nonnegative(pq):
    assert kl_divergence(*pq) >= 0


# --- sequences ---------------------------------------------------------------------


def test_empirical_type_examples():
    assert np.allclose(empirical_type([0, 1, 0, 1], 2).mass, [0.5, 0.5])
    assert np.allclose(empirical_type([0, 0, 0], 2).mass, [1, 0])
    assert np.allclose(empirical_type([0, 1, 1, 2], 3).mass, [0.25, 0.5, 0.25])
    with pytest.raises(ValueError):
        empirical_type([], 2)
    with pytest.raises(ValueError):
        empirical_type([0, 2], 2)


@given(st.lists(st.integers(0, 2), min_size=1, max_size=20),
       st.lists(st.integers(0, 2), min_size=1, max_size=20))
def test_type_of_concatenation_is_mixture(a, b):
    ta, tb = empirical_type(a, 3).mass, empirical_type(b, 3).mass
    tab = empirical_type(a + b, 3).mass
    mix = (len(a) * ta + len(b) * tb) / (len(a) + len(b))
    assert np.allclose(tab, mix)


def test_typicality_examples():
    assert is_typical([0, 1, 0, 1], bernoulli(0.5), 1e-9)
    assert not is_typical([0] * 10, bernoulli(0.5), 0.1)
    assert is_typical([1, 1, 1, 1, 0, 0, 0, 0, 0, 0], bernoulli(0.5), 0.15)
    with pytest.raises(ValueError):
        is_typical([0, 1], bernoulli(0.5), 0.0)


def test_avg_distortion_examples():
    d = DistortionMatrix.hamming(2)
    x = np.array([0, 1, 1, 0, 1])
    assert avg_distortion(x, x, d) == 0
    assert avg_distortion(x, 1 - x, d) == 1
    assert avg_distortion([0, 1, 0], [0, 0, 0], d) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        avg_distortion([0, 1], [0], d)


def test_joint_type_counts():
    T = joint_type([0, 1, 1, 0], [1, 1, 0, 0], 2, 2)
    assert np.allclose(T.mass, [[0.25, 0.25], [0.25, 0.25]])


def test_sequence_indexing():
    xs = all_sequences(3, 3)
    assert xs.shape == (27, 3)
    assert np.array_equal(sequence_indices(xs, 3), np.arange(27))
    assert sequence_index([2, 0, 1], 3) == 19
    assert iid_mass(xs, uniform(3)).sum() == pytest.approx(1.0)
    with pytest.raises(MemoryError):
        all_sequences(30, 2)
