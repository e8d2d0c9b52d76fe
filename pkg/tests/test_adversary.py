import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from listsecrecy.adversary import (
    HenchmanCode,
    ReconstructionList,
    exact_message_weights,
    henchman_distortions,
    henchman_to_list,
    key_enumeration_attack,
    key_enumeration_list,
    list_distortions,
    list_min_distortion,
    list_to_henchman,
    optimal_attack_value,
    optimal_henchman_value,
    optimal_list_value,
    p2p_attack,
    p2p_expected_min_distortion,
    simulate_p2p,
)
from listsecrecy.cipher import CipherCode, Codebook, build_codebook, induced_joint, permutation_code
from listsecrecy.errors import ResourceGuard
from listsecrecy.prob import Distribution, DistortionMatrix, all_sequences, bernoulli, uniform
from listsecrecy.rd import distortion_rate
from listsecrecy.rng import stream

HAM = DistortionMatrix.hamming(2)
D_GRID = [0.0, 0.25, 0.5, 0.75, 1.0]


def brute_min(xs_idx, lst, n):
    xs = all_sequences(n, 2)
    zs = all_sequences(n, 2)
    return np.array([min((xs[x] != zs[z]).sum() for z in lst) / n for x in xs_idx])


# --- list <-> henchman --------------------------------------------------------


def test_singleton_lists():
    L = ReconstructionList(2, 2, ((3,), (0,)))
    h = list_to_henchman(L, HAM)
    for x in range(4):
        assert h.reconstruct(x, 0) == 3 and h.reconstruct(x, 1) == 0


def test_list_containing_source_gives_zero():
    L = ReconstructionList(3, 2, ((5, 2, 7),))
    dist = henchman_distortions(list_to_henchman(L, HAM), HAM)
    assert dist[5, 0] == dist[2, 0] == dist[7, 0] == 0.0


@given(st.integers(0, 10_000))
def test_list_to_henchman_matches_direct_min(seed):
    rng = np.random.default_rng(seed)
    n = 3
    lists = tuple(tuple(int(v) for v in rng.choice(8, size=3, replace=False)) for _ in range(4))
    L = ReconstructionList(n, 2, lists, rate=0.6)
    hd = henchman_distortions(list_to_henchman(L, HAM), HAM)
    for m, lst in enumerate(lists):
        assert np.allclose(hd[:, m], brute_min(range(8), lst, n))
    assert np.allclose(hd, list_distortions(L, HAM))


def test_list_to_henchman_ties_smallest_position():
    # x = 01 is at distance 1 from both 00 and 11
    L = ReconstructionList(2, 2, ((3, 0),))
    h = list_to_henchman(L, HAM)
    assert h.encoder(1, 0) == 0


@given(st.integers(0, 10_000))
def test_henchman_to_list_never_worse(seed):
    rng = np.random.default_rng(seed)
    dec = tuple(tuple(int(v) for v in rng.integers(0, 8, 2)) for _ in range(3))
    h = HenchmanCode(3, 2, dec, rng.integers(0, 2, (8, 3)), rate=1 / 3)
    L = henchman_to_list(h)
    assert np.all(list_distortions(L, HAM) <= henchman_distortions(h, HAM) + 1e-15)
    # and the round trip back to a henchman code
    assert np.all(henchman_distortions(list_to_henchman(L, HAM), HAM) <= henchman_distortions(h, HAM) + 1e-15)


def test_henchman_to_list_singleton():
    h = HenchmanCode(2, 2, ((2,),), np.zeros((4, 1), dtype=np.int64))
    assert henchman_to_list(h).lists == ((2,),)


def test_size_bounds_enforced():
    with pytest.raises(ValueError):
        ReconstructionList(2, 2, ((0, 1, 2),), rate=0.5)
    with pytest.raises(ValueError):
        HenchmanCode(2, 2, ((0, 1, 2),), np.zeros((4, 1), dtype=np.int64), rate=0.5)


# --- exhaustive optimum -------------------------------------------------------


def brute_list_value(w, n, size, D):
    zs = range(2 ** n)
    total = 0
    for m in range(w.shape[1]):
        best = 0
        for L in itertools.combinations(zs, size):
            dmin = brute_min(range(2 ** n), L, n)
            best = max(best, w[dmin < D - 1e-12, m].sum())
        total += best
    return total


@given(st.integers(0, 10_000), st.sampled_from(D_GRID))
def test_list_value_matches_naive_search(seed, D):
    rng = np.random.default_rng(seed)
    w = rng.integers(0, 50, (4, 3))
    assert optimal_list_value(w, 2, HAM, 2, D) == brute_list_value(w, 2, 2, D)


@given(st.integers(0, 10_000), st.sampled_from(D_GRID), st.integers(1, 3))
def test_list_equals_henchman_random_weights(seed, D, size):
    rng = np.random.default_rng(seed)
    w = rng.integers(0, 1000, (4, 5))
    a = optimal_list_value(w, 2, HAM, size, D, per_message=True)
    b = optimal_henchman_value(w, 2, HAM, size, D, per_message=True)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("R,R0", [(0.5, 0.5), (1.0, 0.5), (0.5, 1.0)])
def test_list_equals_henchman_sampled_codes(R, R0):
    P = bernoulli(0.3)
    cols = []
    for s in range(40):
        w, _ = exact_message_weights(CipherCode(build_codebook(s, 2, R, R0, uniform(2))), P)
        cols.append(w)
    W = np.hstack(cols)
    for D in D_GRID:
        a = optimal_list_value(W, 2, HAM, 2, D, per_message=True)
        b = optimal_henchman_value(W, 2, HAM, 2, D, per_message=True)
        assert np.array_equal(a, b)


def test_exact_weights_match_induced_joint():
    P = bernoulli(0.3)
    code = CipherCode(build_codebook(5, 2, 1.0, 0.5, uniform(2)))
    w, den = exact_message_weights(code, P)
    assert np.allclose(w / den, induced_joint(code, P).xm_marginal(), atol=1e-15)
    assert int(np.sum(w)) == den


def test_enumeration_guard():
    with pytest.raises(ResourceGuard):
        optimal_henchman_value(np.ones((16, 1)), 4, HAM, 4, 0.5)


def test_attack_value_zero_distortion_threshold():
    code = CipherCode(build_codebook(0, 2, 1.0, 0.5, uniform(2)))
    assert optimal_attack_value(code, uniform(2), 0.5, 0.0, HAM) == 1.0


def test_attack_value_key_enumeration_rate():
    code = permutation_code(2, 2, 0.5, seed=3)
    for D in (0.25, 0.5, 1.0):
        assert optimal_attack_value(code, bernoulli(0.3), 0.5, D, HAM) == pytest.approx(0.0, abs=1e-15)


def test_attack_value_n2_half_matches_list_search():
    P = uniform(2)
    code = CipherCode(build_codebook(8, 2, 1.0, 0.5, P))
    joint = induced_joint(code, P).xm_marginal()
    want = 1 - brute_list_value(joint, 2, 2, 0.5)
    assert optimal_attack_value(code, P, 0.5, 0.5, HAM) == pytest.approx(want, abs=1e-15)


@pytest.mark.parametrize("seed", range(3))
def test_attack_value_monotone(seed):
    P = bernoulli(0.3)
    code = CipherCode(build_codebook(seed, 2, 1.0, 1.0, uniform(2)))
    by_rl = [optimal_attack_value(code, P, RL, 0.5, HAM) for RL in (0.0, 0.5, 1.0, 1.5)]
    assert all(b <= a + 1e-15 for a, b in zip(by_rl, by_rl[1:]))
    # P[d >= D] can only shrink as the threshold rises
    by_d = [optimal_attack_value(code, P, 0.5, D, HAM) for D in D_GRID]
    assert all(b <= a + 1e-15 for a, b in zip(by_d, by_d[1:]))


# --- key enumeration -----------------------------------------------------------


@pytest.mark.parametrize("n", [2, 4, 6])
def test_key_enumeration_recovers_source(n):
    code = permutation_code(n, 2, 0.5, seed=n)
    rng = stream(1, "trial", n)
    for _ in range(50):
        x = rng.integers(0, 2, n)
        k = int(rng.integers(code.codebook.num_keys))
        m = int(np.flatnonzero((code.codebook.entries[:, k, :] == x).all(axis=1))[0])
        out = key_enumeration_attack(code, x, m, HAM)
        assert out.distortion == 0.0 and np.array_equal(out.z, x)


def test_key_enumeration_list_is_key_column():
    code = permutation_code(2, 2, 1.0, seed=0)
    L = key_enumeration_list(code)
    assert len(L.lists) == code.codebook.num_messages
    assert all(len(row) == code.codebook.num_keys for row in L.lists)


def test_key_enumeration_ties_smallest_key():
    cb = Codebook(2, 0.0, 1.0, np.array([[[0, 0], [1, 1], [0, 0], [1, 0]]], dtype=np.uint8), 0, uniform(2))
    out = key_enumeration_attack(CipherCode(cb), [0, 1], 0, HAM)
    assert out.helper_index == 0


# --- point-to-point list ---------------------------------------------------------


def test_p2p_full_rate_is_lossless():
    att = p2p_attack(uniform(2), HAM, 1.0, 6, seed=0)
    xs = all_sequences(6, 2)
    assert att.sequences.shape[0] == 64
    assert np.all(list_min_distortion(att.sequences, xs, HAM) == 0)


def test_p2p_zero_rate_is_argmin_sequence():
    P = bernoulli(0.3)
    att = p2p_attack(P, HAM, 0.0, 10, seed=4)
    assert att.sequences.shape[0] == 1 and np.all(att.sequences == 0)
    xs = stream(0, "source").choice(2, size=(4000, 10), p=P.mass)
    assert list_min_distortion(att.sequences, xs, HAM).mean() == pytest.approx(0.3, abs=0.02)


def brute_expected_min(p, q, n, size):
    xs = all_sequences(n, 2)
    px = np.prod(np.where(xs == 1, p, 1 - p), axis=1)
    pz = np.prod(np.where(xs == 1, q, 1 - q), axis=1)
    dist = (xs[:, None, :] != xs[None, :, :]).sum(axis=2) / n
    total = 0.0
    for combo in itertools.product(range(2 ** n), repeat=size):
        w = np.prod(pz[list(combo)])
        total += w * float(px @ dist[:, list(combo)].min(axis=1))
    return total


@pytest.mark.parametrize("p,q,n,size", [(0.5, 0.5, 3, 2), (0.3, 0.2, 3, 2), (0.3, 0.4, 2, 3)])
def test_p2p_oracle_matches_enumeration(p, q, n, size):
    assert p2p_expected_min_distortion(bernoulli(p), bernoulli(q), n, size) == pytest.approx(
        brute_expected_min(p, q, n, size), abs=1e-12)


def test_p2p_monte_carlo_matches_oracle():
    P = uniform(2)
    n, RL = 12, 0.3
    vals = [simulate_p2p(P, HAM, RL, n, seed=s, draws=200)["empirical_mean_distortion"] for s in range(20)]
    att = p2p_attack(P, HAM, RL, n, 0)
    want = p2p_expected_min_distortion(P, att.output_marginal, n, att.sequences.shape[0])
    se = np.std(vals) / np.sqrt(len(vals))
    assert abs(np.mean(vals) - want) < 4 * se + 1e-3


def test_p2p_gap_shrinks_with_n():
    P = uniform(2)
    ref = distortion_rate(P, HAM, 0.3)
    gaps = [p2p_expected_min_distortion(P, uniform(2), n, 2 ** round(0.3 * n)) - ref for n in (10, 20, 40, 80)]
    assert all(g > 0 for g in gaps)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_p2p_record_fields():
    rec = simulate_p2p(uniform(2), HAM, 0.3, 8, seed=1, draws=50)
    assert set(rec) >= {"attack", "params", "empirical_success", "reference_value"}
    assert rec["reference_value"] == pytest.approx(0.18929770537, abs=1e-8)


def test_p2p_independent_of_cipher_code():
    # the list never looks at the message: same list for any code
    a = p2p_attack(uniform(2), HAM, 0.4, 8, seed=2).sequences
    b = p2p_attack(uniform(2), HAM, 0.4, 8, seed=2).sequences
    assert np.array_equal(a, b)
