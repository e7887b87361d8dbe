import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from punclab._util import stream
from punclab.codes import LinearCode, enumerate_codewords, make_hadamard, make_random_linear
from punclab.dist import EmpiricalDistribution
from punclab.gf import CapExceeded, field, field_of_order
from punclab.properties import (
    PropertyError,
    PropertySpec,
    Witness,
    ball_counts,
    hyperplane_subcodes,
    is_avg_radius_ld,
    is_clustered,
    is_list_decodable,
    is_list_decodable_subsets,
    is_list_recoverable,
    is_recovery_clustered,
    is_span_clustered,
    is_span_clustered_type,
    minimal_set_membership,
    permute_code,
    radius_budget,
)
from punclab.puncture import apply_scalar, sample_scalar_diagonal


def brute_clustered(W, t, q):
    n = len(W[0])
    return any(
        all(sum(a != b for a, b in zip(w, z)) <= t for w in W) for z in itertools.product(range(q), repeat=n)
    )


def brute_recovery_clustered(W, t, ell, q):
    n = len(W[0])
    sets = list(itertools.combinations(range(q), ell))
    for Z in itertools.product(sets, repeat=n):
        if all(sum(w[i] not in Z[i] for i in range(n)) <= t for w in W):
            return True
    return False


def test_radius_budget():
    assert radius_budget(Fraction(1, 4), 12) == 3
    assert radius_budget(Fraction(1, 3), 10) == 3
    assert radius_budget(0, 7) == 0
    with pytest.raises(PropertyError):
        radius_budget(Fraction(5, 4), 4)


def test_clustered_examples():
    ok, z = is_clustered([[0, 0, 0, 0], [1, 1, 0, 0]], Fraction(1, 4))
    assert ok and z.tolist() == [0, 1, 0, 0]
    assert not is_clustered([[0, 0, 0, 0], [1, 1, 1, 1]], Fraction(1, 4))[0]
    assert is_clustered([[0, 0, 0, 0], [1, 1, 1, 1]], Fraction(1, 2))[0]
    assert is_clustered(np.zeros((0, 3)), Fraction(0))[0]


def test_clustered_matches_brute_force_ternary():
    rng = stream(0, "clustered")
    for _ in range(60):
        n = int(rng.integers(2, 6))
        W = rng.integers(0, 3, size=(int(rng.integers(1, 4)), n))
        rho = Fraction(int(rng.integers(0, n + 1)), n)
        assert is_clustered(W, rho, 3)[0] == brute_clustered(W.tolist(), radius_budget(rho, n), 3)


def test_list_decoding_examples():
    F2 = field(2)
    rep = LinearCode(F2, [[1, 1, 1, 1, 1]])
    assert is_list_decodable(rep, Fraction(2, 5), 1)[0]
    ok, wit = is_list_decodable(rep, Fraction(3, 5), 1)
    assert not ok and wit.verify(rep)
    H = make_hadamard(F2, 3)
    assert not is_list_decodable(H, Fraction(1, 4), 2)[0]
    assert is_list_decodable(H, Fraction(1, 8), 1)[0]


def test_ball_counts_against_distances():
    spec = field(3)
    words = stream(2).integers(0, 3, size=(5, 4))
    counts = ball_counts(spec, words, 1)
    for zi, z in enumerate(itertools.product(range(3), repeat=4)):
        assert counts[zi] == sum(sum(a != b for a, b in zip(w, z)) <= 1 for w in words.tolist())


@settings(max_examples=80)
@given(st.integers(0, 10**6), st.integers(3, 8), st.integers(1, 4), st.integers(1, 3))
def test_center_and_subset_deciders_agree(seed, n, k, L):
    code = make_random_linear(field(2), k, n, stream(seed))
    rho = Fraction(int(stream(seed, "r").integers(0, n // 2 + 1)), n)
    a, wa = is_list_decodable(code, rho, L)
    b, wb = is_list_decodable_subsets(code, rho, L)
    assert a == b
    assert is_list_recoverable(code, rho, 1, L)[0] == a
    for w in (wa, wb):
        assert w is None or w.verify(code)


def test_avg_radius_examples():
    F2 = field(2)
    H = make_hadamard(F2, 2)
    # any two distinct Hadamard words are at distance 2, average radius 1/4 per word
    assert not is_avg_radius_ld(H, Fraction(1, 4), 1)[0]
    assert is_avg_radius_ld(H, Fraction(1, 8), 1)[0]
    ok, wit = is_avg_radius_ld(H, Fraction(3, 8), 3)
    assert not ok and wit.verify(H)


def test_avg_radius_implies_list_decoding():
    for s in range(40):
        code = make_random_linear(field(2), 3, 7, stream(s, "avg"))
        rho = Fraction(2, 7)
        if is_avg_radius_ld(code, rho, 2)[0]:
            assert is_list_decodable(code, rho, 2)[0]


def test_recovery_clustered_examples():
    W = [[0, 1, 2], [1, 2, 0], [2, 0, 1]]
    assert not is_recovery_clustered(W, Fraction(0), 2)[0]
    ok, Z = is_recovery_clustered(W, Fraction(1, 3), 2)
    assert ok and all(len(z) <= 2 for z in Z)
    assert sum(any(w[i] not in Z[i] for i in range(3)) for w in W) <= 3


def test_recovery_clustered_matches_brute_force():
    rng = stream(1, "rc")
    for _ in range(60):
        q = int(rng.choice([3, 4]))
        n = int(rng.integers(2, 5))
        ell = int(rng.integers(1, q))
        W = rng.integers(0, q, size=(int(rng.integers(1, 4)), n))
        rho = Fraction(int(rng.integers(0, n + 1)), n)
        got, Z = is_recovery_clustered(W, rho, ell)
        assert got == brute_recovery_clustered(W.tolist(), radius_budget(rho, n), ell, q)
        if got:
            t = radius_budget(rho, n)
            assert all(sum(w[i] not in Z[i] for i in range(n)) <= t for w in W.tolist())


def test_list_recovery_witness_round_trip():
    code = make_random_linear(field(3), 2, 4, stream(4))
    ok, wit = is_list_recoverable(code, Fraction(1, 4), 2, 2)
    assert not ok
    again = Witness.from_json(wit.to_json())
    assert again.verify(code)
    again.input_sets[0] = [0, 1, 2]
    assert not again.verify(code)


def test_witness_rejects_tampering():
    H = make_hadamard(field(2), 3)
    ok, wit = is_list_decodable(H, Fraction(1, 4), 2)
    w = Witness.from_json(wit.to_json())
    w.center = [1 - c for c in w.center]
    assert not w.verify(H)
    w2 = Witness.from_json(wit.to_json())
    w2.codewords[0] = [1] * 8
    assert not w2.verify(H)


@pytest.mark.parametrize("q", [3, 4])
def test_ld_invariant_under_permutation_and_scalars(q):
    spec = field_of_order(q)
    for s in range(10):
        code = make_random_linear(spec, 2, 5, stream(s, "inv", q))
        rho = Fraction(2, 5)
        base = is_list_decodable(code, rho, 2)[0]
        perm = stream(s, "perm").permutation(5)
        assert is_list_decodable(permute_code(code, perm), rho, 2)[0] == base
        lam = sample_scalar_diagonal(q, 5, stream(s, "lam"))
        assert is_list_decodable(apply_scalar(lam, code), rho, 2)[0] == base


def test_property_spec():
    p = PropertySpec("list-decoding", Fraction(1, 4), 2, 2, 12)
    assert p.locality == 3 and PropertySpec.from_json(p.to_json()) == p
    with pytest.raises(PropertyError):
        PropertySpec("list-decoding", Fraction(1, 4), 2, 2, 12, ell=2)
    with pytest.raises(PropertyError):
        PropertySpec("colouring", Fraction(1, 4), 2, 2, 12)
    with pytest.warns(UserWarning):
        PropertySpec("list-recovery", Fraction(1, 2), 2, 4, 8, ell=2)
    H = make_hadamard(field(2), 3)
    assert p.violated_by(H) != is_list_decodable(H, p.rho, 2)[0]


def test_span_clustered():
    F2 = field(2)
    A = np.array([[1, 0], [1, 0], [0, 1], [0, 1], [0, 0], [0, 0], [0, 0], [0, 0]])
    assert is_span_clustered(F2, A, Fraction(1, 4), 3)
    assert not is_span_clustered(F2, A, Fraction(1, 8), 3)
    assert not is_span_clustered(F2, A, Fraction(1, 2), 5)
    with pytest.raises(PropertyError):
        is_span_clustered(F2, [[1, 1], [1, 1]], Fraction(1, 2), 2)


def test_span_clustered_type_permutation_invariant():
    F2 = field(2)
    tau = EmpiricalDistribution(F2, 2, [3, 1, 1, 1])
    verdicts = {is_span_clustered_type(tau, 6, Fraction(1, 3), 3, stream(i)) for i in range(5)}
    assert len(verdicts) == 1


def test_hyperplanes_count():
    for q, b in [(2, 3), (3, 2)]:
        spec = field_of_order(q)
        A = np.eye(b, dtype=np.int64).repeat(2, axis=0)
        subs = list(hyperplane_subcodes(spec, A))
        assert len(subs) == (q**b - 1) // (q - 1)
        assert all(s.rank == b - 1 for s in subs)


def test_minimal_set_membership():
    F2 = field(2)
    prop = PropertySpec("list-decoding", Fraction(1, 4), 1, 2, 4)
    # span {0000, 1100}: the pair is clustered, the zero subspace is not a violation
    assert minimal_set_membership(F2, np.array([[1], [1], [0], [0]]), prop)
    # the 2-dim span contains 0000, 1100 already in a hyperplane
    A = np.array([[1, 0], [1, 0], [0, 1], [0, 0]])
    assert not minimal_set_membership(F2, A, prop)
    # a span that does not violate is not minimal
    assert not minimal_set_membership(F2, np.array([[1], [1], [1], [1]]), prop)


def test_center_cap():
    code = LinearCode(field(2), np.ones((1, 30), dtype=np.int64))
    with pytest.raises(CapExceeded):
        is_list_decodable(code, Fraction(1, 4), 1, cap=1 << 20)
