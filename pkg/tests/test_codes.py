import cmath
import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from punclab._util import stream
from punclab.codes import (
    CodeError,
    LinearCode,
    NonlinearCode,
    bias_of_word,
    code_bias,
    code_distance_eta,
    code_profile,
    encode,
    enumerate_codewords,
    estimate_bias_lower,
    make_counterexample,
    make_hadamard,
    make_random_linear,
    make_trace_code,
    packed_codewords,
    pack_bits,
    rank,
    weight,
)
from punclab.gf import CapExceeded, field, field_of_order


def brute_bias(spec, u):
    """Direct complex character sum, independent of the integer fast paths."""
    m = len(u)
    w = cmath.exp(2j * cmath.pi / spec.p)
    best = 0.0
    for a in range(1, spec.q):
        s = sum(w ** int(spec.tr(spec.mul(a, int(x)))) for x in u)
        best = max(best, abs(s) / m)
    return best


def brute_codewords(code):
    spec = code.spec
    out = []
    for msg in itertools.product(range(spec.q), repeat=code.k):
        acc = np.zeros(code.m, dtype=np.int64)
        for a, row in zip(msg, code.generator):
            acc = spec.add(acc, spec.mul(a, row))
        out.append(tuple(int(v) for v in acc))
    return out


def test_encode_examples():
    F2, F3 = field(2), field(3)
    code = LinearCode(F2, [[1, 1, 0, 0], [0, 0, 1, 1]])
    assert encode(code, [1, 1]).tolist() == [1, 1, 1, 1]
    assert encode(code, [0, 0]).tolist() == [0, 0, 0, 0]
    assert encode(LinearCode(F3, [[1, 2]]), [2]).tolist() == [2, 1]
    with pytest.raises(CodeError):
        encode(code, [1])


def test_enumerate_examples():
    F2 = field(2)
    assert enumerate_codewords(LinearCode(F2, np.zeros((0, 3)))).tolist() == [[0, 0, 0]]
    full = enumerate_codewords(LinearCode(F2, [[1, 0], [0, 1]])).tolist()
    assert sorted(map(tuple, full)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert enumerate_codewords(LinearCode(F2, [[1, 1]])).tolist() == [[0, 0], [1, 1]]
    with pytest.raises(CapExceeded):
        enumerate_codewords(LinearCode(F2, np.ones((5, 5))), cap=16)


def test_weight_examples():
    assert weight([0, 0, 0, 0]) == 0
    assert weight([1, 0, 1, 1]) == Fraction(3, 4)
    assert weight([1, 2, 0]) == Fraction(2, 3)


def test_bias_examples():
    F2 = field(2)
    assert bias_of_word(F2, [0, 1, 0, 1]) == 0
    assert bias_of_word(F2, [1, 1, 1, 0]) == 0.5
    H = make_hadamard(F2, 2)
    for u in enumerate_codewords(H)[1:]:
        assert bias_of_word(F2, u) == 0


def test_code_bias_examples():
    F2 = field(2)
    H = make_hadamard(F2, 3)
    assert code_bias(H) == 0 and code_distance_eta(H) == 0
    assert code_bias(LinearCode(F2, [[1, 1, 1, 0]])) == 0.5
    empty = LinearCode(F2, np.zeros((0, 4)))
    assert code_bias(empty) == 0 and code_distance_eta(empty) == 0


def test_hadamard_examples():
    F2, F3 = field(2), field(3)
    H = make_hadamard(F2, 2)
    assert H.generator.T.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert all(weight(u) == Fraction(1, 2) for u in enumerate_codewords(H)[1:])
    assert make_hadamard(F2, 1).generator.tolist() == [[0, 1]]
    H3 = make_hadamard(F3, 1)
    assert H3.m == 3 and all(weight(u) == Fraction(2, 3) for u in enumerate_codewords(H3)[1:])


def test_trace_code_examples():
    F2 = field(2)
    C = make_trace_code(field(2, 3), F2, 2)
    assert all(weight(u) == Fraction(1, 2) for u in enumerate_codewords(C) if u.any())
    assert rank(F2, make_trace_code(field(2, 3), F2, 1).generator.reshape(0, 8)) == 0
    assert code_bias(make_trace_code(field(2, 4), F2, 3)) <= 0.5
    with pytest.raises(Exception):
        make_trace_code(field(2, 4), field(2, 2), 2)


def test_random_linear_reproducible():
    F2 = field(2)
    a = make_random_linear(F2, 4, 10, stream(5, "x"))
    b = make_random_linear(F2, 4, 10, stream(5, "x"))
    assert a.digest() == b.digest()
    assert make_random_linear(F2, 0, 10, stream(1)).rank == 0


def test_random_linear_bias_calibration():
    F2 = field(2)
    ok = sum(code_bias(make_random_linear(F2, 8, 256, stream(s, "calib"))) <= 0.35 for s in range(100))
    assert ok >= 99


def test_counterexample():
    C = make_counterexample(4)
    words = {tuple(w) for w in C.words}
    assert (1, 1, 0, 0) in words and (0, 0, 1, 1) in words
    assert all(weight(w) == Fraction(1, 2) for w in C.words)
    with pytest.raises(CodeError):
        make_counterexample(5)
    with pytest.raises(CodeError):
        NonlinearCode(field(2), ((0, 1), (0, 1)))


@pytest.mark.parametrize("q,k,m", [(2, 4, 9), (3, 3, 7), (4, 2, 6), (5, 2, 5), (8, 2, 5), (9, 2, 4)])
def test_profile_matches_enumeration(q, k, m):
    spec = field_of_order(q)
    for s in range(4):
        code = make_random_linear(spec, k, m, stream(s, "profile", q))
        prof = code_profile(code)
        words = brute_codewords(code)
        for idx, u in enumerate(words):
            assert prof.zero_counts[idx] == u.count(0)
            if any(u):
                assert prof.bias[idx] == pytest.approx(brute_bias(spec, u), abs=1e-12)
        assert enumerate_codewords(code).tolist() == [list(u) for u in words]


def test_packed_codewords_match():
    code = make_random_linear(field(2), 5, 20, stream(1))
    assert np.array_equal(packed_codewords(code), pack_bits(enumerate_codewords(code)))


def test_weight_fourier_identity():
    """wt(u) = (q-1)/q - (1/q) sum_{a != 0} of the mean of omega^tr(a u_i)."""
    for q in (2, 3, 4, 5):
        spec = field_of_order(q)
        w = cmath.exp(2j * cmath.pi / spec.p)
        rng = np.random.default_rng(q)
        for _ in range(50):
            u = rng.integers(0, q, 11)
            s = sum(sum(w ** int(spec.tr(spec.mul(a, int(x)))) for x in u) / len(u) for a in range(1, q))
            assert abs(float(weight(u)) - ((q - 1) / q - s.real / q)) < 1e-9


def test_serialisation():
    spec = field(3, 2)
    code = make_random_linear(spec, 3, 7, stream(2))
    assert LinearCode.from_bytes(code.to_bytes()).digest() == code.digest()
    assert LinearCode.from_json(code.to_json()).digest() == code.digest()


def test_monte_carlo_bias_is_lower_bound():
    code = make_random_linear(field(2), 6, 40, stream(4))
    est = estimate_bias_lower(code, 30, stream(4, "mc"))
    assert not est.certified and est.value <= code_bias(code) + 1e-12


def test_rank_deficient_code_reports_rank():
    code = LinearCode(field(2), [[1, 0, 1], [1, 0, 1]])
    assert code.rank == 1 and code.size == 2 and code.k == 2


@given(st.sampled_from([2, 3, 4]), st.integers(1, 3), st.integers(2, 8), st.integers(0, 10**6))
def test_distance_eta_at_most_bias(q, k, m, seed):
    code = make_random_linear(field_of_order(q), k, m, stream(seed, "lemma47"))
    assert code_distance_eta(code) <= code_bias(code) + 1e-12


@given(st.sampled_from([2, 3, 4, 5]), st.integers(1, 3), st.integers(2, 8), st.integers(0, 10**6))
def test_weights_within_bias_window(q, k, m, seed):
    code = make_random_linear(field_of_order(q), k, m, stream(seed, "lemma46"))
    eta = code_bias(code)
    prof = code_profile(code)
    w = prof.weights()[prof.nonzero]
    assert np.all(w >= (q - 1) * (1 - eta) / q - 1e-12)
    assert np.all(w <= (q - 1) * (1 + eta) / q + 1e-12)


@given(st.integers(1, 3), st.integers(2, 7), st.integers(0, 10**6))
def test_encode_is_linear(k, m, seed):
    spec = field(3)
    code = make_random_linear(spec, k, m, stream(seed))
    rng = stream(seed, "msg")
    a, b = rng.integers(0, 3, k), rng.integers(0, 3, k)
    assert np.array_equal(encode(code, spec.add(a, b)), spec.add(encode(code, a), encode(code, b)))
