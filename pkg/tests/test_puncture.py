from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from punclab._util import stream
from punclab.codes import CodeError, LinearCode, encode, enumerate_codewords, make_hadamard, make_random_linear
from punclab.gf import field, field_of_order
from punclab.puncture import (
    PuncturingMap,
    ScalarDiagonal,
    apply_puncturing,
    apply_scalar,
    identity_puncturing,
    rate_deficit_bound,
    rate_deficit_experiment,
    sample_puncturing,
    sample_scalar_diagonal,
    scalar_expand,
)


def test_map_examples():
    phi = PuncturingMap((2, 2, 4), 4)
    assert phi.apply_word([7, 8, 9, 10]).tolist() == [8, 8, 10]
    assert phi.zero_based().tolist() == [1, 1, 3]
    assert phi.n == 3 and phi.to_list() == [2, 2, 4]
    with pytest.raises(CodeError):
        PuncturingMap((0, 1), 4)
    with pytest.raises(CodeError):
        PuncturingMap((5,), 4)
    with pytest.raises(CodeError):
        phi.apply_word([1, 2, 3])


def test_identity_map_preserves_code():
    code = make_random_linear(field(3), 3, 6, stream(0))
    out = apply_puncturing(identity_puncturing(6), code)
    assert np.array_equal(enumerate_codewords(out), enumerate_codewords(code))


def test_repeated_coordinate_duplicates_column():
    H = make_hadamard(field(2), 3)
    out = apply_puncturing(PuncturingMap((5, 5, 5), 8), H)
    for u in enumerate_codewords(out):
        assert len(set(u.tolist())) == 1


def test_design_dim_is_mother_rank():
    H = make_hadamard(field(2), 4)
    out = apply_puncturing(PuncturingMap((1, 1, 1), 16), H)
    assert out.design_dim == 4 and out.rank == 0


def test_sampled_maps_are_reproducible_and_in_range():
    a = sample_puncturing(50, 200, stream(3, "p"))
    b = sample_puncturing(50, 200, stream(3, "p"))
    assert a == b and min(a.indices) >= 1 and max(a.indices) <= 50
    with pytest.raises(CodeError):
        sample_puncturing(0, 3, stream(0))


def test_sampling_is_roughly_uniform():
    phi = sample_puncturing(4, 40000, stream(11))
    counts = np.bincount(phi.zero_based(), minlength=4)
    assert np.all(np.abs(counts - 10000) < 400)


def test_scalar_expand_shape_and_words():
    spec = field(3)
    code = LinearCode(spec, [[1, 2, 0]])
    E = scalar_expand(code)
    assert E.m == 6
    assert encode(E, [1]).tolist() == [1, 2, 0, 2, 1, 0]


def test_scalar_diagonal_validation():
    with pytest.raises(CodeError):
        ScalarDiagonal((1, 0), 3)
    lam = sample_scalar_diagonal(4, 10, stream(1))
    assert all(0 < v < 4 for v in lam.values)
    with pytest.raises(CodeError):
        apply_scalar(ScalarDiagonal((1, 1), 3), LinearCode(field(3), [[1, 1, 1]]))


@given(st.sampled_from([2, 3, 4, 5, 8]), st.integers(1, 3), st.integers(2, 7), st.integers(1, 9), st.integers(0, 10**6))
def test_puncturing_commutes_with_encoding(q, k, m, n, seed):
    spec = field_of_order(q)
    code = make_random_linear(spec, k, m, stream(seed))
    phi = sample_puncturing(m, n, stream(seed, "phi"))
    msg = stream(seed, "msg").integers(0, q, k)
    assert np.array_equal(encode(apply_puncturing(phi, code), msg), phi.apply_word(encode(code, msg)))


@given(st.sampled_from([3, 4, 5]), st.integers(1, 3), st.integers(2, 6), st.integers(0, 10**6))
def test_scalar_commutes_with_encoding(q, k, m, seed):
    spec = field_of_order(q)
    code = make_random_linear(spec, k, m, stream(seed))
    lam = sample_scalar_diagonal(q, m, stream(seed, "lam"))
    msg = stream(seed, "msg").integers(0, q, k)
    expect = spec.mul(encode(code, msg), np.asarray(lam.values))
    assert np.array_equal(encode(apply_scalar(lam, code), msg), expect)


def test_rate_deficit_bound_examples():
    bound, eps = rate_deficit_bound(2, 0.0, Fraction(1, 4), 8)
    assert eps == pytest.approx(0.75) and bound == pytest.approx(2 ** (-6))
    assert rate_deficit_bound(2, 0.0, 1, 8) == (None, None)


def test_rate_deficit_experiment_hadamard():
    H = make_hadamard(field(2), 3)
    res = rate_deficit_experiment(H, 12, 4000, seed=2, eta=0.0)
    assert res.bound == pytest.approx(2 ** (-12 * (1 - 3 / 12)))
    assert res.holds
    # a full-rank puncturing of the Hadamard code needs a basis among the sampled columns
    assert 0 < res.frequency < 0.2


def test_rate_deficit_experiment_is_thread_invariant():
    code = make_random_linear(field(3), 3, 20, stream(1))
    a = rate_deficit_experiment(code, 6, 300, seed=5)
    b = rate_deficit_experiment(code, 6, 300, seed=5, threads=3)
    assert a == b and a.bound is None and a.holds is None


def test_punctured_hadamard_has_uniform_columns():
    # puncturing the Hadamard code draws each generator column uniformly from F_q^k
    for q, k in [(2, 3), (3, 2)]:
        H = make_hadamard(field_of_order(q), k)
        phi = sample_puncturing(H.m, 30000, stream(q, "hadamard-columns"))
        code = apply_puncturing(phi, H)
        counts = np.bincount(code.column_codes(), minlength=q**k)
        expect = 30000 / q**k
        chi2 = float(((counts - expect) ** 2 / expect).sum())
        assert chi2 < 27.9  # above the 99.9% quantile for 8 or fewer degrees of freedom
