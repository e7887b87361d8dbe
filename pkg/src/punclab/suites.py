"""Randomized instance generators for the inequality checkers.

Each ``run_*`` function draws one instance from ``stream(seed, name, index)``
and returns the checker's verdict, so a sweep over indices is reproducible
and order independent.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from ._util import parallel_map, stream
from .channel import check_prob_in_code
from .codes import LinearCode, code_bias, make_hadamard, make_random_linear, rank
from .dist import (
    EmpiricalDistribution,
    check_expected_count,
    check_kl_tail,
    check_smooth_distribution,
    check_type_probability,
    check_vazirani,
)
from .gf import field_of_order
from .puncture import rate_deficit_experiment


class InstanceResult(NamedTuple):
    lemma: str
    index: int
    params: dict
    lhs: float
    bound: float
    holds: bool
    exact: float | None = None

    def row(self) -> dict:
        return {
            "lemma": self.lemma,
            "index": self.index,
            "params": ";".join(f"{k}={v}" for k, v in self.params.items()),
            "lhs": self.lhs,
            "bound": self.bound,
            "exact": "" if self.exact is None else self.exact,
            "holds": self.holds,
        }


def _counts(rng, n: int, size: int, min_support: int = 1) -> np.ndarray:
    """Uniformly random composition of n into ``size`` parts with the requested support size."""
    while True:
        c = np.bincount(rng.integers(0, size, n), minlength=size)
        if np.count_nonzero(c) >= min_support:
            return c


def _full_rank_matrix(spec, rows: int, cols: int, rng) -> np.ndarray:
    while True:
        B = rng.integers(0, spec.q, size=(rows, cols))
        if rank(spec, B) == cols:
            return B


def run_vazirani(seed: int, i: int) -> InstanceResult:
    rng = stream(seed, "vazirani", i)
    q = int(rng.choice([2, 3, 4, 5]))
    b = int(rng.integers(1, 4 if q == 2 else 3))
    n = int(rng.integers(1, 13))
    spec = field_of_order(q)
    sigma = EmpiricalDistribution(spec, b, _counts(rng, n, q**b))
    f = rng.exponential(size=q**b) * (rng.random(q**b) < 0.7)
    r = check_vazirani(sigma, f)
    return InstanceResult("vazirani", i, {"q": q, "b": b, "n": n}, r.lhs, r.bound, r.holds)


def run_smooth(seed: int, i: int, mode: str = "bias") -> InstanceResult:
    rng = stream(seed, "smooth", mode, i)
    q = int(rng.choice([2, 3, 4]))
    b = int(rng.integers(1, 3))
    m = int(rng.integers(max(b, 4), 41))
    spec = field_of_order(q)
    B = _full_rank_matrix(spec, m, b, rng)
    f = rng.exponential(size=q**b) * (rng.random(q**b) < 0.7)
    r = check_smooth_distribution(spec, B, f, mode=mode)
    return InstanceResult(f"smooth-{mode}", i, {"q": q, "b": b, "m": m}, r.lhs, r.bound, r.holds)


def run_type_probability(seed: int, i: int, trials: int = 400) -> InstanceResult:
    rng = stream(seed, "type-probability", i)
    q = int(rng.choice([2, 3]))
    b = int(rng.integers(1, 3))
    m = int(rng.integers(max(b, 4), 21))
    n = int(rng.integers(2, 7))
    spec = field_of_order(q)
    B = _full_rank_matrix(spec, m, b, rng)
    tau = EmpiricalDistribution(spec, b, _counts(rng, n, q**b, 2))
    r = check_type_probability(spec, B, tau, n, trials, seed * 1_000_003 + i)
    return InstanceResult("type-probability", i, {"q": q, "b": b, "m": m, "n": n}, r.lhs, r.bound, r.holds, r.exact)


def run_kl_tail(seed: int, i: int, trials: int = 400) -> InstanceResult:
    rng = stream(seed, "kl-tail", i)
    q = int(rng.choice([2, 3, 4]))
    b = int(rng.integers(1, 3))
    n = int(rng.integers(2, 9))
    spec = field_of_order(q)
    sigma = EmpiricalDistribution(spec, b, rng.integers(1, 6, size=q**b))
    tau = EmpiricalDistribution(spec, b, _counts(rng, n, q**b, 2))
    r = check_kl_tail(sigma, tau, n, trials, seed * 1_000_003 + i)
    return InstanceResult("kl-tail", i, {"q": q, "b": b, "n": n}, r.lhs, r.bound, r.holds, r.exact)


def _small_mother(rng, q: int, k: int) -> LinearCode:
    spec = field_of_order(q)
    if rng.random() < 0.5:
        return make_hadamard(spec, k)
    while True:
        code = make_random_linear(spec, k, int(rng.integers(2 * k + 2, 33)), rng)
        if code.rank == k:
            return code


def run_expected_count(seed: int, i: int, mode: str = "bias", trials: int = 20) -> InstanceResult:
    rng = stream(seed, "expected-count", mode, i)
    q = int(rng.choice([2, 3]))
    b = int(rng.integers(1, 3))
    k = int(rng.integers(b, 4 if q == 2 else 3))
    n = int(rng.integers(max(b, 2), 6))
    spec = field_of_order(q)
    mother = _small_mother(rng, q, k)
    while True:
        tau = EmpiricalDistribution(spec, b, _counts(rng, n, q**b))
        if tau.full_rank:
            break
    r = check_expected_count(mother, tau, n, trials, seed * 1_000_003 + i, mode=mode)
    params = {"q": q, "b": b, "k": k, "m": mother.m, "n": n}
    return InstanceResult(f"expected-count-{mode}", i, params, r.lhs, r.bound, r.holds, r.exact)


def run_prob_in_code(seed: int, i: int, trials: int = 20000) -> InstanceResult:
    rng = stream(seed, "prob-in-code", i)
    q = int(rng.choice([2, 3]))
    k = int(rng.integers(1, 5 if q == 2 else 4))
    n = int(rng.integers(k + 1, k + 7))
    mother = _small_mother(rng, q, k)
    eta = code_bias(mother)
    x = np.zeros(n, dtype=np.int64)
    while not x.any():
        x = rng.integers(0, q, size=n)
    r = check_prob_in_code(mother, n, x, trials, seed * 1_000_003 + i, eta)
    params = {"q": q, "k": k, "m": mother.m, "n": n, "eta": round(eta, 6)}
    return InstanceResult("prob-in-code", i, params, r.freq, r.bound, r.holds)


def run_rate_deficit(seed: int, i: int, trials: int = 2000) -> InstanceResult:
    rng = stream(seed, "rate-deficit", i)
    q = int(rng.choice([2, 3]))
    k = int(rng.integers(1, 5 if q == 2 else 4))
    n = int(rng.integers(2 * k, 4 * k + 4))
    mother = _small_mother(rng, q, k)
    res = rate_deficit_experiment(mother, n, trials, seed * 1_000_003 + i, eta=code_bias(mother))
    bound = 1.0 if res.bound is None else res.bound
    holds = True if res.holds is None else res.holds
    return InstanceResult("rate-deficit", i, {"q": q, "k": k, "n": n}, res.frequency, bound, holds)


LEMMAS: dict[str, Callable[[int, int], InstanceResult]] = {
    "vazirani": run_vazirani,
    "smooth-bias": lambda s, i: run_smooth(s, i, "bias"),
    "smooth-distance": lambda s, i: run_smooth(s, i, "distance"),
    "type-probability": run_type_probability,
    "kl-tail": run_kl_tail,
    "expected-count-bias": lambda s, i: run_expected_count(s, i, "bias"),
    "expected-count-distance": lambda s, i: run_expected_count(s, i, "distance"),
    "prob-in-code": run_prob_in_code,
    "rate-deficit": run_rate_deficit,
}


def run_lemma(name: str, seed: int, instances: int, threads: int = 1) -> list[InstanceResult]:
    if name not in LEMMAS:
        raise KeyError(f"unknown lemma {name!r}; choose from {sorted(LEMMAS)}")
    fn = LEMMAS[name]
    return parallel_map(lambda i: fn(seed, i), range(instances), threads)
