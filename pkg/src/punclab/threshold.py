"""Entropy functions, reference rate curves, Monte Carlo threshold estimation
for random linear codes, and the min-max threshold formula over types."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from ._util import Interval, binomial_sigma, parallel_map, stream, wilson
from .codes import LinearCode, NonlinearCode, make_random_linear
from .dist import (
    EmpiricalDistribution,
    empirical_of_matrix,
    entropy_q,
    enumerate_feasible,
    implied_distributions,
)
from .gf import field_of_order
from .properties import PropertySpec, is_recovery_clustered, minimal_set_membership
from .puncture import apply_puncturing, sample_puncturing


class DomainError(ValueError):
    pass


def _xlogx(x: float) -> float:
    return 0.0 if x == 0 else x * math.log(x)


def hq(rho: float, q: int) -> float:
    """q-ary entropy function."""
    rho = float(rho)
    if not 0 <= rho <= 1 or q < 2:
        raise DomainError("need 0 <= rho <= 1 and q >= 2")
    nats = -_xlogx(rho) - _xlogx(1 - rho) + (rho * math.log(q - 1) if rho else 0.0)
    return nats / math.log(q)


def hql(rho: float, ell: int, q: int) -> float:
    """List-recovery entropy ``rho log_q((q-l)/rho) + (1-rho) log_q(l/(1-rho))``.

    The endpoints rho = 0 and rho = 1 are included by continuity.
    """
    rho = float(rho)
    if not 0 <= rho <= 1 or not 1 <= ell < q:
        raise DomainError("need 0 <= rho <= 1 and 1 <= ell < q")
    nats = 0.0
    if rho > 0:
        nats += rho * math.log((q - ell) / rho)
    if rho < 1:
        nats += (1 - rho) * math.log(ell / (1 - rho))
    return nats / math.log(q)


def rlc_bound_ghk(rho: float, q: int, L: int, K: float) -> float:
    """``1 - h_q(rho) - K/L``; ``K`` is a user-supplied constant."""
    if L < 1 or K < 0:
        raise DomainError("need L >= 1 and K >= 0")
    return 1 - hq(rho, q) - K / L


def rlc_bound_lw(rho: float, L: int) -> tuple[float, float]:
    """Binary lower and upper reference rates ``1 - h_2(rho)(L-1)/(L-2)`` and ``1 - h_2(rho)(L+1)/L``."""
    if L < 3:
        raise DomainError("need L >= 3")
    h = hq(rho, 2)
    return 1 - h * (L - 1) / (L - 2), 1 - h * (L + 1) / L


def capacity_lr(rho: float, ell: int, q: int, L: float) -> float:
    """``1 - h_{q,l}(rho) - l / log_q L`` (vanishing terms omitted)."""
    if L <= 1:
        raise DomainError("need L > 1")
    tail = 0.0 if math.isinf(L) else ell / math.log(L, q)
    return 1 - hql(rho, ell, q) - tail


class EntropyCheck(NamedTuple):
    entropy: float
    bound: float
    holds: bool


def entropy_bound_rc(B, rho, ell: int, q: int, input_sets=None) -> EntropyCheck:
    """``H_q(tau_B) <= b h_{q,l}(rho) + l`` for B whose columns are recovery-clustered.

    The columns are certified first, either against the given input sets or by
    the exact decision procedure; an uncertified matrix raises.
    """
    B = np.asarray(B, dtype=np.int64)
    n, b = B.shape
    budget = math.floor(Fraction(rho) * n)
    cols = B.T
    if input_sets is not None:
        if len(input_sets) != n or any(len(set(Z)) > ell for Z in input_sets):
            raise DomainError("input sets do not have the declared shape")
        ok = all(sum(int(c[i]) not in input_sets[i] for i in range(n)) <= budget for c in cols)
    else:
        ok = is_recovery_clustered(cols, rho, ell)[0]
    if not ok:
        raise DomainError("columns are not recovery-clustered")
    spec = field_of_order(q)
    H = entropy_q(empirical_of_matrix(spec, B))
    bound = b * hql(rho, ell, q) + ell
    return EntropyCheck(H, bound, H <= bound + 1e-12)


# -- Monte Carlo threshold ----------------------------------------------------------------


def dimension_for_rate(rate, n: int) -> int:
    return math.floor(Fraction(rate) * n + Fraction(1, 2))


class RatePoint(NamedTuple):
    rate: Fraction
    k: int
    hits: int
    trials: int
    freq: float
    ci: Interval


class ThresholdEstimate(NamedTuple):
    prop: PropertySpec
    n: int
    points: list[RatePoint]
    estimate: Fraction | None
    bracket: tuple[Fraction | None, Fraction | None]
    trials: int
    seed: int

    def rows(self) -> list[dict]:
        p = self.prop
        return [
            {
                "kind": p.kind,
                "rho": str(p.rho),
                "ell": p.ell,
                "L": p.L,
                "n": self.n,
                "q": p.q,
                "rate": str(pt.rate),
                "k": pt.k,
                "trials": pt.trials,
                "freq": pt.freq,
                "ci_low": pt.ci.low,
                "ci_high": pt.ci.high,
                "seed": self.seed,
            }
            for pt in self.points
        ]


def rlc_satisfies(prop: PropertySpec, k: int, n: int, seed: int, *keys) -> bool:
    spec = field_of_order(prop.q)
    code = make_random_linear(spec, k, n, stream(seed, *keys))
    return prop.violated_by(code)


def estimate_rlc_threshold(
    prop: PropertySpec,
    n: int,
    rates: Sequence,
    trials: int,
    seed: int,
    threads: int = 1,
) -> ThresholdEstimate:
    """Per-rate frequency with which a random linear code satisfies ``prop``.

    The estimate is the first grid rate with frequency >= 1/2.
    """
    rates = [Fraction(r) for r in rates]
    if not rates:
        raise DomainError("rate grid is empty")
    if any(b <= a for a, b in zip(rates, rates[1:])):
        raise DomainError("rate grid must be strictly increasing")
    points = []
    for ri, R in enumerate(rates):
        k = dimension_for_rate(R, n)
        res = parallel_map(lambda t: rlc_satisfies(prop, k, n, seed, "rlc", str(R), t), range(trials), threads)
        hits = int(sum(res))
        points.append(RatePoint(R, k, hits, trials, hits / trials, wilson(hits, trials)))
    est = next((p.rate for p in points if p.freq >= 0.5), None)
    below = [p.rate for p in points if p.freq < 0.5 and (est is None or p.rate < est)]
    bracket = (below[-1] if below else None, est)
    return ThresholdEstimate(prop, n, points, est, bracket, trials, seed)


# -- threshold formula over types ----------------------------------------------------------


class FormulaResult(NamedTuple):
    value: float
    error_radius: float
    b_cap: int
    empty: bool
    argmin: EmpiricalDistribution | None
    types_checked: int
    types_in_property: int

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "error_radius": self.error_radius,
            "b_cap": self.b_cap,
            "empty": self.empty,
            "types_checked": self.types_checked,
            "types_in_property": self.types_in_property,
            "argmin": None if self.argmin is None else self.argmin.to_json(),
        }


def implied_rate(tau: EmpiricalDistribution) -> float:
    """``max over implied tau' of 1 - H_q(tau') / dim(tau')``."""
    best = -math.inf
    for imp in implied_distributions(tau):
        if imp.dim >= 1:
            best = max(best, 1 - entropy_q(imp.dist) / imp.dim)
    return best


def rlc_threshold_formula(prop: PropertySpec, n: int, b_cap: int | None = None) -> FormulaResult:
    """Min over minimal types of the max implied rate, with error radius ``2 q^{2b} log_q n / n``."""
    q = prop.q
    b_cap = prop.locality if b_cap is None else b_cap
    spec = field_of_order(q)
    best = math.inf
    arg = None
    checked = members = 0
    for b in range(1, b_cap + 1):
        if q**b < 2:
            continue
        for tau in enumerate_feasible(n, q, b):
            if not tau.full_rank:
                continue
            checked += 1
            if not minimal_set_membership(spec, tau.canonical_matrix(n), prop):
                continue
            members += 1
            val = implied_rate(tau)
            if val < best:
                best, arg = val, tau
    radius = 2 * q ** (2 * b_cap) * math.log(n, q) / n
    if arg is None:
        return FormulaResult(1.0, radius, b_cap, True, None, checked, 0)
    return FormulaResult(best, radius, b_cap, False, arg, checked, members)


# -- puncturing versus random linear codes ------------------------------------------------------


class Comparison(NamedTuple):
    rate: Fraction
    k: int
    trials: int
    punctured_hits: int
    rlc_hits: int
    punctured_freq: float
    rlc_freq: float
    punctured_ci: Interval
    rlc_ci: Interval
    seed: int

    @property
    def sigma(self) -> float:
        return math.hypot(binomial_sigma(self.punctured_freq, self.trials), binomial_sigma(self.rlc_freq, self.trials))

    @property
    def holds(self) -> bool:
        return self.punctured_freq <= self.rlc_freq + 3 * self.sigma


def compare_puncturing_with_rlc(
    mother: LinearCode,
    prop: PropertySpec,
    n: int,
    trials: int,
    seed: int,
    threads: int = 1,
) -> Comparison:
    """Frequency of ``prop`` on random n-puncturings of ``mother`` versus RLCs of the same design rate."""
    k = mother.rank
    rate = Fraction(k, n)

    def punct(t: int) -> bool:
        phi = sample_puncturing(mother.m, n, stream(seed, "punctured", t))
        return prop.violated_by(apply_puncturing(phi, mother))

    def rlc(t: int) -> bool:
        return rlc_satisfies(prop, k, n, seed, "rlc-compare", t)

    ph = int(sum(parallel_map(punct, range(trials), threads)))
    rh = int(sum(parallel_map(rlc, range(trials), threads)))
    return Comparison(
        rate, k, trials, ph, rh, ph / trials, rh / trials, wilson(ph, trials), wilson(rh, trials), seed
    )


class PairControl(NamedTuple):
    trials: int
    complementary: int
    rlc_contains_ones: int
    rate: Fraction


def complementary_pair_control(code: NonlinearCode, n: int, trials: int, seed: int, k: int | None = None) -> PairControl:
    """Puncture the non-linear counterexample and check that its two halves stay complementary.

    Also counts how often an RLC of dimension ``k`` contains the all-ones word,
    which is what a complementary pair amounts to in a linear code.
    """
    words = code.as_array()
    x, y = words[0], words[1]
    spec = code.spec
    k = max(1, round(math.log2(len(words)))) if k is None else k
    comp = ones = 0
    for t in range(trials):
        phi = sample_puncturing(code.m, n, stream(seed, "pair", t))
        idx = phi.zero_based()
        comp += bool(np.all(spec.add(x[idx], y[idx]) == 1))
        rlc = make_random_linear(spec, k, n, stream(seed, "pair-rlc", t))
        ones += rlc.contains(np.ones(n, dtype=np.int64))
    return PairControl(trials, comp, ones, Fraction(k, n))
