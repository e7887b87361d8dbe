"""Random puncturing maps, scalar diagonals, the scalar-expanded code, and the
experiment comparing the rank of a punctured code with its design dimension."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from ._util import Interval, binomial_sigma, parallel_map, stream, wilson
from .codes import CodeError, LinearCode, rank


@dataclass(frozen=True)
class PuncturingMap:
    """Coordinates ``i_1..i_n`` (1-based, repetition allowed) into a length-``m`` code."""

    indices: tuple[int, ...]
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise CodeError("mother length must be >= 1")
        if any(not 1 <= i <= self.m for i in self.indices):
            raise CodeError(f"puncturing indices must lie in [1, {self.m}]")

    @property
    def n(self) -> int:
        return len(self.indices)

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64) - 1

    def apply_word(self, u) -> np.ndarray:
        u = np.asarray(u)
        if u.shape[-1] != self.m:
            raise CodeError("word length differs from the map's mother length")
        return u[..., self.zero_based()]

    def to_list(self) -> list[int]:
        return list(self.indices)


@dataclass(frozen=True)
class ScalarDiagonal:
    """Nonzero per-coordinate multipliers."""

    values: tuple[int, ...]
    q: int

    def __post_init__(self):
        if any(not 0 < v < self.q for v in self.values):
            raise CodeError("scalar diagonal entries must be nonzero field elements")

    @property
    def n(self) -> int:
        return len(self.values)


def sample_puncturing(m: int, n: int, rng: np.random.Generator) -> PuncturingMap:
    if m < 1 or n < 1:
        raise CodeError("m and n must be >= 1")
    idx = rng.integers(1, m + 1, size=n)
    return PuncturingMap(tuple(int(i) for i in idx), m)


def sample_scalar_diagonal(q: int, n: int, rng: np.random.Generator) -> ScalarDiagonal:
    return ScalarDiagonal(tuple(int(v) for v in rng.integers(1, q, size=n)), q)


def apply_puncturing(phi: PuncturingMap, code: LinearCode) -> LinearCode:
    if phi.m != code.m:
        raise CodeError(f"map expects length {phi.m}, code has length {code.m}")
    return LinearCode(code.spec, code.columns(phi.zero_based()), design_dim=code.rank)


def scalar_expand(code: LinearCode) -> LinearCode:
    """The code whose words are ``(1*u, 2*u, ..., (q-1)*u)`` concatenated."""
    spec = code.spec
    G = code.generator
    blocks = [spec.mul(a, G) for a in range(1, spec.q)]
    return LinearCode(spec, np.concatenate(blocks, axis=1), design_dim=code.design_dim)


def apply_scalar(lam: ScalarDiagonal, code: LinearCode) -> LinearCode:
    if lam.n != code.m or lam.q != code.q:
        raise CodeError("scalar diagonal does not match the code")
    G = code.spec.mul(code.generator, np.asarray(lam.values, dtype=np.int64)[None, :])
    return LinearCode(code.spec, G, design_dim=code.design_dim)


def identity_puncturing(m: int) -> PuncturingMap:
    return PuncturingMap(tuple(range(1, m + 1)), m)


class DeficitResult(NamedTuple):
    deficits: int
    trials: int
    frequency: float
    ci: Interval
    stderr: float
    bound: float | None
    epsilon: float | None
    seed: int

    @property
    def holds(self) -> bool | None:
        if self.bound is None:
            return None
        return self.frequency <= self.bound + 3 * max(self.stderr, binomial_sigma(self.bound, self.trials))


def rate_deficit_bound(q: int, eta: float, design_rate: Fraction | float, n: int) -> tuple[float | None, float | None]:
    """``(q**(-n*eps), eps)`` with the largest eps allowed by the rate, or ``(None, None)``."""
    eps = 1 - math.log(1 + eta * q, q) - float(design_rate)
    if eps <= 0:
        return None, None
    return q ** (-n * eps), eps


def rate_deficit_experiment(
    mother: LinearCode,
    n: int,
    trials: int,
    seed: int,
    eta: float | None = None,
    threads: int = 1,
) -> DeficitResult:
    """Fraction of random n-puncturings whose rank falls below the mother's dimension."""
    k = mother.rank

    def one(t: int) -> int:
        rng = stream(seed, "rate-deficit", t)
        phi = sample_puncturing(mother.m, n, rng)
        cols = mother.columns(phi.zero_based())
        return int(rank(mother.spec, cols) < k)

    hits = sum(parallel_map(one, range(trials), threads))
    freq = hits / trials if trials else 0.0
    bound = epsilon = None
    if eta is not None:
        bound, epsilon = rate_deficit_bound(mother.q, eta, Fraction(k, n), n)
    return DeficitResult(hits, trials, freq, wilson(hits, trials), binomial_sigma(freq, trials), bound, epsilon, seed)
