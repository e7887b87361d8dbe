"""Low-randomness puncturing: a counted bit source, colex subset ranking, and
the generator that punctures a certified mother at a sampled coordinate set."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np

from ._util import stream
from .codes import LinearCode, code_bias


class DerandError(ValueError):
    pass


@dataclass
class BitBudget:
    """Random bits read MSB-first from 64-bit words of a seeded stream, with a running count."""

    seed: int
    keys: tuple = ()
    consumed: int = 0
    _rng: np.random.Generator = dc_field(init=False, repr=False)
    _word: int = dc_field(default=0, init=False, repr=False)
    _left: int = dc_field(default=0, init=False, repr=False)

    def __post_init__(self):
        self._rng = stream(self.seed, "bits", *self.keys)

    def bit(self) -> int:
        if self._left == 0:
            self._word = int(self._rng.integers(0, 1 << 64, dtype=np.uint64))
            self._left = 64
        self._left -= 1
        self.consumed += 1
        return (self._word >> self._left) & 1

    def bits(self, k: int) -> int:
        v = 0
        for _ in range(k):
            v = (v << 1) | self.bit()
        return v

    def uniform(self, N: int) -> int:
        """Uniform integer in ``[0, N)``.

        Uses the Fast Dice Roller: it draws exactly ``log2 N`` bits when N is a
        power of two, and at most ``log2 N + 2`` bits on average otherwise.
        """
        if N < 1:
            raise DerandError("range must be non-empty")
        v, c = 1, 0
        while True:
            v <<= 1
            c = (c << 1) | self.bit()
            if v >= N:
                if c < N:
                    return c
                v -= N
                c -= N


def unrank_subset(m: int, n: int, rank: int) -> tuple[int, ...]:
    """Increasing 1-based n-subset of ``[m]`` with colex rank ``rank``."""
    if not 0 <= n <= m:
        raise DerandError("need 0 <= n <= m")
    total = math.comb(m, n)
    if not 0 <= rank < total:
        raise DerandError(f"rank must lie in [0, {total})")
    out = []
    hi = m
    for i in range(n, 0, -1):
        # largest c < hi with comb(c, i) <= rank
        lo_c, hi_c = i - 1, hi - 1
        while lo_c < hi_c:
            mid = (lo_c + hi_c + 1) // 2
            if math.comb(mid, i) <= rank:
                lo_c = mid
            else:
                hi_c = mid - 1
        out.append(lo_c + 1)
        rank -= math.comb(lo_c, i)
        hi = lo_c
    return tuple(reversed(out))


def rank_subset(subset) -> int:
    """Colex rank of an increasing 1-based subset."""
    s = list(subset)
    if any(b <= a for a, b in zip(s, s[1:])) or (s and s[0] < 1):
        raise DerandError("subset must be increasing and 1-based")
    return sum(math.comb(c - 1, i + 1) for i, c in enumerate(s))


class SubsetDraw(NamedTuple):
    subset: tuple[int, ...]
    rank: int
    bits: int


def sample_subset(m: int, n: int, budget: BitBudget) -> SubsetDraw:
    start = budget.consumed
    r = budget.uniform(math.comb(m, n))
    return SubsetDraw(unrank_subset(m, n, r), r, budget.consumed - start)


# -- generator --------------------------------------------------------------------


def min_mother_length(n: int, eps: float) -> float:
    return n / (1 - 2 ** (-eps / 2))


def max_mother_bias(b: int, eps: float) -> float:
    return eps * b * math.log(2) / 2**b


def check_preconditions(mother: LinearCode, n: int, eta: float, b: int, eps: float) -> list[str]:
    """Violated hypotheses as human-readable strings (empty when all hold)."""
    bad = []
    if mother.q != 2:
        bad.append(f"mother must be binary, got q={mother.q}")
    if not 0 < eps < 1:
        bad.append(f"eps={eps} must lie in (0, 1)")
    elif mother.m < min_mother_length(n, eps):
        bad.append(f"mother length {mother.m} < n/(1-2^(-eps/2)) = {min_mother_length(n, eps):.2f}")
    if b < 1:
        bad.append(f"locality b={b} must be >= 1")
    elif eps > 0 and eta > max_mother_bias(b, eps):
        bad.append(f"bias {eta} > eps*b*ln2/2^b = {max_mother_bias(b, eps):.6f}")
    if not 1 <= n <= mother.m:
        bad.append(f"n={n} must lie in [1, {mother.m}]")
    return bad


class Generated(NamedTuple):
    code: LinearCode
    provenance: dict


def derand_generate(
    mother: LinearCode,
    n: int,
    seed: int,
    b: int,
    eps: float,
    eta: float | None = None,
    mother_spec: dict | None = None,
) -> Generated:
    """Puncture ``mother`` at a uniformly sampled n-set of distinct coordinates.

    ``eta`` defaults to the exactly certified bias of ``mother``. The
    provenance record holds everything needed to regenerate the code.
    """
    if eta is None:
        eta = code_bias(mother)
    bad = check_preconditions(mother, n, eta, b, eps)
    if bad:
        raise DerandError("; ".join(bad))
    budget = BitBudget(seed)
    draw = sample_subset(mother.m, n, budget)
    cols = mother.columns(np.asarray(draw.subset, dtype=np.int64) - 1)
    code = LinearCode(mother.spec, cols, design_dim=mother.rank)
    reference = n * (b + math.log2(1 / eps))
    prov = {
        "seed": seed,
        "n": n,
        "m": mother.m,
        "bits_consumed": budget.consumed,
        "bits_reference": reference,
        "bits_constant": budget.consumed / reference,
        "log2_subsets": math.log2(math.comb(mother.m, n)),
        "subset": list(draw.subset),
        "rank": str(draw.rank),
        "mother_digest": mother.digest(),
        "code_digest": code.digest(),
        "code_rank": code.rank,
        "eta": eta,
        "b": b,
        "eps": eps,
    }
    if mother_spec is not None:
        prov["mother"] = mother_spec
    return Generated(code, prov)


def replay_generate(mother: LinearCode, provenance: dict) -> bool:
    """Regenerate from a provenance record and compare the digests."""
    out = derand_generate(
        mother,
        provenance["n"],
        provenance["seed"],
        provenance["b"],
        provenance["eps"],
        eta=provenance["eta"],
    )
    p = out.provenance
    return (
        p["mother_digest"] == provenance["mother_digest"]
        and p["code_digest"] == provenance["code_digest"]
        and p["subset"] == provenance["subset"]
        and p["bits_consumed"] == provenance["bits_consumed"]
    )
