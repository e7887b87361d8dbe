"""Memoryless additive-noise channels over F_q, exhaustive maximum-likelihood
decoding, and Monte Carlo experiments on randomly punctured codes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from ._util import Interval, binomial_sigma, parallel_map, stream, wilson
from .codes import (
    CODEWORD_CAP,
    LinearCode,
    encode,
    enumerate_codewords,
    message_of_index,
    pack_bits,
    packed_codewords,
)
from .gf import FieldSpec, field_of_order
from .puncture import apply_puncturing, sample_puncturing


WORD_TABLE_CAP = 1 << 22
TIE_TOL = 1e-9


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseSpec:
    """Noise distribution ``nu`` over F_q given as one mass per field element."""

    masses: tuple

    def __post_init__(self):
        m = self.masses
        try:
            field_of_order(len(m))
        except ValueError:
            raise ChannelError("need one mass per element of a field") from None
        if any(x < 0 for x in m):
            raise ChannelError("masses must be non-negative")
        if abs(float(sum(m)) - 1) > 1e-12:
            raise ChannelError("masses must sum to 1")

    @classmethod
    def symmetric(cls, q: int, p) -> "NoiseSpec":
        """Mass ``1 - p`` at zero and ``p / (q - 1)`` on each nonzero symbol."""
        p = Fraction(p) if not isinstance(p, float) else p
        return cls((1 - p,) + tuple(p / (q - 1) for _ in range(q - 1)))

    @classmethod
    def point(cls, q: int, a: int = 0) -> "NoiseSpec":
        return cls(tuple(1 if i == a else 0 for i in range(q)))

    @classmethod
    def from_sparse(cls, q: int, sparse: dict) -> "NoiseSpec":
        """Masses keyed by symbol; a missing zero symbol takes the remaining mass."""
        vals = {int(a): Fraction(str(v)) for a, v in sparse.items()}
        vals.setdefault(0, 1 - sum(vals.values(), Fraction(0)))
        return cls(tuple(vals.get(a, Fraction(0)) for a in range(q)))

    @property
    def q(self) -> int:
        return len(self.masses)

    @property
    def probs(self) -> np.ndarray:
        p = np.array([float(x) for x in self.masses])
        return p / p.sum()

    @property
    def log_masses(self) -> np.ndarray:
        p = self.probs
        with np.errstate(divide="ignore"):
            return np.log(p)

    @property
    def entropy(self) -> float:
        p = self.probs
        p = p[p > 0]
        return float(-(p * np.log(p)).sum() / math.log(self.q))

    @property
    def capacity(self) -> float:
        return 1 - self.entropy

    def sparse(self) -> dict:
        return {str(a): str(m) for a, m in enumerate(self.masses) if m}


def capacity(nu: NoiseSpec, q: int | None = None) -> float:
    if q is not None and q != nu.q:
        raise ChannelError("noise alphabet does not match q")
    return nu.capacity


def sample_noise(nu: NoiseSpec, n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """One noise word of length ``n`` (or ``size`` of them as rows)."""
    shape = (n,) if size is None else (size, n)
    return rng.choice(nu.q, size=shape, p=nu.probs).astype(np.int64)


def transmit(spec: FieldSpec, x, z) -> np.ndarray:
    return spec.add(np.asarray(x, dtype=np.int64), np.asarray(z, dtype=np.int64))


def log_likelihood(nu: NoiseSpec, z) -> float:
    """``log nu(z)`` in nats; ``-inf`` if some symbol has zero mass."""
    z = np.asarray(z, dtype=np.int64)
    counts = np.bincount(z.reshape(-1), minlength=nu.q)
    lm = nu.log_masses
    used = counts > 0
    return float((counts[used] * lm[used]).sum())


def _count_loglik(counts: np.ndarray, lm: np.ndarray) -> np.ndarray:
    """Row-wise ``sum_a counts[:, a] * lm[a]`` with ``0 * -inf = 0``."""
    terms = np.where(counts > 0, counts * np.where(np.isfinite(lm), lm, 0.0), 0.0)
    dead = ((counts > 0) & ~np.isfinite(lm)).any(axis=-1)
    out = terms.sum(axis=-1)
    out[dead] = -np.inf
    return out


class Decoded(NamedTuple):
    word: np.ndarray
    index: int
    loglik: float
    tie: bool
    all_impossible: bool


class Decoder:
    """Exhaustive MLDU decoder over the codewords of one code.

    Codewords are scanned in canonical message order; among maximisers the
    first distinct codeword wins and ``tie`` is set if another distinct codeword
    attains the same likelihood.
    """

    def __init__(self, code: LinearCode, nu: NoiseSpec, cap: int = CODEWORD_CAP):
        if nu.q != code.q:
            raise ChannelError("noise alphabet does not match the code")
        self.code, self.nu = code, nu
        self.spec = code.spec
        self.n = code.m
        self.lm = nu.log_masses
        self.packed = code.q == 2 and self.n <= 64
        if self.packed:
            self.words = packed_codewords(code, cap)
        else:
            self.words = enumerate_codewords(code, cap).astype(np.int64)

    def _scores(self, y: np.ndarray) -> np.ndarray:
        if self.packed:
            w = np.bitwise_count(self.words ^ pack_bits(y)).astype(np.int64)
            counts = np.stack([self.n - w, w], axis=-1)
        else:
            diff = self.spec.sub(y[None, :], self.words)
            counts = np.stack([(diff == a).sum(axis=1) for a in range(self.spec.q)], axis=-1)
        return _count_loglik(counts, self.lm)

    def _best_packed(self, y: np.ndarray):
        """Maximisers via the distance alone when both masses are positive."""
        w = np.bitwise_count(self.words ^ pack_bits(y))
        l0, l1 = self.lm
        if l1 < l0:
            i = int(np.argmin(w))
        elif l1 > l0:
            i = int(np.argmax(w))
        else:
            i = 0
        wi = int(w[i])
        top = np.flatnonzero(w == wi) if l1 != l0 else None
        return i, self.n * l0 + wi * (l1 - l0), top

    def word_at(self, i: int) -> np.ndarray:
        if self.packed:
            v = int(self.words[i])
            return np.array([(v >> j) & 1 for j in range(self.n)], dtype=np.int64)
        return self.words[i].copy()

    def decode(self, y) -> Decoded:
        y = np.asarray(y, dtype=np.int64)
        if self.packed and np.isfinite(self.lm).all():
            i, best, top = self._best_packed(y)
        else:
            s = self._scores(y)
            best = s.max()
            # float sums of equal exact likelihoods can differ in the last ulp
            top = np.flatnonzero(s >= best - TIE_TOL * (1 + abs(best))) if np.isfinite(best) else np.arange(s.size)
            i = int(top[0])
            best = float(s[i])
        words = self.words if top is None else self.words[top]
        tie = bool((words != self.words[i]).any())
        return Decoded(self.word_at(i), i, float(best), tie, bool(best == -np.inf))


def mldu_decode(code: LinearCode, nu: NoiseSpec, y) -> Decoded:
    return Decoder(code, nu).decode(y)


# -- experiments --------------------------------------------------------------------


class DecodingResult(NamedTuple):
    n: int
    rate: Fraction
    trials: int
    errors: int
    block_error: float
    ci: Interval
    per_codeword: list[float]
    ties: int
    eta: float | None
    in_hypothesis: bool | None
    seed: int

    def row(self, nu: NoiseSpec) -> dict:
        return {
            "q": nu.q,
            "n": self.n,
            "R": str(self.rate),
            "nu": ";".join(f"{a}:{m}" for a, m in nu.sparse().items()),
            "trials": self.trials,
            "block_error": self.block_error,
            "ci_low": self.ci.low,
            "ci_high": self.ci.high,
            "ties": self.ties,
            "hypothesis": {None: "unchecked", True: "in-hypothesis", False: "out-of-hypothesis"}[self.in_hypothesis],
            "seed": self.seed,
        }


def bias_hypothesis(q: int, rate, nu: NoiseSpec, eta: float | None) -> bool | None:
    """Whether ``eta <= eps / (3(q-1))`` for ``eps = capacity - rate``."""
    if eta is None:
        return None
    eps = nu.capacity - float(rate)
    return eps > 0 and eta <= eps / (3 * (q - 1))


def decoding_experiment(
    mother: LinearCode,
    n: int,
    nu: NoiseSpec,
    codeword_trials: int,
    noise_trials: int,
    seed: int,
    eta: float | None = None,
    codewords: str = "mixed",
    threads: int = 1,
) -> DecodingResult:
    """Block error of MLDU on random n-puncturings of ``mother``.

    Each codeword trial draws a fresh puncturing and a codeword, then
    ``noise_trials`` noise words. With ``codewords="mixed"`` the first trial
    sends zero and the rest send uniform codewords; ``"zero"`` and ``"random"``
    fix the choice.
    """
    if codewords not in ("mixed", "zero", "random"):
        raise ChannelError(f"unknown codeword mode {codewords!r}")
    spec = mother.spec
    rate = Fraction(mother.rank, n)

    def one(c: int) -> tuple[int, int]:
        rng = stream(seed, "decode", c)
        code = apply_puncturing(sample_puncturing(mother.m, n, rng), mother)
        dec = Decoder(code, nu)
        if codewords == "zero" or (codewords == "mixed" and c == 0):
            x = np.zeros(n, dtype=np.int64)
        else:
            msg = message_of_index(spec.q, code.k, int(rng.integers(spec.q**code.k)))
            x = encode(code, msg)
        Z = sample_noise(nu, n, rng, size=noise_trials)
        errs = ties = 0
        for z in Z:
            out = dec.decode(transmit(spec, x, z))
            errs += not np.array_equal(out.word, x)
            ties += out.tie
        return errs, ties

    res = parallel_map(one, range(codeword_trials), threads)
    errors = sum(e for e, _ in res)
    total = codeword_trials * noise_trials
    freq = errors / total
    return DecodingResult(
        n,
        rate,
        total,
        errors,
        freq,
        wilson(errors, total),
        [e / noise_trials for e, _ in res],
        sum(t for _, t in res),
        eta,
        bias_hypothesis(spec.q, rate, nu, eta),
        seed,
    )


class MembershipCheck(NamedTuple):
    hits: int
    trials: int
    freq: float
    bound: float
    stderr: float
    holds: bool
    seed: int


def membership_bound(q: int, n: int, design_rate, eta: float) -> float:
    """``q^{n(-1 + R + (q-1) eta)}``."""
    return float(q) ** (n * (-1 + float(design_rate) + (q - 1) * eta))


def check_prob_in_code(
    mother: LinearCode,
    n: int,
    x,
    trials: int,
    seed: int,
    eta: float,
    chunk: int = 4096,
) -> MembershipCheck:
    """Frequency of a fixed nonzero ``x`` lying in a random n-puncturing of ``mother``."""
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (n,) or not x.any():
        raise ChannelError("x must be a nonzero word of length n")
    spec = mother.spec
    k = mother.rank
    phis = stream(seed, "membership").integers(0, mother.m, size=(trials, n))
    hits = 0
    if spec.q**mother.k * mother.m <= WORD_TABLE_CAP:
        # every mother codeword restricted to every sampled coordinate tuple
        W = enumerate_codewords(mother).astype(np.int64)
        for lo in range(0, trials, chunk):
            sub = W[:, phis[lo : lo + chunk]]
            hits += int((sub == x).all(axis=-1).any(axis=0).sum())
    else:
        for phi in phis:
            hits += LinearCode(spec, mother.columns(phi)).contains(x)
    freq = hits / trials
    bound = membership_bound(spec.q, n, Fraction(k, n), eta)
    sd = max(binomial_sigma(freq, trials), binomial_sigma(min(bound, 1.0), trials))
    return MembershipCheck(hits, trials, freq, bound, sd, freq <= bound + 3 * sd, seed)


def typical_set_frequency(nu: NoiseSpec, n: int, eps: float, trials: int, seed: int) -> float:
    """Fraction of noise words with ``|log_q nu(z) + n H_q(nu)| <= eps n / 3``."""
    rng = stream(seed, "typical", n)
    Z = sample_noise(nu, n, rng, size=trials)
    counts = np.stack([(Z == a).sum(axis=1) for a in range(nu.q)], axis=-1)
    ll = _count_loglik(counts, nu.log_masses) / math.log(nu.q)
    return float(np.mean(np.abs(ll + n * nu.entropy) <= eps * n / 3))


def decode_sweep(
    make_mother,
    lengths: Sequence[int],
    nu: NoiseSpec,
    codeword_trials: int,
    noise_trials: int,
    seed: int,
    eta: float | None = None,
    threads: int = 1,
) -> list[DecodingResult]:
    """Run ``decoding_experiment`` for each length with ``make_mother(n)``."""
    return [
        decoding_experiment(make_mother(n), n, nu, codeword_trials, noise_trials, seed, eta=eta, threads=threads)
        for n in lengths
    ]
