"""Distributions over F_q^b: empirical row distributions, entropy and KL,
Fourier analysis, n-feasible types, implied distributions, and numeric
checkers for the smoothness and type-probability inequalities used by the
puncturing experiments.

Points of F_q^b are indexed by ``sum(x_i * q**(b - 1 - i))`` (first coordinate
most significant), the same convention :mod:`punclab.codes` uses for messages.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterator, NamedTuple

import numpy as np

from ._util import stream
from .codes import (
    LinearCode,
    code_bias,
    code_distance_eta,
    enumerate_codewords,
    rank,
)
from .gf import CapExceeded, FieldSpec, field_of_order
from .puncture import sample_puncturing, sample_scalar_diagonal

FEASIBLE_CAP = 10**7
TOL = 1e-9


class DistributionError(ValueError):
    pass


# -- points of F_q^b ---------------------------------------------------------------


def point_digits(q: int, b: int) -> np.ndarray:
    """``(q**b, b)`` array; row ``i`` is the point with index ``i``."""
    idx = np.arange(q**b, dtype=np.int64)
    w = q ** np.arange(b - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // w[None, :]) % q


def row_codes(q: int, A) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    out = np.zeros(A.shape[:-1], dtype=np.int64)
    for j in range(A.shape[-1]):
        out = out * q + A[..., j]
    return out


# -- distributions -----------------------------------------------------------------


class EmpiricalDistribution:
    """Rational distribution ``counts[x] / denom`` on F_q^b."""

    def __init__(self, spec: FieldSpec, b: int, counts, denom: int | None = None):
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (spec.q**b,):
            raise DistributionError(f"expected {spec.q ** b} masses, got shape {counts.shape}")
        if (counts < 0).any():
            raise DistributionError("masses must be non-negative")
        total = int(counts.sum())
        denom = total if denom is None else int(denom)
        if total != denom or denom <= 0:
            raise DistributionError("masses must sum to exactly 1")
        counts.setflags(write=False)
        self.spec = spec
        self.b = b
        self.counts = counts
        self.denom = denom

    @classmethod
    def from_masses(cls, spec: FieldSpec, b: int, masses) -> "EmpiricalDistribution":
        """Build from rationals, given as a dense sequence or ``{index: mass}``."""
        if isinstance(masses, dict):
            dense = [Fraction(0)] * spec.q**b
            for i, v in masses.items():
                dense[int(i)] = Fraction(v)
        else:
            dense = [Fraction(v) for v in masses]
        denom = math.lcm(*(f.denominator for f in dense)) if dense else 1
        counts = [int(f * denom) for f in dense]
        return cls(spec, b, counts, denom)

    @classmethod
    def uniform(cls, spec: FieldSpec, b: int) -> "EmpiricalDistribution":
        return cls(spec, b, np.ones(spec.q**b, dtype=np.int64))

    @classmethod
    def point(cls, spec: FieldSpec, b: int, index: int) -> "EmpiricalDistribution":
        c = np.zeros(spec.q**b, dtype=np.int64)
        c[index] = 1
        return cls(spec, b, c)

    @property
    def q(self) -> int:
        return self.spec.q

    def mass(self, index: int) -> Fraction:
        return Fraction(int(self.counts[index]), self.denom)

    def masses(self) -> list[Fraction]:
        return [Fraction(int(c), self.denom) for c in self.counts]

    def probs(self) -> np.ndarray:
        return self.counts / self.denom

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.counts)

    def is_feasible(self, n: int) -> bool:
        return bool(np.all((self.counts * n) % self.denom == 0))

    def type_counts(self, n: int) -> np.ndarray:
        """``n * tau`` as integers; requires n-feasibility."""
        if not self.is_feasible(n):
            raise DistributionError(f"distribution is not {n}-feasible")
        return (self.counts * n) // self.denom

    @property
    def dim(self) -> int:
        supp = point_digits(self.q, self.b)[self.support()]
        return rank(self.spec, supp)

    @property
    def full_rank(self) -> bool:
        return self.dim == self.b

    def canonical_matrix(self, n: int) -> np.ndarray:
        """The member of M_{n,tau} whose rows are in increasing point order."""
        reps = self.type_counts(n)
        return np.repeat(point_digits(self.q, self.b), reps, axis=0)

    def key(self) -> tuple:
        g = math.gcd(self.denom, *map(int, self.counts))
        return (self.spec.key(), self.b, tuple(int(c) // g for c in self.counts), self.denom // g)

    def __eq__(self, other) -> bool:
        return isinstance(other, EmpiricalDistribution) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        sup = {int(i): str(self.mass(i)) for i in self.support()}
        return f"EmpiricalDistribution(q={self.q}, b={self.b}, {sup})"

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "b": self.b,
            "n": self.denom,
            "masses": [[int(i), int(self.counts[i])] for i in self.support()],
        }

    @classmethod
    def from_json(cls, d: dict) -> "EmpiricalDistribution":
        spec = field_of_order(d["q"])
        counts = np.zeros(spec.q ** d["b"], dtype=np.int64)
        for i, c in d["masses"]:
            counts[i] = c
        return cls(spec, d["b"], counts, d["n"])


def empirical_of_matrix(spec: FieldSpec, A) -> EmpiricalDistribution:
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2 or A.shape[0] < 1:
        raise DistributionError("need an n x b matrix with n >= 1")
    b = A.shape[1]
    counts = np.bincount(row_codes(spec.q, A), minlength=spec.q**b)
    return EmpiricalDistribution(spec, b, counts)


# -- entropy -----------------------------------------------------------------------


def entropy_q(tau: EmpiricalDistribution, q: int | None = None) -> float:
    q = tau.q if q is None else q
    p = tau.probs()
    p = p[p > 0]
    return math.fsum(-x * math.log(x) for x in p) / math.log(q)


def kl_q(tau: EmpiricalDistribution, sigma: EmpiricalDistribution, q: int | None = None) -> float:
    q = tau.q if q is None else q
    t, s = tau.probs(), sigma.probs()
    if np.any((t > 0) & (s == 0)):
        return math.inf
    mask = t > 0
    return math.fsum(a * math.log(a / c) for a, c in zip(t[mask], s[mask])) / math.log(q)


# -- Fourier -------------------------------------------------------------------------


def _apply_axes(spec: FieldSpec, b: int, f: np.ndarray, X: np.ndarray) -> np.ndarray:
    a = np.asarray(f).reshape((spec.q,) * b)
    for axis in range(b):
        a = np.moveaxis(np.tensordot(X, a, axes=([1], [axis])), 0, axis)
    return a.reshape(-1)


def fourier_transform(spec: FieldSpec, b: int, f) -> np.ndarray:
    """``fhat(y) = sum_x f(x) * conj(chi_y(x))``."""
    X = spec.character_matrix
    return _apply_axes(spec, b, np.asarray(f), np.conj(X) if np.iscomplexobj(X) else X)


def inverse_fourier(spec: FieldSpec, b: int, fhat) -> np.ndarray:
    """``f(x) = q**-b * sum_y fhat(y) * chi_y(x)``."""
    return _apply_axes(spec, b, np.asarray(fhat), spec.character_matrix) / spec.q**b


def fourier(sigma: EmpiricalDistribution) -> np.ndarray:
    """Transform of a distribution; integer-exact before the final division when p = 2."""
    raw = fourier_transform(sigma.spec, sigma.b, sigma.counts)
    return raw / sigma.denom


def fourier_l1(sigma: EmpiricalDistribution) -> float:
    return math.fsum(np.abs(fourier(sigma)))


# -- checker records ----------------------------------------------------------------


class CheckResult(NamedTuple):
    lhs: float
    bound: float
    holds: bool
    trials: int = 0
    stderr: float = 0.0
    seed: int | None = None
    exact: float | None = None

    @property
    def margin(self) -> float:
        return self.bound - self.lhs

    def to_json(self) -> dict:
        d = self._asdict()
        d["margin"] = self.margin
        return d


def _le(lhs: float, rhs: float, slack: float = 0.0) -> bool:
    return lhs <= rhs + slack + TOL * max(1.0, abs(rhs))


def check_vazirani(sigma: EmpiricalDistribution, f) -> CheckResult:
    f = np.asarray(f, dtype=np.float64)
    if f.shape != sigma.counts.shape:
        raise DistributionError("f must be defined on every point of F_q^b")
    if (f < 0).any():
        raise DistributionError("f must be non-negative")
    lhs = math.fsum(sigma.probs() * f)
    rhs = fourier_l1(sigma) * math.fsum(f) / f.size
    return CheckResult(lhs, rhs, _le(lhs, rhs))


def scalar_expand_rows(spec: FieldSpec, B) -> np.ndarray:
    """Rows of B* (the matrix whose columns are the scalar expansions of B's columns)."""
    B = np.asarray(B, dtype=np.int64)
    return np.concatenate([spec.mul(a, B) for a in range(1, spec.q)], axis=0)


def check_smooth_distribution(spec: FieldSpec, B, f, eta: float | None = None, mode: str = "bias") -> CheckResult:
    """``E_{tau_B} f <= (1 + q^b eta) E_U f`` (bias) or the B* version with factor 2 (distance).

    When ``eta`` is omitted it is certified from the column span of ``B``.
    """
    B = np.asarray(B, dtype=np.int64)
    m, b = B.shape
    if rank(spec, B) != b:
        raise DistributionError("B must have full column rank")
    f = np.asarray(f, dtype=np.float64)
    if (f < 0).any():
        raise DistributionError("f must be non-negative")
    span = LinearCode(spec, B.T)
    if mode == "bias":
        eta = code_bias(span) if eta is None else eta
        tau = empirical_of_matrix(spec, B)
        factor = 1 + spec.q**b * eta
    elif mode == "distance":
        eta = code_distance_eta(span) if eta is None else eta
        tau = empirical_of_matrix(spec, scalar_expand_rows(spec, B))
        factor = 2 * (1 + spec.q**b * eta)
    else:
        raise DistributionError(f"unknown mode {mode!r}")
    lhs = math.fsum(tau.probs() * f)
    bound = factor * math.fsum(f) / f.size
    return CheckResult(lhs, bound, _le(lhs, bound))


# -- types ------------------------------------------------------------------------


def count_feasible(n: int, q: int, b: int) -> int:
    return math.comb(n + q**b - 1, q**b - 1)


def _compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def enumerate_feasible(n: int, q: int, b: int, cap: int = FEASIBLE_CAP) -> Iterator[EmpiricalDistribution]:
    """Every n-feasible distribution over F_q^b, each once."""
    total = count_feasible(n, q, b)
    if total > cap:
        raise CapExceeded(f"{total} feasible distributions exceed cap {cap}")
    spec = field_of_order(q)
    for comp in _compositions(n, q**b):
        yield EmpiricalDistribution(spec, b, comp, n)


def multinomial(counts) -> int:
    out, acc = 1, 0
    for c in counts:
        c = int(c)
        acc += c
        out *= math.comb(acc, c)
    return out


class MatrixCount(NamedTuple):
    lower: float
    upper: float
    exact: int | None
    log_lower: float
    log_upper: float


def _pow_q(q: int, e: float) -> float:
    try:
        return q**e
    except OverflowError:
        return math.inf


def matrix_count_bounds(tau: EmpiricalDistribution, n: int) -> MatrixCount:
    """Bracket ``|M_{n,tau}|`` by ``(n+1)^{-q^b} q^{nH}`` and ``q^{nH}``."""
    c = tau.type_counts(n)
    q = tau.q
    log_upper = n * entropy_q(tau)
    log_lower = log_upper - q**tau.b * math.log(n + 1, q)
    exact = multinomial(c)
    return MatrixCount(
        _pow_q(q, log_lower),
        _pow_q(q, log_upper),
        exact if exact < 2**128 else None,
        log_lower,
        log_upper,
    )


def type_probability_exact(sigma: EmpiricalDistribution, tau: EmpiricalDistribution, n: int) -> Fraction:
    """``Pr[tau_A = tau]`` for n i.i.d. rows drawn from ``sigma``."""
    c = tau.type_counts(n)
    prob = Fraction(multinomial(c))
    for x in np.flatnonzero(c):
        prob *= sigma.mass(int(x)) ** int(c[x])
    return prob


def _type_hits(codes: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Which rows of ``codes`` (trials x n point indices) have counts equal to ``target``."""
    trials = codes.shape[0]
    size = target.size
    offs = codes + (np.arange(trials, dtype=np.int64) * size)[:, None]
    hist = np.bincount(offs.ravel(), minlength=trials * size).reshape(trials, size)
    return np.all(hist == target[None, :], axis=1)


def check_type_probability(
    spec: FieldSpec,
    B,
    tau: EmpiricalDistribution,
    n: int,
    trials: int,
    seed: int,
) -> CheckResult:
    """Monte Carlo and exact ``Pr[phi(B) in M_{n,tau}]`` against
    ``q^{n (log_q E_{x~tau_B}[tau(x)] + H_q(tau))}``."""
    B = np.asarray(B, dtype=np.int64)
    if rank(spec, B) != B.shape[1]:
        raise DistributionError("B must have full column rank")
    tau_B = empirical_of_matrix(spec, B)
    target = tau.type_counts(n)
    expect = math.fsum(tau_B.probs() * tau.probs())
    bound = 0.0 if expect == 0 else expect**n * _pow_q(spec.q, n * entropy_q(tau))
    exact = float(type_probability_exact(tau_B, tau, n))
    rows = row_codes(spec.q, B)
    rng = stream(seed, "type-probability")
    picks = rng.integers(0, B.shape[0], size=(trials, n))
    hits = int(_type_hits(rows[picks], target).sum())
    freq = hits / trials
    se = math.sqrt(max(freq * (1 - freq), bound * (1 - min(bound, 1.0))) / trials)
    holds = _le(exact, bound) and _le(freq, bound, 3 * se)
    return CheckResult(freq, bound, holds, trials, se, seed, exact)


def check_kl_tail(
    sigma: EmpiricalDistribution,
    tau: EmpiricalDistribution,
    n: int,
    trials: int,
    seed: int,
) -> CheckResult:
    """``Pr[tau_A = tau] <= q^{-n D(tau || sigma)}`` for i.i.d. rows from ``sigma``."""
    d = kl_q(tau, sigma)
    bound = 0.0 if math.isinf(d) else _pow_q(sigma.q, -n * d)
    exact = float(type_probability_exact(sigma, tau, n))
    rng = stream(seed, "kl-tail")
    draws = rng.choice(sigma.counts.size, size=(trials, n), p=sigma.probs())
    hits = int(_type_hits(draws, tau.type_counts(n)).sum())
    freq = hits / trials
    se = math.sqrt(max(freq * (1 - freq), bound * (1 - min(bound, 1.0))) / trials)
    holds = _le(exact, bound) and _le(freq, bound, 3 * se)
    return CheckResult(freq, bound, holds, trials, se, seed, exact)


# -- implied distributions ------------------------------------------------------------


class ImpliedDistribution(NamedTuple):
    dist: EmpiricalDistribution
    dim: int
    D: np.ndarray


def _default_b_cap(q: int) -> int:
    return 4 if q == 2 else 3 if q <= 5 else 2


def subspace_bases(spec: FieldSpec, b: int, a: int) -> Iterator[np.ndarray]:
    """Reduced row-echelon ``a x b`` bases, one per a-dimensional subspace of F_q^b."""
    q = spec.q
    for pivots in itertools.combinations(range(b), a):
        free = [(i, j) for i in range(a) for j in range(b) if j > pivots[i] and j not in pivots]
        for vals in itertools.product(range(q), repeat=len(free)):
            M = np.zeros((a, b), dtype=np.int64)
            for i, p in enumerate(pivots):
                M[i, p] = 1
            for (i, j), v in zip(free, vals):
                M[i, j] = v
            yield M


def push_forward(tau: EmpiricalDistribution, D) -> EmpiricalDistribution:
    """Distribution of ``x D`` for ``x ~ tau``."""
    spec = tau.spec
    D = np.asarray(D, dtype=np.int64)
    a = D.shape[1]
    pts = point_digits(spec.q, tau.b)
    img = np.zeros((pts.shape[0], a), dtype=np.int64)
    for i in range(tau.b):
        img = spec.add(img, spec.mul(pts[:, i : i + 1], D[i][None, :]))
    codes = row_codes(spec.q, img)
    counts = np.bincount(codes, weights=tau.counts, minlength=spec.q**a).astype(np.int64)
    return EmpiricalDistribution(spec, a, counts, tau.denom)


def implied_distributions(
    tau: EmpiricalDistribution,
    max_b: int | None = None,
    full: bool = False,
) -> list[ImpliedDistribution]:
    """tau-implied distributions for a = 1..b.

    By default one representative per a-dimensional column space of ``D``;
    entropy and dimension are invariant under ``D -> D g`` for invertible ``g``.
    ``full=True`` enumerates every full-column-rank ``D`` instead.
    """
    spec, b = tau.spec, tau.b
    cap = _default_b_cap(spec.q) if max_b is None else max_b
    if b > cap:
        raise CapExceeded(f"b = {b} exceeds the implied-distribution cap {cap}")
    out = []
    for a in range(1, b + 1):
        if full:
            cands = (
                np.asarray(v, dtype=np.int64).reshape(b, a)
                for v in itertools.product(range(spec.q), repeat=a * b)
            )
            cands = (D for D in cands if rank(spec, D) == a)
        else:
            cands = (basis.T for basis in subspace_bases(spec, b, a))
        for D in cands:
            t = push_forward(tau, D)
            out.append(ImpliedDistribution(t, t.dim, D))
    return out


# -- expected count of tau-matrices inside a punctured code ----------------------------


def _tuple_type_count(W: np.ndarray, q: int, target: np.ndarray) -> int:
    """Number of b-tuples of rows of W whose column-stacked matrix has type ``target``."""
    b = int(round(math.log(target.size, q)))
    N = W.shape[0]
    total = 0
    # enumerate tuples in blocks over the first coordinate to bound memory
    rest = np.zeros((1, W.shape[1]), dtype=np.int64)
    for _ in range(b - 1):
        rest = (rest[:, None, :] * q + W[None, :, :].astype(np.int64)).reshape(-1, W.shape[1])
    for i in range(N):
        codes = W[i].astype(np.int64)[None, :] * q ** (b - 1) + rest
        total += int(_type_hits(codes, target).sum())
    return total


def _expected_count_exact(mother: LinearCode, tau: EmpiricalDistribution, n: int, mode: str) -> float:
    """Sum over message tuples of ``Pr[phi(B) in M_{n,tau}]`` (counts with multiplicity)."""
    spec, k, b = mother.spec, mother.k, tau.b
    q = spec.q
    hist = np.bincount(mother.column_codes(), minlength=q**k)
    if mode == "distance":
        # columns of D*: a * v for every a != 0
        vs = point_digits(q, k)
        scaled = np.zeros_like(hist)
        for a in range(1, q):
            np.add.at(scaled, row_codes(q, spec.mul(a, vs)), hist)
        hist = scaled
    denom = int(hist.sum())
    c = tau.type_counts(n)
    supp = np.flatnonzero(c)
    coef = multinomial(c)
    vs = point_digits(q, k)
    msgs = point_digits(q, k)
    total = 0.0
    for tup in itertools.product(range(q**k), repeat=b):
        Y = msgs[list(tup)]  # b x k
        img = np.zeros((vs.shape[0], b), dtype=np.int64)
        for j in range(b):
            acc = np.zeros(vs.shape[0], dtype=np.int64)
            for i in range(k):
                acc = spec.add(acc, spec.mul(vs[:, i], Y[j, i]))
            img[:, j] = acc
        dist = np.bincount(row_codes(q, img), weights=hist, minlength=q**b)
        if np.any(dist[supp] == 0):
            continue
        logp = math.log(coef) + math.fsum(int(c[x]) * math.log(dist[x] / denom) for x in supp)
        total += math.exp(logp)
    return total


def expected_count_bound(q: int, b: int, entropy: float, design_rate: float, eta: float, n: int, mode: str) -> float:
    e = entropy - (1 - design_rate) * b + math.log(1 + eta * q**b, q)
    if mode == "distance":
        e += math.log(2, q)
    return _pow_q(q, n * e)


def check_expected_count(
    mother: LinearCode,
    tau: EmpiricalDistribution,
    n: int,
    trials: int,
    seed: int,
    mode: str = "bias",
    eta: float | None = None,
    exact: bool = True,
) -> CheckResult:
    """Mean number of matrices of type ``tau`` whose columns lie in the punctured code.

    ``mode="bias"`` punctures directly; ``mode="distance"`` also applies a
    uniformly random scalar diagonal.  The exact with-multiplicity expectation
    (sum over message tuples) is reported alongside when ``exact`` is set.
    """
    if mode not in ("bias", "distance"):
        raise DistributionError(f"unknown mode {mode!r}")
    if not tau.full_rank:
        raise DistributionError("tau must be full rank")
    spec = mother.spec
    if eta is None:
        eta = code_bias(mother) if mode == "bias" else code_distance_eta(mother)
    R = mother.rank / n
    bound = expected_count_bound(spec.q, tau.b, entropy_q(tau), R, eta, n, mode)
    target = tau.type_counts(n)
    counts = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        rng = stream(seed, "expected-count", mode, t)
        phi = sample_puncturing(mother.m, n, rng)
        G = mother.columns(phi.zero_based())
        if mode == "distance":
            lam = sample_scalar_diagonal(spec.q, n, rng)
            G = spec.mul(G, np.asarray(lam.values, dtype=np.int64)[None, :])
        words = np.unique(enumerate_codewords(LinearCode(spec, G)), axis=0)
        counts[t] = _tuple_type_count(words, spec.q, target)
    mean = float(counts.mean()) if trials else 0.0
    se = float(counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    ex = _expected_count_exact(mother, tau, n, mode) if exact else None
    holds = _le(mean, bound, 3 * se) and (ex is None or _le(ex, bound))
    return CheckResult(mean, bound, holds, trials, se, seed, ex)
