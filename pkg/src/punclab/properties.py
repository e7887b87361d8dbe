"""Exact decision procedures for clustered sets, list-decodability,
list-recoverability, their average-radius variant, span-clustered matrices and
distributions, and minimality of a span with respect to a property.

Radii are rationals; a word ``u`` is within radius ``rho`` of ``z`` when
``d(u, z) <= floor(rho * n)``.  Words over F_q^n are indexed by
``sum(w_j * q**(n - 1 - j))``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from .codes import LinearCode, enumerate_codewords, rank, rref
from .dist import EmpiricalDistribution, DistributionError, point_digits, row_codes
from .gf import CapExceeded, FieldSpec

CENTER_CAP = 1 << 24
SUBSET_CAP = 10**7
DP_CAP = 10**6


class PropertyError(ValueError):
    pass


def radius_budget(rho, n: int) -> int:
    rho = Fraction(rho)
    if not 0 <= rho <= 1:
        raise PropertyError("radius must lie in [0, 1]")
    return math.floor(rho * n)


@dataclass(frozen=True)
class PropertySpec:
    """Parameters of a local property; the property itself is the *violation*
    (for example "not (rho, L)-list-decodable"), which is monotone increasing."""

    kind: str
    rho: Fraction
    L: int
    q: int
    n: int
    ell: int = 1

    KINDS = ("list-decoding", "list-recovery", "average-radius-LD")

    def __post_init__(self):
        object.__setattr__(self, "rho", Fraction(self.rho))
        if self.kind not in self.KINDS:
            raise PropertyError(f"unknown property kind {self.kind!r}")
        if not 0 <= self.rho <= 1:
            raise PropertyError("radius must lie in [0, 1]")
        if self.L < 1:
            raise PropertyError("list size must be >= 1")
        if not 1 <= self.ell <= self.q:
            raise PropertyError("input-list size must lie in [1, q]")
        if self.kind != "list-recovery" and self.ell != 1:
            raise PropertyError("input-list size applies to list recovery only")
        if self.kind == "list-recovery" and self.rho >= 1 - Fraction(self.ell, self.q):
            warnings.warn("radius is at or above 1 - ell/q; every large set is recovery-clustered")

    @property
    def locality(self) -> int:
        return self.L + 1

    def violated_by(self, code: LinearCode) -> bool:
        """True when ``code`` contains a bad set of ``L + 1`` codewords."""
        if self.kind == "list-decoding":
            return not is_list_decodable(code, self.rho, self.L)[0]
        if self.kind == "list-recovery":
            return not is_list_recoverable(code, self.rho, self.ell, self.L)[0]
        return not is_avg_radius_ld(code, self.rho, self.L)[0]

    def to_json(self) -> dict:
        return {"kind": self.kind, "rho": str(self.rho), "L": self.L, "q": self.q, "n": self.n, "ell": self.ell}

    @classmethod
    def from_json(cls, d: dict) -> "PropertySpec":
        return cls(d["kind"], Fraction(d["rho"]), int(d["L"]), int(d["q"]), int(d["n"]), int(d.get("ell", 1)))


@dataclass
class Witness:
    """Bad codeword set plus the center (clustered) or input sets (recovery)."""

    kind: str
    q: int
    rho: Fraction
    codewords: list[list[int]]
    center: list[int] | None = None
    input_sets: list[list[int]] | None = None
    ell: int = 1
    meta: dict = dc_field(default_factory=dict)

    def verify(self, code: LinearCode | None = None) -> bool:
        words = np.asarray(self.codewords, dtype=np.int64)
        if words.ndim != 2 or len({tuple(w) for w in self.codewords}) != len(self.codewords):
            return False
        n = words.shape[1]
        t = radius_budget(self.rho, n)
        if code is not None and not all(code.contains(w) for w in words):
            return False
        if self.kind == "average-radius-LD":
            if self.center is None:
                return False
            z = np.asarray(self.center)
            total = int(np.count_nonzero(words != z[None, :]))
            return Fraction(total, n * len(words)) <= self.rho
        if self.kind == "list-recovery":
            if self.input_sets is None or len(self.input_sets) != n:
                return False
            if any(len(set(Z)) > self.ell for Z in self.input_sets):
                return False
            miss = [sum(w[i] not in self.input_sets[i] for i in range(n)) for w in words.tolist()]
            return max(miss) <= t
        if self.center is None or len(self.center) != n:
            return False
        z = np.asarray(self.center)
        return int(np.count_nonzero(words != z[None, :], axis=1).max()) <= t

    def to_json(self) -> dict:
        d = {
            "kind": self.kind,
            "q": self.q,
            "rho": str(self.rho),
            "ell": self.ell,
            "codewords": [list(map(int, w)) for w in self.codewords],
        }
        if self.center is not None:
            d["center"] = list(map(int, self.center))
        if self.input_sets is not None:
            d["input_sets"] = [sorted(map(int, Z)) for Z in self.input_sets]
        if self.meta:
            d["meta"] = self.meta
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Witness":
        return cls(
            d["kind"],
            int(d["q"]),
            Fraction(d["rho"]),
            [list(w) for w in d["codewords"]],
            d.get("center"),
            d.get("input_sets"),
            int(d.get("ell", 1)),
            d.get("meta", {}),
        )


# -- helpers ------------------------------------------------------------------------


def distinct_codewords(code: LinearCode) -> np.ndarray:
    words = enumerate_codewords(code).astype(np.int64)
    if code.rank < code.k:
        words = np.unique(words, axis=0)
    return words


def word_of_index(q: int, n: int, index: int) -> np.ndarray:
    return np.array([(index // q ** (n - 1 - j)) % q for j in range(n)], dtype=np.int64)


def ball_size(q: int, n: int, t: int) -> int:
    return sum(math.comb(n, w) * (q - 1) ** w for w in range(min(t, n) + 1))


@lru_cache(maxsize=64)
def ball_offsets(spec: FieldSpec, n: int, t: int) -> np.ndarray:
    """Every error pattern of weight <= t as an ``(N, n)`` digit array (read-only, cached)."""
    rows = []
    for w in range(min(t, n) + 1):
        for pos in itertools.combinations(range(n), w):
            for vals in itertools.product(range(1, spec.q), repeat=w):
                e = np.zeros(n, dtype=np.int64)
                e[list(pos)] = vals
                rows.append(e)
    out = np.asarray(rows, dtype=np.int64).reshape(-1, n)
    out.setflags(write=False)
    return out


def _check_center_cap(q: int, n: int, cap: int) -> None:
    if q**n > cap:
        raise CapExceeded(f"q^n = {q}^{n} centers exceed the exact-mode cap {cap}")


def _center_chunks(q: int, n: int, size: int = 1 << 15) -> Iterator[tuple[int, np.ndarray]]:
    total = q**n
    w = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, size):
        idx = np.arange(start, min(start + size, total), dtype=np.int64)
        yield start, (idx[:, None] // w[None, :]) % q


def ball_counts(spec: FieldSpec, words: np.ndarray, t: int, cap: int = CENTER_CAP) -> np.ndarray:
    """For every center z in F_q^n, the number of ``words`` within distance t."""
    words = np.asarray(words, dtype=np.int64)
    N, n = words.shape
    q = spec.q
    _check_center_cap(q, n, cap)
    size = ball_size(q, n, t)
    if size <= q**n:
        E = ball_offsets(spec, n, t)
        if q == 2:
            eidx = row_codes(2, E)
            widx = row_codes(2, words)
            hits = (widx[:, None] ^ eidx[None, :]).ravel()
        else:
            hits = np.concatenate([row_codes(q, spec.add(w[None, :], E)) for w in words])
        return np.bincount(hits, minlength=q**n)
    counts = np.zeros(q**n, dtype=np.int64)
    for start, Z in _center_chunks(q, n):
        d = np.count_nonzero(Z[:, None, :] != words[None, :, :], axis=2)
        counts[start : start + Z.shape[0]] = (d <= t).sum(axis=1)
    return counts


# -- clustered sets -------------------------------------------------------------------


def is_clustered(W, rho, q: int = 2, cap: int = CENTER_CAP) -> tuple[bool, np.ndarray | None]:
    """Exhaustive search for a center within radius ``rho`` of every word of ``W``.

    Centers are scanned in index order; a center is dropped as soon as one word
    is too far from it.  The first feasible center is returned.
    """
    W = np.atleast_2d(np.asarray(W, dtype=np.int64))
    n = W.shape[1]
    t = radius_budget(rho, n)
    if W.shape[0] == 0:
        return True, np.zeros(n, dtype=np.int64)
    _check_center_cap(q, n, cap)
    for _, Z in _center_chunks(q, n):
        alive = Z
        for w in W:
            keep = np.count_nonzero(alive != w[None, :], axis=1) <= t
            alive = alive[keep]
            if alive.shape[0] == 0:
                break
        if alive.shape[0]:
            return True, alive[0]
    return False, None


def is_list_decodable(code: LinearCode, rho, L: int, cap: int = CENTER_CAP) -> tuple[bool, Witness | None]:
    """Center enumeration: the code is not (rho, L)-LD iff some ball holds L+1 codewords."""
    words = distinct_codewords(code)
    n = code.m
    if L >= words.shape[0]:
        return True, None
    t = radius_budget(rho, n)
    counts = ball_counts(code.spec, words, t, cap)
    z = int(np.argmax(counts))
    if counts[z] < L + 1:
        return True, None
    center = word_of_index(code.q, n, z)
    near = words[np.count_nonzero(words != center[None, :], axis=1) <= t][: L + 1]
    return False, Witness("list-decoding", code.q, Fraction(rho), near.tolist(), center.tolist())


def max_list_size(code: LinearCode, rho, cap: int = CENTER_CAP) -> int:
    words = distinct_codewords(code)
    return int(ball_counts(code.spec, words, radius_budget(rho, code.m), cap).max())


def _ball_masks(q: int, words: np.ndarray, t: int) -> list[int]:
    """Per word, the set of centers within distance t as a Python-int bitset."""
    n = words.shape[1]
    masks = []
    for w in words:
        bits = np.zeros(q**n, dtype=np.uint8)
        for _, Z in _center_chunks(q, n, q**n):
            bits[:] = np.count_nonzero(Z != w[None, :], axis=1) <= t
        masks.append(int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little"))
    return masks


def is_list_decodable_subsets(code: LinearCode, rho, L: int, cap: int = 1 << 16) -> tuple[bool, Witness | None]:
    """Independent oracle: search (L+1)-subsets whose center sets intersect."""
    words = distinct_codewords(code)
    N, n = words.shape
    q = code.q
    if q**n > cap:
        raise CapExceeded("subset oracle is limited to small q^n")
    if L >= N:
        return True, None
    t = radius_budget(rho, n)
    masks = _ball_masks(q, words, t)
    full = (1 << q**n) - 1

    def extend(chosen: list[int], common: int, start: int):
        if len(chosen) == L + 1:
            return chosen, common
        for j in range(start, N):
            inter = common & masks[j]
            if inter:
                found = extend(chosen + [j], inter, j + 1)
                if found:
                    return found
        return None

    found = extend([], full, 0)
    if not found:
        return True, None
    chosen, common = found
    z = (common & -common).bit_length() - 1
    return False, Witness("list-decoding", q, Fraction(rho), words[chosen].tolist(), word_of_index(q, n, z).tolist())


# -- average radius ------------------------------------------------------------------


def plurality_center(W: np.ndarray, q: int) -> np.ndarray:
    counts = np.stack([(W == a).sum(axis=-2) for a in range(q)], axis=-1)
    return np.argmax(counts, axis=-1)


def is_avg_radius_ld(code: LinearCode, rho, L: int, cap: int = SUBSET_CAP, batch: int = 1 << 14) -> tuple[bool, Witness | None]:
    """Violated iff some (L+1)-subset has average distance <= rho to its plurality word."""
    words = distinct_codewords(code)
    N, n = words.shape
    q = code.q
    if L >= N:
        return True, None
    if math.comb(N, L + 1) > cap:
        raise CapExceeded(f"C({N}, {L + 1}) subsets exceed cap {cap}")
    rho = Fraction(rho)
    limit = rho * n * (L + 1)
    combos = itertools.combinations(range(N), L + 1)
    while True:
        block = np.array(list(itertools.islice(combos, batch)), dtype=np.int64)
        if block.size == 0:
            return True, None
        W = words[block]
        counts = np.stack([(W == a).sum(axis=1) for a in range(q)], axis=-1)
        total = ((L + 1) - counts.max(axis=-1)).sum(axis=1)
        bad = np.flatnonzero(total <= limit)
        if bad.size:
            S = W[bad[0]]
            z = plurality_center(S, q)
            return False, Witness("average-radius-LD", q, rho, S.tolist(), z.tolist())


# -- list recovery ----------------------------------------------------------------------


def _coverage_options(column: np.ndarray, ell: int) -> list[tuple[int, tuple[int, ...]]]:
    """Maximal coverage masks for one coordinate, with the symbol set achieving each."""
    syms = sorted(set(column.tolist()))
    size = min(ell, len(syms))
    out = {}
    for S in itertools.combinations(syms, size):
        mask = 0
        for j, s in enumerate(column.tolist()):
            if s in S:
                mask |= 1 << j
        out.setdefault(mask, S)
    return sorted(out.items())


def is_recovery_clustered(W, rho, ell: int, dp_cap: int = DP_CAP) -> tuple[bool, list[list[int]] | None]:
    """Dynamic programme over coordinates; the state is the vector of per-word miss counts."""
    W = np.atleast_2d(np.asarray(W, dtype=np.int64))
    s, n = W.shape
    t = radius_budget(rho, n)
    if s > 6:
        raise CapExceeded("recovery-clustered check supports at most 6 words")
    if (t + 2) ** s > dp_cap:
        raise CapExceeded("DP state space exceeds cap")
    states: dict[tuple[int, ...], None] = {(0,) * s: None}
    back: list[dict] = []
    for i in range(n):
        opts = _coverage_options(W[:, i], ell)
        nxt: dict[tuple[int, ...], tuple] = {}
        for st in states:
            for mask, S in opts:
                new = tuple(c + (0 if mask >> j & 1 else 1) for j, c in enumerate(st))
                if max(new) <= t and new not in nxt:
                    nxt[new] = (st, S)
        if not nxt:
            return False, None
        back.append(nxt)
        states = nxt
    # any surviving state is feasible; walk back from the lexicographically smallest
    st = min(states)
    Z: list[list[int]] = [[] for _ in range(n)]
    for i in range(n - 1, -1, -1):
        prev, S = back[i][st]
        Z[i] = list(S)
        st = prev
    return True, Z


def is_list_recoverable(code: LinearCode, rho, ell: int, L: int, cap: int = SUBSET_CAP) -> tuple[bool, Witness | None]:
    """Backtracking over codeword subsets; recovery-clustered sets are closed under subsets."""
    words = distinct_codewords(code)
    N = words.shape[0]
    if L >= N:
        return True, None
    if math.comb(N, L + 1) > cap:
        raise CapExceeded(f"C({N}, {L + 1}) subsets exceed cap {cap}")

    def extend(chosen: list[int], start: int):
        if len(chosen) == L + 1:
            return chosen
        for j in range(start, N):
            cand = chosen + [j]
            if len(cand) == 1 or is_recovery_clustered(words[cand], rho, ell)[0]:
                found = extend(cand, j + 1)
                if found:
                    return found
        return None

    chosen = extend([], 0)
    if chosen is None:
        return True, None
    S = words[chosen]
    _, Z = is_recovery_clustered(S, rho, ell)
    return False, Witness("list-recovery", code.q, Fraction(rho), S.tolist(), input_sets=Z, ell=ell)


# -- spans ---------------------------------------------------------------------------


def span_code(spec: FieldSpec, A) -> LinearCode:
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2:
        raise PropertyError("expected an n x b matrix")
    if rank(spec, A) < A.shape[1]:
        raise PropertyError("matrix must have full column rank")
    return LinearCode(spec, A.T)


def is_span_clustered(spec: FieldSpec, A, rho, size: int) -> bool:
    """Column span of A contains a rho-clustered set of ``size`` words."""
    code = span_code(spec, A)
    if code.q**code.k < size:
        return False
    return not is_list_decodable(code, rho, size - 1)[0]


def is_span_clustered_type(
    tau: EmpiricalDistribution,
    n: int,
    rho,
    size: int,
    rng: np.random.Generator | None = None,
) -> bool:
    """Span-clustering of a type, tested on its sorted representative and on a
    random row permutation (the answers must agree)."""
    if not tau.is_feasible(n):
        raise DistributionError(f"distribution is not {n}-feasible")
    if not tau.full_rank:
        raise DistributionError("distribution must be full rank")
    A = tau.canonical_matrix(n)
    verdict = is_span_clustered(tau.spec, A, rho, size)
    if rng is not None:
        perm = rng.permutation(n)
        if is_span_clustered(tau.spec, A[perm], rho, size) != verdict:
            raise AssertionError("row permutation changed the span-clustered verdict")
    return verdict


def hyperplane_subcodes(spec: FieldSpec, A) -> Iterator[LinearCode]:
    """Codes spanned by each maximal proper subspace of the column span of A."""
    A = np.asarray(A, dtype=np.int64)
    n, b = A.shape
    q = spec.q
    pts = point_digits(q, b)
    for y in pts[1:]:
        # projective representative: first nonzero coordinate equals 1
        if y[np.flatnonzero(y)[0]] != 1:
            continue
        inner = np.zeros(pts.shape[0], dtype=np.int64)
        for i in range(b):
            inner = spec.add(inner, spec.mul(pts[:, i], int(y[i])))
        msgs = pts[inner == 0]
        # basis of the hyperplane: rows of msgs reduced
        basis = msgs[np.any(msgs != 0, axis=1)]
        if basis.size == 0:
            sub = np.zeros((0, b), dtype=np.int64)
        else:
            R, piv = rref(spec, basis)
            sub = R[: len(piv)]
        G = np.zeros((sub.shape[0], n), dtype=np.int64)
        for r_i, msg in enumerate(sub):
            acc = np.zeros(n, dtype=np.int64)
            for j in range(b):
                acc = spec.add(acc, spec.mul(int(msg[j]), A[:, j]))
            G[r_i] = acc
        yield LinearCode(spec, G.reshape(sub.shape[0], n))


def minimal_set_membership(spec: FieldSpec, A, prop: PropertySpec) -> bool:
    """Span violates ``prop`` but no hyperplane of the span does."""
    code = span_code(spec, A)
    if not prop.violated_by(code):
        return False
    return not any(prop.violated_by(sub) for sub in hyperplane_subcodes(spec, A))


def permute_code(code: LinearCode, perm) -> LinearCode:
    return LinearCode(code.spec, code.generator[:, np.asarray(perm)], design_dim=code.design_dim)
