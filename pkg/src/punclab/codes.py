"""Linear codes given by generator matrices, bias and distance certification,
and the mother-code constructions used by the experiments.

Symbols are stored as field-element indices (see :mod:`punclab.gf`), so a
generator is a plain ``k x m`` integer array.  Codewords are 1-D integer arrays.
Messages are ordered canonically: the message ``(y_1, ..., y_k)`` has index
``sum(y_i * q**(k - i))``, i.e. the first coordinate is the most significant.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .gf import CapExceeded, FieldError, FieldSpec, field

CODEWORD_CAP = 1 << 24
_BIN_MAGIC = b"PLC1"


class CodeError(ValueError):
    pass


# -- linear algebra over GF(q) ---------------------------------------------------


def _rank_gf2(M: np.ndarray) -> int:
    basis: dict[int, int] = {}
    for row in M:
        v = int.from_bytes(np.packbits(row.astype(np.uint8)).tobytes(), "big")
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def rref(spec: FieldSpec, M) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    M = np.array(M, dtype=np.int64, copy=True)
    if M.ndim != 2:
        raise CodeError("rref expects a 2-D matrix")
    rows, cols = M.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            M[[r, piv]] = M[[piv, r]]
        M[r] = spec.mul(M[r], spec.inv_table[M[r, c]])
        factors = M[:, c].copy()
        factors[r] = 0
        if factors.any():
            M = spec.sub(M, spec.mul(factors[:, None], M[r][None, :]))
        pivots.append(c)
        r += 1
    return M, pivots


def rank(spec: FieldSpec, M) -> int:
    M = np.asarray(M, dtype=np.int64)
    if M.size == 0:
        return 0
    if spec.q == 2:
        return _rank_gf2(M)
    return len(rref(spec, M)[1])


# -- words ------------------------------------------------------------------------


def weight(u) -> Fraction:
    u = np.asarray(u)
    if u.size == 0:
        raise CodeError("weight of an empty word is undefined")
    return Fraction(int(np.count_nonzero(u)), int(u.size))


def _trace_counts(spec: FieldSpec, traces: np.ndarray) -> np.ndarray:
    return np.bincount(traces, minlength=spec.p)


def _char_sum_abs(counts: np.ndarray, p: int) -> float:
    """``|sum_t counts[t] * omega**t|`` with exact integer arithmetic for p <= 3."""
    if p == 2:
        return float(abs(int(counts[0]) - int(counts[1])))
    c = [int(x) for x in counts]
    if p == 3:
        norm2 = c[0] ** 2 + c[1] ** 2 + c[2] ** 2 - c[0] * c[1] - c[1] * c[2] - c[0] * c[2]
        return math.sqrt(norm2)
    w = np.exp(2j * np.pi * np.arange(p) / p)
    return float(abs(np.dot(counts, w)))


def bias_of_word(spec: FieldSpec, u) -> float:
    """Smallest eta for which ``u`` is eta-biased."""
    u = np.asarray(u, dtype=np.int64)
    m = u.size
    if m == 0:
        raise CodeError("bias of an empty word is undefined")
    if spec.q == 2:
        return abs(m - 2 * int(np.count_nonzero(u))) / m
    best = 0.0
    for a in range(1, spec.q):
        counts = _trace_counts(spec, spec.tr(spec.mul(a, u)))
        best = max(best, _char_sum_abs(counts, spec.p) / m)
    return best


# -- codes ------------------------------------------------------------------------


class LinearCode:
    """Row span of a ``k x m`` generator over ``spec``.

    Rows need not be independent; ``rank`` is computed on demand.  The design
    dimension defaults to ``k`` and is carried through puncturing so design and
    actual rates can be compared.
    """

    def __init__(self, spec: FieldSpec, generator, design_dim: int | None = None, name: str = ""):
        G = np.array(generator, dtype=np.int64, copy=True)
        if G.ndim == 1 and G.size == 0:
            G = G.reshape(0, 0)
        if G.ndim != 2:
            raise CodeError("generator must be a 2-D array")
        if G.size and (G.min() < 0 or G.max() >= spec.q):
            raise CodeError(f"generator entries must lie in [0, {spec.q})")
        G.setflags(write=False)
        self.spec = spec
        self._G = G
        self.k, self.m = G.shape
        self.design_dim = self.k if design_dim is None else int(design_dim)
        self.name = name

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def generator(self) -> np.ndarray:
        return self._G

    def columns(self, idx) -> np.ndarray:
        """Generator columns at 0-based positions ``idx`` (repetition allowed)."""
        return self._G[:, np.asarray(idx, dtype=np.int64)]

    @cached_property
    def rank(self) -> int:
        return rank(self.spec, self.generator)

    @property
    def size(self) -> int:
        return self.q**self.rank

    @property
    def design_rate(self) -> Fraction:
        return Fraction(self.design_dim, self.m) if self.m else Fraction(0)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.rank, self.m) if self.m else Fraction(0)

    def column_codes(self, idx=None) -> np.ndarray:
        """Each column of the generator as an index into F_q^k (first row most significant)."""
        cols = self.generator if idx is None else self.columns(idx)
        out = np.zeros(cols.shape[1], dtype=np.int64)
        for row in cols:
            out = out * self.q + row
        return out

    def contains(self, word) -> bool:
        word = np.asarray(word, dtype=np.int64).reshape(1, -1)
        if word.shape[1] != self.m:
            raise CodeError("word length differs from code length")
        if not word.any():
            return True
        return rank(self.spec, np.vstack([self.generator, word])) == self.rank

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()

    # -- serialisation --------------------------------------------------------

    def to_bytes(self) -> bytes:
        if self.q > 256:
            raise CodeError("binary layout stores one byte per symbol (q <= 256)")
        spec = self.spec
        head = _BIN_MAGIC + struct.pack("<HB", spec.p, spec.r) + bytes(spec.modulus)
        head += struct.pack("<II", self.k, self.m)
        return head + self.generator.astype(np.uint8).tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "LinearCode":
        if blob[:4] != _BIN_MAGIC:
            raise CodeError("not a serialised code")
        p, r = struct.unpack_from("<HB", blob, 4)
        off = 7
        modulus = tuple(blob[off : off + r + 1])
        off += r + 1
        k, m = struct.unpack_from("<II", blob, off)
        off += 8
        body = np.frombuffer(blob, dtype=np.uint8, count=k * m, offset=off)
        return cls(field(p, r, modulus), body.reshape(k, m))

    def to_json(self) -> dict:
        spec = self.spec
        return {
            "q": spec.q,
            "p": spec.p,
            "r": spec.r,
            "modulus": list(spec.modulus),
            "k": self.k,
            "m": self.m,
            "design_dim": self.design_dim,
            "generator": self.generator.tolist(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "LinearCode":
        spec = field(d["p"], d["r"], d["modulus"])
        G = np.asarray(d["generator"], dtype=np.int64).reshape(d["k"], d["m"])
        return cls(spec, G, d.get("design_dim"))

    def __repr__(self) -> str:
        label = f"{self.name} " if self.name else ""
        return f"<LinearCode {label}q={self.q} k={self.k} m={self.m}>"


class HadamardCode(LinearCode):
    """Hadamard code with columns generated on demand, so large ``k`` can be punctured."""

    def __init__(self, spec: FieldSpec, k: int, cap: int = 1 << 26):
        if k < 0:
            raise CodeError("k must be non-negative")
        m = spec.q**k
        if m > cap:
            raise CapExceeded(f"Hadamard length q^k = {m} exceeds cap {cap}")
        self.spec = spec
        self.k = k
        self.m = m
        self.design_dim = k
        self.name = f"hadamard-{k}"
        self._G = None
        self._weights = spec.q ** np.arange(k - 1, -1, -1, dtype=np.int64)

    def columns(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        return (idx[None, :] // self._weights[:, None]) % self.q

    @property
    def generator(self) -> np.ndarray:
        if self._G is None:
            if self.k * self.m > 1 << 26:
                raise CapExceeded("Hadamard generator too large to materialise")
            G = self.columns(np.arange(self.m))
            G.setflags(write=False)
            self._G = G
        return self._G

    def column_codes(self, idx=None) -> np.ndarray:
        if idx is None:
            return np.arange(self.m, dtype=np.int64)
        return np.asarray(idx, dtype=np.int64)

    @cached_property
    def rank(self) -> int:
        return self.k

    def digest(self) -> str:
        blob = json.dumps({"hadamard": self.k, "field": self.spec.to_dict()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class NonlinearCode:
    """An explicit set of words (no linear structure)."""

    spec: FieldSpec
    words: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.words:
            raise CodeError("empty word set")
        lengths = {len(w) for w in self.words}
        if len(lengths) != 1:
            raise CodeError("all words must have the same length")
        if len(set(self.words)) != len(self.words):
            raise CodeError("duplicate words")

    @property
    def m(self) -> int:
        return len(self.words[0])

    def as_array(self) -> np.ndarray:
        return np.asarray(self.words, dtype=np.int64)


# -- encoding and enumeration -----------------------------------------------------


def encode(code: LinearCode, message) -> np.ndarray:
    msg = np.asarray(message, dtype=np.int64)
    if msg.shape != (code.k,):
        raise CodeError(f"message length {msg.size} differs from k = {code.k}")
    spec = code.spec
    if spec.r == 1:
        return (msg @ code.generator) % spec.p
    out = np.zeros(code.m, dtype=np.int64)
    for a, row in zip(msg, code.generator):
        if a:
            out = spec.add(out, spec.mul(int(a), row))
    return out


def message_of_index(q: int, k: int, index: int) -> np.ndarray:
    digits = [(index // q ** (k - 1 - i)) % q for i in range(k)]
    return np.asarray(digits, dtype=np.int64)


def _check_cap(code: LinearCode, cap: int) -> None:
    if code.q**code.k > cap:
        raise CapExceeded(
            f"q^k = {code.q}^{code.k} exceeds the codeword cap {cap}; "
            "use the Monte Carlo bias lower-bound mode instead"
        )


def enumerate_codewords(code: LinearCode, cap: int = CODEWORD_CAP) -> np.ndarray:
    """All ``q^k`` codewords (one per message, canonical message order) as rows."""
    _check_cap(code, cap)
    spec = code.spec
    dtype = np.uint8 if spec.q <= 256 else np.int64
    words = np.zeros((1, code.m), dtype=dtype)
    mult = [spec.mul(a, code.generator) for a in range(spec.q)] if code.k else []
    for i in range(code.k - 1, -1, -1):
        blocks = [words]
        for a in range(1, spec.q):
            blocks.append(spec.add(words, mult[a][i][None, :]).astype(dtype))
        words = np.concatenate(blocks, axis=0)
    return words


def pack_bits(words) -> np.ndarray:
    """Binary words (rows) to uint64 with coordinate j at bit j."""
    words = np.asarray(words)
    if words.shape[-1] > 64:
        raise CodeError("packing supports at most 64 coordinates")
    shifts = np.arange(words.shape[-1], dtype=np.uint64)
    return (words.astype(np.uint64) << shifts).sum(axis=-1, dtype=np.uint64)


def packed_codewords(code: LinearCode, cap: int = CODEWORD_CAP) -> np.ndarray:
    """Binary codewords packed as uint64, in canonical message order."""
    if code.q != 2:
        raise CodeError("packed codewords need q = 2")
    _check_cap(code, cap)
    rows = pack_bits(code.generator) if code.k else np.zeros(0, dtype=np.uint64)
    words = np.zeros(1, dtype=np.uint64)
    for i in range(code.k - 1, -1, -1):
        words = np.concatenate([words, words ^ rows[i]])
    return words


# -- bias / distance certification ------------------------------------------------


class CodeProfile(NamedTuple):
    """Per-message zero counts and bias of ``message * G`` for every message."""

    zero_counts: np.ndarray
    bias: np.ndarray
    m: int
    q: int

    @property
    def nonzero(self) -> np.ndarray:
        return self.zero_counts < self.m

    def weights(self) -> np.ndarray:
        return (self.m - self.zero_counts) / self.m


def _transform_axes(a: np.ndarray, X: np.ndarray, k: int) -> np.ndarray:
    for axis in range(k):
        a = np.moveaxis(np.tensordot(X, a, axes=([1], [axis])), 0, axis)
    return a


def _wht(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    n = a.size
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        a = np.stack([a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]], axis=1)
        h *= 2
    return a.reshape(n)


def _scaled_indices(spec: FieldSpec, k: int, a: int) -> np.ndarray:
    """Index of ``a * y`` for every message index ``y``."""
    q = spec.q
    y = np.arange(q**k, dtype=np.int64)
    out = np.zeros_like(y)
    for i in range(k):
        w = q ** (k - 1 - i)
        out += spec.mul(a, (y // w) % q) * w
    return out


def character_spectrum(code: LinearCode, cap: int = CODEWORD_CAP) -> np.ndarray:
    """``S(y) = sum_j omega**tr(<y, G_j>)`` for every message ``y``.

    Integer valued when p = 2, complex otherwise.
    """
    _check_cap(code, cap)
    spec, k = code.spec, code.k
    hist = np.bincount(code.column_codes(), minlength=spec.q**k).astype(np.int64)
    if spec.q == 2:
        return _wht(hist)
    X = spec.character_matrix
    return _transform_axes(hist.reshape((spec.q,) * k), X, k).reshape(-1)


def code_profile(code: LinearCode, cap: int = CODEWORD_CAP) -> CodeProfile:
    spec, k, m = code.spec, code.k, code.m
    S = character_spectrum(code, cap)
    if spec.q == 2:
        zero = (m + S) // 2
        return CodeProfile(zero, np.abs(S) / m, m, 2)
    q, p = spec.q, spec.p
    scaled = {a: _scaled_indices(spec, k, a) for a in range(1, q)}
    total = np.full(S.shape, complex(m)) if np.iscomplexobj(S) else np.full(S.shape, m)
    for a in range(1, q):
        total = total + S[scaled[a]]
    zero = np.rint(np.real(total) / q).astype(np.int64)
    if spec.p == 2:
        # characters are real +-1 here, so the spectrum is exact
        absS = np.abs(S).astype(np.float64)
        bias = np.max(np.stack([absS[scaled[a]] for a in range(1, q)]), axis=0) / m
        return CodeProfile(zero, bias, m, q)
    # recover integer trace-value counts c_t(y) so magnitudes come from exact data
    omega = np.exp(2j * np.pi / p)
    counts = np.zeros((p,) + S.shape, dtype=np.int64)
    for t in range(p):
        acc = np.zeros(S.shape, dtype=complex)
        for s in range(p):
            acc += omega ** (-s * t) * (m if s == 0 else S[scaled[s]])
        counts[t] = np.rint(np.real(acc) / p).astype(np.int64)
    if p == 3:
        c0, c1, c2 = counts
        mag = np.sqrt((c0 * c0 + c1 * c1 + c2 * c2 - c0 * c1 - c1 * c2 - c0 * c2).astype(np.float64))
    else:
        mag = np.abs(np.tensordot(omega ** np.arange(p), counts, axes=(0, 0)))
    bias = np.max(np.stack([mag[scaled[a]] for a in range(1, q)]), axis=0) / m
    return CodeProfile(zero, bias, m, q)


def code_bias(code: LinearCode, cap: int = CODEWORD_CAP) -> float:
    prof = code_profile(code, cap)
    nz = prof.nonzero
    return float(prof.bias[nz].max()) if nz.any() else 0.0


def eta_from_min_weight(min_weight, q: int) -> float:
    return max(0.0, 1.0 - q * float(min_weight) / (q - 1))


def code_distance_eta(code: LinearCode, cap: int = CODEWORD_CAP) -> float:
    prof = code_profile(code, cap)
    nz = prof.nonzero
    if not nz.any():
        return 0.0
    wmin = Fraction(int(code.m - prof.zero_counts[nz].max()), code.m)
    return eta_from_min_weight(wmin, code.q)


class BiasEstimate(NamedTuple):
    value: float
    samples: int
    certified: bool


def estimate_bias_lower(code: LinearCode, samples: int, rng: np.random.Generator) -> BiasEstimate:
    """Uncertified lower bound: the largest bias among randomly sampled codewords."""
    best = 0.0
    for _ in range(samples):
        msg = rng.integers(0, code.q, code.k)
        u = encode(code, msg)
        if u.any():
            best = max(best, bias_of_word(code.spec, u))
    return BiasEstimate(best, samples, False)


# -- constructions --------------------------------------------------------------


def make_hadamard(spec: FieldSpec, k: int) -> HadamardCode:
    return HadamardCode(spec, k)


def make_trace_code(outer: FieldSpec, base: FieldSpec, d: int) -> LinearCode:
    """Trace evaluations ``(tr f(alpha))_alpha`` of polynomials with ``f(0) = 0``, ``deg f < d``.

    The base field must be the prime subfield of ``outer``.
    """
    if base.r != 1 or base.p != outer.p:
        raise FieldError("the base field must be the prime subfield of the outer field")
    if d < 1:
        raise CodeError("degree bound must be >= 1")
    if outer.q > CODEWORD_CAP:
        raise CapExceeded("outer field too large")
    elems = outer.elements()
    rows = []
    for j in range(1, d):
        powers = outer._pow_vec(elems, j)
        for t in range(outer.r):
            beta = outer.p**t
            rows.append(outer.tr(outer.mul(beta, powers)))
    G = np.asarray(rows, dtype=np.int64).reshape(len(rows), outer.q)
    return LinearCode(base, G, name=f"trace-q{outer.q}-d{d}")


def make_random_linear(spec: FieldSpec, k: int, m: int, rng: np.random.Generator) -> LinearCode:
    G = rng.integers(0, spec.q, size=(k, m), dtype=np.int64)
    return LinearCode(spec, G, name=f"random-{k}x{m}")


def make_counterexample(m: int) -> NonlinearCode:
    """Balanced binary words containing a complementary pair ``x``, ``y``."""
    if m < 2 or m % 2:
        raise CodeError("counterexample length must be even and positive")
    half = m // 2
    x = (1,) * half + (0,) * half
    y = (0,) * half + (1,) * half
    words = [x, y]
    alt = tuple(i % 2 for i in range(m))
    for w in (alt, tuple(1 - c for c in alt)):
        if w not in words:
            words.append(w)
    return NonlinearCode(field(2), tuple(words))
