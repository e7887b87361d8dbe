"""Arithmetic over GF(p^r) in a polynomial basis.

Elements are encoded as integers ``v = sum(c_i * p**i)`` where ``c_i`` is the
coefficient of ``x**i``.  Integer order therefore equals lexicographic order on
the coefficient vector read from the highest degree down, and ``0`` is always
the first element.  All table-driven operations accept Python ints or numpy
integer arrays.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

ENUMERATION_CAP = 1 << 20
_TABLE_CAP = 1 << 8  # full q x q tables up to this order

# coefficient lists, lowest degree first, monic
DEFAULT_MODULI = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 0, 0, 0, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (5, 2): (2, 4, 1),
}


class FieldError(ValueError):
    pass


class CapExceeded(RuntimeError):
    """An exhaustive computation would exceed a configured size cap."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p**0.5) + 1))


def _poly_mod(num: list[int], den: list[int], p: int) -> list[int]:
    num = list(num)
    inv_lead = pow(den[-1], p - 2, p)
    while len(num) >= len(den):
        coef = num[-1] * inv_lead % p
        shift = len(num) - len(den)
        if coef:
            for i, d in enumerate(den):
                num[shift + i] = (num[shift + i] - coef * d) % p
        num.pop()
        while num and num[-1] == 0:
            num.pop()
    return num


def is_irreducible(modulus, p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..r//2."""
    modulus = [int(c) % p for c in modulus]
    r = len(modulus) - 1
    if r < 1 or modulus[-1] == 0:
        return False
    if r == 1:
        return True
    if modulus[0] == 0:
        return False
    for d in range(1, r // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            if not _poly_mod(modulus, list(low) + [1], p):
                return False
    return True


def _poly_mulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    while out and out[-1] == 0:
        out.pop()
    return _poly_mod(out, f, p)


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def x_is_primitive(modulus, p: int) -> bool:
    """True when x generates the multiplicative group modulo ``modulus``."""
    f = list(modulus)
    order = p ** (len(f) - 1) - 1

    def xpow(e: int) -> list[int]:
        result, base = [1], _poly_mod([0, 1], f, p)
        while e:
            if e & 1:
                result = _poly_mulmod(result, base, f, p)
            base = _poly_mulmod(base, base, f, p)
            e >>= 1
        return result

    if xpow(order) != [1]:
        return False
    return all(xpow(order // t) != [1] for t in _prime_factors(order))


def find_irreducible(p: int, r: int, primitive: bool = True) -> tuple[int, ...]:
    """Lexicographically first monic irreducible (by default also primitive) polynomial."""
    for low in itertools.product(range(p), repeat=r):
        cand = tuple(reversed(low)) + (1,)
        if is_irreducible(cand, p) and (not primitive or x_is_primitive(cand, p)):
            return cand
    raise FieldError(f"no irreducible polynomial of degree {r} over GF({p})")


class FieldSpec:
    """The field GF(p^r) with a fixed irreducible modulus.

    Parameters
    ----------
    p : int
        Prime characteristic.
    r : int
        Extension degree.
    modulus : sequence of int, optional
        ``r + 1`` coefficients, lowest degree first.  Defaults to the built-in
        table, or the lexicographically first irreducible polynomial.
    """

    def __init__(self, p: int, r: int = 1, modulus=None):
        if not is_prime(p):
            raise FieldError(f"characteristic {p} is not prime")
        if r < 1:
            raise FieldError(f"extension degree must be >= 1, got {r}")
        q = p**r
        if q > ENUMERATION_CAP:
            raise CapExceeded(f"GF({p}^{r}) exceeds the 2^20 field-size cap")
        if modulus is None:
            if r == 1:
                modulus = (0, 1)
            else:
                modulus = DEFAULT_MODULI.get((p, r)) or find_irreducible(p, r)
        modulus = tuple(int(c) for c in modulus)
        if len(modulus) != r + 1:
            raise FieldError(f"modulus needs {r + 1} coefficients, got {len(modulus)}")
        if any(not 0 <= c < p for c in modulus):
            raise FieldError("modulus coefficients must lie in [0, p)")
        if modulus[-1] != 1:
            raise FieldError("modulus must be monic")
        if not is_irreducible(modulus, p):
            raise FieldError(f"modulus {modulus} is reducible over GF({p})")
        self.p = p
        self.r = r
        self.q = q
        self.modulus = modulus
        self._powers = p ** np.arange(r, dtype=np.int64)
        self._build()

    # -- construction ------------------------------------------------------

    def _build(self) -> None:
        p, r, q = self.p, self.r, self.q
        elems = np.arange(q, dtype=np.int64)
        self.digits = (elems[:, None] // self._powers[None, :]) % p
        # x^j mod f for j < 2r - 1, as digit rows
        red = np.zeros((max(2 * r - 1, 1), r), dtype=np.int64)
        for j in range(2 * r - 1):
            poly = [0] * j + [1]
            rem = _poly_mod(poly, list(self.modulus), p) if j >= r else poly
            red[j, : len(rem)] = rem
        self._reduce = red
        self.neg_table = self._encode((-self.digits) % p)
        self.add_table = self.mul_table = None
        self._exp = self._log = None
        if r > 1 and q <= _TABLE_CAP:
            a, b = np.meshgrid(elems, elems, indexing="ij")
            self.add_table = self._add_digits(a, b)
            self.mul_table = self._mul_digits(a, b)
        elif r > 1 and x_is_primitive(self.modulus, p):
            self._build_log_tables()
        inv = np.zeros(q, dtype=np.int64)
        if q > 1:
            inv[1:] = self._pow_vec(elems[1:], q - 2)
        self.inv_table = inv
        acc = elems.copy()
        tr = elems.copy()
        for _ in range(r - 1):
            acc = self._pow_vec(acc, p)
            tr = self.add(tr, acc)
        if np.any(tr >= p):
            raise FieldError("trace left the prime subfield; modulus is not a field")
        self.trace_table = tr

    def _build_log_tables(self) -> None:
        p, r, q = self.p, self.r, self.q
        # x^r = -(f_0 + ... + f_{r-1} x^{r-1})
        xr = [(-c) % p for c in self.modulus[:-1]]
        weights = [p**i for i in range(r)]
        exp = np.empty(q - 1, dtype=np.int64)
        digs = [1] + [0] * (r - 1)
        for e in range(q - 1):
            exp[e] = sum(d * w for d, w in zip(digs, weights))
            c = digs[-1]
            digs = [0] + digs[:-1]
            if c:
                digs = [(d + c * t) % p for d, t in zip(digs, xr)]
        log = np.zeros(q, dtype=np.int64)
        log[exp] = np.arange(q - 1)
        self._exp, self._log = exp, log

    def _encode(self, digits) -> np.ndarray:
        return np.asarray(digits, dtype=np.int64) @ self._powers

    def _add_digits(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        return self._encode((self.digits[a] + self.digits[b]) % self.p)

    def _mul_digits(self, a, b):
        if self.r == 1:
            return (np.asarray(a, dtype=np.int64) * b) % self.p
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        da = self.digits[a]
        db = self.digits[b]
        r = self.r
        conv = np.zeros(da.shape[:-1] + (2 * r - 1,), dtype=np.int64)
        for i in range(r):
            conv[..., i : i + r] += da[..., i : i + 1] * db
        return self._encode((conv @ self._reduce) % self.p)

    def _pow_vec(self, a, e: int):
        a = np.asarray(a, dtype=np.int64)
        out = np.ones_like(a)
        base = a.copy()
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    # -- vectorised arithmetic ---------------------------------------------

    def add(self, a, b):
        if self.p == 2:
            return np.bitwise_xor(a, b)
        if self.r == 1:
            return (np.asarray(a) + b) % self.p
        if self.add_table is not None:
            return self.add_table[a, b]
        return self._add_digits(a, b)

    def neg(self, a):
        return self.neg_table[a]

    def sub(self, a, b):
        return self.add(a, self.neg_table[b])

    def mul(self, a, b):
        if self.r == 1:
            return (np.asarray(a, dtype=np.int64) * b) % self.p
        if self.mul_table is not None:
            return self.mul_table[a, b]
        if self._exp is not None:
            a = np.asarray(a, dtype=np.int64)
            b = np.asarray(b, dtype=np.int64)
            out = self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]
            return np.where((a == 0) | (b == 0), 0, out)
        return self._mul_digits(a, b)

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return self.inv_table[a]

    def tr(self, a):
        return self.trace_table[a]

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    # -- misc ----------------------------------------------------------------

    @cached_property
    def omega(self) -> complex:
        return cmath.exp(2j * cmath.pi / self.p)

    @cached_property
    def character_matrix(self) -> np.ndarray:
        """``X[y, x] = omega ** tr(x * y)`` over a single coordinate."""
        e = self.elements()
        t = self.tr(self.mul(e[:, None], e[None, :]))
        if self.p == 2:
            return (1 - 2 * t).astype(np.int64)
        return np.exp(2j * np.pi * t / self.p)

    def key(self) -> tuple:
        return (self.p, self.r, self.modulus)

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldSpec) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"FieldSpec(p={self.p}, r={self.r}, modulus={self.modulus})"

    def to_dict(self) -> dict:
        return {"p": self.p, "r": self.r, "modulus": list(self.modulus)}

    @classmethod
    def from_dict(cls, d: dict) -> "FieldSpec":
        return field(d["p"], d.get("r", 1), d.get("modulus"))

    def __call__(self, value) -> "FieldElement":
        if isinstance(value, (tuple, list)):
            return FieldElement.from_coeffs(self, value)
        return FieldElement(self, int(value))


_FIELDS: dict = {}


def field(p: int, r: int = 1, modulus=None) -> FieldSpec:
    """Cached constructor; table building is not free for large q."""
    key = (p, r, None if modulus is None else tuple(modulus))
    if key not in _FIELDS:
        _FIELDS[key] = FieldSpec(p, r, modulus)
    return _FIELDS[key]


def field_of_order(q: int) -> FieldSpec:
    for p in range(2, q + 1):
        if q % p == 0:
            break
    r, t = 0, q
    while t % p == 0:
        t //= p
        r += 1
    if t != 1 or not is_prime(p):
        raise FieldError(f"{q} is not a prime power")
    return field(p, r)


@dataclass(frozen=True)
class FieldElement:
    spec: FieldSpec
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.spec.q:
            raise FieldError(f"{self.value} is not an element of GF({self.spec.q})")

    @classmethod
    def from_coeffs(cls, spec: FieldSpec, coeffs) -> "FieldElement":
        coeffs = list(coeffs) + [0] * (spec.r - len(coeffs))
        if len(coeffs) != spec.r or any(not 0 <= c < spec.p for c in coeffs):
            raise FieldError(f"bad coefficient vector {coeffs}")
        return cls(spec, int(sum(c * spec.p**i for i, c in enumerate(coeffs))))

    @property
    def coeffs(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.spec.digits[self.value])

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement) or other.spec != self.spec:
            raise FieldError("operands belong to different fields")

    def __add__(self, other):
        return field_add(self, other)

    def __sub__(self, other):
        self._check(other)
        return FieldElement(self.spec, int(self.spec.sub(self.value, other.value)))

    def __neg__(self):
        return FieldElement(self.spec, int(self.spec.neg(self.value)))

    def __mul__(self, other):
        return field_mul(self, other)

    def __truediv__(self, other):
        return field_mul(self, field_inv(other))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"GF({self.spec.q})[{self.value}]"


def field_add(a: FieldElement, b: FieldElement) -> FieldElement:
    a._check(b)
    return FieldElement(a.spec, int(a.spec.add(a.value, b.value)))


def field_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    a._check(b)
    return FieldElement(a.spec, int(a.spec.mul(a.value, b.value)))


def field_inv(a: FieldElement) -> FieldElement:
    if a.value == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse")
    return FieldElement(a.spec, int(a.spec.inv_table[a.value]))


def trace(a: FieldElement) -> FieldElement:
    """Absolute trace, returned as an element of GF(p)."""
    return FieldElement(field(a.spec.p), int(a.spec.trace_table[a.value]))


def enumerate_field(spec: FieldSpec, cap: int = ENUMERATION_CAP) -> list[FieldElement]:
    if spec.q > cap:
        raise CapExceeded(f"GF({spec.q}) exceeds enumeration cap {cap}")
    return [FieldElement(spec, v) for v in range(spec.q)]
