"""The base prism A = Z_p[[u]] and the ring O_max = A[E/p]^.

Series are dense coefficient tuples modulo ``(p**prec, u**N)``.  ``N=None``
marks an exact polynomial, which is how Eisenstein polynomials and Kisin
matrices enter the higher rings without losing u-adic information.

O_max modulo p^P is (Z/p^P)[T][u] / (E(u) - p T) with T standing for E/p.
Because E is monic of degree e, every element has a unique expansion
sum c[l, n] u^n T^l with 0 <= n < e; this is the canonical form used for
equality testing.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property

import flint

from .padic import (
    InexactDivisionError,
    NotInvertibleError,
    PrecisionError,
    TruncatedScalar,
    is_prime,
    valuation,
)

__all__ = [
    "TruncationError",
    "SeriesElement",
    "Eisenstein",
    "parse_polynomial",
    "series_arith",
    "frobenius_A",
    "delta_A",
    "is_distinguished",
    "OMaxRing",
    "OMaxElement",
    "omax_canonicalize",
    "omax_c_and_inverse",
]


class TruncationError(ArithmeticError):
    """A result would need terms beyond the configured truncation."""


def _min_n(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class SeriesElement:
    __slots__ = ("p", "prec", "N", "coeffs")

    def __init__(self, p: int, prec: int, N: int | None, coeffs):
        if prec < 0:
            raise PrecisionError("negative precision")
        mod = p**prec
        cs = [c % mod for c in coeffs]
        if N is not None:
            cs = cs[:N]
        while cs and cs[-1] == 0:
            cs.pop()
        self.p = p
        self.prec = prec
        self.N = N
        self.coeffs = tuple(cs)

    # -- constructors --------------------------------------------------------
    @classmethod
    def const(cls, p, prec, N, value: int) -> "SeriesElement":
        return cls(p, prec, N, [value])

    @classmethod
    def gen(cls, p, prec, N) -> "SeriesElement":
        return cls(p, prec, N, [0, 1])

    def _like(self, coeffs, prec=None, N="same") -> "SeriesElement":
        return SeriesElement(self.p, self.prec if prec is None else prec, self.N if N == "same" else N, coeffs)

    def _coerce(self, other) -> "SeriesElement":
        if isinstance(other, SeriesElement):
            if other.p != self.p:
                raise ValueError(f"mismatched primes {self.p} and {other.p}")
            return other
        if isinstance(other, TruncatedScalar):
            return SeriesElement(self.p, other.prec, None, [other.residue])
        if isinstance(other, int):
            return SeriesElement(self.p, self.prec, None, [other])
        raise TypeError(f"cannot combine series with {type(other).__name__}")

    # -- access --------------------------------------------------------------
    def coeff(self, n: int) -> TruncatedScalar:
        if self.N is not None and n >= self.N:
            raise TruncationError(f"u^{n} is beyond truncation u^{self.N}")
        c = self.coeffs[n] if n < len(self.coeffs) else 0
        return TruncatedScalar.make(self.p, c, self.prec)

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_unit(self) -> bool:
        return self.prec > 0 and bool(self.coeffs) and self.coeffs[0] % self.p != 0

    def valuation(self) -> int:
        """Minimum p-adic valuation of the coefficients (``prec`` if zero)."""
        vs = [valuation(c, self.p) for c in self.coeffs if c]
        return min(vs) if vs else self.prec

    def truncate(self, N: int | None) -> "SeriesElement":
        return self._like(self.coeffs, N=_min_n(self.N, N))

    def reduce(self, prec: int) -> "SeriesElement":
        return self._like(self.coeffs, prec=min(prec, self.prec))

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return SeriesElement(self.p, min(self.prec, other.prec), _min_n(self.N, other.N), [x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return self._like([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        N = _min_n(self.N, other.N)
        prec = min(self.prec, other.prec)
        a, b = self.coeffs, other.coeffs
        if len(b) == 1:
            return SeriesElement(self.p, prec, N, [x * b[0] for x in a])
        if len(a) == 1:
            return SeriesElement(self.p, prec, N, [x * a[0] for x in b])
        size = len(a) + len(b) - 1
        if N is not None:
            size = min(size, N)
        out = [0] * max(size, 0)
        for i, x in enumerate(a):
            if not x or i >= size:
                continue
            for j in range(min(len(b), size - i)):
                out[i + j] += x * b[j]
        return SeriesElement(self.p, prec, N, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = SeriesElement(self.p, self.prec, self.N, [1])
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, TruncatedScalar, SeriesElement)):
            d = self - self._coerce(other)
            return d.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.prec, self.N, self.coeffs))

    def div_p(self, k: int = 1) -> "SeriesElement":
        if k > self.prec:
            raise PrecisionError(f"cannot divide by p^{k} at precision {self.prec}")
        q = self.p**k
        if any(c % q for c in self.coeffs):
            raise InexactDivisionError(f"series not divisible by {self.p}^{k}")
        return self._like([c // q for c in self.coeffs], prec=self.prec - k)

    def frobenius(self) -> "SeriesElement":
        p = self.p
        size = len(self.coeffs) and (len(self.coeffs) - 1) * p + 1
        if self.N is not None:
            size = min(size, self.N)
        out = [0] * size
        for n, c in enumerate(self.coeffs):
            if n * p < size:
                out[n * p] = c
        return self._like(out)

    def delta(self) -> "SeriesElement":
        return (self.frobenius() - self**self.p).div_p(1)

    def inverse(self) -> "SeriesElement":
        if not self.is_unit():
            raise NotInvertibleError("series with non-unit constant term")
        if self.N is None:
            raise TruncationError("inverse of a polynomial needs a u-adic truncation")
        mod = self.p**self.prec
        a = self.coeffs
        inv0 = pow(a[0], -1, mod)
        out = [inv0] + [0] * (self.N - 1)
        for n in range(1, self.N):
            s = 0
            for j in range(1, min(n, len(a) - 1) + 1):
                s += a[j] * out[n - j]
            out[n] = -s * inv0 % mod
        return self._like(out)

    def __call__(self, x):
        """Evaluate at ``x`` (anything supporting + and * with ints)."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self):
        terms = [f"{c}*u^{n}" for n, c in enumerate(self.coeffs) if c]
        body = " + ".join(terms) or "0"
        tail = "" if self.N is None else f" + O(u^{self.N})"
        return f"({body}){tail} mod {self.p}^{self.prec}"

    def to_json(self) -> dict:
        return {"coeffs": [str(c) for c in self.coeffs], "prec": self.prec, "N": self.N}

    @classmethod
    def from_json(cls, p: int, data) -> "SeriesElement":
        if isinstance(data, list):
            return cls(p, 10**6, None, [int(c) for c in data])
        return cls(p, int(data["prec"]), data.get("N"), [int(c) for c in data["coeffs"]])


def series_arith(f: SeriesElement, g: SeriesElement, op: str) -> SeriesElement:
    if f.N != g.N:
        raise ValueError("series truncation orders differ")
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise ValueError(f"unknown op {op!r}")


def frobenius_A(f: SeriesElement) -> SeriesElement:
    return f.frobenius()


def delta_A(f: SeriesElement) -> SeriesElement:
    return f.delta()


def is_distinguished(E: SeriesElement) -> bool:
    return E.prec >= 2 and E.delta().is_unit()


# ---------------------------------------------------------------------------
# Eisenstein polynomials

_TERM = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*(u(?:\s*\^\s*(\d+))?)?")


def parse_polynomial(text: str) -> list[int]:
    """Parse ``"u^2+3*u-3"`` into the low-to-high coefficient list."""
    s = text.replace(" ", "").replace("**", "^")
    if not s:
        raise ValueError("empty polynomial")
    coeffs: dict[int, int] = defaultdict(int)
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial {text!r} at position {pos}")
        sign, num, var, exp = m.groups()
        if not num and not var:
            raise ValueError(f"cannot parse polynomial {text!r} at position {pos}")
        c = int(num) if num else 1
        if sign == "-":
            c = -c
        deg = (int(exp) if exp else 1) if var else 0
        coeffs[deg] += c
        pos = m.end()
    top = max(coeffs)
    return [coeffs.get(i, 0) for i in range(top + 1)]


@dataclass(frozen=True)
class Eisenstein:
    p: int
    coeffs: tuple[int, ...]  # low to high, monic

    def __post_init__(self):
        cs = self.coeffs
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if len(cs) < 2:
            raise ValueError("Eisenstein polynomial must have degree >= 1")
        if cs[-1] != 1:
            raise ValueError("Eisenstein polynomial must be monic")
        if cs[0] % self.p != 0 or cs[0] % self.p**2 == 0:
            raise ValueError("constant term must have p-adic valuation exactly 1")
        for c in cs[1:-1]:
            if c % self.p:
                raise ValueError("middle coefficients must be divisible by p")

    @classmethod
    def parse(cls, p: int, value) -> "Eisenstein":
        if isinstance(value, str):
            s = value.strip()
            if s.startswith("["):
                import json

                return cls(p, tuple(int(c) for c in json.loads(s)))
            return cls(p, tuple(parse_polynomial(s)))
        return cls(p, tuple(int(c) for c in value))

    @property
    def e(self) -> int:
        return len(self.coeffs) - 1

    @property
    def low(self) -> tuple[int, ...]:
        return self.coeffs[:-1]

    @property
    def unit_constant(self) -> int:
        """E(0)/p, a p-adic unit."""
        return self.coeffs[0] // self.p

    def series(self, prec: int, N: int | None = None) -> SeriesElement:
        return SeriesElement(self.p, prec, N, self.coeffs)

    def delta_poly(self) -> list[int]:
        """delta(E) computed exactly over the integers."""
        p = self.p
        phi = [0] * ((len(self.coeffs) - 1) * p + 1)
        for n, c in enumerate(self.coeffs):
            phi[n * p] = c
        power = [1]
        for _ in range(p):
            power = _int_poly_mul(power, list(self.coeffs))
        diff = [a - b for a, b in zip(phi, power)]
        assert all(c % p == 0 for c in diff)
        return [c // p for c in diff]

    def __str__(self):
        terms = []
        for n in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[n]
            if not c:
                continue
            mono = "" if n == 0 else ("u" if n == 1 else f"u^{n}")
            if n and c in (1, -1):
                t = ("-" if c < 0 else "+") + mono
            else:
                t = f"{c:+d}" + (f"*{mono}" if mono else "")
            terms.append(t)
        s = "".join(terms)
        return s[1:] if s.startswith("+") else s


def _int_poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


# ---------------------------------------------------------------------------
# O_max

_CTX: dict = {}


def _ctx(modulus: int):
    c = _CTX.get(modulus)
    if c is None:
        c = _CTX[modulus] = flint.fmpz_mod_poly_ctx(modulus)
    return c


class OMaxRing:
    """Arithmetic context for O_max at working precision ``M``.

    An element is stored as ``e`` polynomials f_n(T) over Z/p^P with value
    sum f_n(E/p) u^n.  ``L`` caps the E/p-degree; exceeding it raises
    ``TruncationError`` rather than silently dropping terms.
    """

    def __init__(self, E: Eisenstein, M: int, L: int | None = None):
        self.E = E
        self.p = E.p
        self.e = E.e
        self.M = M
        self.L = 8 * M + 8 if L is None else L
        self.mod = self.p**M
        self._upow: list[list] = []
        self._cpow: list = []

    def ctx(self, prec: int):
        return _ctx(self.p ** max(prec, 1))

    def _check_L(self, parts):
        for f in parts:
            if f.degree() >= self.L:
                raise TruncationError(f"E/p-order truncation exceeded (L = {self.L})")
        return parts

    def _reduce_u(self, raw, ctx):
        """Fold u-degrees >= e back using u^e = pT - sum a_j u^j."""
        e, p, low = self.e, self.p, self.E.low
        raw = list(raw)
        pT = ctx([0, p])
        for n in range(len(raw) - 1, e - 1, -1):
            c = raw[n]
            if c.is_zero():
                continue
            raw[n - e] = raw[n - e] + c * pT
            for j, a in enumerate(low):
                if a:
                    raw[n - e + j] = raw[n - e + j] - c * a
        return raw[:e]

    def _mul_parts(self, a, b, ctx):
        e = self.e
        if e == 1:
            return self._check_L([a[0] * b[0]])
        raw = [ctx.zero() for _ in range(2 * e - 1)]
        for i, x in enumerate(a):
            if x.is_zero():
                continue
            for j, y in enumerate(b):
                if not y.is_zero():
                    raw[i + j] = raw[i + j] + x * y
        return self._check_L(self._reduce_u(raw, ctx))

    def _cast(self, parts, prec):
        ctx = self.ctx(prec)
        if prec == 0:
            return [ctx.zero() for _ in range(self.e)]
        if parts and parts[0].context() is ctx:
            return list(parts)
        return [ctx([int(c) for c in f.coeffs()]) for f in parts]

    def _upow_parts(self, n: int):
        if not self._upow:
            ctx = self.ctx(self.M)
            self._upow.append([ctx.one()] + [ctx.zero()] * (self.e - 1))
        ctx = self.ctx(self.M)
        while len(self._upow) <= n:
            prev = self._upow[-1]
            raw = [ctx.zero()] + list(prev)
            self._upow.append(self._check_L(self._reduce_u(raw, ctx)))
        return self._upow[n]

    # -- element constructors -------------------------------------------------
    def _make(self, parts, prec) -> "OMaxElement":
        return OMaxElement(self, parts, prec)

    def element(self, terms: dict, prec: int | None = None) -> "OMaxElement":
        """Build from a ``{(l, n): coeff}`` map with n < e."""
        prec = self.M if prec is None else min(prec, self.M)
        ctx = self.ctx(prec)
        cols: list[dict] = [dict() for _ in range(self.e)]
        for (l, n), v in terms.items():
            if n >= self.e:
                raise ValueError("u-exponent must be below e in canonical form")
            cols[n][l] = cols[n].get(l, 0) + int(v)
        parts = []
        for col in cols:
            top = max(col, default=-1)
            parts.append(ctx([col.get(l, 0) for l in range(top + 1)]) if prec else ctx.zero())
        return self._make(self._check_L(parts), prec)

    def zero(self, prec=None):
        return self.element({}, prec)

    def one(self, prec=None):
        return self.element({(0, 0): 1}, prec)

    def scalar(self, c: int, prec=None):
        return self.element({(0, 0): c}, prec)

    def u(self):
        return self.from_poly([0, 1])

    def T(self):
        """E/p."""
        return self.element({(1, 0): 1})

    def E_elem(self):
        return self.element({(1, 0): self.p})

    def from_poly(self, coeffs, l: int = 0, prec=None) -> "OMaxElement":
        """Image of ``sum coeffs[n] u^n * (E/p)^l``."""
        prec = self.M if prec is None else min(prec, self.M)
        ctx = self.ctx(prec)
        acc = [ctx.zero() for _ in range(self.e)]
        if prec:
            for n, c in enumerate(coeffs):
                c = int(c)
                if not c:
                    continue
                for k, f in enumerate(self._cast(self._upow_parts(n), prec)):
                    acc[k] = acc[k] + f * c
            if l:
                acc = [f.left_shift(l) for f in acc]
        return self._make(self._check_L(acc), prec)

    def from_series(self, f: SeriesElement, l: int = 0) -> "OMaxElement":
        """Image of ``f * (E/p)^l``.

        A series known modulo u^N is only known modulo p^floor(N/e) in O_max
        because u^e lies in p*O_max.
        """
        prec = min(f.prec, self.M)
        if f.N is not None:
            prec = min(prec, f.N // self.e)
        return self.from_poly(f.coeffs, l, prec)

    # -- distinguished constants -------------------------------------------------
    @cached_property
    def delta_E(self) -> "OMaxElement":
        return self.from_poly(self.E.delta_poly())

    @cached_property
    def c(self) -> "OMaxElement":
        """phi(E)/p = delta(E) + p^(p-1) (E/p)^p."""
        p = self.p
        return self.delta_E + self.element({(p, 0): p ** (p - 1)})

    @cached_property
    def c_inv(self) -> "OMaxElement":
        return self.c.inverse()

    @cached_property
    def epsilon0(self) -> int:
        """Image of E/p under u -> 0, namely E(0)/p."""
        return self.E.unit_constant

    def c_power(self, l: int) -> "OMaxElement":
        if not self._cpow:
            self._cpow.append(self.one())
        while len(self._cpow) <= l:
            self._cpow.append(self._cpow[-1] * self.c)
        return self._cpow[l]


class OMaxElement:
    __slots__ = ("ring", "parts", "prec")

    def __init__(self, ring: OMaxRing, parts, prec: int):
        self.ring = ring
        self.parts = parts
        self.prec = prec

    @property
    def mod(self) -> int:
        return self.ring.p**self.prec

    def _coerce(self, other) -> "OMaxElement":
        if isinstance(other, OMaxElement):
            if other.ring is not self.ring:
                raise ValueError("elements of different O_max rings")
            return other
        if isinstance(other, int):
            return self.ring.scalar(other, self.prec)
        if isinstance(other, TruncatedScalar):
            return self.ring.scalar(other.residue, other.prec)
        if isinstance(other, SeriesElement):
            return self.ring.from_series(other)
        raise TypeError(f"cannot combine O_max element with {type(other).__name__}")

    def _pair(self, other):
        other = self._coerce(other)
        prec = min(self.prec, other.prec)
        ring = self.ring
        return ring._cast(self.parts, prec), ring._cast(other.parts, prec), prec

    # -- structure -----------------------------------------------------------
    @property
    def terms(self) -> dict:
        out = {}
        for n, f in enumerate(self.parts):
            for l, c in enumerate(f.coeffs()):
                c = int(c)
                if c:
                    out[(l, n)] = c
        return out

    def coeff(self, l: int, n: int) -> int:
        f = self.parts[n]
        return int(f[l]) if l <= f.degree() else 0

    @property
    def tail0(self) -> list[int]:
        return [self.coeff(0, n) for n in range(self.ring.e)]

    @property
    def higher(self) -> dict[int, list[int]]:
        ls = sorted({l for l, _ in self.terms if l >= 1})
        return {l: [self.coeff(l, n) for n in range(self.ring.e)] for l in ls}

    def t_degree(self) -> int:
        return max(f.degree() for f in self.parts)

    def is_zero(self) -> bool:
        return all(f.is_zero() for f in self.parts)

    def valuation(self) -> int:
        vs = [valuation(c, self.ring.p) for c in self.terms.values()]
        return min(vs) if vs else self.prec

    def reduce(self, prec: int) -> "OMaxElement":
        prec = min(prec, self.prec)
        return OMaxElement(self.ring, self.ring._cast(self.parts, prec), prec)

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        a, b, prec = self._pair(other)
        return OMaxElement(self.ring, [x + y for x, y in zip(a, b)], prec)

    __radd__ = __add__

    def __neg__(self):
        return OMaxElement(self.ring, [-f for f in self.parts], self.prec)

    def __sub__(self, other):
        a, b, prec = self._pair(other)
        return OMaxElement(self.ring, [x - y for x, y in zip(a, b)], prec)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return OMaxElement(self.ring, [f * other for f in self.parts], self.prec)
        a, b, prec = self._pair(other)
        return OMaxElement(self.ring, self.ring._mul_parts(a, b, self.ring.ctx(prec)), prec)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.ring.one(self.prec)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.prec, tuple(sorted(self.terms.items()))))

    def div_p(self, k: int = 1) -> "OMaxElement":
        if k > self.prec:
            raise PrecisionError(f"cannot divide by p^{k} at precision {self.prec}")
        q = self.ring.p**k
        prec = self.prec - k
        ctx = self.ring.ctx(prec)
        out = []
        for f in self.parts:
            cs = [int(c) for c in f.coeffs()]
            if any(c % q for c in cs):
                raise InexactDivisionError(f"O_max element not divisible by p^{k}")
            out.append(ctx([c // q for c in cs]) if prec else ctx.zero())
        return OMaxElement(self.ring, out, prec)

    def mul_T(self, k: int = 1) -> "OMaxElement":
        return OMaxElement(self.ring, self.ring._check_L([f.left_shift(k) for f in self.parts]), self.prec)

    def t_divisible(self, k: int = 1) -> bool:
        return all(f.truncate(k).is_zero() for f in self.parts)

    def div_T(self, k: int = 1) -> "OMaxElement":
        if not self.t_divisible(k):
            raise InexactDivisionError(f"O_max element not divisible by (E/p)^{k}")
        return OMaxElement(self.ring, [f.right_shift(k) for f in self.parts], self.prec)

    def mul_E(self, k: int = 1) -> "OMaxElement":
        return self.mul_T(k) * self.ring.p**k

    def div_E(self, k: int = 1) -> "OMaxElement":
        """Exact division by E^k; costs k digits of precision."""
        return self.div_T(k).div_p(k)

    def is_unit(self) -> bool:
        p = self.ring.p
        if self.prec == 0:
            return False
        f0 = [int(c) for c in self.parts[0].coeffs()]
        if not f0 or f0[0] % p == 0:
            return False
        return all(c % p == 0 for c in f0[1:])

    def inverse(self) -> "OMaxElement":
        if not self.is_unit():
            raise NotInvertibleError("O_max element is not a unit")
        ring = self.ring
        inv = ring.scalar(pow(self.coeff(0, 0), -1, self.mod), self.prec)
        # Newton iteration converges (p, u)-adically and (p, u)^e lies in p*O_max
        steps = 1
        while 2**steps <= ring.e * self.prec + 1:
            steps += 1
        for _ in range(steps + 1):
            inv = inv * (2 - self * inv)
        if not (inv * self - 1).is_zero():
            raise AssertionError("Newton inversion failed to converge")  # pragma: no cover
        return inv

    def frobenius(self) -> "OMaxElement":
        """u -> u^p, E/p -> phi(E)/p = c."""
        ring = self.ring
        prec = self.prec
        total = ring.zero(prec)
        for n, f in enumerate(self.parts):
            if f.is_zero():
                continue
            val = ring.zero(prec)
            for l, c in enumerate(f.coeffs()):
                c = int(c)
                if c:
                    val = val + ring.c_power(l).reduce(prec) * c
            total = total + val * ring.from_poly([0] * (ring.p * n) + [1], prec=prec)
        return total

    def at_u_zero(self) -> TruncatedScalar:
        """Ring map O_max -> Z_p: u -> 0, E/p -> E(0)/p."""
        val = int(self.parts[0](self.ring.epsilon0)) if self.prec else 0
        return TruncatedScalar.make(self.ring.p, val, self.prec)

    def mod_E(self) -> list[int]:
        """Image in O_K = Z_p[pi]/(E(pi)): drop every E/p-term."""
        return self.tail0

    def divide_by_u(self):
        """Return (status, quotient) for division by u.

        ``status`` is "ok", "not-divisible" (certain at this precision) or
        "undecided" (not enough digits left).  One digit is consumed.
        """
        ring = self.ring
        p, e, low = ring.p, ring.e, ring.E.low
        if self.prec == 0:
            return "undecided", None
        ctx = ring.ctx(self.prec)
        f0 = self.parts[0]
        q, r = f0.divmod(ctx([-ring.epsilon0, 1]))
        if not r.is_zero():
            return "not-divisible", None
        qs = [int(c) for c in q.coeffs()]
        if any(c % p for c in qs):
            return "not-divisible", None
        prec = self.prec - 1
        if prec == 0:
            return "undecided", None
        ctx2 = ring.ctx(prec)
        top = ctx2([c // p for c in qs])
        g = [None] * e
        g[e - 1] = top
        for n in range(1, e):
            g[n - 1] = ctx2([int(c) for c in self.parts[n].coeffs()]) + top * low[n]
        return "ok", OMaxElement(ring, g, prec)

    def __repr__(self):
        parts = []
        for (l, n), v in sorted(self.terms.items()):
            mono = "*".join(x for x in (f"u^{n}" if n else "", f"T^{l}" if l else "") if x)
            parts.append(f"{v}" + (f"*{mono}" if mono else ""))
        return "(" + (" + ".join(parts) or "0") + f") mod {self.ring.p}^{self.prec}"

    def to_json(self) -> dict:
        return {
            "l0": [str(c) for c in self.tail0],
            "tail": [{"l": l, "poly": [str(c) for c in poly]} for l, poly in self.higher.items()],
        }

    @classmethod
    def from_json(cls, ring: OMaxRing, data: dict, prec: int) -> "OMaxElement":
        terms = {}
        l0 = data.get("l0", [])
        if len(l0) > ring.e:
            raise ValueError("O_max coefficient has u-degree >= e; not canonical")
        for n, c in enumerate(l0):
            terms[(0, n)] = int(c)
        for item in data.get("tail", []):
            if len(item["poly"]) > ring.e:
                raise ValueError("O_max coefficient has u-degree >= e; not canonical")
            for n, c in enumerate(item["poly"]):
                terms[(int(item["l"]), n)] = int(c)
        return ring.element(terms, prec)


def omax_canonicalize(ring: OMaxRing, raw) -> OMaxElement:
    """Canonical form of sum_l f_l (E/p)^l for ``raw = [(l, f_l), ...]``.

    Each ``f_l`` may be a SeriesElement or an integer coefficient list.
    """
    total = ring.zero()
    for l, f in raw:
        if isinstance(f, SeriesElement):
            total = total + ring.from_series(f, l)
        else:
            total = total + ring.from_poly(list(f), l)
    return total


def omax_c_and_inverse(ring: OMaxRing) -> tuple[OMaxElement, OMaxElement]:
    return ring.c, ring.c_inv
