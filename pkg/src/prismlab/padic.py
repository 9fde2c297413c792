"""Truncated p-adic integers.

A ``TruncatedScalar`` is an element of Z_p known modulo ``p**prec``.  Every
operation propagates precision pessimistically: sums and products keep the
smaller precision, division by ``p**k`` subtracts ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

__all__ = [
    "PrecisionError",
    "NotInvertibleError",
    "InexactDivisionError",
    "PrimeConfig",
    "TruncatedScalar",
    "is_prime",
    "valuation",
    "scalar_arith",
    "invert",
    "exact_div_p",
    "padic_binom",
    "binom_unit_part",
]


class PrecisionError(ArithmeticError):
    """Raised when an operation needs more precision than is available."""


class NotInvertibleError(ArithmeticError):
    pass


class InexactDivisionError(ArithmeticError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def valuation(n: int, p: int) -> int | None:
    """p-adic valuation of an integer; ``None`` for zero."""
    if n == 0:
        return None
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class PrimeConfig:
    p: int
    M: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.M < 1:
            raise ValueError("precision M must be >= 1")

    @property
    def modulus(self) -> int:
        return self.p**self.M

    def scalar(self, value: int, prec: int | None = None) -> "TruncatedScalar":
        return TruncatedScalar.make(self.p, value, self.M if prec is None else prec)


@dataclass(frozen=True)
class TruncatedScalar:
    p: int
    residue: int
    prec: int

    @classmethod
    def make(cls, p: int, value: int, prec: int) -> "TruncatedScalar":
        if prec < 0:
            raise PrecisionError("negative precision")
        return cls(p, value % p**prec, prec)

    # -- helpers -----------------------------------------------------------
    def _check(self, other: "TruncatedScalar") -> None:
        if self.p != other.p:
            raise ValueError(f"mismatched primes {self.p} and {other.p}")

    def _coerce(self, other) -> "TruncatedScalar":
        if isinstance(other, int):
            return TruncatedScalar.make(self.p, other, self.prec)
        self._check(other)
        return other

    @property
    def modulus(self) -> int:
        return self.p**self.prec

    def valuation(self) -> int:
        """Valuation, capped at ``prec`` when the residue is zero."""
        v = valuation(self.residue, self.p)
        return self.prec if v is None else min(v, self.prec)

    def is_unit(self) -> bool:
        return self.prec > 0 and self.residue % self.p != 0

    def is_zero(self) -> bool:
        return self.residue == 0

    def signed(self) -> int:
        """Representative in the symmetric range around zero."""
        m = self.modulus
        r = self.residue
        return r - m if 2 * r > m else r

    def reduce(self, prec: int) -> "TruncatedScalar":
        return TruncatedScalar.make(self.p, self.residue, min(prec, self.prec))

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        return TruncatedScalar.make(self.p, self.residue + other.residue, min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return TruncatedScalar.make(self.p, -self.residue, self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return TruncatedScalar.make(self.p, self.residue * other.residue, min(self.prec, other.prec))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return invert(self) ** (-n)
        return TruncatedScalar.make(self.p, pow(self.residue, n, self.modulus), self.prec)

    def __eq__(self, other):
        if isinstance(other, int):
            other = TruncatedScalar.make(self.p, other, self.prec)
        if not isinstance(other, TruncatedScalar) or other.p != self.p:
            return NotImplemented
        m = self.p ** min(self.prec, other.prec)
        return (self.residue - other.residue) % m == 0

    def __hash__(self):
        return hash((self.p, self.residue, self.prec))

    def __repr__(self):
        return f"{self.residue} + O({self.p}^{self.prec})"

    def to_json(self) -> dict:
        return {"residue": str(self.residue), "prec": self.prec}

    @classmethod
    def from_json(cls, p: int, data: dict) -> "TruncatedScalar":
        return cls.make(p, int(data["residue"]), int(data["prec"]))


def scalar_arith(a: TruncatedScalar, b: TruncatedScalar, op: str) -> TruncatedScalar:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def invert(a: TruncatedScalar) -> TruncatedScalar:
    if not a.is_unit():
        raise NotInvertibleError(f"{a} is not invertible")
    return TruncatedScalar.make(a.p, pow(a.residue, -1, a.modulus), a.prec)


def exact_div_p(a: TruncatedScalar, k: int = 1) -> TruncatedScalar:
    """Divide by ``p**k``; the result is known to ``k`` fewer digits."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > a.prec:
        raise PrecisionError(f"cannot divide by p^{k} at precision {a.prec}")
    q, r = divmod(a.residue, a.p**k)
    if r:
        raise InexactDivisionError(f"{a} is not divisible by {a.p}^{k}")
    return TruncatedScalar.make(a.p, q, a.prec - k)


def binom_unit_part(p: int, k: int) -> tuple[int, int]:
    """Return ``(v, u)`` with ``k! = p**v * u`` and ``p`` not dividing ``u``."""
    f = factorial(k)
    v = valuation(f, p) or 0
    return v, f // p**v


def padic_binom(a: TruncatedScalar, k: int) -> TruncatedScalar:
    """C(a, k) for a p-adic integer ``a``; loses at most v_p(k!) digits."""
    if k < 0:
        raise ValueError("k must be >= 0")
    p = a.p
    v, unit = binom_unit_part(p, k)
    if v > a.prec:
        raise PrecisionError(f"C(a, {k}) needs more than {a.prec} digits")
    work = p ** (a.prec)
    # numerator modulo p^prec is determined by a modulo p^prec
    num = 1
    for j in range(k):
        num = num * (a.residue - j) % (work * p**v)
    q, r = divmod(num, p**v)
    if r:
        raise InexactDivisionError("numerator of binomial not divisible by v_p(k!)")  # pragma: no cover
    out_prec = a.prec - v
    return TruncatedScalar.make(p, q * pow(unit, -1, p ** max(out_prec, 1)), out_prec)
