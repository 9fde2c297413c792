"""Divided-power rings over O_max in one envelope generator.

A ``MaxRing`` of flavor "z" models A^(2)_max: elements are sums
sum_i b_i gamma_i(z) with b_i in O_max.  Flavor "w" models A^(2)_st,max with
generator w where z = u w.  Divided powers are symbolic basis elements and
multiply by gamma_i gamma_j = C(i+j, i) gamma_{i+j}.

Terms gamma_i with i >= I are dropped.  They span an ideal stable under
Frobenius and under the Galois action, so every result is exact modulo that
ideal and modulo p^prec.
"""

from __future__ import annotations

from functools import cached_property
from math import comb, factorial

from .deltacalc import DeltaPoly
from .padic import InexactDivisionError, PrecisionError
from .series import Eisenstein, OMaxElement, OMaxRing, SeriesElement

__all__ = ["MaxRing", "MaxRingElement", "max_arith", "phi_max", "reduce_mod_E", "iota", "st_embed", "a2_membership"]

FLAVORS = ("z", "w")


class MaxRing:
    def __init__(self, E: Eisenstein, flavor: str = "z", M: int = 10, I: int = 8, L: int | None = None, omax: OMaxRing | None = None):
        if flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")
        if I < 1:
            raise ValueError("divided-power truncation I must be >= 1")
        self.E = E
        self.p = E.p
        self.flavor = flavor
        self.I = I
        self.omax = omax or OMaxRing(E, M, L)
        self.M = self.omax.M
        self._twin: MaxRing | None = None
        self._guard: dict = {}

    @property
    def key(self) -> tuple:
        return (self.E, self.flavor, self.M, self.I, self.omax.L)

    def __repr__(self):
        return f"MaxRing(p={self.p}, E={self.E}, flavor={self.flavor}, M={self.M}, I={self.I})"

    # -- constructors ----------------------------------------------------------
    def element(self, coeffs: dict, prec: int | None = None) -> "MaxRingElement":
        prec = self.M if prec is None else min(prec, self.M)
        out = {}
        for i, c in coeffs.items():
            if i >= self.I:
                continue
            if isinstance(c, int):
                c = self.omax.scalar(c, prec)
            elif isinstance(c, SeriesElement):
                c = self.omax.from_series(c)
            out[i] = c
        if out:
            prec = min(prec, min(c.prec for c in out.values()))
        return MaxRingElement(self, {i: c.reduce(prec) for i, c in out.items()}, prec)

    def zero(self, prec=None):
        return self.element({}, prec)

    def one(self, prec=None):
        return self.element({0: 1}, prec)

    def scalar(self, x, prec=None):
        return self.element({0: x}, prec)

    def gamma(self, i: int, coeff=1) -> "MaxRingElement":
        """coeff * gamma_i of the generator."""
        return self.element({i: coeff})

    def gen(self):
        return self.gamma(1)

    def u(self):
        return self.scalar(self.omax.u())

    def T(self):
        return self.scalar(self.omax.T())

    def E_elem(self):
        return self.scalar(self.omax.E_elem())

    def coerce_from(self, x: "MaxRingElement") -> "MaxRingElement":
        """Move an element of a same-flavor ring at another precision here."""
        if x.ring is self:
            return x
        if x.ring.flavor != self.flavor or x.ring.E != self.E:
            raise ValueError("incompatible rings")
        return self.element({i: self.omax.element(c.terms, c.prec) for i, c in x.coeffs.items()}, x.prec)

    # -- structural rings ---------------------------------------------------------
    def twin(self) -> "MaxRing":
        """The ring of the other flavor sharing this O_max."""
        if self._twin is None:
            other = "w" if self.flavor == "z" else "z"
            self._twin = MaxRing(self.E, other, self.M, self.I, omax=self.omax)
            self._twin._twin = self
        return self._twin

    def with_precision(self, M: int) -> "MaxRing":
        if M == self.M:
            return self
        if M not in self._guard:
            self._guard[M] = MaxRing(self.E, self.flavor, M, self.I, self.omax.L)
        return self._guard[M]

    @cached_property
    def binom(self):
        mod = self.omax.mod
        return [[comb(i + j, i) % mod for j in range(self.I)] for i in range(self.I)]

    # -- Frobenius data ---------------------------------------------------------------
    @cached_property
    def phi_gen(self) -> "MaxRingElement":
        """Image of the generator under Frobenius."""
        p, om = self.p, self.omax
        coeffs = {}
        for i in range(1, p + 1):
            k = comb(p, i) * p**i // p * factorial(i)
            b = om.element({(i, 0): k})
            if self.flavor == "z":
                b = b * om.from_poly([0] * (p - i) + [1])
            coeffs[i] = b * om.c_inv
        return self.element(coeffs)

    @cached_property
    def phi_gen_powers(self) -> list:
        return self.phi_gen.divided_powers()

    @cached_property
    def y(self) -> "MaxRingElement":
        """E times the generator (y - x in z-flavor, y/x - 1 in w-flavor)."""
        return self.E_elem() * self.gen()


class MaxRingElement:
    __slots__ = ("ring", "coeffs", "prec", "_declared")

    def __init__(self, ring: MaxRing, coeffs: dict, prec: int):
        self.ring = ring
        self.coeffs = {i: c for i, c in coeffs.items() if not c.is_zero()}
        self.prec = prec

    def _coerce(self, other) -> "MaxRingElement":
        if isinstance(other, MaxRingElement):
            if other.ring is not self.ring:
                if other.ring.key != self.ring.key:
                    raise ValueError(f"flavor/ring mismatch: {self.ring} vs {other.ring}")
                return self.ring.coerce_from(other)
            return other
        if isinstance(other, (int, OMaxElement, SeriesElement)):
            return self.ring.scalar(other, self.prec)
        raise TypeError(f"cannot combine with {type(other).__name__}")

    def coeff(self, i: int) -> OMaxElement:
        c = self.coeffs.get(i)
        return c if c is not None else self.ring.omax.zero(self.prec)

    def is_zero(self) -> bool:
        return not self.coeffs

    def reduce(self, prec: int) -> "MaxRingElement":
        prec = min(prec, self.prec)
        return MaxRingElement(self.ring, {i: c.reduce(prec) for i, c in self.coeffs.items()}, prec)

    def __add__(self, other):
        other = self._coerce(other)
        prec = min(self.prec, other.prec)
        out = {i: c.reduce(prec) for i, c in self.coeffs.items()}
        for i, c in other.coeffs.items():
            out[i] = out[i] + c if i in out else c.reduce(prec)
        return MaxRingElement(self.ring, out, prec)

    __radd__ = __add__

    def __neg__(self):
        return MaxRingElement(self.ring, {i: -c for i, c in self.coeffs.items()}, self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return MaxRingElement(self.ring, {i: c * other for i, c in self.coeffs.items()}, self.prec)
        if isinstance(other, OMaxElement):
            prec = min(self.prec, other.prec)
            return MaxRingElement(self.ring, {i: c * other for i, c in self.coeffs.items()}, prec)
        other = self._coerce(other)
        I, binom = self.ring.I, self.ring.binom
        prec = min(self.prec, other.prec)
        out: dict = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                k = i + j
                if k >= I:
                    continue
                term = a * b
                if k and binom[i][j] != 1:
                    term = term * binom[i][j]
                out[k] = out[k] + term if k in out else term
        return MaxRingElement(self.ring, out, prec).reduce(prec)

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
        return hash(tuple(sorted((i, hash(c)) for i, c in self.coeffs.items())))

    def __repr__(self):
        if not self.coeffs:
            return f"0 mod {self.ring.p}^{self.prec}"
        g = self.ring.flavor
        return " + ".join(f"{c}*g{i}({g})" for i, c in sorted(self.coeffs.items()))

    # -- unit / inverse ----------------------------------------------------------
    def is_unit(self) -> bool:
        return self.coeff(0).is_unit()

    def inverse(self) -> "MaxRingElement":
        """Inverse of b_0 + (element of the divided-power ideal), b_0 a unit."""
        b0 = self.coeff(0)
        inv0 = b0.inverse()
        n = (self * inv0) - 1  # lies in the divided-power ideal
        # (1 + n)^{-1} = sum (-1)^k n^k, and n^k lies in gamma-degree >= k
        out = self.ring.one(self.prec)
        power = self.ring.one(self.prec)
        for k in range(1, self.ring.I):
            power = power * n
            if power.is_zero():
                break
            out = out + (power if k % 2 == 0 else -power)
        return out * inv0

    # -- divided powers ------------------------------------------------------------
    def divided_powers(self, upto: int | None = None) -> list:
        """[gamma_0(x), ..., gamma_{upto-1}(x)] for x in the divided-power ideal."""
        ring = self.ring
        upto = ring.I if upto is None else upto
        if 0 in self.coeffs:
            raise ValueError("divided powers need an element with zero gamma_0 coefficient")
        result = [ring.one(self.prec)] + [ring.zero(self.prec)] * (upto - 1)
        for k, b in sorted(self.coeffs.items()):
            # gamma_j(b gamma_k) = b^j (jk)!/(j!(k!)^j) gamma_{jk}
            pieces = [ring.one(self.prec)]
            bj = ring.omax.one(self.prec)
            j = 1
            while j < upto and j * k < ring.I:
                bj = bj * b
                const = factorial(j * k) // (factorial(j) * factorial(k) ** j)
                pieces.append(ring.element({j * k: bj * const}, self.prec))
                j += 1
            new = []
            for n in range(upto):
                acc = ring.zero(self.prec)
                for j in range(min(n, len(pieces) - 1) + 1):
                    if not result[n - j].is_zero():
                        acc = acc + result[n - j] * pieces[j]
                new.append(acc)
            result = new
        return result

    # -- Frobenius -------------------------------------------------------------------
    def frobenius(self) -> "MaxRingElement":
        ring = self.ring
        powers = ring.phi_gen_powers
        total = ring.zero(self.prec)
        for i, b in self.coeffs.items():
            total = total + powers[i] * b.frobenius()
        return total.reduce(self.prec)

    def delta(self) -> "MaxRingElement":
        """(phi(x) - x^p)/p; defined only when the numerator is p-divisible."""
        return (self.frobenius() - self ** self.ring.p).div_p(1)

    def div_p(self, k: int = 1) -> "MaxRingElement":
        if k > self.prec:
            raise PrecisionError(f"cannot divide by p^{k} at precision {self.prec}")
        ring = self.ring
        return MaxRingElement(ring, {i: c.div_p(k) for i, c in self.coeffs.items()}, self.prec - k)

    def mul_E(self, k: int = 1) -> "MaxRingElement":
        return MaxRingElement(self.ring, {i: c.mul_E(k) for i, c in self.coeffs.items()}, self.prec)

    def div_E(self, k: int = 1) -> "MaxRingElement":
        """Exact division by E^k (loses k digits)."""
        if k > self.prec:
            raise PrecisionError(f"cannot divide by E^{k} at precision {self.prec}")
        return MaxRingElement(self.ring, {i: c.div_E(k) for i, c in self.coeffs.items()}, self.prec - k)

    def in_fil(self, h: int) -> tuple[bool, int | None]:
        """Membership in E^h A_max[1/p]; returns (ok, first violating gamma index)."""
        for i in sorted(self.coeffs):
            if not self.coeffs[i].t_divisible(h):
                return False, i
        return True, None

    # -- serialization --------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "flavor": self.ring.flavor,
            "prec": self.prec,
            "terms": [{"gamma": i, "coeff": c.to_json()} for i, c in sorted(self.coeffs.items())],
        }

    @classmethod
    def from_json(cls, ring: MaxRing, data: dict) -> "MaxRingElement":
        if data.get("flavor", ring.flavor) != ring.flavor:
            raise ValueError(f"flavor mismatch: element is {data.get('flavor')}, ring is {ring.flavor}")
        prec = int(data.get("prec", ring.M))
        coeffs = {}
        for t in data.get("terms", []):
            i = int(t["gamma"])
            if i in coeffs:
                raise ValueError(f"duplicate gamma index {i}")
            coeffs[i] = OMaxElement.from_json(ring.omax, t["coeff"], prec)
        x = ring.element(coeffs, prec)
        x._declared = sorted(coeffs)  # type: ignore[attr-defined]
        return x


# ---------------------------------------------------------------------------
# module-level operations


def max_arith(f: MaxRingElement, g: MaxRingElement, op: str) -> MaxRingElement:
    if f.ring.flavor != g.ring.flavor:
        raise ValueError("flavor mismatch")
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise ValueError(f"unknown op {op!r}")


def phi_max(f: MaxRingElement) -> MaxRingElement:
    return f.frobenius()


def reduce_mod_E(f: MaxRingElement) -> dict[int, list[int]]:
    """Image in O_K[gamma_i]: every E/p-term dies and u becomes the uniformizer.

    Returns gamma-index -> coefficients of 1, pi, ..., pi^(e-1).
    """
    out = {}
    for i, c in sorted(f.coeffs.items()):
        r = c.mod_E()
        if any(r):
            out[i] = r
    return out


def _iota_images(ring: MaxRing, depth: int) -> list[MaxRingElement]:
    """Images of z_0..z_depth in the z-flavor ring, computed with guard digits."""
    if ring.flavor != "z":
        raise ValueError("iota lands in the z-flavor ring")
    cache = ring.__dict__.setdefault("_iota_cache", [])
    if len(cache) > depth:
        return cache[: depth + 1]
    guard = ring.with_precision(ring.M + depth + 1)
    vals = [guard.gen()]
    for _ in range(depth):
        vals.append(vals[-1].delta())
    images = [ring.coerce_from(v.reduce(ring.M)) for v in vals]
    ring.__dict__["_iota_cache"] = images
    return images


def iota(f: DeltaPoly, ring: MaxRing) -> MaxRingElement:
    """Evaluate a delta-polynomial (optionally with X -> E/p) in A^(2)_max."""
    depth = max(f.depth(), 0)
    zs = _iota_images(ring, depth)
    one = ring.one()
    return f.evaluate(ring.u(), ring.T(), zs, one)


def st_embed(f: MaxRingElement) -> MaxRingElement:
    """gamma_i(z) -> u^i gamma_i(w)."""
    if f.ring.flavor != "z":
        raise ValueError("st_embed expects a z-flavor element")
    target = f.ring.twin()
    om = f.ring.omax
    return target.element({i: c * om.from_poly([0] * i + [1]) for i, c in f.coeffs.items()}, f.prec)


def a2_membership(f: MaxRingElement) -> dict:
    """Decide whether a w-flavor element comes from the z-flavor ring.

    Returns {"verdict": "member" | "non-member" | "undecided", "index": i,
    "preimage": z-flavor element or None}.  ``index`` names the first
    gamma_i(w) coefficient not divisible by u^i (or the first one whose
    divisibility the precision cannot decide).
    """
    if f.ring.flavor != "w":
        raise ValueError("a2_membership expects a w-flavor element")
    declared = set(getattr(f, "_declared", ())) | set(f.coeffs)
    undecided = None
    quotients = {}
    for i in sorted(declared):
        c = f.coeff(i)
        if i == 0:
            quotients[0] = c
            continue
        if c.is_zero():
            undecided = i if undecided is None else undecided
            continue
        q = c
        status = "ok"
        for _ in range(i):
            status, q = q.divide_by_u()
            if status != "ok" or q.is_zero():
                break
        if status == "not-divisible":
            return {"verdict": "non-member", "index": i, "coefficient": c, "preimage": None}
        if status == "undecided":
            undecided = i if undecided is None else undecided
            continue
        if q.is_zero():
            continue
        quotients[i] = q
    if undecided is not None:
        return {"verdict": "undecided", "index": undecided, "coefficient": f.coeff(undecided), "preimage": None}
    zring = f.ring.twin()
    prec = min((q.prec for q in quotients.values()), default=f.prec)
    return {"verdict": "member", "index": None, "coefficient": None, "preimage": zring.element(quotients, prec)}
