"""Galois action on the w-flavor ring.

A group element is a pair (a, chi): g(u) = u (1+y)^a and g(y) = (1+y)^chi - 1
where y = E w.  Since y^j = E^j j! gamma_j(w), the binomial series becomes

    (1+y)^a - 1 = E * W_a,   W_a = sum_{j>=1} a(a-1)...(a-j+1) E^(j-1) gamma_j(w)

and no factorial denominator ever appears.  The unit r = g(E)/E comes from a
Taylor expansion of E at u, and g(w) = r^{-1} W_chi.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

from .maxring import MaxRing, MaxRingElement
from .padic import TruncatedScalar

__all__ = [
    "GroupElement",
    "IPlusResidue",
    "GaloisAction",
    "act",
    "unit_r",
    "compose",
    "iplus_reduce",
    "phi_image_form",
    "PhiImageForm",
]


def _residue(x, p: int, prec: int) -> int:
    if isinstance(x, TruncatedScalar):
        return x.residue
    return int(x) % p**prec


@dataclass(frozen=True)
class GroupElement:
    """(a, chi) with a the Kummer coordinate and chi a p-adic unit.

    Coordinates are plain integers; they are read modulo p^M by whatever ring
    the element acts on.
    """

    a: int
    chi: int = 1

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(0, 1)

    @classmethod
    def tau(cls) -> "GroupElement":
        return cls(1, 1)

    @classmethod
    def parse(cls, value) -> "GroupElement":
        """Accept "id", "tau", "tau^k", "a,chi" or {"a": .., "chi": ..}."""
        if isinstance(value, GroupElement):
            return value
        if isinstance(value, dict):
            return cls(int(value["a"]), int(value.get("chi", 1)))
        s = str(value).strip().replace(" ", "")
        if s in ("id", "identity", "1"):
            return cls.identity()
        if s == "tau":
            return cls.tau()
        if s.startswith("tau^"):
            return cls(int(s[4:]), 1)
        if "," in s:
            a, chi = s.strip("()").split(",")
            return cls(int(a), int(chi))
        raise ValueError(f"cannot parse group element {value!r}")

    def check(self, p: int) -> None:
        if self.chi % p == 0:
            raise ValueError(f"chi = {self.chi} is not a {p}-adic unit")

    def to_json(self) -> dict:
        return {"a": str(self.a), "chi": str(self.chi)}

    def __str__(self):
        return f"({self.a}, {self.chi})"


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """The element acting as g after h."""
    return GroupElement(g.a + g.chi * h.a, g.chi * h.chi)


@dataclass(frozen=True)
class IPlusResidue:
    value: TruncatedScalar

    def to_json(self) -> dict:
        return {"value": str(self.value.signed()), "prec": self.value.prec}


def _falling(a: int, j: int, mod: int) -> int:
    out = 1
    for k in range(j):
        out = out * (a - k) % mod
    return out


class GaloisAction:
    """Cached data for the action of one group element on one w-flavor ring."""

    def __init__(self, ring: MaxRing, g: GroupElement):
        if ring.flavor != "w":
            raise ValueError("the Galois action is defined on the w-flavor ring")
        g.check(ring.p)
        self.ring = ring
        self.g = g
        self._tpow: list[MaxRingElement] | None = None
        self._upow: list[MaxRingElement] | None = None
        self._gw_pows: list[MaxRingElement] | None = None

    # -- generator images ---------------------------------------------------------
    def W(self, a) -> MaxRingElement:
        """((1+y)^a - 1)/E."""
        ring = self.ring
        om = ring.omax
        mod = om.mod
        a = _residue(a, ring.p, ring.M)
        coeffs = {}
        for j in range(1, ring.I):
            ff = _falling(a, j, mod)
            if ff:
                coeffs[j] = om.E_elem() ** (j - 1) * ff
        return ring.element(coeffs)

    def _build(self):
        if self._upow is not None:
            return
        ring, om = self.ring, self.ring.omax
        Wa = self.W(self.g.a)
        Ew = ring.E_elem() * Wa  # (1+y)^a - 1
        gu = ring.u() * (Ew + 1)
        # r = 1 + sum_{k>=1} D_k E(u) u^k E^{k-1} W_a^k with D_k the Hasse derivative
        coeffs = list(ring.E.coeffs)
        r = ring.one()
        uW = ring.u() * Wa
        power = ring.one()
        for k in range(1, len(coeffs)):
            power = power * uW
            if power.is_zero():
                break
            hasse = [comb(n, k) * coeffs[n] for n in range(k, len(coeffs))]
            term = power * om.from_poly(hasse)
            if k > 1:
                term = term * om.E_elem() ** (k - 1)
            r = r + term
        self.r = r
        self.r_inv = r.inverse()
        self.gw = self.r_inv * self.W(self.g.chi)
        self.gT = r * ring.T()
        self._upow = [ring.one()]
        for _ in range(1, om.e):
            self._upow.append(self._upow[-1] * gu)
        self._tpow = [ring.one()]
        self._gw_pows = self.gw.divided_powers()

    def _t_power(self, l: int) -> MaxRingElement:
        while len(self._tpow) <= l:
            self._tpow.append(self._tpow[-1] * self.gT)
        return self._tpow[l]

    # -- action ----------------------------------------------------------------------
    def on_omax(self, b) -> MaxRingElement:
        self._build()
        ring = self.ring
        total = ring.zero(b.prec)
        for n, part in enumerate(b.parts):
            acc = ring.zero(b.prec)
            for l, c in enumerate(part.coeffs()):
                c = int(c)
                if c:
                    acc = acc + self._t_power(l) * c
            if not acc.is_zero():
                total = total + (acc if n == 0 else acc * self._upow[n])
        return total.reduce(b.prec)

    def __call__(self, f: MaxRingElement) -> MaxRingElement:
        if f.ring is not self.ring:
            raise ValueError("element lives in a different ring")
        self._build()
        total = self.ring.zero(f.prec)
        for i, b in f.coeffs.items():
            img = self.on_omax(b)
            total = total + (img if i == 0 else img * self._gw_pows[i])
        return total.reduce(f.prec)


def _action(ring: MaxRing, g: GroupElement) -> GaloisAction:
    cache = ring.__dict__.setdefault("_galois_cache", {})
    key = (g.a % ring.omax.mod, g.chi % ring.omax.mod)
    if key not in cache:
        cache[key] = GaloisAction(ring, g)
    return cache[key]


def act(g: GroupElement, f: MaxRingElement) -> MaxRingElement:
    return _action(f.ring, g)(f)


def unit_r(g: GroupElement, ring: MaxRing) -> tuple[MaxRingElement, MaxRingElement]:
    """(r, r^{-1}) with r = g(E)/E."""
    data = _action(ring, g)
    data._build()
    return data.r, data.r_inv


def iplus_reduce(f: MaxRingElement) -> IPlusResidue:
    """Kill u, y and every gamma_i(w) with i >= 1; E/p becomes E(0)/p."""
    return IPlusResidue(f.coeff(0).at_u_zero())


# ---------------------------------------------------------------------------
# Frobenius images written in nu^{-1} and divided powers of y


def _dp_mul(a: dict, b: dict, cap: int) -> dict:
    out: dict = {}
    for i, x in a.items():
        for j, y in b.items():
            if i + j < cap:
                out[i + j] = out.get(i + j, 0) + x * y * comb(i + j, i)
    return {k: v for k, v in out.items() if v}


def _dp_gamma(a: dict, n: int, cap: int) -> dict:
    """gamma_n of an integral combination of gamma_k(Y), k >= 1, again integral."""
    result = [{0: 1}] + [{} for _ in range(n)]
    for k, b in sorted(a.items()):
        pieces = [{0: 1}]
        for j in range(1, n + 1):
            if j * k >= cap:
                break
            const = factorial(j * k) // (factorial(j) * factorial(k) ** j)
            pieces.append({j * k: b**j * const})
        new = []
        for m in range(n + 1):
            acc: dict = {}
            for j in range(min(m, len(pieces) - 1) + 1):
                for kk, v in _dp_mul(result[m - j], pieces[j], cap).items():
                    acc[kk] = acc.get(kk, 0) + v
            new.append({kk: v for kk, v in acc.items() if v})
        result = new
    return result[n]


@dataclass
class PhiImageForm:
    """phi(f) = sum_i phi(b_i)(u) * nu^{-i} * sum_k n_{i,k} gamma_k(y).

    ``terms`` maps i -> (coefficients of phi(b_i) in u, {k: n_{i,k}}).
    """

    p: int
    terms: dict

    def evaluate(self, ring: MaxRing) -> MaxRingElement:
        om = ring.omax
        total = ring.zero()
        ypows = ring.y.divided_powers()
        nu_inv = ring.scalar(om.c_inv)
        for i, (ucoeffs, comb_) in self.terms.items():
            inner = ring.zero()
            for k, n in comb_.items():
                if k >= ring.I:
                    continue
                inner = inner + ypows[k] * n
            total = total + inner * nu_inv ** i * om.from_poly(ucoeffs)
        return total

    def to_json(self) -> dict:
        return {
            "nu_inv_power": {
                str(i): {"phi_coeff_u": [str(c) for c in uc], "gamma_y": {str(k): str(v) for k, v in sorted(cb.items())}}
                for i, (uc, cb) in sorted(self.terms.items())
            }
        }


def phi_image_form(p: int, f: dict[int, list[int]], cap: int = 16) -> PhiImageForm:
    """Rewrite phi(sum_i b_i(u) gamma_i(w)) with integer data.

    ``f`` maps i -> integer coefficients of b_i (low to high).  Uses
    phi(w) = nu^{-1} sum_{i=1}^p C(p,i)/p * i! * gamma_i(y) and
    phi(gamma_n(w)) = gamma_n(phi(w)).
    """
    base = {i: comb(p, i) * factorial(i) // p for i in range(1, p + 1)}
    terms = {}
    for i, coeffs in f.items():
        phib = [0] * ((len(coeffs) - 1) * p + 1) if coeffs else [0]
        for n, c in enumerate(coeffs):
            phib[n * p] = int(c)
        terms[i] = (phib, _dp_gamma(base, i, cap) if i else {0: 1})
    return PhiImageForm(p, terms)
