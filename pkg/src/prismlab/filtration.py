"""Filtration data on the subrings A^(2)[[E^p/p]] and, for p = 2, A^(2)[[E^4/2]].

An element is stored as ``sum_i a_i E^i / p^floor(i/q)`` with ``a_i``
delta-polynomials (elements of A^(2) through ``iota``); q = p for the first
ring and q = 4 for the second.  Membership in Fil^h, and the splitting of
Frobenius images into an A^(2)-part plus E^h times a deeper filtration piece,
are produced as explicit data and checked against A^(2)_max.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, floor

from .deltacalc import DeltaPoly, DeltaPolyRing
from .maxring import MaxRing, MaxRingElement, iota
from .series import Eisenstein

__all__ = [
    "SForm",
    "FiltrationWitness",
    "FiltrationReject",
    "h0_bound",
    "div_by_E",
    "fil_level",
    "fil_decompose",
    "phi_fil_split",
    "PhiSplit",
    "lift_reduction",
    "e_adic_digits",
    "p_power_decompose",
]


def _q(p: int, hat: bool) -> int:
    if hat and p != 2:
        raise ValueError("the E^4/2 ring is only used for p = 2")
    return 4 if hat else p


def h0_bound(p: int, h: int) -> int:
    """Smallest integer h0 allowed by the closed-form bound.

    p > 2: h0 > max(h, (p(h+1)+1)/(p(p-2))).  p = 2: h0 > 2(h+2).
    """
    if p == 2:
        return 2 * (h + 2) + 1
    bound = max(h, (p * (h + 1) + 1) / (p * (p - 2)))
    return floor(bound) + 1


@dataclass
class SForm:
    """sum_i terms[i] * E^i / p^floor(i/q)."""

    E: Eisenstein
    terms: dict
    hat: bool = False

    @property
    def p(self) -> int:
        return self.E.p

    @property
    def q(self) -> int:
        return _q(self.E.p, self.hat)

    def value(self, ring: MaxRing) -> MaxRingElement:
        """Image in A^(2)_max; E^i/p^floor(i/q) = p^(i - floor(i/q)) (E/p)^i."""
        p, q = self.p, self.q
        om = ring.omax
        total = ring.zero()
        for i, a in sorted(self.terms.items()):
            if a.is_zero():
                continue
            scale = om.element({(i, 0): p ** (i - i // q)})
            total = total + iota(a, ring) * scale
        return total

    def min_index(self) -> int | None:
        idx = [i for i, a in self.terms.items() if not a.is_zero()]
        return min(idx) if idx else None


@dataclass
class FiltrationWitness:
    h: int
    decomposition: list  # [(i, a_i)] with i >= h
    form: SForm

    def reassemble(self) -> SForm:
        return SForm(self.form.E, dict(self.decomposition), self.form.hat)


@dataclass
class FiltrationReject:
    level: int  # first k with the element outside Fil^k
    reason: str = ""


def div_by_E(f: DeltaPoly, E: Eisenstein, k: int = 1) -> DeltaPoly | None:
    """Exact division by E^k as a polynomial in u; None if a remainder is left."""
    ring = f.ring
    Ec = list(E.coeffs)
    e = E.e
    for _ in range(k):
        rows: dict[int, dict] = {}
        for exps, c in f.poly.terms():
            rows.setdefault(exps[0], {})
            rest = exps[1:]
            rows[exps[0]][rest] = rows[exps[0]].get(rest, 0) + int(c)
        quot: dict[int, dict] = {}
        top = max(rows, default=-1)
        for n in range(top, e - 1, -1):
            row = rows.get(n)
            if not row:
                continue
            row = {r: c for r, c in row.items() if c}
            if not row:
                continue
            quot[n - e] = row
            for j in range(e):
                tgt = rows.setdefault(n - e + j, {})
                for r, c in row.items():
                    tgt[r] = tgt.get(r, 0) - c * Ec[j]
            rows[n] = {}
        if any(c for n in range(e) for c in rows.get(n, {}).values()):
            return None
        d = {}
        for n, row in quot.items():
            for r, c in row.items():
                if c:
                    d[(n,) + r] = c
        f = DeltaPoly(ring, ring.ctx.from_dict(d))
    return f


def fil_level(x: MaxRingElement, cap: int) -> int:
    """Largest k <= cap with x in E^k A_max[1/p]."""
    for k in range(1, cap + 1):
        if not x.in_fil(k)[0]:
            return k - 1
    return cap


def fil_decompose(x: SForm, h: int, ring: MaxRing | None = None):
    """Rewrite x with every index >= h, or reject.

    Terms of index >= h stay.  The low part times p^floor(h/q) is an element
    of A^(2); it must equal E^h b, and then contributes b at index h.
    Membership itself is decided in A^(2)_max (T^h-divisibility of every
    coefficient).  When the element lies in Fil^h but the low part is not
    divisible by E^h as a polynomial, the result is a reject with reason
    "undecided".
    """
    p, q = x.p, x.q
    if ring is not None:
        val = x.value(ring)
        ok, _ = val.in_fil(h)
        if not ok:
            return FiltrationReject(fil_level(val, h) + 1, "not in Fil^h")
    low = None
    high = {}
    for i, a in x.terms.items():
        if a.is_zero():
            continue
        if i >= h:
            high[i] = high[i] + a if i in high else a
            continue
        Ei = a.ring.const(1)
        for _ in range(i):
            Ei = Ei * a.ring.from_u_poly(list(x.E.coeffs))
        t = a * Ei * p ** (h // q - i // q)
        low = t if low is None else low + t
    if low is not None and not low.is_zero():
        b = div_by_E(low, x.E, h)
        if b is None:
            return FiltrationReject(h, "undecided: low part is not a polynomial multiple of E^h")
        high[h] = high[h] + b if h in high else b
    return FiltrationWitness(h, sorted(high.items()), x)


@dataclass
class PhiSplit:
    a: DeltaPoly
    y: SForm
    h: int
    m: int
    checked: bool = False
    details: dict = field(default_factory=dict)


def phi_fil_split(x: SForm, m: int, h: int, ring: MaxRing | None = None) -> PhiSplit:
    """phi(x) = a + E^h y with a in A^(2) and y in Fil^(m+1).

    Uses phi(E) = E^p + p delta(E) and expands phi(E)^i binomially: terms with
    j >= floor(i/q) are integral and go to a; the others go to y with index
    p(i-j) - h.
    """
    p, q, E = x.p, x.q, x.E
    h0 = h0_bound(p, h)
    if m <= h0:
        raise ValueError(f"need m > h0 = {h0} for p = {p}, h = {h}")
    lo = x.min_index()
    if lo is not None and lo < m:
        raise ValueError(f"element has index {lo} < m = {m}")
    R: DeltaPolyRing | None = None
    a_total = None
    y_terms: dict[int, DeltaPoly] = {}
    for i, ai in sorted(x.terms.items()):
        if ai.is_zero():
            continue
        R = ai.ring
        Epoly = R.from_u_poly(list(E.coeffs))
        beta = R.from_u_poly(E.delta_poly())
        phia = ai.frobenius()
        fl = i // q
        for j in range(i + 1):
            c = comb(i, j)
            if j >= fl:
                t = phia * (Epoly ** (p * (i - j))) * (beta**j) * (c * p ** (j - fl))
                a_total = t if a_total is None else a_total + t
            else:
                n = p * (i - j) - h
                shift = j - fl + n // q
                if n < m + 1 or shift < 0:
                    raise ValueError(f"term (i={i}, j={j}) violates the split conditions")
                t = phia * (beta**j) * (c * p**shift)
                y_terms[n] = y_terms[n] + t if n in y_terms else t
    if a_total is None:
        a_total = R.const(0) if R is not None else None
    split = PhiSplit(a_total, SForm(E, y_terms, x.hat), h, m)
    if ring is not None:
        lhs = x.value(ring).frobenius()
        a_val = iota(a_total, ring) if a_total is not None else ring.zero()
        rhs = a_val + split.y.value(ring).mul_E(h)
        split.checked = (lhs - rhs).is_zero()
        yv = split.y.value(ring)
        split.details = {"y_in_fil": yv.in_fil(m + 1)[0]}
    return split


def lift_reduction(red: dict, R: DeltaPolyRing, rec) -> DeltaPoly:
    """A delta-polynomial lifting sum_j r_j(pi) gamma_j(z) from the quotient by E.

    gamma_j(z) is a polynomial in E/p; dropping its E/p-terms leaves a
    delta-polynomial congruent to gamma_j(z) modulo Fil^1.
    """
    total = R.const(0)
    for j, coeffs in red.items():
        if j == 0:
            lift = R.const(1)
        else:
            g = rec.gamma(j)
            d = {exps: c for exps, c in g.poly.to_dict().items() if exps[1] == 0}
            lift = R.import_(g.ring.wrap(g.ring.ctx.from_dict(d)))
        total = total + R.from_u_poly([int(c) for c in coeffs]) * lift
    return total


def e_adic_digits(f: DeltaPoly, E: Eisenstein, n: int) -> tuple[list, DeltaPoly]:
    """f = sum_{j<n} E^j g_j + E^n rest with every g_j of u-degree < e."""
    digits = []
    Ec, e = list(E.coeffs), E.e
    for _ in range(n):
        rows: dict[int, dict] = {}
        for exps, c in f.poly.terms():
            rows.setdefault(exps[0], {})
            rows[exps[0]][exps[1:]] = rows[exps[0]].get(exps[1:], 0) + int(c)
        quot: dict = {}
        for k in range(max(rows, default=-1), e - 1, -1):
            row = {r: c for r, c in rows.get(k, {}).items() if c}
            if row:
                for r, c in row.items():
                    quot[(k - e,) + r] = quot.get((k - e,) + r, 0) + c
                for j in range(e):
                    tgt = rows.setdefault(k - e + j, {})
                    for r, c in row.items():
                        tgt[r] = tgt.get(r, 0) - c * Ec[j]
            rows[k] = {}
        rem = {(k,) + r: c for k, row in rows.items() for r, c in row.items() if c}
        digits.append(f.ring.wrap(f.ring.ctx.from_dict(rem)))
        f = f.ring.wrap(f.ring.ctx.from_dict({k: c for k, c in quot.items() if c}))
    return digits, f


def p_power_decompose(f: DeltaPoly, E: Eisenstein, n: int) -> list | None:
    """Write f = sum_{i<=n} p^(n-i) E^i x_i, or None when the digits refuse.

    The E-adic digit g_j (j < n) must be divisible by p^(n-j); then
    x_j = g_j / p^(n-j) and x_n collects everything from E^n on.
    """
    digits, rest = e_adic_digits(f, E, n)
    p = E.p
    out = []
    for j, g in enumerate(digits):
        q = p ** (n - j)
        if any(c % q for _, _, _, c in g.terms()):
            return None
        out.append(g.div_p(n - j))
    out.append(rest)
    return out
