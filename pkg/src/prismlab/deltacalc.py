"""Free delta-polynomials over A in the envelope generators z_0, z_1, ...

``z_i`` stands for delta^i(z) where E z = y - x.  Polynomials live in
Z[u, X, z_0, ..., z_D] backed by ``flint.fmpz_mpoly``; ``u`` carries the
A-coefficients and ``X`` is the auxiliary variable later specialised to E/p.
Frobenius acts by u -> u^p and z_i -> z_i^p + p z_{i+1}.

A ring may be exact, or truncated modulo (p^K, u^N); the truncated mode is
needed once inverses of units of A appear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial

import flint

from .padic import valuation
from .series import Eisenstein, SeriesElement, TruncationError

__all__ = [
    "DeltaPolyRing",
    "DeltaPoly",
    "LemmaDeltaNData",
    "delta_poly",
    "is_good",
    "delta_order_at_most",
    "lemma_delta_n",
    "delta_n_of_t",
    "EnvelopeRecursion",
    "gamma_epoly",
]


class DeltaPolyRing:
    def __init__(self, p: int, D: int = 6, K: int | None = None, N: int | None = None):
        if D < 0:
            raise ValueError("depth must be >= 0")
        self.p = p
        self.D = D
        self.K = K
        self.N = N
        names = ("u", "X") + tuple(f"z{i}" for i in range(D + 1))
        self.ctx = flint.fmpz_mpoly_ctx.get(names, "lex")
        gens = self.ctx.gens()
        self._u, self._X, self._z = gens[0], gens[1], gens[2:]
        self.mod = None if K is None else p**K
        phi_images = [self._u**p, self._X]
        for i in range(D + 1):
            nxt = p * self._z[i + 1] if i < D else 0
            phi_images.append(self._z[i] ** p + nxt)
        self._phi_images = phi_images

    @property
    def exact(self) -> bool:
        return self.K is None and self.N is None

    def _normalize(self, poly):
        if self.exact:
            return poly
        mod, N = self.mod, self.N
        d = {}
        for exps, c in poly.to_dict().items():
            if N is not None and exps[0] >= N:
                continue
            if mod is not None:
                c = int(c) % mod
                if 2 * c > mod:
                    c -= mod
            if c:
                d[exps] = c
        return self.ctx.from_dict(d)

    def wrap(self, poly) -> "DeltaPoly":
        return DeltaPoly(self, self._normalize(poly))

    def u(self):
        return DeltaPoly(self, self._u)

    def X(self):
        return DeltaPoly(self, self._X)

    def z(self, i: int) -> "DeltaPoly":
        if i > self.D:
            raise TruncationError(f"delta-depth truncation exceeded (D = {self.D})")
        return DeltaPoly(self, self._z[i])

    def const(self, c: int) -> "DeltaPoly":
        return self.wrap(self.ctx.constant(c))

    def from_u_poly(self, coeffs) -> "DeltaPoly":
        u = self._u
        return self.wrap(sum((int(c) * u**n for n, c in enumerate(coeffs) if c), self.ctx.constant(0)))

    def from_series(self, f: SeriesElement) -> "DeltaPoly":
        return self.from_u_poly(f.coeffs)

    def import_(self, f: "DeltaPoly") -> "DeltaPoly":
        """Move an element of another ring over the same prime into this one."""
        width = self.D + 3
        d = {}
        for exps, c in f.poly.terms():
            if any(exps[width:]):
                raise TruncationError(f"delta-depth truncation exceeded (D = {self.D})")
            e = tuple(exps[:width]) + (0,) * (width - len(exps))
            d[e] = c
        return self.wrap(self.ctx.from_dict(d))

    def unit_inverse(self, f: "DeltaPoly") -> "DeltaPoly":
        """Inverse of a unit of A (a polynomial in u alone) modulo (p^K, u^N)."""
        if self.K is None or self.N is None:
            raise TruncationError("inverting a unit of A needs a truncated ring")
        coeffs = f.u_coefficients()
        s = SeriesElement(self.p, self.K, self.N, coeffs).inverse()
        return self.from_series(s)


class DeltaPoly:
    __slots__ = ("ring", "poly")

    def __init__(self, ring: DeltaPolyRing, poly):
        self.ring = ring
        self.poly = poly

    def _coerce(self, other):
        if isinstance(other, DeltaPoly):
            if other.ring is not self.ring:
                raise ValueError("delta-polynomials from different rings")
            return other.poly
        if isinstance(other, int):
            return self.ring.ctx.constant(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self.ring.wrap(self.poly + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self.ring.wrap(self.poly - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self.ring.wrap(o - self.poly)

    def __neg__(self):
        return DeltaPoly(self.ring, -self.poly)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self.ring.wrap(self.poly * o)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if self.ring.exact:
            return DeltaPoly(self.ring, self.poly**n)
        result = self.ring.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.ring.wrap(self.poly - o).is_zero()

    def __hash__(self):
        return hash(str(self.poly))

    def __repr__(self):
        return str(self.poly)

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def __len__(self):
        return len(self.poly)

    def terms(self):
        """Yield ``(u_exp, X_exp, z_exps, coeff)``."""
        for exps, c in self.poly.terms():
            yield exps[0], exps[1], exps[2:], int(c)

    def depth(self) -> int:
        """Largest i with z_i present, or -1 for z-free elements."""
        degs = self.poly.degrees()[2:]
        nz = [i for i, d in enumerate(degs) if d > 0]
        return nz[-1] if nz else -1

    def uses_X(self) -> bool:
        return self.poly.degrees()[1] > 0

    def u_coefficients(self) -> list[int]:
        """Coefficients of a polynomial in u alone."""
        if self.depth() >= 0 or self.uses_X():
            raise ValueError("element is not a pure element of A")
        out = [0] * (self.poly.degrees()[0] + 1 if not self.is_zero() else 0)
        for a, _, _, c in self.terms():
            out[a] = c
        return out

    def frobenius(self) -> "DeltaPoly":
        if self.uses_X():
            raise ValueError("Frobenius is only defined on X-free delta-polynomials")
        if self.depth() >= self.ring.D:
            raise TruncationError(f"delta-depth truncation exceeded (D = {self.ring.D})")
        return self.ring.wrap(self.poly.compose(*self.ring._phi_images))

    def delta(self) -> "DeltaPoly":
        diff = self.frobenius().poly - self.pow_raw(self.ring.p)
        return self.ring.wrap(diff / self.ring.p)

    def pow_raw(self, n: int):
        return (self**n).poly

    def div_p(self, k: int = 1) -> "DeltaPoly":
        return self.ring.wrap(self.poly / self.ring.p**k)

    def collect(self, var: int) -> dict[int, "DeltaPoly"]:
        """Group by powers of the variable with ring index ``var``."""
        parts: dict[int, dict] = {}
        for exps, c in self.poly.terms():
            k = exps[var]
            e = list(exps)
            e[var] = 0
            parts.setdefault(k, {})[tuple(e)] = c
        return {k: DeltaPoly(self.ring, self.ring.ctx.from_dict(d)) for k, d in sorted(parts.items())}

    def collect_z(self, i: int) -> dict[int, "DeltaPoly"]:
        return self.collect(2 + i)

    def collect_X(self) -> dict[int, "DeltaPoly"]:
        return self.collect(1)

    def weight(self) -> set[int]:
        """Set of z-weights (z_i has weight p^i) appearing among monomials."""
        p = self.ring.p
        return {sum(e * p**i for i, e in enumerate(z)) for _, _, z, _ in self.terms()}

    def evaluate(self, u, X, zs, one):
        """Evaluate in any commutative ring given images of u, X and z_i."""
        total = one * 0
        cache: dict = {}

        def pw(key, base, k):
            if (key, k) not in cache:
                cache[(key, k)] = base**k
            return cache[(key, k)]

        for a, x, z, c in self.terms():
            term = one * c
            if a:
                term = term * pw("u", u, a)
            if x:
                term = term * pw("X", X, x)
            for i, e in enumerate(z):
                if e:
                    term = term * pw(i, zs[i], e)
            total = total + term
        return total


def delta_poly(f: DeltaPoly) -> DeltaPoly:
    return f.delta()


def is_good(f: DeltaPoly) -> bool:
    """Every monomial carries some z_j^l with l >= p."""
    p = f.ring.p
    return all(any(e >= p for e in z) for _, _, z, _ in f.terms())


def delta_order_at_most(f: DeltaPoly, n: int) -> bool:
    """Every monomial is divisible by some z_j with j <= n, and no z_i with i > n occurs."""
    for _, _, z, _ in f.terms():
        if not any(z[j] for j in range(min(n + 1, len(z)))):
            return False
        if any(z[j] for j in range(n + 1, len(z))):
            return False
    return True


@dataclass
class LemmaDeltaNData:
    n: int
    b_n: list[int]  # exact polynomial in u
    a: list[DeltaPoly]
    residual_zero: bool
    a_p_unit: bool
    a_good: list[bool]
    b_recursion_ok: bool
    b_is_phi_n_E: bool

    @property
    def ok(self) -> bool:
        return self.residual_zero and self.a_p_unit and all(self.a_good) and self.b_recursion_ok and self.b_is_phi_n_E

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "b_n": [str(c) for c in self.b_n],
            "residual_zero": self.residual_zero,
            "a_p_unit": self.a_p_unit,
            "a_good": self.a_good,
            "b_recursion": self.b_recursion_ok,
            "b_equals_phi_n_E": self.b_is_phi_n_E,
            "terms": sum(len(x) for x in self.a),
        }


class _DeltaTower:
    """Cache of delta^n(E z_0) in an exact ring."""

    def __init__(self, E: Eisenstein, ring: DeltaPolyRing):
        self.E = E
        self.ring = ring
        self.values = [ring.from_u_poly(E.coeffs) * ring.z(0)]

    def get(self, n: int) -> DeltaPoly:
        while len(self.values) <= n:
            self.values.append(self.values[-1].delta())
        return self.values[n]


_TOWERS: dict = {}


def _tower(E: Eisenstein, D: int) -> _DeltaTower:
    key = (E, D)
    if key not in _TOWERS:
        _TOWERS[key] = _DeltaTower(E, DeltaPolyRing(E.p, D))
    return _TOWERS[key]


def _fmpz_poly_delta(f, p: int):
    phi = f(flint.fmpz_poly([0] * p + [1]))
    return (phi - f**p) / p


def lemma_delta_n(E: Eisenstein, n: int, D: int | None = None) -> LemmaDeltaNData:
    """Decompose delta^n(E z) = b_n z_n + sum_i a_i z_{n-1}^i and check its claims."""
    if n < 1:
        raise ValueError("n must be >= 1")
    D = max(n, D or n)
    tower = _tower(E, D)
    ring = tower.ring
    p = E.p
    f = tower.get(n)
    by_zn = f.collect_z(n)
    b = by_zn.get(1, ring.const(0))
    rest = by_zn.get(0, ring.const(0))
    shape_ok = set(by_zn) <= {0, 1} and b.depth() < 0
    by_prev = rest.collect_z(n - 1)
    a = [by_prev.get(i, ring.const(0)) for i in range(p + 1)]
    shape_ok = shape_ok and set(by_prev) <= set(range(p + 1))
    residual = f - b * ring.z(n) - sum((a[i] * ring.z(n - 1) ** i for i in range(p + 1)), ring.const(0))
    b_coeffs = b.u_coefficients()

    a_p_unit = a[p].depth() < 0 and not a[p].is_zero() and a[p].u_coefficients()[0] % p != 0
    a_good = [is_good(a[i]) and a[i].depth() <= n - 2 for i in range(p)]

    # b_{k+1} = p delta(b_k) + b_k^p started from E, compared with phi^n(E)
    bk = flint.fmpz_poly(list(E.coeffs))
    for _ in range(n):
        bk = p * _fmpz_poly_delta(bk, p) + bk**p
    phi_n = flint.fmpz_poly(list(E.coeffs))(flint.fmpz_poly([0] * p**n + [1]))
    target = flint.fmpz_poly(b_coeffs)
    return LemmaDeltaNData(
        n=n,
        b_n=b_coeffs,
        a=a,
        residual_zero=shape_ok and residual.is_zero(),
        a_p_unit=bool(a_p_unit),
        a_good=a_good,
        b_recursion_ok=bk == target,
        b_is_phi_n_E=phi_n == target,
    )


# ---------------------------------------------------------------------------
# delta^n(y - x) as a polynomial in x and t = y - x

_XT: dict = {}


def delta_n_of_t(p: int, n: int):
    """delta^n(t) in Z[x, t] where phi(x) = x^p and phi(t) = (x + t)^p - x^p."""
    key = p
    if key not in _XT:
        ctx = flint.fmpz_mpoly_ctx.get(("x", "t"), "lex")
        x, t = ctx.gens()
        _XT[key] = (ctx, [t])
    ctx, vals = _XT[key]
    x, t = ctx.gens()
    while len(vals) <= n:
        f = vals[-1]
        phi = f.compose(x**p, (x + t) ** p - x**p)
        vals.append((phi - f**p) / p)
    return vals[n]


# ---------------------------------------------------------------------------
# gamma_i(z) as a polynomial in E/p


@dataclass
class _Level:
    F: DeltaPoly  # evaluates to gamma-tilde^m(z)
    nu: DeltaPoly  # z_m = nu * F + S
    S: DeltaPoly
    P: dict = field(default_factory=dict)  # X-power -> coefficient, delta-order <= m-1
    d: DeltaPoly | None = None
    G: DeltaPoly | None = None  # z_m^p / p, filled once F_{m+1} is known
    Q: DeltaPoly | None = None


class EnvelopeRecursion:
    """Constructive form of gamma-tilde^n(z) = F_n(E/p).

    Works in Z[u, X, z_0..z_D] modulo (p^K, u^N).  Level m records
    z_m = nu_m F_m + P_m(X) + p^(p-1) X^p d_m z_m with nu_m a unit of A and
    the coefficients of P_m of delta-order at most m-1.
    """

    def __init__(self, E: Eisenstein, K: int, N: int, D: int = 6):
        self.E = E
        self.p = E.p
        self.ring = DeltaPolyRing(E.p, D, K, N)
        self.levels: list[_Level] = []
        R = self.ring
        self.levels.append(_Level(F=R.z(0), nu=R.const(1), S=R.const(0)))

    # z_l^p / p for l below the current level
    def _G(self, l: int) -> DeltaPoly:
        self.level(l + 1)
        return self.levels[l].G

    def _monomial_over_p(self, exps, c, forbid: int) -> DeltaPoly:
        """A monomial of the form c * (...) * z_l^k with k >= p, divided by p."""
        R, p = self.ring, self.p
        if c % p == 0:
            return R.wrap(R.ctx.from_dict({exps: c // p}))
        z = exps[2:]
        for l, k in enumerate(z):
            if k >= p and l < forbid:
                e = list(exps)
                e[2 + l] -= p
                return R.wrap(R.ctx.from_dict({tuple(e): c})) * self._G(l)
        raise ValueError("monomial is neither p-divisible nor good")

    def _pth_power_over_p(self, S: DeltaPoly, forbid: int) -> DeltaPoly:
        """S^p / p for S whose monomials carry p or some z_j (j < forbid)."""
        R, p = self.ring, self.p
        if S.is_zero():
            return S
        exact = S.poly**p
        diag = R.ctx.constant(0)
        out = R.const(0)
        for exps, c in S.poly.terms():
            c = int(c)
            term = R.ctx.from_dict({exps: c})
            diag += term**p
            pe = tuple(e * p for e in exps)
            cp = c**p
            if cp % p == 0:
                out = out + R.wrap(R.ctx.from_dict({pe: cp // p}))
                continue
            z = exps[2:]
            js = [j for j, k in enumerate(z) if k and j < forbid]
            if not js:
                raise ValueError("cannot divide a p-th power by p")
            j = js[0]
            e = list(pe)
            e[2 + j] -= p
            out = out + R.wrap(R.ctx.from_dict({tuple(e): cp})) * self._G(j)
        return out + R.wrap((exact - diag) / p)

    def level(self, m: int) -> _Level:
        while len(self.levels) <= m:
            self._advance()
        return self.levels[m]

    def _advance(self):
        R, p, E = self.ring, self.p, self.E
        m = len(self.levels) - 1  # build level m + 1
        cur = self.levels[m]
        n = m + 1
        # z_m^p / p = nu^p * F_{m+1} + Q_m, with F_{m+1} still unknown
        nu, S, F = cur.nu, cur.S, cur.F
        mu = nu**p
        Q = self._pth_power_over_p(S, m)
        for i in range(1, p):
            Q = Q + (comb(p, i) // p) * nu**i * F**i * S ** (p - i)
        data = lemma_delta_n(E, n)
        a = [R.import_(ai) for ai in data.a]
        a_p = a[p]
        # b_n = p alpha + beta E^p with beta = E^(p^n - p)
        E_int = flint.fmpz_poly(list(E.coeffs))
        beta_s = E_int ** (p**n - p)
        alpha_s = (flint.fmpz_poly(data.b_n) - E_int ** (p**n)) / p
        alpha = R.from_u_poly([int(c) for c in alpha_s.coeffs()])
        beta = R.from_u_poly([int(c) for c in beta_s.coeffs()])
        Xp = R.X() ** p
        # delta^n(E z) / p through t = E z = p X z_0
        dt = delta_n_of_t(p, n)
        lhs = R.const(0)
        for (xa, tj), c in dt.terms():
            if tj == 0:
                raise AssertionError("delta^n(t) is not divisible by t")
            lhs = lhs + R.wrap(R.ctx.from_dict({(xa, tj, *([tj] + [0] * R.D)): int(c) * p ** (tj - 1)}))
        good_part = R.const(0)
        for j in range(p):
            for exps, c in (a[j] * R.z(m) ** j).poly.terms():
                good_part = good_part + self._monomial_over_p(exps, int(c), m)
        B = lhs - good_part - a_p * Q - (p ** (p - 1)) * beta * Xp * R.z(n)
        inv_unit = R.unit_inverse(a_p * mu)
        F_next = inv_unit * (B - alpha * R.z(n))
        inv_alpha = R.unit_inverse(alpha)
        nu_next = -(a_p * mu) * inv_alpha
        S_next = B * inv_alpha
        d_next = -beta * inv_alpha
        P_poly = S_next - (p ** (p - 1)) * Xp * d_next * R.z(n)
        cur.G = mu * F_next + Q
        cur.Q = Q
        self.levels.append(_Level(F=F_next, nu=nu_next, S=S_next, P=P_poly.collect_X(), d=d_next))

    def gamma(self, i: int) -> DeltaPoly:
        """f_i with f_i(E/p) = gamma_i(z)."""
        R, p = self.ring, self.p
        digits = []
        k = i
        while k:
            digits.append(k % p)
            k //= p
        out = R.const(1)
        for lvl, dgt in enumerate(digits):
            if dgt:
                out = out * self.level(lvl).F ** dgt
        v = valuation(factorial(i), p) or 0
        unit = factorial(i) // p**v
        return out * pow(unit, -1, R.mod)


def gamma_epoly(E: Eisenstein, i: int, M: int = 10, D: int = 6, recursion: EnvelopeRecursion | None = None) -> DeltaPoly:
    rec = recursion or EnvelopeRecursion(E, M, E.e * M, D)
    return rec.gamma(i)
