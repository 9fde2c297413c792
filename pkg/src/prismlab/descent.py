"""Galois matrices of Kisin modules.

A Kisin module of height h is given by its Frobenius matrix A over Z_p[[u]]
together with B satisfying AB = BA = E^h.  For a group element g the matrix
X_g of g on the basis solves

    E^h X = r^{-h} A phi(X) g(B),        r = g(E)/E,

over the w-flavor ring.  The solver iterates X -> E^{-h} r^{-h} A phi(X) g(B)
from X = Id with a few guard digits, and certifies the result by checking
the residual at the target precision.
"""

from __future__ import annotations

import math
from math import comb
from dataclasses import dataclass, field

from .galois import GroupElement, act, compose, iplus_reduce, unit_r
from .deltacalc import DeltaPolyRing
from .maxring import MaxRing, MaxRingElement, a2_membership, iota, reduce_mod_E
from .series import Eisenstein, _int_poly_mul

__all__ = [
    "KisinModuleData",
    "GaloisMatrix",
    "SolverError",
    "solve_key_equation",
    "key_residual",
    "rank1_product",
    "extension_module",
    "extension_matrix",
    "crystalline_test",
    "tau_power_convergence",
    "cocycle_check",
    "mat_mul",
    "mat_act",
    "mat_phi",
    "identity",
    "DescentProblem",
    "DescentInstance",
    "Reconstruction",
    "ReconstructionError",
    "make_descent_instance",
    "solve_descent_fixed_point",
    "edadic_reconstruct",
    "iplus_identity",
]


class SolverError(RuntimeError):
    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace or []


# ---------------------------------------------------------------------------
# polynomial matrices over A


def _poly_add(a: list[int], b: list[int]) -> list[int]:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _poly_trim(a: list[int]) -> list[int]:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_matmul(A, B):
    d = len(A)
    out = []
    for i in range(d):
        row = []
        for j in range(d):
            acc: list[int] = []
            for k in range(d):
                if A[i][k] and B[k][j]:
                    acc = _poly_add(acc, _int_poly_mul(A[i][k], B[k][j]))
            row.append(_poly_trim(acc))
        out.append(row)
    return out


@dataclass
class KisinModuleData:
    """Frobenius matrix A and its companion B with AB = BA = E^h Id.

    Entries are integer polynomials in u, low degree first.
    """

    E: Eisenstein
    h: int
    A_mat: list
    B_mat: list

    @property
    def d(self) -> int:
        return len(self.A_mat)

    def check(self, M: int | None = None) -> None:
        """Raise ValueError unless AB = BA = E^h (modulo p^M when given)."""
        d = self.d
        if any(len(r) != d for r in self.A_mat) or len(self.B_mat) != d or any(len(r) != d for r in self.B_mat):
            raise ValueError("A and B must be square of the same size")
        Eh = [1]
        for _ in range(self.h):
            Eh = _int_poly_mul(Eh, list(self.E.coeffs))
        mod = None if M is None else self.E.p**M
        for prod in (_poly_matmul(self.A_mat, self.B_mat), _poly_matmul(self.B_mat, self.A_mat)):
            for i in range(d):
                for j in range(d):
                    want = Eh if i == j else []
                    diff = _poly_add(prod[i][j], [-c for c in want])
                    if mod is not None:
                        diff = [c % mod for c in diff]
                    if any(diff):
                        raise ValueError(f"A*B != E^{self.h} at entry ({i}, {j})")

    @classmethod
    def rank1(cls, E: Eisenstein, m: int) -> "KisinModuleData":
        Em = [1]
        for _ in range(m):
            Em = _int_poly_mul(Em, list(E.coeffs))
        return cls(E, m, [[Em]], [[[1]]])

    @classmethod
    def trivial(cls, E: Eisenstein, d: int = 1) -> "KisinModuleData":
        return cls(E, 0, [[[1] if i == j else [] for j in range(d)] for i in range(d)],
                   [[[1] if i == j else [] for j in range(d)] for i in range(d)])

    def to_json(self) -> dict:
        def enc(m):
            return [[[str(c) for c in e] for e in row] for row in m]

        return {"p": self.E.p, "E": list(self.E.coeffs), "d": self.d, "h": self.h,
                "A_mat": enc(self.A_mat), "B_mat": enc(self.B_mat)}

    @classmethod
    def from_json(cls, data: dict, E: Eisenstein | None = None) -> "KisinModuleData":
        if E is None:
            E = Eisenstein.parse(int(data["p"]), data["E"])

        def dec(m):
            out = []
            for row in m:
                r = []
                for e in row:
                    if isinstance(e, str):
                        from .series import parse_polynomial

                        r.append(parse_polynomial(e) if e.strip() not in ("", "0") else [])
                    else:
                        r.append([int(c) for c in e])
                out.append(r)
            return out

        km = cls(E, int(data["h"]), dec(data["A_mat"]), dec(data["B_mat"]))
        if "d" in data and int(data["d"]) != km.d:
            raise ValueError("declared rank does not match the matrices")
        return km


# ---------------------------------------------------------------------------
# matrices over the w-flavor ring


def identity(ring: MaxRing, d: int) -> list:
    return [[ring.one() if i == j else ring.zero() for j in range(d)] for i in range(d)]


def mat_mul(A: list, B: list) -> list:
    d = len(A)
    out = []
    for i in range(d):
        row = []
        for j in range(d):
            acc = None
            for k in range(d):
                if A[i][k].is_zero() or B[k][j].is_zero():
                    continue
                t = A[i][k] * B[k][j]
                acc = t if acc is None else acc + t
            row.append(acc if acc is not None else A[i][0].ring.zero(min(A[i][0].prec, B[0][j].prec)))
        out.append(row)
    return out


def mat_phi(X: list) -> list:
    return [[x.frobenius() for x in row] for row in X]


def mat_act(g: GroupElement, X: list) -> list:
    return [[act(g, x) for x in row] for row in X]


def mat_map(f, X: list) -> list:
    return [[f(x) for x in row] for row in X]


def mat_eq(X: list, Y: list) -> bool:
    return all(x == y for rx, ry in zip(X, Y) for x, y in zip(rx, ry))


def _lift_poly_matrix(ring: MaxRing, P: list) -> list:
    om = ring.omax
    return [[ring.scalar(om.from_poly(e)) if e else ring.zero() for e in row] for row in P]


def _relift(ring: MaxRing, x: MaxRingElement) -> MaxRingElement:
    """Reinterpret residues at the full precision of ``ring``."""
    om = ring.omax
    return ring.element({i: om.element(c.terms, ring.M) for i, c in x.coeffs.items()}, ring.M)


def _valuation(x: MaxRingElement) -> int:
    vs = [c.valuation() for c in x.coeffs.values()]
    return min(vs) if vs else x.prec


@dataclass
class GaloisMatrix:
    g: GroupElement
    X: list
    ring: MaxRing
    residual_zero: bool = True
    iterations: int = 0
    trace: list = field(default_factory=list)

    @property
    def d(self) -> int:
        return len(self.X)

    def to_json(self) -> dict:
        return {
            "g": self.g.to_json(),
            "X": [[x.to_json() for x in row] for row in self.X],
            "residual_zero": self.residual_zero,
            "iterations": self.iterations,
        }


def key_residual(km: KisinModuleData, g: GroupElement, X: list) -> list:
    """E^h X - r^{-h} A phi(X) g(B), entrywise."""
    ring = X[0][0].ring
    d, h = km.d, km.h
    _, r_inv = unit_r(g, ring)
    A = _lift_poly_matrix(ring, km.A_mat)
    gB = mat_act(g, _lift_poly_matrix(ring, km.B_mat))
    rhs = mat_mul(mat_mul(A, mat_phi(X)), gB)
    rh = r_inv**h
    return [[X[i][j].mul_E(h) - rhs[i][j] * rh for j in range(d)] for i in range(d)]


def solve_key_equation(km: KisinModuleData, g: GroupElement, M: int = 10, I: int = 8,
                       max_iter: int = 80, guard: int | None = None,
                       ring: MaxRing | None = None) -> GaloisMatrix:
    """Fixed point of X -> E^{-h} r^{-h} A phi(X) g(B) seeded at Id."""
    E, d, h = km.E, km.d, km.h
    km.check()
    target = ring if ring is not None else MaxRing(E, "w", M, I)
    M, I = target.M, target.I
    guard = h + 2 if guard is None else guard
    work = target.with_precision(M + guard)
    _, r_inv = unit_r(g, work)
    left = mat_mul([[r_inv**h if i == j else work.zero() for j in range(d)] for i in range(d)],
                   _lift_poly_matrix(work, km.A_mat))
    gB = mat_act(g, _lift_poly_matrix(work, km.B_mat))
    X = identity(work, d)
    trace = []
    stable = 0
    for it in range(1, max_iter + 1):
        prod = mat_mul(mat_mul(left, mat_phi(X)), gB)
        try:
            new = [[_relift(work, x.div_E(h)) if h else x for x in row] for row in prod]
        except ArithmeticError as exc:
            raise SolverError(f"inexact division by E^{h} at iteration {it}: {exc}", trace) from exc
        diff = min(_valuation((a - b).reduce(M)) for ra, rb in zip(new, X) for a, b in zip(ra, rb))
        trace.append(diff)
        X = new
        stable = stable + 1 if diff >= M else 0
        if stable >= 2:
            break
    else:
        raise SolverError(f"no convergence within {max_iter} iterations", trace)
    Xt = [[target.coerce_from(x.reduce(M)) for x in row] for row in X]
    res = key_residual(km, g, [[x for x in row] for row in X])
    ok = all(x.reduce(M).is_zero() for row in res for x in row)
    return GaloisMatrix(g, Xt, target, ok, len(trace), trace)


# ---------------------------------------------------------------------------
# oracles and constructed examples


def rank1_product(ring: MaxRing, g: GroupElement, m: int, N0: int | None = None) -> MaxRingElement:
    """prod_{n <= N0} phi^n(r^{-m}); without N0, until the factors become 1."""
    _, r_inv = unit_r(g, ring)
    factor = r_inv**m
    out = factor
    n = 0
    while True:
        n += 1
        if N0 is not None and n > N0:
            break
        factor = factor.frobenius()
        if N0 is None and factor == 1:
            break
        out = out * factor
        if n > 10 * ring.M * ring.E.e + 20:
            raise SolverError("product of Frobenius twists did not stabilize")
    return out


def extension_module(E: Eisenstein, M: int = 10) -> KisinModuleData:
    """diag(1, lambda E) with lambda = p/E(0), height 1.

    Its G_infty-data splits, but the key equation admits a one-parameter
    family of Galois matrices [[1, kappa a(g) rho_g eta], [0, rho_g]]; a
    nonzero kappa gives a non-split (Tate-curve type) extension.
    """
    p = E.p
    mod = p ** (M + 4)
    lam = pow(E.unit_constant, -1, mod)
    lam = lam - mod if 2 * lam > mod else lam
    lamE = [lam * c for c in E.coeffs]
    inv = pow(lam, -1, mod)
    inv = inv - mod if 2 * inv > mod else inv
    A = [[[1], []], [[], lamE]]
    B = [[list(E.coeffs), []], [[], [inv]]]
    return KisinModuleData(E, 1, A, B)


def _extension_eta(ring: MaxRing, lam: int) -> MaxRingElement:
    """eta with phi(eta) = lam E eta: (log(1+y)/E) / (lam prod_n phi^n(lam c))."""
    om = ring.omax
    Ep = om.E_elem()
    coeffs = {}
    for j in range(1, ring.I):
        c = (-1) ** (j - 1) * math.factorial(j - 1)
        coeffs[j] = Ep ** (j - 1) * c
    log_over_E = ring.element(coeffs)
    factor = om.c * lam
    prod = factor
    for _ in range(10 * ring.M * om.e + 20):
        factor = factor.frobenius()
        if factor == 1:
            break
        prod = prod * factor
    else:
        raise SolverError("product defining eta did not stabilize")
    return log_over_E * (prod * lam).inverse()


def extension_matrix(km: KisinModuleData, g: GroupElement, kappa: int = 1, M: int = 10, I: int = 8,
                     ring: MaxRing | None = None) -> GaloisMatrix:
    """The Galois matrix of the extension family built on ``extension_module``."""
    target = ring if ring is not None else MaxRing(km.E, "w", M, I)
    lam = km.A_mat[1][1][-1]
    rho = rank1_product(target, g, 1)
    eta = _extension_eta(target, lam)
    top = rho * eta * (kappa * g.a)
    X = [[target.one(), top], [target.zero(), rho]]
    res = key_residual(km, g, X)
    ok = all(x.is_zero() for row in res for x in row)
    return GaloisMatrix(g, X, target, ok, 0, [])


# ---------------------------------------------------------------------------
# decisions and diagnostics


def crystalline_test(gm: GaloisMatrix) -> dict:
    undecided = None
    for i, row in enumerate(gm.X):
        for j, x in enumerate(row):
            verdict = a2_membership(x)
            if verdict["verdict"] == "non-member":
                return {"verdict": "semistable-witness", "entry": (i, j), "index": verdict["index"],
                        "coefficient": verdict["coefficient"]}
            if verdict["verdict"] == "undecided" and undecided is None:
                undecided = {"verdict": "undecided", "entry": (i, j), "index": verdict["index"]}
    if undecided is not None:
        return undecided
    return {"verdict": "crystalline-at-precision"}


def _grade(X: list) -> int:
    ring = X[0][0].ring
    d = len(X)
    vals = []
    for i in range(d):
        for j in range(d):
            diff = X[i][j] - (1 if i == j else 0)
            vals.append(_valuation(diff) if not diff.is_zero() else diff.prec)
    return min(vals) if vals else ring.M


def tau_power_convergence(gm: GaloisMatrix, nmax: int = 2) -> list[dict]:
    """Grade of X_{tau^{p^n}} - Id for n = 0..nmax.

    In the w-flavor ring y = E w lies in p A, so the (p, y)-adic grade of an
    element is its p-adic valuation.
    """
    p = gm.ring.p
    rows = []
    cur = gm
    for n in range(nmax + 1):
        if n:
            cur = _power_of(cur, p)
        k = _grade(cur.X)
        rows.append({"n": n, "a": cur.g.a, "grade": k, "saturated": k >= gm.ring.M})
    return rows


def _power_of(gm: GaloisMatrix, k: int) -> GaloisMatrix:
    """X_{g^k} from X_g, repeated cocycle multiplication."""
    X = identity(gm.ring, gm.d)
    cur = GroupElement.identity()
    for _ in range(k):
        X = mat_mul(X, mat_act(cur, gm.X))
        cur = compose(cur, gm.g)
    return GaloisMatrix(cur, X, gm.ring, gm.residual_zero, 0, [])


def cocycle_check(km: KisinModuleData, g: GroupElement, h: GroupElement, M: int = 10, I: int = 8,
                  solver=None) -> bool:
    """solve(gh) == X_g g(X_h) at precision."""
    if solver is None:
        ring = MaxRing(km.E, "w", M, I)

        def solve(gg):
            return solve_key_equation(km, gg, ring=ring)
    else:
        solve = solver
    Xg, Xh, Xgh = solve(g), solve(h), solve(compose(g, h))
    rhs = mat_mul(Xg.X, mat_act(g, Xh.X))
    return mat_eq(Xgh.X, rhs)


def iplus_identity(gm: GaloisMatrix) -> bool:
    """X reduces to the identity modulo I_+."""
    d = gm.d
    return all(iplus_reduce(gm.X[i][j]).value == (1 if i == j else 0) for i in range(d) for j in range(d))


# ---------------------------------------------------------------------------
# E^h Y = B phi(Y) C over A^(2)


@dataclass
class DescentProblem:
    """E^h Y = B phi(Y) C with B, C matrices of delta-polynomials.

    ``M`` is the target p-adic precision and ``N`` the number of E-adic
    digits to reconstruct.
    """

    E: Eisenstein
    h: int
    B: list
    C: list
    M: int = 8
    N: int = 8
    I: int = 8

    @property
    def d(self) -> int:
        return len(self.B)

    def work_ring(self, extra: int = 4) -> MaxRing:
        return MaxRing(self.E, "z", self.M + self.h + extra, self.I)


@dataclass
class DescentInstance:
    problem: DescentProblem
    Y: list  # the generator's solution, delta-polynomial entries
    seed_digits: list


@dataclass
class Reconstruction:
    digits: list  # E-adic digits, each a d x d matrix of delta-polynomials
    levels: list  # per-level diagnostics
    residual_zero: bool
    value: list  # sum E^i Y_i in A^(2)_max at target precision


class ReconstructionError(ArithmeticError):
    def __init__(self, level: int, message: str):
        super().__init__(f"level {level}: {message}")
        self.level = level


def _dp_matmul(A: list, B: list) -> list:
    d = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(d)), A[0][0].ring.const(0)) for j in range(d)] for i in range(d)]


def _dp_identity(R: DeltaPolyRing, d: int) -> list:
    return [[R.const(1 if i == j else 0) for j in range(d)] for i in range(d)]


def _dp_inverse_near_id(Y: list) -> list:
    """Inverse of Id + N for N nilpotent in the truncated ring."""
    d = len(Y)
    R = Y[0][0].ring
    N = [[Y[i][j] - (1 if i == j else 0) for j in range(d)] for i in range(d)]
    out = _dp_identity(R, d)
    power = _dp_identity(R, d)
    for k in range(1, 10 * (R.N or 1) + 10):
        power = _dp_matmul(power, N)
        if all(x.is_zero() for row in power for x in row):
            return out
        sign = -1 if k % 2 else 1
        out = [[out[i][j] + power[i][j] * sign for j in range(d)] for i in range(d)]
    raise ArithmeticError("Neumann series did not terminate")


def make_descent_instance(E: Eisenstein, d: int, h: int, rng, M: int = 8, N: int = 8, I: int = 8,
                          depth: int = 1) -> DescentInstance:
    """Build (B, C) from a known Y = Id + u E Y1.

    With a constant unipotent U and h = h1 + h2: B = E^h1 Y U and
    C = E^h2 phi(Y)^{-1} U^{-1}, so E^h Y = B phi(Y) C holds identically.
    """
    p = E.p
    W = M + 4 * h + 8
    R = DeltaPolyRing(p, D=6, K=W, N=E.e * (W + 1))
    Ep = R.from_u_poly(list(E.coeffs))
    u = R.u()

    def rand_entry():
        f = R.const(rng.randint(-2, 2))
        for k in range(2):
            t = R.const(rng.choice([1, -1, 2, p]))
            if k == 0 or rng.random() < 0.6:
                t = t * R.z(0) ** rng.randint(1, 2)
            if depth >= 1 and rng.random() < 0.3:
                t = t * R.z(1)
            if rng.random() < 0.4:
                t = t * u
            f = f + t
        return f

    Y = [[(1 if i == j else 0) + u * Ep * rand_entry() for j in range(d)] for i in range(d)]
    if d == 2:
        U = [[R.const(1), R.const(rng.choice([0, 1, -1]))], [R.const(0), R.const(1)]]
        Uinv = [[R.const(1), -U[0][1]], [R.const(0), R.const(1)]]
    else:
        U = _dp_identity(R, d)
        Uinv = U
    h1 = rng.randint(0, h)
    h2 = h - h1
    phiY = [[x.frobenius() for x in row] for row in Y]
    B = [[x * Ep**h1 for x in row] for row in _dp_matmul(Y, U)]
    C = [[x * Ep**h2 for x in row] for row in _dp_matmul(_dp_inverse_near_id(phiY), Uinv)]
    prob = DescentProblem(E, h, B, C, M, N, I)
    return DescentInstance(prob, Y, [Y_digit0(Y, E)])


def Y_digit0(Y: list, E: Eisenstein) -> list:
    """The E-adic digit of index 0: reduce every u-coefficient below degree e."""
    out = []
    for row in Y:
        r = []
        for f in row:
            rem = _poly_mod_E(f, E)
            r.append(rem)
        out.append(r)
    return out


def _poly_mod_E(f, E: Eisenstein):
    """Remainder of f on division by E as a polynomial in u."""
    ring = f.ring
    Ec = list(E.coeffs)
    e = E.e
    rows: dict[int, dict] = {}
    for exps, c in f.poly.terms():
        rows.setdefault(exps[0], {})
        rows[exps[0]][exps[1:]] = rows[exps[0]].get(exps[1:], 0) + int(c)
    for n in range(max(rows, default=-1), e - 1, -1):
        row = rows.get(n, {})
        for j in range(e):
            tgt = rows.setdefault(n - e + j, {})
            for r, c in row.items():
                tgt[r] = tgt.get(r, 0) - c * Ec[j]
        rows[n] = {}
    d = {(n,) + r: c for n, row in rows.items() for r, c in row.items() if c}
    return ring.wrap(ring.ctx.from_dict(d))


def _iota_matrix(ring: MaxRing, P: list) -> list:
    return [[iota(x, ring) for x in row] for row in P]


def _fixed_point(step, X0: list, M: int, work: MaxRing, max_iter: int) -> tuple[list, list]:
    X = X0
    trace = []
    stable = 0
    for _ in range(max_iter):
        new = [[_relift(work, x) for x in row] for row in step(X)]
        diff = min(_valuation((a - b).reduce(M)) for ra, rb in zip(new, X) for a, b in zip(ra, rb))
        trace.append(diff)
        X = new
        stable = stable + 1 if diff >= M else 0
        if stable >= 2:
            return X, trace
    raise SolverError(f"no convergence within {max_iter} iterations", trace)


def _descent_step(prob: DescentProblem, Bv: list, Cv: list, R: list | None = None):
    h = prob.h

    def step(Z):
        prod = mat_mul(mat_mul(Bv, mat_phi(Z)), Cv)
        if R is not None:
            prod = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(prod, R)]
        return [[x.div_E(h) if h else x for x in row] for row in prod]

    return step


def solve_descent_fixed_point(prob: DescentProblem, max_iter: int = 80) -> list:
    """Y from Y -> E^{-h} B phi(Y) C seeded at Id, at the target precision."""
    work = prob.work_ring()
    Bv, Cv = _iota_matrix(work, prob.B), _iota_matrix(work, prob.C)
    Y, _ = _fixed_point(_descent_step(prob, Bv, Cv), identity(work, prob.d), prob.M, work, max_iter)
    target = MaxRing(prob.E, "z", prob.M, prob.I)
    return [[target.coerce_from(x.reduce(prob.M)) for x in row] for row in Y]


def _gain_E(x: MaxRingElement, k: int) -> MaxRingElement:
    """E^k x with the k digits of precision that E^k = p^k (E/p)^k restores."""
    if k == 0:
        return x
    ring = x.ring
    om = ring.omax
    y = x.mul_E(k)
    return ring.element({i: om.element(c.terms, c.prec + k) for i, c in y.coeffs.items()}, x.prec + k)


@dataclass
class _SFormMat:
    """sum_n coeffs[n] E^n / p^floor(n/q), coeffs[n] a d x d matrix over A^(2)_max."""

    coeffs: dict

    def value(self, ring: MaxRing, q: int, d: int) -> list:
        p = ring.p
        out = [[ring.zero() for _ in range(d)] for _ in range(d)]
        T = ring.T()
        for n, Cn in self.coeffs.items():
            s = T**n * p ** (n - n // q)
            out = [[out[a][b] + Cn[a][b] * s for b in range(d)] for a in range(d)]
        return out

    def min_index(self) -> int | None:
        return min(self.coeffs) if self.coeffs else None


def _split_phi(Z: _SFormMat, ring: MaxRing, E: Eisenstein, q: int, h: int, W: int, d: int):
    """phi(Z) = a + E^h y with a over A^(2)_max and y again an S-form.

    phi(E)^i = sum_j C(i,j) E^{p(i-j)} p^j delta(E)^j; the pieces with
    j >= floor(i/q) are integral, the rest move to y at index p(i-j) - h.
    Terms whose weight n - floor(n/q) reaches W vanish at working precision.
    """
    p = ring.p
    om = ring.omax
    beta = ring.scalar(om.from_poly(E.delta_poly()))
    Eel = ring.E_elem()
    a = [[ring.zero() for _ in range(d)] for _ in range(d)]
    y: dict = {}
    for i, Ci in sorted(Z.coeffs.items()):
        phiC = mat_phi(Ci)
        fl = i // q
        for j in range(i + 1):
            c = comb(i, j)
            if j >= fl:
                s = Eel ** (p * (i - j)) * beta**j * (c * p ** (j - fl))
                a = [[a[r][t] + phiC[r][t] * s for t in range(d)] for r in range(d)]
            else:
                n = p * (i - j) - h
                shift = j - fl + n // q
                if shift < 0:
                    raise ReconstructionError(i, f"split term (i={i}, j={j}) has a negative p-power")
                if n - n // q + shift >= W:
                    continue
                s = beta**j * (c * p**shift)
                t = [[phiC[r][t] * s for t in range(d)] for r in range(d)]
                y[n] = [[y[n][r][k] + t[r][k] for k in range(d)] for r in range(d)] if n in y else t
    return a, _SFormMat(y)


def edadic_reconstruct(prob: DescentProblem, seed: list, levels: int | None = None) -> Reconstruction:
    """E-adic digits Y_0, Y_1, ... of the solution extending ``seed``.

    ``seed`` is a solution with delta-polynomial entries; it supplies the
    initial segment Y_0..Y_h0 (polynomial E-adic expansion) and the first
    correction Z_{h0+1} = Y - sum_{i<=h0} E^i Y_i.  Each later level splits
    B phi(Z_{m+1}) C = A_{m+1} + E^h B_{m+1}, reads off

        E^(h+m+1) Y_{m+1} = B phi(X_m) C - E^h X_m + A_{m+1},

    and continues with Z_{m+2} = B_{m+1}.  The invariant
    Z_{m+1} - E^(m+1) Y_{m+1} = B_{m+1} is checked at every level.
    """
    from .filtration import e_adic_digits, h0_bound

    E, d, h, p = prob.E, prob.d, prob.h, prob.E.p
    q = 4 if p == 2 else p
    h0 = h0_bound(p, h)
    top = max(prob.N, h0 + 2) if levels is None else levels
    W = prob.M + h * (top - h0 + 1) + 4
    K = seed[0][0].ring.K
    if K is not None and K < W:
        raise ValueError(f"seed known modulo p^{K}, need p^{W}")
    work = MaxRing(E, "z", W, prob.I)
    Bv, Cv = _iota_matrix(work, prob.B), _iota_matrix(work, prob.C)

    expansions = [[e_adic_digits(f, E, h0 + 1) for f in row] for row in seed]
    digits = [[[iota(expansions[a][b][0][i], work) for b in range(d)] for a in range(d)] for i in range(h0 + 1)]
    Q = [[iota(expansions[a][b][1], work) for b in range(d)] for a in range(d)]
    Z = _SFormMat({h0 + 1: [[x * p ** ((h0 + 1) // q) for x in row] for row in Q]})
    X = [[sum((_gain_E(digits[i][a][b], i) for i in range(h0 + 1)), work.zero()) for b in range(d)] for a in range(d)]

    info = []
    for m in range(h0, top):
        lo = Z.min_index()
        if lo is not None and lo < m + 1:
            raise ReconstructionError(m + 1, f"correction has index {lo} below {m + 1}")
        a, y = _split_phi(Z, work, E, q, h, W, d)
        A = mat_mul(mat_mul(Bv, a), Cv)
        Bn = _SFormMat({n: mat_mul(mat_mul(Bv, Yn), Cv) for n, Yn in y.coeffs.items()})
        if Bn.coeffs and Bn.min_index() < m + 2:
            raise ReconstructionError(m + 2, "split left a term below the next level")
        prod = mat_mul(mat_mul(Bv, mat_phi(X)), Cv)
        Nm = [[prod[r][t] - _gain_E(X[r][t], h) + A[r][t] for t in range(d)] for r in range(d)]
        k = h + m + 1
        for r in range(d):
            for t in range(d):
                if not Nm[r][t].in_fil(k)[0]:
                    raise ReconstructionError(m + 1, f"entry ({r}, {t}) is not in Fil^{k}")
        Ynext = [[x.div_E(k) for x in row] for row in Nm]
        shifted = [[_gain_E(x, m + 1) for x in row] for row in Ynext]
        # Z_{m+1} = E^(m+1) Y_{m+1} + B_{m+1}
        Zv, Bval = Z.value(work, q, d), Bn.value(work, q, d)
        inv_prec = min(x.prec for row in shifted for x in row)
        ok = all(
            (Zv[r][t] - shifted[r][t] - Bval[r][t]).reduce(inv_prec).is_zero()
            for r in range(d)
            for t in range(d)
        )
        if not ok:
            raise ReconstructionError(m + 1, "invariant Z = E^(m+1) Y + B failed")
        digits.append(Ynext)
        X = [[X[r][t] + shifted[r][t] for t in range(d)] for r in range(d)]
        Z = Bn
        info.append({"level": m + 1, "digit_prec": min(x.prec for row in Ynext for x in row), "invariant_prec": inv_prec,
                     "split_terms": len(Bn.coeffs)})

    target = MaxRing(E, "z", prob.M, prob.I)
    Xr = [[x.reduce(prob.M) for x in row] for row in X]
    prod = mat_mul(mat_mul(Bv, mat_phi(X)), Cv)
    ok = all((_gain_E(X[r][t], h) - prod[r][t]).reduce(prob.M).is_zero() for r in range(d) for t in range(d))
    value = [[target.coerce_from(x) for x in row] for row in Xr]
    return Reconstruction(digits, info, ok, value)
