"""Verification suites: each one runs a family of exact checks and reports them.

A suite returns a ``Report``; every record names one check, its status and a
short JSON-able detail.  Records are sorted by name so reports are stable
under a fixed seed (timings aside).
"""

from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass, field

from .deltacalc import DeltaPolyRing, gamma_epoly, lemma_delta_n
from .maxring import MaxRing, iota, reduce_mod_E, st_embed
from .series import Eisenstein, OMaxRing, SeriesElement

SCHEMA_VERSION = "prismlab.report/1"

DEFAULT_PRIMES = (2, 3, 5)


def default_polys(p: int) -> list[str]:
    return [f"u-{p}", f"u^2-{p}", f"u^2+{p}*u+{p}"]


@dataclass
class SuiteConfig:
    suite: str
    p: int | None = None
    E: str | None = None
    M: int = 12
    N: int = 12
    L: int | None = None
    I: int = 8
    D: int = 6
    seed: int = 0
    nmax: int = 4
    output: str | None = None

    def validate(self) -> None:
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; choose from {sorted(SUITES)}")
        for name in ("M", "N", "I", "D"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.L is not None and self.L <= 0:
            raise ValueError("L must be positive")
        if self.E is not None:
            if self.p is None:
                raise ValueError("--E needs --p")
            Eisenstein.parse(self.p, self.E)

    def grid(self, primes=DEFAULT_PRIMES, polys=None) -> list[Eisenstein]:
        ps = [self.p] if self.p is not None else list(primes)
        out = []
        for p in ps:
            specs = [self.E] if self.E is not None else (polys(p) if polys else default_polys(p))
            out.extend(Eisenstein.parse(p, s) for s in specs)
        return out


@dataclass
class CheckRecord:
    name: str
    status: str  # pass | fail | error
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0


@dataclass
class Report:
    suite: str
    topic: str
    config: dict
    checks: list

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.status == "pass" for c in self.checks)

    def to_json(self, timings: bool = True) -> dict:
        checks = []
        for c in sorted(self.checks, key=lambda c: c.name):
            d = asdict(c)
            if not timings:
                d.pop("seconds")
            else:
                d["seconds"] = round(d["seconds"], 3)
            checks.append(d)
        return {
            "schema": SCHEMA_VERSION,
            "suite": self.suite,
            "topic": self.topic,
            "config": self.config,
            "checks": checks,
            "passed": self.passed,
        }


class _Collector:
    def __init__(self):
        self.records: list[CheckRecord] = []

    def run(self, name: str, fn):
        """fn returns (ok, detail) or ok."""
        t = time.perf_counter()
        try:
            out = fn()
            ok, detail = out if isinstance(out, tuple) else (out, {})
            status = "pass" if ok else "fail"
        except Exception as exc:  # a crash is reported as that check's result
            status, detail = "error", {"error": f"{type(exc).__name__}: {exc}"}
        self.records.append(CheckRecord(name, status, _jsonable(detail), time.perf_counter() - t))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, int):
        return str(x) if abs(x) > 2**53 else x
    if isinstance(x, float):
        return x
    if hasattr(x, "to_json"):
        return x.to_json()
    return str(x)


def _tag(E: Eisenstein) -> str:
    return f"p={E.p} E={E}"


# ---------------------------------------------------------------------------
# delta-ring axioms on Z_p[[u]]


def _random_series(rng, p, prec, N) -> SeriesElement:
    return SeriesElement(p, prec, N, [rng.randrange(p**prec) for _ in range(rng.randint(1, N))])


def suite_delta_axioms(cfg: SuiteConfig, col: _Collector, count: int = 200):
    primes = [cfg.p] if cfg.p is not None else list(DEFAULT_PRIMES)
    for p in primes:
        rng = random.Random(f"{cfg.seed}:{p}")

        def check(p=p, rng=rng):
            bad = []
            M, N = cfg.M, cfg.N
            for k in range(count):
                f, g = _random_series(rng, p, M, N), _random_series(rng, p, M, N)
                df, dg = f.delta(), g.delta()
                prod = (f * g).delta() - (f**p * dg + g**p * df + p * df * dg)
                mixed = sum((f**i * g ** (p - i) * (_binom(p, i) // p) for i in range(1, p)), SeriesElement(p, M, N, []))
                add = (f + g).delta() - (df + dg - mixed)
                if not (prod.reduce(M - 1).is_zero() and add.reduce(M - 1).is_zero()):
                    bad.append(k)
            return not bad, {"pairs": count, "precision": cfg.M - 1, "failures": bad}

        col.run(f"axioms p={p}", check)


def _binom(n, k):
    from math import comb

    return comb(n, k)


# ---------------------------------------------------------------------------
# c = phi(E)/p is a unit of O_max


def suite_frobenius_unit(cfg: SuiteConfig, col: _Collector):
    for E in cfg.grid():

        def check(E=E):
            om = OMaxRing(E, cfg.M, cfg.L)
            c, ci = om.c, om.c_inv
            one = (c * ci - 1).is_zero()
            near = (c - om.from_poly(E.delta_poly())).t_divisible(1)
            phiE_over_p = om.E_elem().frobenius().div_p(1)
            return one and near and c.is_unit() and (phiE_over_p - c).is_zero(), {
                "c_times_inverse_is_1": one,
                "c_minus_delta_E_in_Fil1": near,
                "c_is_unit": c.is_unit(),
                "c_equals_phi_E_over_p": (phiE_over_p - c).is_zero(),
            }

        col.run(f"unit {_tag(E)}", check)


# ---------------------------------------------------------------------------
# delta^n(E z) decomposition


def suite_delta_tower(cfg: SuiteConfig, col: _Collector):
    primes = [cfg.p] if cfg.p is not None else [2, 3]
    polys = (lambda p: [f"u-{p}"]) if cfg.E is None else None
    for E in cfg.grid(primes, polys):
        for n in range(1, min(cfg.nmax, 4) + 1):

            def check(E=E, n=n):
                data = lemma_delta_n(E, n)
                return data.ok, data.to_json()

            col.run(f"delta^{n}(Ez) {_tag(E)}", check)


# ---------------------------------------------------------------------------
# gamma_i(z) as polynomials in E/p


def suite_gamma_polys(cfg: SuiteConfig, col: _Collector, M: int = 10):
    primes = [cfg.p] if cfg.p is not None else [2, 3]
    polys = (lambda p: [f"u-{p}", f"u^2-{p}"]) if cfg.E is None else None
    for E in cfg.grid(primes, polys):
        p = E.p
        top = p * p
        ring = MaxRing(E, "z", M, max(cfg.I, top + 1))
        from .deltacalc import EnvelopeRecursion

        rec = EnvelopeRecursion(E, M + 2, E.e * (M + 2), cfg.D)
        for i in range(1, top + 1):

            def check(i=i, ring=ring, rec=rec, E=E):
                f = gamma_epoly(E, i, recursion=rec)
                diff = iota(f, ring) - ring.gamma(i)
                return diff.is_zero(), {"i": i, "terms": len(f.poly)}

            col.run(f"gamma_{i:02d} {_tag(E)}", check)


# ---------------------------------------------------------------------------
# kernel of reduction mod E, filtration decompositions


def _random_max(rng, ring: MaxRing, span: int = 3):
    om = ring.omax
    coeffs = {}
    for i in range(min(ring.I, span + 1)):
        terms = {}
        for _ in range(3):
            terms[(rng.randint(0, 3), rng.randrange(om.e))] = rng.randint(-9, 9)
        coeffs[i] = om.element(terms)
    return ring.element(coeffs)


def _random_dp(rng, R: DeltaPolyRing, depth: int = 1):
    f = R.const(rng.randint(-3, 3))
    for _ in range(3):
        t = R.const(rng.choice([1, -1, 2, R.p]))
        t = t * R.u() ** rng.randint(0, 2)
        t = t * R.z(0) ** rng.randint(0, 2)
        if depth >= 1 and rng.random() < 0.3:
            t = t * R.z(1)
        f = f + t
    return f


def suite_mod_E(cfg: SuiteConfig, col: _Collector, count: int = 100):
    from .filtration import FiltrationWitness, SForm, fil_decompose

    primes = [cfg.p] if cfg.p is not None else [2, 3]
    polys = (lambda p: [f"u-{p}", f"u^2-{p}"]) if cfg.E is None else None
    for E in cfg.grid(primes, polys):
        ring = MaxRing(E, "z", 10, cfg.I)
        rng = random.Random(f"{cfg.seed}:{E}")

        def kernel(E=E, ring=ring, rng=rng):
            from .deltacalc import EnvelopeRecursion
            from .filtration import div_by_E, lift_reduction

            rec = EnvelopeRecursion(E, 12, E.e * 12, 3)
            R = rec.ring
            bad, poly_div = [], 0
            for k in range(count):
                f = _random_dp(rng, R)
                red = reduce_mod_E(iota(f, ring))
                ker = f - lift_reduction(red, R, rec)
                K = iota(ker, ring)
                ok = not reduce_mod_E(K) and K.in_fil(1)[0]
                if ok:
                    q = K.div_E(1)
                    ok = (q.mul_E(1) - K).reduce(q.prec).is_zero()
                pq = div_by_E(ker, E, 1)
                if pq is not None:
                    poly_div += 1
                    ok = ok and (iota(pq, ring).mul_E(1) - K).is_zero()
                if not ok:
                    bad.append(k)
            return not bad, {"elements": count, "failures": bad, "polynomial_quotients": poly_div}

        col.run(f"kernel {_tag(E)}", kernel)

        def decompose(E=E, ring=ring, rng=rng):
            R = DeltaPolyRing(E.p, D=3)
            Ep = R.from_u_poly(list(E.coeffs))
            bad = []
            for k in range(10):
                i = rng.randint(1, 3)
                a = _random_dp(rng, R)
                x = SForm(E, {0: a * Ep**i, i + 1: _random_dp(rng, R)})
                w = fil_decompose(x, i, ring)
                if not isinstance(w, FiltrationWitness):
                    bad.append((k, "rejected"))
                    continue
                if min(j for j, _ in w.decomposition) < i or not (w.reassemble().value(ring) - x.value(ring)).is_zero():
                    bad.append((k, "reassembly"))
            rej = fil_decompose(SForm(E, {0: R.const(1)}), 1, ring)
            return not bad and not isinstance(rej, FiltrationWitness), {"failures": bad, "one_rejected_at": rej.level}

        col.run(f"fil-decompose {_tag(E)}", decompose)


# ---------------------------------------------------------------------------
# phi(Fil^m) = a + E^h Fil^(m+1)


def suite_filtration_split(cfg: SuiteConfig, col: _Collector, count: int = 20):
    from .filtration import SForm, h0_bound, phi_fil_split

    primes = [cfg.p] if cfg.p is not None else [2, 3]
    for p in primes:
        E = Eisenstein.parse(p, cfg.E if cfg.E is not None else f"u-{p}")
        hat = p == 2
        for h in (1, 2):
            m = h0_bound(p, h) + 1

            def check(E=E, h=h, m=m, hat=hat):
                rng = random.Random(f"{cfg.seed}:{E}:{h}")
                ring = MaxRing(E, "z", 8, cfg.I)
                R = DeltaPolyRing(E.p, D=4, K=40, N=E.e * 60)
                bad = []
                for k in range(count):
                    terms = {m: _random_dp(rng, R, 0)}
                    if rng.random() < 0.5:
                        terms[m + 1] = _random_dp(rng, R, 0)
                    s = phi_fil_split(SForm(E, terms, hat), m, h, ring)
                    if not (s.checked and s.details["y_in_fil"]):
                        bad.append(k)
                return not bad, {"m": m, "h": h, "elements": count, "failures": bad}

            col.run(f"split h={h} {_tag(E)}{' hat' if hat else ''}", check)


# ---------------------------------------------------------------------------
# E^h Y = B phi(Y) C round trips


DESCENT_GRID = [
    (2, "u-2", 1, 1), (2, "u-2", 1, 2), (2, "u-2", 2, 1), (2, "u-2", 2, 2), (2, "u^2-2", 1, 1),
    (3, "u-3", 1, 1), (3, "u-3", 1, 2), (3, "u-3", 2, 1), (3, "u-3", 2, 2), (3, "u^2-3", 1, 2),
]


def suite_descent(cfg: SuiteConfig, col: _Collector):
    from .descent import edadic_reconstruct, make_descent_instance, solve_descent_fixed_point

    grid = DESCENT_GRID
    if cfg.p is not None:
        grid = [g for g in grid if g[0] == cfg.p]
        if cfg.E is not None:
            grid = [(cfg.p, cfg.E, d, h) for d in (1, 2) for h in (1, 2)]
    for k, (p, Es, d, h) in enumerate(grid):

        def check(k=k, p=p, Es=Es, d=d, h=h):
            E = Eisenstein.parse(p, Es)
            rng = random.Random(f"{cfg.seed}:{k}")
            inst = make_descent_instance(E, d, h, rng, M=8, N=8)
            prob = inst.problem
            Yfp = solve_descent_fixed_point(prob)
            ring = Yfp[0][0].ring
            Ygen = [[iota(x, ring) for x in row] for row in inst.Y]
            rec = edadic_reconstruct(prob, inst.Y)
            fp = all(a == b for ra, rb in zip(Yfp, Ygen) for a, b in zip(ra, rb))
            ed = all(a == b for ra, rb in zip(rec.value, Ygen) for a, b in zip(ra, rb))
            agree = all(a == b for ra, rb in zip(rec.value, Yfp) for a, b in zip(ra, rb))
            return fp and ed and agree and rec.residual_zero, {
                "d": d, "h": h, "fixed_point_equals_generator": fp, "reconstruction_equals_generator": ed,
                "solvers_agree": agree, "residual_zero": rec.residual_zero, "levels": rec.levels,
            }

        col.run(f"instance {k:02d} p={p} E={Es} d={d} h={h}", check)


# ---------------------------------------------------------------------------
# Galois action


def _random_w(rng, ring):
    return _random_max(rng, ring, span=3)


def suite_galois(cfg: SuiteConfig, col: _Collector, triples: int = 10):
    from .galois import GroupElement, act, compose, iplus_reduce

    primes = [cfg.p] if cfg.p is not None else [2, 3]
    polys = (lambda p: [f"u-{p}", f"u^2-{p}"]) if cfg.E is None else None
    for E in cfg.grid(primes, polys):
        p = E.p
        ring = MaxRing(E, "w", 8, cfg.I)
        rng = random.Random(f"{cfg.seed}:{E}")
        units = [c for c in range(1, 3 * p) if c % p]

        def rand_g():
            return GroupElement(rng.randint(-3, 3), rng.choice(units))

        gs = [GroupElement.tau(), GroupElement(0, units[-1]), GroupElement(2, 1)]

        def equivariance(ring=ring, rng=rng, gs=gs):
            bad = []
            for g in gs:
                f = _random_w(rng, ring)
                if not (act(g, f.frobenius()) - act(g, f).frobenius()).is_zero():
                    bad.append(str(g))
            return not bad, {"failures": bad}

        def coherence(ring=ring, rng=rng):
            bad = []
            for k in range(triples):
                g, h = rand_g(), rand_g()
                f = _random_w(rng, ring)
                if not (act(compose(g, h), f) - act(g, act(h, f))).is_zero():
                    bad.append((k, str(g), str(h)))
            return not bad, {"triples": triples, "failures": bad}

        def iplus(ring=ring, rng=rng, gs=gs):
            bad = []
            for g in gs:
                f = _random_w(rng, ring)
                if iplus_reduce(act(g, f)).value != iplus_reduce(f).value:
                    bad.append(str(g))
            return not bad, {"failures": bad}

        def containment(ring=ring, rng=rng, gs=gs):
            zr = ring.twin()
            bad = []
            for g in gs:
                f = st_embed(_random_max(rng, zr))
                diff = act(g, f) - f
                for i, c in diff.coeffs.items():
                    status, _ = c.divide_by_u()
                    if status != "ok":
                        bad.append((str(g), i, status))
            return not bad, {"failures": bad}

        col.run(f"phi-equivariance {_tag(E)}", equivariance)
        col.run(f"composition {_tag(E)}", coherence)
        col.run(f"iplus-trivial {_tag(E)}", iplus)
        col.run(f"u-containment {_tag(E)}", containment)


# ---------------------------------------------------------------------------
# key equation, crystallinity, cocycles, convergence


def _key_grid(cfg: SuiteConfig):
    primes = [cfg.p] if cfg.p is not None else [2, 3]
    polys = (lambda p: [f"u-{p}", f"u^2-{p}"]) if cfg.E is None else None
    return cfg.grid(primes, polys)


def suite_key_equation(cfg: SuiteConfig, col: _Collector, N0: int = 6):
    from .descent import KisinModuleData, _valuation, rank1_product, solve_key_equation
    from .galois import GroupElement

    for E in _key_grid(cfg):
        for m in (1, 2):

            def check(E=E, m=m):
                km = KisinModuleData.rank1(E, m)
                gm = solve_key_equation(km, GroupElement.tau(), M=10, I=cfg.I)
                prod = rank1_product(gm.ring, GroupElement.tau(), m, N0)
                diff = gm.X[0][0] - prod
                grade = gm.ring.M if diff.is_zero() else _valuation(diff)
                return gm.residual_zero and grade >= 6, {
                    "residual_zero": gm.residual_zero, "grade_vs_product": grade, "N0": N0,
                    "iterations": gm.iterations,
                }

            col.run(f"rank1 m={m} {_tag(E)}", check)


def _verdicts(E: Eisenstein, M: int, I: int, L: int | None):
    from .descent import KisinModuleData, crystalline_test, extension_matrix, extension_module, solve_key_equation
    from .galois import GroupElement

    ring = MaxRing(E, "w", M, I, L)
    g = GroupElement.tau()
    out = {}
    for m in (1, 2):
        gm = solve_key_equation(KisinModuleData.rank1(E, m), g, ring=ring)
        out[f"rank1 m={m}"] = crystalline_test(gm)
    km = extension_module(E, M)
    solved = solve_key_equation(km, g, ring=ring)
    out["extension kappa=0 (solver)"] = crystalline_test(solved)
    wit = extension_matrix(km, g, 1, ring=ring)
    v = crystalline_test(wit)
    v["residual_zero"] = wit.residual_zero
    out["extension kappa=1"] = v
    return out


def _summary(v: dict) -> dict:
    out = {"verdict": v["verdict"]}
    if "entry" in v:
        out["entry"] = list(v["entry"])
        out["index"] = v["index"]
    if v.get("coefficient") is not None:
        c = v["coefficient"]
        out["coefficient_valuation"] = c.valuation()
        out["coefficient_u_divisible"] = c.divide_by_u()[0] == "ok"
    return out


def suite_crystalline(cfg: SuiteConfig, col: _Collector, M: int = 10, bump: int = 4):
    for E in _key_grid(cfg):

        def check(E=E):
            base = _verdicts(E, M, cfg.I, cfg.L)
            raised = _verdicts(E, M + bump, cfg.I + bump, None if cfg.L is None else cfg.L + bump)
            expect = {
                "rank1 m=1": "crystalline-at-precision",
                "rank1 m=2": "crystalline-at-precision",
                "extension kappa=0 (solver)": "crystalline-at-precision",
                "extension kappa=1": "semistable-witness",
            }
            ok = all(base[k]["verdict"] == v and raised[k]["verdict"] == v for k, v in expect.items())
            w = base["extension kappa=1"]
            ok = ok and w["residual_zero"] and w["coefficient"].divide_by_u()[0] != "ok"
            a, b = _summary(w), _summary(raised["extension kappa=1"])
            ok = ok and all(a.get(k) == b.get(k) for k in ("entry", "index", "coefficient_u_divisible"))
            return ok, {
                "base": {k: _summary(v) for k, v in base.items()},
                "raised": {k: _summary(v) for k, v in raised.items()},
            }

        col.run(f"verdicts {_tag(E)}", check)


def suite_cocycle(cfg: SuiteConfig, col: _Collector):
    from .descent import KisinModuleData, cocycle_check, extension_matrix, extension_module
    from .galois import GroupElement

    for E in _key_grid(cfg):
        p = E.p
        chi = p + 1
        pairs = [(GroupElement.tau(), GroupElement.tau()), (GroupElement(2, 1), GroupElement(-1, 1)),
                 (GroupElement(0, chi), GroupElement.tau()), (GroupElement.tau(), GroupElement(1, chi))]

        for m in (1, 2):

            def check(E=E, m=m):
                km = KisinModuleData.rank1(E, m)
                res = [cocycle_check(km, g, h) for g, h in pairs]
                return all(res), {"pairs": [f"{g}*{h}" for g, h in pairs], "results": res}

            col.run(f"rank1 m={m} {_tag(E)}", check)

        def ext(E=E):
            km = extension_module(E, 10)
            ring = MaxRing(E, "w", 10, cfg.I)
            res = [cocycle_check(km, g, h, solver=lambda gg: extension_matrix(km, gg, 1, ring=ring)) for g, h in pairs]
            return all(res), {"results": res}

        col.run(f"extension kappa=1 {_tag(E)}", ext)


def suite_tau_convergence(cfg: SuiteConfig, col: _Collector):
    from .descent import KisinModuleData, solve_key_equation, tau_power_convergence
    from .galois import GroupElement

    for E in _key_grid(cfg):
        for m in (1, 2):

            def check(E=E, m=m):
                gm = solve_key_equation(KisinModuleData.rank1(E, m), GroupElement.tau(), M=10, I=cfg.I)
                rows = tau_power_convergence(gm, 2)
                ok = True
                for a, b in zip(rows, rows[1:]):
                    if a["saturated"]:
                        break
                    ok = ok and b["grade"] > a["grade"]
                return ok, {"rows": rows}

            col.run(f"tau powers m={m} {_tag(E)}", check)


def suite_negative_control(cfg: SuiteConfig, col: _Collector):
    """phi(E/p) - (E/p)^p must keep a unit coefficient: E/p has no Frobenius-lift structure."""
    primes = [cfg.p] if cfg.p is not None else list(DEFAULT_PRIMES)
    for E in cfg.grid(primes):
        for M in (6, 8, 10, 12):

            def check(E=E, M=M):
                om = OMaxRing(E, M)
                T = om.T()
                x = T.frobenius() - T**E.p
                v = x.valuation()
                return v == 0, {"valuation": v}

            col.run(f"not-in-pA M={M:02d} {_tag(E)}", check)


SUITES = {
    "delta-axioms": (suite_delta_axioms, "delta-ring identities for the Frobenius lift u -> u^p"),
    "frobenius-unit": (suite_frobenius_unit, "phi(E)/p is a unit of O_max congruent to delta(E) mod E/p"),
    "delta-tower": (suite_delta_tower, "delta^n(E z) = b_n z_n + sum a_i z_{n-1}^i with b_n = phi^n(E)"),
    "gamma-polys": (suite_gamma_polys, "gamma_i(z) is a delta-polynomial in E/p"),
    "mod-E": (suite_mod_E, "reduction mod E and filtration decompositions"),
    "filtration-split": (suite_filtration_split, "phi(Fil^m) = A^(2)-part + E^h Fil^(m+1)"),
    "descent": (suite_descent, "E^h Y = B phi(Y) C: E-adic reconstruction against the fixed-point solver"),
    "galois-action": (suite_galois, "Galois action: Frobenius equivariance, composition, I+ triviality, u-containment"),
    "key-equation": (suite_key_equation, "E^h X = r^-h A phi(X) g(B) for rank-1 modules"),
    "crystalline": (suite_crystalline, "crystalline/semistable verdicts and their stability under more precision"),
    "cocycle": (suite_cocycle, "X_gh = X_g g(X_h)"),
    "tau-convergence": (suite_tau_convergence, "X_{tau^(p^n)} - Id gains grade as n grows"),
    "negative-control": (suite_negative_control, "phi(E/p) - (E/p)^p is not in p A_max"),
}


def run_suite(cfg: SuiteConfig) -> Report:
    cfg.validate()
    fn, topic = SUITES[cfg.suite]
    col = _Collector()
    fn(cfg, col)
    echo = {k: v for k, v in asdict(cfg).items() if k != "output"}
    return Report(cfg.suite, topic, echo, col.records)
