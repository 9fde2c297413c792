"""The twelve acceptance checks, each a thin wrapper over one verification suite.

Every check returns ``(passed, detail)``; ``run_all`` adds wall-clock time and
applies the runtime budgets.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .suites import SuiteConfig, run_suite


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    suite: str
    config: dict
    budget: float | None = None  # seconds
    per_prime: bool = False


CRITERIA = [
    Criterion(1, "delta-ring identities on 200 random pairs, p in {2,3,5}, precision M-1",
              "delta-axioms", {"M": 12, "N": 12}, budget=10.0, per_prime=True),
    Criterion(2, "phi(E)/p is a unit of O_max, congruent to delta(E) mod Fil^1, default grid at M = 12",
              "frobenius-unit", {"M": 12}),
    Criterion(3, "delta^n(E z) decomposition for p in {2,3}, n <= 4, with the b_n recursion",
              "delta-tower", {"nmax": 4}, budget=60.0),
    Criterion(4, "gamma_i(z) equals its polynomial in E/p for i <= p^2 at M = 10",
              "gamma-polys", {"I": 8}),
    Criterion(5, "kernel of reduction mod E is E times A^(2) on 100 elements; Fil^i decompositions reassemble",
              "mod-E", {}),
    Criterion(6, "phi(Fil^m) = a + E^h Fil^(m+1) on 20 elements, m = h0+1, h in {1,2}, p in {2,3}",
              "filtration-split", {}),
    Criterion(7, "E-adic reconstruction recovers Y on 10 instances and agrees with the fixed point at (8,8)",
              "descent", {}),
    Criterion(8, "rank-1 key equation matches the truncated product at grade >= 6 with zero residual",
              "key-equation", {}),
    Criterion(9, "Galois action: phi-equivariance, 10 composition triples, I+ triviality, u-containment",
              "galois-action", {}),
    Criterion(10, "crystalline and semistable verdicts, stable when all precisions rise by 4",
              "crystalline", {}),
    Criterion(11, "tau^(p^n) grades strictly increase for n = 0,1,2 until saturation",
              "tau-convergence", {}),
    Criterion(12, "phi(E/p) - (E/p)^p keeps a unit coefficient at M in {6,8,10,12}",
              "negative-control", {}),
]


def run_criterion(c: Criterion, seed: int = 0) -> dict:
    t = time.perf_counter()
    report = run_suite(SuiteConfig(c.suite, seed=seed, **c.config))
    seconds = time.perf_counter() - t
    ok = report.passed
    timing = {}
    if c.budget is not None:
        if c.per_prime:
            for rec in report.checks:
                timing[rec.name] = round(rec.seconds, 3)
                ok = ok and rec.seconds < c.budget
        else:
            ok = ok and seconds < c.budget
    failing = [r.name for r in report.checks if r.status != "pass"]
    return {
        "number": c.number,
        "title": c.title,
        "suite": c.suite,
        "passed": ok,
        "checks": len(report.checks),
        "failing": failing,
        "seconds": round(seconds, 3),
        "budget": c.budget,
        "per_check_seconds": timing,
    }


def format_line(result: dict) -> str:
    status = "PASS" if result["passed"] else "FAIL"
    extra = f"; failing: {', '.join(result['failing'])}" if result["failing"] else ""
    return (f"criterion {result['number']:2d} {status} [{result['suite']}] {result['title']} "
            f"({result['checks']} checks, {result['seconds']:.1f}s{extra})")


def run_all(seed: int = 0) -> list[dict]:
    return [run_criterion(c, seed) for c in CRITERIA]
