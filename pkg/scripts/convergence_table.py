"""Grade of X_{tau^(p^n)} - Id for the rank-1 modules (E^m) and the extension module.

    python scripts/convergence_table.py --M 12 --nmax 3
"""

import argparse

from prismlab.descent import (KisinModuleData, crystalline_test, extension_matrix, extension_module,
                              solve_key_equation, tau_power_convergence)
from prismlab.galois import GroupElement
from prismlab.maxring import MaxRing
from prismlab.series import Eisenstein


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--M", type=int, default=10)
    ap.add_argument("--I", type=int, default=8)
    ap.add_argument("--nmax", type=int, default=2)
    args = ap.parse_args()
    tau = GroupElement.tau()
    print(f"{'E':>10s} {'module':>12s} {'verdict':>26s}  grades n=0..{args.nmax}")
    for p in (2, 3):
        for poly in (f"u-{p}", f"u^2-{p}"):
            E = Eisenstein.parse(p, poly)
            ring = MaxRing(E, "w", args.M, args.I)
            cases = [(f"E^{m}", solve_key_equation(KisinModuleData.rank1(E, m), tau, ring=ring)) for m in (1, 2)]
            cases.append(("extension", extension_matrix(extension_module(E, args.M), tau, 1, ring=ring)))
            for name, gm in cases:
                rows = tau_power_convergence(gm, args.nmax)
                grades = " ".join(f"{r['grade']}{'*' if r['saturated'] else ''}" for r in rows)
                print(f"{str(E):>10s} {name:>12s} {crystalline_test(gm)['verdict']:>26s}  {grades}")
    print("* = saturated at the working precision")


if __name__ == "__main__":
    main()
