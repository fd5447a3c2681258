#!/usr/bin/env python3
"""Forward-scattering subspace diagnostics: how close is the deformed model
to an exact su(2) ladder?

Prints the relative spread of the effective spin, the rms deviation of the
Ritz ladder spacing, the subspace trace variance, and the first nontrivial
lowering error, for the bare model and the ansatz deformation.
"""

import argparse
import json
from pathlib import Path

from pxpscars.basis import enumerate_basis
from pxpscars.fsa import from_couplings, fsa_error3, su2_report, subspace_variance
from pxpscars.operators import ansatz_couplings, build_hamiltonian, solve_constraint


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--outdir", default="out/su2")
    args = ap.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    basis = enumerate_basis(args.n, "periodic")
    c = solve_constraint()

    results = {}
    for name, cp in [("bare", None),
                     ("ansatz", ansatz_couplings(c.h0, args.n // 2))]:
        sub = from_couplings(basis, cp)
        rep = su2_report(sub)
        h = build_hamiltonian(basis, cp)
        results[name] = {
            "spin_spread": rep.r_relative_spread,
            "spacing_rms": rep.spacing_rms_deviation,
            "trace_variance": subspace_variance(sub, h),
            "lowering_error3": fsa_error3(sub),
        }
        print(f"{name:7s} spin spread {rep.r_relative_spread:.3e}  "
              f"spacing rms {rep.spacing_rms_deviation:.3e}  "
              f"trvar {results[name]['trace_variance']:.3e}  "
              f"err3 {results[name]['lowering_error3']:.3e}")

    (outdir / f"su2_N{args.n}.json").write_text(json.dumps(results, indent=2))


if __name__ == "__main__":
    main()
