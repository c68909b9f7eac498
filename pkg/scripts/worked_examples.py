"""Step-by-step run of the two small worked instances."""
import numpy as np

from rankone.decomposer import SpectralState, decompose
from rankone.errors import Infeasible
from rankone.spectral import assemble


def main():
    d = decompose(SpectralState.from_diagonal([5.0, 4.0]), [3.0, 3.0, 2.0, 1.0])
    print("diag(5, 4) with weights (3, 3, 2, 1)")
    for step, x in zip(d.steps, d.vectors):
        mixing = "" if step.mixing is None else f"  t={step.mixing:.12g}"
        print(f"  case {step.case}  c={step.weight:g}  x=({x[0]:+.12f}, {x[1]:+.12f})  rank {step.rank_before}->{step.rank_after}{mixing}")
    print(f"  assembly error {np.max(np.abs(assemble(d) - np.diag([5.0, 4.0]))):.2e}")

    print("diag(5, 2, 2) with weights (4, 4, 1)")
    try:
        decompose(SpectralState.from_diagonal([5.0, 2.0, 2.0]), [4.0, 4.0, 1.0])
    except Infeasible as exc:
        print(f"  rejected: {exc.report.to_dict()}")


if __name__ == "__main__":
    main()
