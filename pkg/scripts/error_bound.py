"""Mean infidelity against sample count N for one preset; checks the 2 lam^2 t^2 / N trend.

    python3 scripts/error_bound.py data/example_4_4.ham --preset baseline
"""

import argparse
import math
from pathlib import Path

import numpy as np

from marqsim.evaluation import exact_evolution, fidelity, sequence_unitary
from marqsim.pauli import lambda_sum, load_hamiltonian
from marqsim.pipeline import MixWeights, build_matrix
from marqsim.sampler import CompileRequest, sample_sequence


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("hamiltonian", type=Path)
    ap.add_argument("--preset", default="baseline")
    ap.add_argument("--time", type=float, default=math.pi / 4)
    ap.add_argument("--samples", type=int, nargs="+", default=[25, 50, 99, 198, 396, 792])
    ap.add_argument("--seeds", type=int, default=50)
    args = ap.parse_args(argv)

    ms, m = build_matrix(load_hamiltonian(args.hamiltonian), MixWeights.preset(args.preset))
    h = ms.hamiltonian
    u = exact_evolution(h, args.time)
    lam = lambda_sum(h)
    print(f"{'N':>6s} {'bound':>9s} {'mean 1-F':>9s} {'SE':>8s}")
    for n in args.samples:
        inf = [1 - fidelity(sequence_unitary(sample_sequence(CompileRequest(h, args.time, m, s, samples=n),
                                                             check=False), h), u).fidelity
               for s in range(args.seeds)]
        print(f"{n:6d} {2 * lam**2 * args.time**2 / n:9.4f} {np.mean(inf):9.5f} "
              f"{np.std(inf, ddof=1) / math.sqrt(len(inf)):8.5f}")


if __name__ == "__main__":
    main()
