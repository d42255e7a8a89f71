"""Second eigenvalue modulus and fidelity spread for gc vs gc-rp style mixes.

    python3 scripts/spectrum_variance.py data/random_8q.ham --seeds 50
"""

import argparse
import math
from pathlib import Path

import numpy as np

from marqsim.evaluation import exact_evolution, fidelity, sequence_unitary
from marqsim.htt import spectrum
from marqsim.pauli import load_hamiltonian
from marqsim.pipeline import MixWeights, prepare
from marqsim.sampler import CompileRequest, sample_sequence

MIXES = {
    "P1 (0.4 qd, 0.6 gc)": MixWeights(0.4, 0.6, 0.0),
    "P1' (0.4 qd, 0.3 gc, 0.3 rp)": MixWeights(0.4, 0.3, 0.3),
    "P2 (0.2 qd, 0.8 gc)": MixWeights(0.2, 0.8, 0.0),
    "P2' (0.2 qd, 0.4 gc, 0.4 rp)": MixWeights(0.2, 0.4, 0.4),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("hamiltonian", type=Path)
    ap.add_argument("--time", type=float, default=math.pi / 4)
    ap.add_argument("--epsilon", type=float, default=0.05)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--rp-trials", type=int, default=100)
    args = ap.parse_args(argv)

    ms = prepare(load_hamiltonian(args.hamiltonian), need_gc=True, need_rp=True, rp_trials=args.rp_trials)
    u = exact_evolution(ms.hamiltonian, args.time)
    print(f"{'mix':32s} {'|l2|':>8s} {'mean F':>8s} {'sigma F':>9s}")
    for label, w in MIXES.items():
        m = ms.mix(w)
        fids = []
        for seed in range(args.seeds):
            seq = sample_sequence(CompileRequest(ms.hamiltonian, args.time, m, seed, epsilon=args.epsilon), check=False)
            fids.append(fidelity(sequence_unitary(seq, ms.hamiltonian), u).fidelity)
        print(f"{label:32s} {spectrum(m).second_modulus:8.4f} {np.mean(fids):8.4f} {np.std(fids, ddof=1):9.5f}")


if __name__ == "__main__":
    main()
