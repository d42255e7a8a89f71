"""CNOT count and fidelity per preset over a sweep of target precisions.

Writes raw (preset, epsilon, seed, N, cx, fidelity) rows; fit curves elsewhere.

    python3 scripts/gate_reduction.py data/random_8q.ham --seeds 20 --out results/gates_8q.csv
"""

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from marqsim.evaluation import exact_evolution, fidelity, sequence_unitary
from marqsim.pauli import load_hamiltonian
from marqsim.pipeline import PRESETS, MixWeights, compile_sequence, prepare


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("hamiltonian", type=Path)
    ap.add_argument("--time", type=float, default=math.pi / 4)
    ap.add_argument("--epsilons", type=float, nargs="+", default=[0.1, 0.067, 0.05, 0.04])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--presets", nargs="+", default=list(PRESETS))
    ap.add_argument("--no-fidelity", action="store_true", help="skip dense evaluation")
    ap.add_argument("--out", type=Path)
    args = ap.parse_args(argv)

    h = load_hamiltonian(args.hamiltonian)
    ms = prepare(h, need_gc=True, need_rp="gc-rp" in args.presets)
    u = None if args.no_fidelity else exact_evolution(ms.hamiltonian, args.time)

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
    w = csv.writer(fh)
    w.writerow(["preset", "epsilon", "seed", "N", "cx_count", "single_qubit_count", "fidelity"])
    means = {}
    for preset in args.presets:
        mat = ms.mix(MixWeights.preset(preset))
        for eps in args.epsilons:
            for seed in range(args.seeds):
                seq, circ = compile_sequence(ms.hamiltonian, mat, args.time, seed, epsilon=eps)
                fid = "" if u is None else fidelity(sequence_unitary(seq, ms.hamiltonian), u).fidelity
                w.writerow([preset, eps, seed, seq.N, circ.stats["cx_count"], circ.stats["single_qubit_count"], fid])
                means.setdefault(preset, []).append(circ.stats["cx_count"])
    if args.out:
        fh.close()
    base = np.mean(means.get("baseline", [np.nan]))
    for preset, v in means.items():
        print(f"{preset:10s} mean CX {np.mean(v):10.1f}  reduction vs baseline {100 * (1 - np.mean(v) / base):6.2f}%",
              file=sys.stderr)


if __name__ == "__main__":
    main()
