"""Regenerate the shipped .ham fixtures under data/ (deterministic)."""

from pathlib import Path

import numpy as np

from marqsim.pauli import Hamiltonian, random_hamiltonian, serialize_hamiltonian

DATA = Path(__file__).resolve().parents[1] / "data"

WORKED = {
    "example_4_4.ham": [(1.0, "IIIZ"), (0.5, "IIZZ"), (0.4, "XXYY"), (0.1, "ZXZY")],
    "example_5_5.ham": [(1.0, "IIIZY"), (1.0, "XXIII"), (0.7, "ZXZYI"), (0.5, "IIZZX"), (0.3, "XXYYZ")],
}

# (qubits, terms, seed)
RANDOM = {
    "random_8q.ham": (8, 20, 8),
    "random_10q.ham": (10, 24, 10),
    "random_12q.ham": (12, 28, 12),
}


def main():
    DATA.mkdir(exist_ok=True)
    for name, pairs in WORKED.items():
        (DATA / name).write_text(serialize_hamiltonian(Hamiltonian.from_pairs(pairs)))
    for name, (q, m, seed) in RANDOM.items():
        h = random_hamiltonian(q, m, np.random.default_rng(seed))
        header = f"# random {q}-qubit fixture: {m} terms, seed {seed}\n"
        (DATA / name).write_text(header + serialize_hamiltonian(h))
        print(name, "lambda =", float(np.abs(h.weights).sum()))


if __name__ == "__main__":
    main()
