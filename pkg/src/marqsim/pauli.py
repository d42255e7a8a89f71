"""Weighted Pauli-string Hamiltonians.

Text format (``.ham``): one term per line, ``<float> <PAULIWORD>``; ``#`` starts
a comment line, blank lines are skipped. The leftmost character of a word acts
on the highest qubit, so ``XYZI`` means X on qubit 4 and I on qubit 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

PAULI_CHARS = "IXYZ"


class HamiltonianFormatError(ValueError):
    """Raised for malformed ``.ham`` input."""


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli word stored in its textual (highest qubit first) form."""

    word: str

    def __post_init__(self):
        if not self.word:
            raise ValueError("Pauli string must act on at least one qubit")
        bad = set(self.word) - set(PAULI_CHARS)
        if bad:
            raise ValueError(f"illegal Pauli character(s) {''.join(sorted(bad))!r} in {self.word!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.word)

    def op(self, qubit: int) -> str:
        """Operator acting on 1-based ``qubit`` (qubit 1 is the rightmost character)."""
        if not 1 <= qubit <= len(self.word):
            raise IndexError(f"qubit {qubit} out of range for {len(self.word)}-qubit string")
        return self.word[-qubit]

    @property
    def support(self) -> tuple[int, ...]:
        """Ascending 1-based qubits carrying a non-identity operator."""
        n = len(self.word)
        return tuple(q for q in range(1, n + 1) if self.word[n - q] != "I")

    @property
    def x_mask(self) -> int:
        """Bit q-1 set where the operator on qubit q flips the basis state (X or Y)."""
        return sum(1 << (q - 1) for q in self.support if self.op(q) in "XY")

    @property
    def z_mask(self) -> int:
        """Bit q-1 set where the operator on qubit q carries a phase (Z or Y)."""
        return sum(1 << (q - 1) for q in self.support if self.op(q) in "YZ")

    def __str__(self):
        return self.word


@dataclass(frozen=True)
class HamiltonianTerm:
    weight: float
    string: PauliString

    def __post_init__(self):
        if not math.isfinite(self.weight):
            raise ValueError(f"term weight must be finite, got {self.weight}")
        if self.weight == 0:
            raise ValueError(f"zero-weight term {self.string}")


@dataclass(frozen=True)
class Hamiltonian:
    terms: tuple[HamiltonianTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("Hamiltonian needs at least one term")
        widths = {t.string.n_qubits for t in self.terms}
        if len(widths) != 1:
            raise ValueError(f"inconsistent Pauli word lengths {sorted(widths)}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, str]]) -> Hamiltonian:
        return cls(tuple(HamiltonianTerm(float(w), PauliString(s)) for w, s in pairs))

    @property
    def qubit_count(self) -> int:
        return self.terms[0].string.n_qubits

    @property
    def weights(self) -> np.ndarray:
        return np.array([t.weight for t in self.terms], dtype=float)

    @property
    def strings(self) -> list[PauliString]:
        return [t.string for t in self.terms]

    def __len__(self):
        return len(self.terms)


def parse_hamiltonian(text: str | TextIO) -> Hamiltonian:
    """Parse ``.ham`` text (or an open text stream) into a :class:`Hamiltonian`."""
    if not isinstance(text, str):
        text = text.read()
    terms = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise HamiltonianFormatError(f"line {lineno}: expected '<real> <pauli-word>', got {raw!r}")
        coeff, word = fields
        try:
            weight = float(coeff)
        except ValueError:
            raise HamiltonianFormatError(f"line {lineno}: malformed coefficient {coeff!r}") from None
        if not math.isfinite(weight):
            raise HamiltonianFormatError(f"line {lineno}: non-finite coefficient {coeff!r}")
        if weight == 0:
            raise HamiltonianFormatError(f"line {lineno}: zero coefficient")
        bad = set(word) - set(PAULI_CHARS)
        if bad:
            raise HamiltonianFormatError(f"line {lineno}: illegal character(s) {''.join(sorted(bad))!r} in {word!r}")
        if width is None:
            width = len(word)
        elif len(word) != width:
            raise HamiltonianFormatError(f"line {lineno}: word length {len(word)} differs from {width}")
        terms.append(HamiltonianTerm(weight, PauliString(word)))
    if not terms:
        raise HamiltonianFormatError("no terms found")
    return Hamiltonian(tuple(terms))


def serialize_hamiltonian(h: Hamiltonian) -> str:
    # repr() round-trips floats exactly
    return "".join(f"{t.weight!r} {t.string.word}\n" for t in h.terms)


def load_hamiltonian(path) -> Hamiltonian:
    with open(path, encoding="utf-8") as fh:
        return parse_hamiltonian(fh)


def lambda_sum(h: Hamiltonian) -> float:
    return float(np.sum(np.abs(h.weights)))


def stationary(h: Hamiltonian) -> np.ndarray:
    """Target distribution over terms, proportional to ``|h_j|``."""
    w = np.abs(h.weights)
    return w / w.sum()


def split_dominant(h: Hamiltonian) -> Hamiltonian:
    """Halve every term whose share of ``lambda`` exceeds one half.

    The halves are placed next to each other and the operator sum is unchanged.
    Without this no flow can saturate a term's source and sink edges while
    avoiding its self-pair.
    """
    terms = list(h.terms)
    while True:
        total = sum(abs(t.weight) for t in terms)
        hit = next((k for k, t in enumerate(terms) if abs(t.weight) / total > 0.5), None)
        if hit is None:
            return Hamiltonian(tuple(terms))
        half = HamiltonianTerm(terms[hit].weight / 2, terms[hit].string)
        terms[hit:hit + 1] = [half, half]


def aggregate(h: Hamiltonian) -> dict[str, float]:
    """Total weight per distinct Pauli word; the operator a Hamiltonian denotes."""
    out: dict[str, float] = {}
    for t in h.terms:
        out[t.string.word] = out.get(t.string.word, 0.0) + t.weight
    return out


def random_hamiltonian(n_qubits: int, n_terms: int, rng: np.random.Generator) -> Hamiltonian:
    """Uniform random operators per position (at least one non-identity), weights in (0, 1]."""
    terms = []
    for _ in range(n_terms):
        while True:
            word = "".join(rng.choice(list(PAULI_CHARS), size=n_qubits))
            if set(word) != {"I"}:
                break
        weight = 1.0 - rng.random()  # (0, 1]
        terms.append(HamiltonianTerm(weight, PauliString(word)))
    return Hamiltonian(tuple(terms))
