"""Dense unitaries for desk-scale checks: exact evolution, circuit unitaries, fidelity.

Basis index bit ``q - 1`` holds qubit ``q``, so the Kronecker factor of the
highest qubit is leftmost. Circuits apply gates in list order:
``U(c1 + c2) = U(c2) @ U(c1)``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit
from .pauli import Hamiltonian, PauliString
from .sampler import TermSequence

DEFAULT_DENSE_LIMIT = 12

PAULI_2X2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_S2 = 1 / math.sqrt(2)
GATE_2X2 = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    "BASIS_Y": np.array([[1, -1j], [1, 1j]], dtype=complex) * _S2,
    "BASIS_Y_DAG": np.array([[1, 1], [1j, -1j]], dtype=complex) * _S2,
}


class DenseLimitError(ValueError):
    pass


def dense_limit() -> int:
    return int(os.environ.get("MARQSIM_DENSE_LIMIT", DEFAULT_DENSE_LIMIT))


def _check_size(n: int):
    limit = dense_limit()
    if n > limit:
        raise DenseLimitError(f"{n} qubits exceeds the dense evaluation limit of {limit} (MARQSIM_DENSE_LIMIT)")


def _pauli_action(p: PauliString):
    """Permutation and phases with ``P |x> = phase[x] |x ^ xmask>``."""
    n = p.n_qubits
    x = np.arange(2**n)
    xm, zm = p.x_mask, p.z_mask
    n_y = p.word.count("Y")
    parity = np.zeros(2**n, dtype=np.int64)
    bits = x & zm
    while np.any(bits):
        parity ^= bits & 1
        bits >>= 1
    phase = (1j ** n_y) * (1 - 2 * parity)
    return xm, phase.astype(complex)


def pauli_matrix(p: PauliString) -> np.ndarray:
    _check_size(p.n_qubits)
    xm, phase = _pauli_action(p)
    dim = 2**p.n_qubits
    m = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    m[cols ^ xm, cols] = phase
    return m


def hamiltonian_matrix(h: Hamiltonian) -> np.ndarray:
    _check_size(h.qubit_count)
    dim = 2**h.qubit_count
    m = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for term in h.terms:
        xm, phase = _pauli_action(term.string)
        m[cols ^ xm, cols] += term.weight * phase
    return m


def exact_evolution(h: Hamiltonian, t: float) -> np.ndarray:
    """``exp(i t H)`` from the Hermitian eigendecomposition of ``H``."""
    m = hamiltonian_matrix(h)
    try:
        evals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"Hermitian eigensolver failed on {h.qubit_count}-qubit Hamiltonian: {exc}") from exc
    return (vecs * np.exp(1j * t * evals)) @ vecs.conj().T


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Multiply out the circuit by applying each gate to every column."""
    n = c.qubit_count
    _check_size(n)
    dim = 2**n
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in c.gates:
        if g.kind == "CX":
            ctrl, tgt = (n - q for q in g.qubits)
            sl = [slice(None)] * (n + 1)
            sl[ctrl] = 1
            sub = u[tuple(sl)]
            u[tuple(sl)] = np.flip(sub, axis=tgt if tgt < ctrl else tgt - 1)
        elif g.kind == "RZ":
            ax = n - g.qubits[0]
            shape = [1] * (n + 1)
            shape[ax] = 2
            u = u * np.array([np.exp(-0.5j * g.angle), np.exp(0.5j * g.angle)]).reshape(shape)
        else:
            ax = n - g.qubits[0]
            u = np.moveaxis(np.tensordot(GATE_2X2[g.kind], u, axes=([1], [ax])), 0, ax)
    return c.global_phase * u.reshape(dim, dim)


def sequence_unitary(seq: TermSequence, h: Hamiltonian) -> np.ndarray:
    """Product of the sampled exponentials, without going through gates.

    Equal to ``circuit_unitary(assemble(seq, h, ...))``; used where thousands
    of steps make gate-by-gate evaluation slow.
    """
    n = h.qubit_count
    _check_size(n)
    dim = 2**n
    rows = np.arange(dim)
    # exp(i theta P) U = cos(theta) U + i sin(theta) P U, with (P U)[y] = phase[y ^ xm] U[y ^ xm]
    steps = []
    for term in h.terms:
        theta = math.copysign(seq.angle, term.weight)
        xm, phase = _pauli_action(term.string)
        src = rows ^ xm
        steps.append((math.cos(theta), (1j * math.sin(theta) * phase[src])[:, None], src))
    u = np.eye(dim, dtype=complex)
    pu = np.empty_like(u)
    for idx in seq.indices.tolist():
        c, coeff, src = steps[idx]
        np.take(u, src, axis=0, out=pu)
        pu *= coeff
        u *= c
        u += pu
    return u


def is_unitary(u: np.ndarray, tol: float = 1e-8) -> bool:
    return bool(np.abs(u @ u.conj().T - np.eye(u.shape[0])).max() <= tol)


@dataclass(frozen=True)
class FidelityResult:
    trace: complex  # tr(U_app U_exact^dagger) / 2^n
    n: int

    @property
    def fidelity(self) -> float:
        return self.trace.real

    @property
    def modulus(self) -> float:
        return abs(self.trace)


def fidelity(u_app: np.ndarray, u_exact: np.ndarray) -> FidelityResult:
    if u_app.shape != u_exact.shape or u_app.shape[0] != u_app.shape[1]:
        raise ValueError(f"shape mismatch: {u_app.shape} vs {u_exact.shape}")
    dim = u_app.shape[0]
    # tr(A B^dagger) = sum(A * conj(B))
    tr = complex(np.sum(u_app * u_exact.conj())) / dim
    return FidelityResult(tr, int(round(math.log2(dim))))
