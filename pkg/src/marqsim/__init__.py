"""Markov-chain compilation of Hamiltonian simulation circuits.

Terms are sampled from a transition matrix whose stationary distribution is
|h_j| / lambda; off-diagonal mass is steered toward term pairs whose
exponentials share CNOTs at the junction.
"""

from .pauli import Hamiltonian, HamiltonianTerm, PauliString, parse_hamiltonian, load_hamiltonian
from .htt import TransitionMatrix, validate, spectrum, qdrift_matrix, combine
from .flow import gc_matrix, perturbed_matrix, default_cnot_cost, cost_matrix
from .sampler import CompileRequest, TermSequence, sample_sequence
from .circuit import Circuit, assemble, emit
from .evaluation import exact_evolution, circuit_unitary, sequence_unitary, fidelity
from .pipeline import MixWeights, prepare, build_matrix, compile_sequence

__version__ = "0.1.0"
