"""End-to-end helpers shared by the CLI, the experiment scripts and the tests."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import flow
from .circuit import Circuit, assemble
from .htt import TransitionMatrix, combine, qdrift_matrix
from .pauli import Hamiltonian, split_dominant, stationary
from .sampler import CompileRequest, TermSequence, sample_sequence

PRESETS = {
    "baseline": (1.0, 0.0, 0.0),
    "gc": (0.4, 0.6, 0.0),
    "gc-rp": (0.4, 0.3, 0.3),
}


@dataclass(frozen=True)
class MixWeights:
    qd: float = 1.0
    gc: float = 0.0
    rp: float = 0.0

    def __post_init__(self):
        vals = (self.qd, self.gc, self.rp)
        if any(v < 0 for v in vals):
            raise ValueError(f"mixing weights must be non-negative, got {vals}")
        if abs(sum(vals) - 1.0) > 1e-9:
            raise ValueError(f"mixing weights sum to {sum(vals)!r}, not 1")

    @classmethod
    def preset(cls, name: str) -> MixWeights:
        try:
            return cls(*PRESETS[name])
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(eq=False)
class MatrixSet:
    """Prepared Hamiltonian (dominant terms split) and its component matrices."""

    hamiltonian: Hamiltonian
    costs: np.ndarray
    qd: TransitionMatrix
    gc: Optional[TransitionMatrix] = None
    rp: Optional[TransitionMatrix] = None
    timings: dict = field(default_factory=dict)

    @property
    def pi(self) -> np.ndarray:
        return self.qd.target_pi

    def mix(self, w: MixWeights) -> TransitionMatrix:
        parts = [(w.qd, self.qd)]
        if w.gc > 0:
            parts.append((w.gc, self.gc))
        if w.rp > 0:
            parts.append((w.rp, self.rp))
        # renormalize away the rounding of the preset weights
        total = sum(theta for theta, _ in parts)
        return combine([(theta / total, m) for theta, m in parts])


def prepare(h: Hamiltonian, need_gc: bool = True, need_rp: bool = False, *,
            costs: Optional[np.ndarray] = None, rp_trials: int = 100, rp_seed: int = 0,
            perturb: flow.PerturbationPolicy = flow.BernoulliBump()) -> MatrixSet:
    """Split dominant terms and build P_qd plus any requested flow matrices."""
    h = split_dominant(h)
    pi = stationary(h)
    timings = {}
    t0 = time.perf_counter()
    qd = qdrift_matrix(pi)
    timings["qd"] = time.perf_counter() - t0
    if costs is None:
        costs = flow.cost_matrix(h.strings)
    elif costs.shape != (len(h), len(h)):
        raise ValueError(f"cost matrix is {costs.shape} but the split Hamiltonian has {len(h)} terms")
    out = MatrixSet(h, costs, qd, timings=timings)
    if need_gc:
        t0 = time.perf_counter()
        out.gc = flow.gc_matrix(pi, costs)
        timings["gc"] = time.perf_counter() - t0
    if need_rp:
        t0 = time.perf_counter()
        out.rp = flow.perturbed_matrix(pi, costs, rp_trials, perturb, rp_seed)
        timings["rp"] = time.perf_counter() - t0
    return out


def build_matrix(h: Hamiltonian, w: MixWeights, **kwargs) -> tuple[MatrixSet, TransitionMatrix]:
    ms = prepare(h, need_gc=w.gc > 0, need_rp=w.rp > 0, **kwargs)
    return ms, ms.mix(w)


def compile_sequence(h: Hamiltonian, matrix: TransitionMatrix, t: float, seed: int,
                     epsilon: Optional[float] = None, samples: Optional[int] = None,
                     cancel: bool = True) -> tuple[TermSequence, Circuit]:
    req = CompileRequest(h, t, matrix, seed, epsilon=epsilon, samples=samples)
    seq = sample_sequence(req, check=False)
    return seq, assemble(seq, h, cancel)


def summary(values) -> dict:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return {"mean": math.nan, "std": math.nan, "se": math.nan}
    std = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return {"mean": float(v.mean()), "std": std, "se": std / math.sqrt(v.size)}
