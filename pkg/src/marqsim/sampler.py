"""Sampling term sequences from a transition matrix."""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .htt import TransitionMatrix, validate
from .pauli import Hamiltonian, lambda_sum

MAX_SAMPLES = 2**62


class InvalidMatrixError(ValueError):
    pass


def sample_count(lam: float, t: float, epsilon: float) -> int:
    """Steps needed for error ``epsilon``: ``ceil(2 lam^2 t^2 / epsilon)``."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if not math.isfinite(t) or t == 0:
        raise ValueError(f"evolution time must be finite and non-zero, got {t}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    n = math.ceil(2.0 * lam * lam * t * t / epsilon)
    if not math.isfinite(n) or n > MAX_SAMPLES:
        raise OverflowError(f"sample count {n:.3g} exceeds {MAX_SAMPLES}")
    return int(n)


@dataclass(frozen=True)
class CompileRequest:
    hamiltonian: Hamiltonian
    time: float
    matrix: TransitionMatrix
    rng_seed: int = 0
    epsilon: Optional[float] = None
    samples: Optional[int] = None

    def __post_init__(self):
        if (self.epsilon is None) == (self.samples is None):
            raise ValueError("give exactly one of epsilon or samples")
        if not math.isfinite(self.time):
            raise ValueError("evolution time must be finite")
        if self.matrix.n != len(self.hamiltonian):
            raise ValueError(f"matrix has {self.matrix.n} states but the Hamiltonian has {len(self.hamiltonian)} terms")

    @property
    def n_samples(self) -> int:
        if self.samples is not None:
            return int(self.samples)
        return sample_count(lambda_sum(self.hamiltonian), self.time, self.epsilon)


@dataclass(frozen=True, eq=False)
class TermSequence:
    indices: np.ndarray  # 0-based term indices
    angle: float  # lambda * t / N, before the term's sign
    lam: float

    @property
    def N(self) -> int:
        return int(self.indices.size)

    def to_json(self) -> str:
        return json.dumps({"lambda": self.lam, "N": self.N, "angle": self.angle,
                           "indices": [int(i) + 1 for i in self.indices]})

    @classmethod
    def from_json(cls, text: str) -> TermSequence:
        d = json.loads(text)
        idx = np.array(d["indices"], dtype=np.int64) - 1
        if idx.size != d["N"]:
            raise ValueError(f"declared N={d['N']} but {idx.size} indices given")
        return cls(idx, float(d["angle"]), float(d["lambda"]))


def sample_sequence(req: CompileRequest, check: bool = True) -> TermSequence:
    """Draw the first term from pi, then walk the chain; inverse-CDF per row."""
    m = req.matrix
    if check:
        report = validate(m)
        if not report.ok:
            raise InvalidMatrixError(f"transition matrix fails validation: {report}")
    N = req.n_samples
    if N < 1:
        raise ValueError("sample count must be positive")
    lam = lambda_sum(req.hamiltonian)
    rng = np.random.Generator(np.random.PCG64(req.rng_seed))
    u = rng.random(N).tolist()

    # cumulative rows, last entry forced to 1 so u < 1 always lands in range
    cdf = np.cumsum(m.p, axis=1)
    cdf[:, -1] = 1.0
    start = np.cumsum(m.target_pi)
    start[-1] = 1.0
    rows = [row.tolist() for row in cdf]
    n = m.n

    out = np.empty(N, dtype=np.int64)
    i = min(bisect.bisect_right(start.tolist(), u[0]), n - 1)
    out[0] = i
    for k in range(1, N):
        i = bisect.bisect_right(rows[i], u[k])
        if i >= n:
            i = n - 1
        out[k] = i
    return TermSequence(out, lam * req.time / N, lam)


def empirical_pair_cost(seq: TermSequence, cost) -> float:
    """Mean junction cost over consecutive pairs; repeats of one term cost 0."""
    idx = seq.indices
    if idx.size < 2:
        raise ValueError("need at least two samples")
    a, b = idx[:-1], idx[1:]
    if callable(cost):
        vals = np.array([0.0 if i == j else cost(int(i), int(j)) for i, j in zip(a, b)])
    else:
        w = np.asarray(cost, dtype=float)
        vals = np.where(a == b, 0.0, w[a, b])
    return float(vals.mean())
