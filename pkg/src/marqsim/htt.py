"""Hamiltonian term transition graphs: row-stochastic matrices over terms.

A matrix is usable for compilation when its graph is strongly connected and
the term distribution ``pi`` (proportional to ``|h_j|``) is stationary.
Construction only enforces row-stochasticity; :func:`validate` checks the rest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

ROW_TOL = 1e-10
EDGE_TOL = 1e-12


class SpectrumError(RuntimeError):
    pass


def _as_distribution(pi) -> np.ndarray:
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1 or pi.size == 0:
        raise ValueError("stationary distribution must be a non-empty vector")
    if np.any(pi <= 0):
        raise ValueError("stationary distribution entries must be strictly positive")
    if abs(pi.sum() - 1.0) > 1e-12:
        raise ValueError(f"stationary distribution sums to {pi.sum()!r}, not 1")
    return pi


def _clean_rows(p: np.ndarray) -> np.ndarray:
    # negative rounding dust -> 0, then renormalize rows that drifted
    p = np.where(p < 0, 0.0, p)
    sums = p.sum(axis=1)
    drift = np.abs(sums - 1.0) > 1e-12
    if np.any(drift):
        p[drift] /= sums[drift, None]
    return p


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    p: np.ndarray
    target_pi: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        pi = _as_distribution(self.target_pi)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"transition matrix must be square, got shape {p.shape}")
        if p.shape[0] != pi.size:
            raise ValueError(f"matrix is {p.shape[0]}x{p.shape[0]} but pi has {pi.size} entries")
        if not np.all(np.isfinite(p)):
            raise ValueError("transition matrix has non-finite entries")
        if p.min() < -1e-9 or p.max() > 1 + 1e-9:
            raise ValueError("transition probabilities must lie in [0, 1]")
        dev = np.abs(p.sum(axis=1) - 1.0).max()
        if dev > 1e-9:
            raise ValueError(f"rows must sum to 1 (max deviation {dev:.3g})")
        p = _clean_rows(p)
        p.setflags(write=False)
        pi = pi.copy()
        pi.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "target_pi", pi)

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "pi": self.target_pi.tolist(), "rows": self.p.tolist()})

    @classmethod
    def from_json(cls, text: str) -> TransitionMatrix:
        d = json.loads(text)
        m = cls(np.array(d["rows"], dtype=float), np.array(d["pi"], dtype=float))
        if m.n != d["n"]:
            raise ValueError(f"declared n={d['n']} but matrix is {m.n}x{m.n}")
        return m


@dataclass(frozen=True)
class ValidationReport:
    row_stochastic: bool
    max_row_deviation: float
    stationary_preserved: bool
    max_stationary_residual: float
    strongly_connected: bool
    scc_count: int

    @property
    def ok(self) -> bool:
        return self.row_stochastic and self.stationary_preserved and self.strongly_connected


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    eigenvalue_moduli: np.ndarray

    @property
    def second_modulus(self) -> float:
        return float(self.eigenvalue_moduli[1]) if self.eigenvalue_moduli.size > 1 else 0.0


def qdrift_matrix(pi) -> TransitionMatrix:
    """Memoryless chain: every row is ``pi``."""
    pi = _as_distribution(pi)
    return TransitionMatrix(np.tile(pi, (pi.size, 1)), pi)


def scc_count(p: np.ndarray, edge_tol: float = EDGE_TOL) -> int:
    adj = csr_matrix(np.asarray(p) > edge_tol)
    count, _ = connected_components(adj, directed=True, connection="strong")
    return int(count)


def validate(m: TransitionMatrix, tol: float = ROW_TOL, edge_tol: float = EDGE_TOL) -> ValidationReport:
    """Check row sums, ``pi P = pi`` and strong connectivity.

    ``tol`` bounds both the row-sum deviation and ``max |(pi P - pi)_i|``; an
    edge ``i -> j`` exists when ``p_ij > edge_tol``.
    """
    p, pi = m.p, m.target_pi
    if p.shape != (pi.size, pi.size):
        raise ValueError(f"matrix shape {p.shape} does not match pi of length {pi.size}")
    row_dev = float(np.abs(p.sum(axis=1) - 1.0).max())
    in_range = bool(p.min() >= 0.0 and p.max() <= 1.0 + tol)
    residual = float(np.abs(pi @ p - pi).max())
    count = scc_count(p, edge_tol)
    return ValidationReport(
        row_stochastic=in_range and row_dev <= tol,
        max_row_deviation=row_dev,
        stationary_preserved=residual <= tol,
        max_stationary_residual=residual,
        strongly_connected=count == 1,
        scc_count=count,
    )


def combine(parts: Sequence[tuple[float, TransitionMatrix]]) -> TransitionMatrix:
    """Convex combination ``sum theta_k P_k`` of matrices sharing one target ``pi``."""
    if not parts:
        raise ValueError("nothing to combine")
    thetas = np.array([float(theta) for theta, _ in parts])
    if np.any(thetas < 0):
        raise ValueError(f"combination weights must be non-negative, got {thetas.tolist()}")
    if abs(thetas.sum() - 1.0) > 1e-12:
        raise ValueError(f"combination weights sum to {thetas.sum()!r}, not 1")
    first = parts[0][1]
    for _, m in parts[1:]:
        if m.n != first.n:
            raise ValueError(f"dimension mismatch: {m.n} vs {first.n}")
        if not np.allclose(m.target_pi, first.target_pi, rtol=0, atol=1e-12):
            raise ValueError("matrices target different stationary distributions")
    p = sum(theta * m.p for theta, m in parts)
    return TransitionMatrix(p, first.target_pi)


def spectrum(m: TransitionMatrix) -> SpectrumReport:
    """Eigenvalue moduli in descending order (LAPACK Hessenberg + shifted QR)."""
    try:
        eig = np.linalg.eigvals(m.p)
    except np.linalg.LinAlgError as exc:
        raise SpectrumError(
            f"eigenvalue iteration failed for {m.n}x{m.n} matrix "
            f"(row deviation {np.abs(m.p.sum(axis=1) - 1).max():.3g}): {exc}"
        ) from exc
    return SpectrumReport(np.sort(np.abs(eig))[::-1])
