"""Transition-matrix synthesis through a min-cost flow problem.

The network has a source S, a sink T, and two copies of every term:
``S -> prev_i`` and ``next_i -> T`` carry capacity ``pi_i`` at zero cost, and
``prev_i -> next_j`` (i != j) carries the junction cost of placing term j after
term i. Routing one unit of flow saturates every source and sink edge, so the
flow matrix has row and column sums ``pi``, and ``f_ij / pi_i`` is a transition
matrix that keeps ``pi`` stationary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Protocol, Sequence, Union

import numpy as np

from .htt import TransitionMatrix, _as_distribution
from .pauli import PauliString

CostOracle = Callable[[int, int], float]
CostLike = Union[CostOracle, np.ndarray, Sequence[Sequence[float]]]

# total flow is 1, so this bound on the middle edges never binds
MIDDLE_CAPACITY = 1.0
FLOW_EPS = 1e-15


class FlowError(RuntimeError):
    pass


class InfeasibleFlowError(FlowError, ValueError):
    pass


def default_cnot_cost(a: PauliString, b: PauliString) -> int:
    """CNOTs left between the two rotations when block ``b`` follows block ``a``.

    Each string contributes a ladder of ``|support| - 1`` CNOTs; every qubit
    where both strings carry the same non-identity operator removes one CNOT
    from each side.
    """
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"length mismatch: {a.n_qubits} vs {b.n_qubits}")
    sa, sb = a.support, b.support
    shared = sum(1 for q in sa if a.op(q) == b.op(q))
    ladders = max(len(sa) - 1, 0) + max(len(sb) - 1, 0)
    return max(0, ladders - 2 * shared)


def cost_matrix(strings: Sequence[PauliString], oracle=default_cnot_cost) -> np.ndarray:
    n = len(strings)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                w[i, j] = oracle(strings[i], strings[j])
    return w


def load_cost_file(path, n: int) -> np.ndarray:
    """Read an ``n x n`` CSV cost matrix; the diagonal is ignored."""
    w = np.loadtxt(path, delimiter=",", ndmin=2)
    if w.shape != (n, n):
        raise ValueError(f"cost file {path} is {w.shape[0]}x{w.shape[1]}, expected {n}x{n}")
    np.fill_diagonal(w, 0.0)
    return w


def _costs_from(cost: CostLike, n: int) -> np.ndarray:
    if callable(cost):
        w = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i != j:
                    w[i, j] = cost(i, j)
    else:
        w = np.array(cost, dtype=float)
        if w.shape != (n, n):
            raise ValueError(f"cost matrix shape {w.shape} does not match n={n}")
        w = w.copy()
    np.fill_diagonal(w, 0.0)
    off = ~np.eye(n, dtype=bool)
    if not np.all(np.isfinite(w[off])) or np.any(w[off] < 0):
        raise ValueError("junction costs must be finite and non-negative")
    return w


@dataclass(frozen=True, eq=False)
class FlowNetwork:
    """Bipartite S/prev/next/T network. Node ids: S=0, prev_i=i, next_i=n+i, T=2n+1."""

    pi: np.ndarray
    costs: np.ndarray

    @property
    def n(self) -> int:
        return self.pi.size

    @property
    def node_count(self) -> int:
        return 2 * self.n + 2

    def edges(self) -> Iterator[tuple[int, int, float, float]]:
        """Yield ``(tail, head, capacity, cost)`` for every edge (1-based terms)."""
        n = self.n
        sink = 2 * n + 1
        for i in range(n):
            yield 0, i + 1, float(self.pi[i]), 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    yield i + 1, n + j + 1, MIDDLE_CAPACITY, float(self.costs[i, j])
        for j in range(n):
            yield n + j + 1, sink, float(self.pi[j]), 0.0


@dataclass(frozen=True, eq=False)
class FlowSolution:
    f: np.ndarray
    total_cost: float
    row_potential: np.ndarray
    col_potential: np.ndarray
    augmentations: int


def build_network(pi, cost: CostLike) -> FlowNetwork:
    pi = _as_distribution(pi)
    if pi.size < 2:
        raise InfeasibleFlowError("a flow network without self-pairs needs at least two terms")
    if pi.max() > 0.5:
        raise InfeasibleFlowError(
            f"term {int(pi.argmax()) + 1} has pi={pi.max():.6g} > 0.5; split dominant terms first"
        )
    return FlowNetwork(pi.copy(), _costs_from(cost, pi.size))


def _shortest_paths(costs, flow, supply, row_pot, col_pot):
    """Shortest reduced-cost distances from all rows that still hold supply.

    Rows are nodes 0..n-1, columns n..2n-1. The residual graph is bipartite
    (forward row -> column edges, reversed column -> row edges where flow is
    positive) with non-negative reduced costs, so alternating vectorized
    relaxations converge to the same distances as Dijkstra in a handful of
    O(n^2) passes. Returns distances and parents.
    """
    n = supply.size
    fwd = costs + row_pot[:, None] - col_pot[None, :]
    fwd = np.maximum(fwd, 0.0)
    fwd[np.diag_indices(n)] = np.inf
    # reverse edge j -> i costs -reduced(i, j), which is >= 0 at optimality; only where flow > 0
    rev = np.where(flow > FLOW_EPS, np.maximum(-(costs + row_pot[:, None] - col_pot[None, :]), 0.0), np.inf)
    d_row = np.where(supply > FLOW_EPS, 0.0, np.inf)
    p_row = np.full(n, -1)
    d_col = np.full(n, np.inf)
    p_col = np.full(n, -1)
    for _ in range(2 * n + 1):
        cand = d_row[:, None] + fwd
        best = np.argmin(cand, axis=0)  # lowest row index on ties
        val = cand[best, np.arange(n)]
        upd = val < d_col
        d_col = np.where(upd, val, d_col)
        p_col = np.where(upd, best, p_col)
        cand = rev + d_col[None, :]
        best = np.argmin(cand, axis=1)
        val = cand[np.arange(n), best]
        upd_r = val < d_row
        if not np.any(upd_r):
            break
        d_row = np.where(upd_r, val, d_row)
        p_row = np.where(upd_r, best + n, p_row)
    dist = np.concatenate([d_row, d_col])
    parent = np.concatenate([p_row, p_col])
    return dist, parent


def solve_min_cost_flow(net: FlowNetwork, max_augmentations: int | None = None) -> FlowSolution:
    """Successive shortest augmenting paths with node potentials.

    Works on real-valued supplies directly. Among equally short paths the
    lowest-index destination term is used, so solutions are deterministic.
    Raises :class:`FlowError` if the reduced-cost optimality certificate fails.
    """
    n = net.n
    costs = net.costs
    supply = net.pi.copy()
    demand = net.pi.copy()
    flow = np.zeros((n, n))
    off = ~np.eye(n, dtype=bool)
    row_pot = np.zeros(n)
    col_pot = np.where(off, costs, np.inf).min(axis=0)
    cap = max_augmentations if max_augmentations is not None else 20 * n * n + 100
    rounds = 0
    while supply.sum() > 1e-14 and np.any(demand > FLOW_EPS):
        if rounds >= cap:
            raise FlowError(f"augmentation cap {cap} exceeded (remaining supply {supply.sum():.3g})")
        rounds += 1
        dist, parent = _shortest_paths(costs, flow, supply, row_pot, col_pot)
        col_dist = np.where(demand > FLOW_EPS, dist[n:], np.inf)
        dest = int(np.argmin(col_dist))
        d_dest = col_dist[dest]
        if not np.isfinite(d_dest):
            raise InfeasibleFlowError("no augmenting path; network is infeasible")
        # walk back to the originating row, collecting the bottleneck
        path = []
        node = n + dest
        bottleneck = demand[dest]
        while True:
            prev = int(parent[node])
            if node >= n:
                path.append((prev, node - n, +1))
            else:
                path.append((node, prev - n, -1))
                bottleneck = min(bottleneck, flow[node, prev - n])
            node = prev
            if node < n and parent[node] < 0:
                break
        origin = node
        bottleneck = min(bottleneck, supply[origin])
        for i, j, sign in path:
            if sign > 0:
                flow[i, j] += bottleneck
            else:
                flow[i, j] -= bottleneck
                if flow[i, j] < FLOW_EPS:
                    flow[i, j] = 0.0
        supply[origin] -= bottleneck
        demand[dest] -= bottleneck
        if supply[origin] < FLOW_EPS:
            supply[origin] = 0.0
        if demand[dest] < FLOW_EPS:
            demand[dest] = 0.0
        step = np.minimum(dist, d_dest)
        row_pot += step[:n]
        col_pot += step[n:]
    _certify(costs, flow, row_pot, col_pot)
    total = float(np.sum(flow * costs))
    return FlowSolution(flow, total, row_pot, col_pot, rounds)


def _certify(costs, flow, row_pot, col_pot, tol=1e-9):
    n = flow.shape[0]
    reduced = costs + row_pot[:, None] - col_pot[None, :]
    off = ~np.eye(n, dtype=bool)
    scale = max(1.0, float(np.abs(costs).max()))
    # forward residual edges are always present; reverse ones wherever flow > 0
    if np.any(reduced[off] < -tol * scale):
        raise FlowError(f"optimality certificate failed: forward reduced cost {reduced[off].min():.3g}")
    used = flow > FLOW_EPS
    if np.any(used & off) and np.any(reduced[used] > tol * scale):
        raise FlowError(f"optimality certificate failed: reverse reduced cost {-reduced[used].max():.3g}")


def extract_matrix(sol: FlowSolution, pi) -> TransitionMatrix:
    pi = _as_distribution(pi)
    if sol.f.shape != (pi.size, pi.size):
        raise ValueError("flow solution does not match pi")
    return TransitionMatrix(sol.f / pi[:, None], pi)


def gc_matrix(pi, cost: CostLike) -> TransitionMatrix:
    """Transition matrix minimising expected junction cost (build, solve, extract)."""
    pi = _as_distribution(pi)
    return extract_matrix(solve_min_cost_flow(build_network(pi, cost)), pi)


class PerturbationPolicy(Protocol):
    def __call__(self, costs: np.ndarray, rng: np.random.Generator) -> np.ndarray: ...


@dataclass(frozen=True)
class BernoulliBump:
    """Add ``amount`` to each junction cost independently with probability ``p``."""

    p: float = 0.5
    amount: float = 1.0

    def __call__(self, costs, rng):
        return costs + self.amount * (rng.random(costs.shape) < self.p)


@dataclass(frozen=True)
class UniformBump:
    """Add an independent uniform draw from ``[0, eps_max]`` to each junction cost."""

    eps_max: float = 1.0

    def __call__(self, costs, rng):
        return costs + rng.uniform(0.0, self.eps_max, size=costs.shape)


@dataclass(frozen=True)
class NoPerturbation:
    def __call__(self, costs, rng):
        return costs


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    # PCG64 stream keyed on (seed, trial): independent of execution order
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))


def perturbed_matrix(pi, cost: CostLike, trials: int = 100,
                     perturb: PerturbationPolicy = BernoulliBump(), rng_seed: int = 0) -> TransitionMatrix:
    """Average of ``trials`` min-cost-flow matrices built from randomly perturbed costs."""
    if trials < 1:
        raise ValueError("trials must be positive")
    pi = _as_distribution(pi)
    base = build_network(pi, cost)
    acc = np.zeros((pi.size, pi.size))
    for k in range(trials):
        w = perturb(base.costs, trial_rng(rng_seed, k))
        np.fill_diagonal(w, 0.0)
        sol = solve_min_cost_flow(FlowNetwork(pi, w))
        acc += sol.f / pi[:, None]
    return TransitionMatrix(acc / trials, pi)
