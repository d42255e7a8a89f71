"""Acceptance checks, one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s`` (the lines are printed even
without ``-s``).
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from marqsim.circuit import assemble
from marqsim.evaluation import circuit_unitary, exact_evolution, fidelity, sequence_unitary
from marqsim.flow import build_network, cost_matrix, extract_matrix, gc_matrix, solve_min_cost_flow
from marqsim.htt import combine, qdrift_matrix, spectrum, validate
from marqsim.pauli import Hamiltonian, load_hamiltonian, random_hamiltonian, stationary
from marqsim.pipeline import MixWeights, build_matrix, compile_sequence, prepare
from marqsim.sampler import CompileRequest, TermSequence, empirical_pair_cost, sample_sequence
from oracles import kron_pauli, transport_vertex_min

PI44 = np.array([0.5, 0.25, 0.2, 0.05])
F52 = np.array([[0, .25, .2, .05], [.25, 0, 0, 0], [.2, 0, 0, 0], [.05, 0, 0, 0]])
PGC = np.array([[0, .5, .4, .1], [1, 0, 0, 0], [1, 0, 0, 0], [1, 0, 0, 0]])
PMIX = np.array([[.2, .4, .32, .08], [.8, .1, .08, .02], [.8, .1, .08, .02], [.8, .1, .08, .02]])


@pytest.fixture
def report(capsys):
    def emit(k: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {k}: {detail}"
    return emit


def test_c1_worked_example(data_dir, report):
    t0 = time.perf_counter()
    h = load_hamiltonian(data_dir / "example_4_4.ham")
    pi = stationary(h)
    qd = qdrift_matrix(pi)
    sol = solve_min_cost_flow(build_network(pi, cost_matrix(h.strings)))
    gc = extract_matrix(sol, pi)
    mix = combine([(0.4, qd), (0.6, gc)])
    elapsed = time.perf_counter() - t0
    errs = {
        "pi": np.abs(pi - PI44).max(),
        "P_qd": np.abs(qd.p - np.tile(PI44, (4, 1))).max(),
        "flow": np.abs(sol.f - F52).max(),
        "P_gc": np.abs(gc.p - PGC).max(),
        "mix": np.abs(mix.p - PMIX).max(),
    }
    ok = max(errs.values()) <= 1e-9 and elapsed < 1.0
    report(1, ok, f"max entry error {max(errs.values()):.2e}, objective {sol.total_cost:.12g}, {elapsed:.3f}s")


def test_c2_validation_suite(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    checked, failures = 0, []
    for k in range(500):
        n_terms = int(rng.integers(2, 31))
        h = random_hamiltonian(int(rng.integers(2, 9)), n_terms, rng)
        # full default perturbation on a subset, a lighter average elsewhere to fit the budget
        trials = 100 if k < 10 else 8
        ms = prepare(h, need_gc=True, need_rp=True, rp_trials=trials, rp_seed=k)
        mats = {"qd": ms.qd, **{name: ms.mix(MixWeights.preset(name)) for name in ("gc", "gc-rp")},
                "mix-0.1": ms.mix(MixWeights(0.1, 0.45, 0.45))}
        for name, m in mats.items():
            r = validate(m, tol=1e-10)
            checked += 1
            if not (r.row_stochastic and r.max_stationary_residual <= 1e-9 and r.strongly_connected):
                failures.append((k, name, r))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 30
    report(2, ok, f"{checked} matrices over 500 Hamiltonians, {len(failures)} failures, {elapsed:.1f}s")


def test_c3_flow_oracle(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for k in range(200):
        n = int(rng.integers(2, 5))
        if n == 2:
            pi = np.array([0.5, 0.5])
        else:
            while True:
                w = rng.random(n) + 0.05
                pi = w / w.sum()
                if pi.max() <= 0.5:
                    break
        c = rng.integers(0, 7, (n, n)).astype(float) if k % 2 else rng.random((n, n)) * 5
        got = solve_min_cost_flow(build_network(pi, c)).total_cost
        worst = max(worst, abs(got - transport_vertex_min(pi, c)))
    elapsed = time.perf_counter() - t0
    report(3, worst <= 1e-9 and elapsed < 30, f"max |objective - oracle| {worst:.2e}, {elapsed:.2f}s")


def test_c4_synthesis(report):
    from marqsim.circuit import synthesize_term
    from marqsim.pauli import PauliString
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst_term = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 7))
        word = "".join(rng.choice(list("IXYZ"), n))
        theta = float(rng.uniform(-math.pi, math.pi))
        want = math.cos(theta) * np.eye(2**n) + 1j * math.sin(theta) * kron_pauli(word)
        worst_term = max(worst_term, np.abs(circuit_unitary(synthesize_term(PauliString(word), theta)) - want).max())
    worst_seq = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 7))
        k = int(rng.integers(1, 9))
        pairs = [(float(rng.choice([-1, 1]) * (1 - rng.random())), "".join(rng.choice(list("IXYZ"), n)))
                 for _ in range(k)]
        h = Hamiltonian.from_pairs(pairs)
        seq = TermSequence(rng.integers(0, k, int(rng.integers(1, 201))), float(rng.uniform(0.01, 0.3)), 1.0)
        diff = circuit_unitary(assemble(seq, h, True)) - circuit_unitary(assemble(seq, h, False))
        worst_seq = max(worst_seq, np.abs(diff).max())
    elapsed = time.perf_counter() - t0
    ok = worst_term <= 1e-10 and worst_seq <= 1e-9 and elapsed < 120
    report(4, ok, f"term error {worst_term:.2e}, cancellation error {worst_seq:.2e}, {elapsed:.1f}s")


def test_c5_error_bound(data_dir, report):
    t0 = time.perf_counter()
    h = load_hamiltonian(data_dir / "example_4_4.ham")
    t = math.pi / 4
    m = qdrift_matrix(stationary(h))
    u = exact_evolution(h, t)
    n_base = CompileRequest(h, t, m, epsilon=0.05).n_samples
    stats = {}
    for n in (n_base, 2 * n_base):
        inf = np.array([1 - fidelity(circuit_unitary(compile_sequence(h, m, t, s, samples=n)[1]), u).fidelity
                        for s in range(50)])
        stats[n] = (inf.mean(), inf.std(ddof=1) / math.sqrt(inf.size))
    (m1, se1), (m2, _) = stats[n_base], stats[2 * n_base]
    elapsed = time.perf_counter() - t0
    ok = n_base == 99 and m1 <= 0.05 + 3 * se1 and m2 < m1 and elapsed < 600
    report(5, ok, f"N={n_base}: mean infidelity {m1:.4f} (SE {se1:.4f}); N={2 * n_base}: {m2:.4f}; {elapsed:.1f}s")


def test_c6_gate_reduction(data_dir, report):
    t = math.pi / 4
    details, ok = [], True
    for name in ("random_8q.ham", "random_10q.ham"):
        h = load_hamiltonian(data_dir / name)
        ms = prepare(h, need_gc=True)
        cx = {}
        for preset in ("baseline", "gc"):
            mat = ms.mix(MixWeights.preset(preset))
            cx[preset] = np.mean([compile_sequence(ms.hamiltonian, mat, t, s, epsilon=0.05)[1].stats["cx_count"]
                                  for s in range(20)])
        red = 1 - cx["gc"] / cx["baseline"]
        ok &= red >= 0.10
        details.append(f"{name}: {cx['baseline']:.0f} -> {cx['gc']:.0f} CX ({100 * red:.1f}% fewer)")
    report(6, ok, "; ".join(details))


def test_c7_pair_cost_statistics(data_dir, report):
    h = load_hamiltonian(data_dir / "example_4_4.ham")
    pi = stationary(h)
    costs = cost_matrix(h.strings)
    sol = solve_min_cost_flow(build_network(pi, costs))
    seq = sample_sequence(CompileRequest(h, 1.0, extract_matrix(sol, pi), rng_seed=7, samples=100_000))
    a, b = seq.indices[:-1], seq.indices[1:]
    vals = np.where(a == b, 0.0, costs[a, b])
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    mean = empirical_pair_cost(seq, costs)
    z = abs(mean - sol.total_cost) / se
    report(7, z <= 4 and abs(sol.total_cost - 1.5) < 1e-12,
           f"mean junction cost {mean:.4f} vs objective {sol.total_cost:.4f} ({z:.2f} SE)")


def test_c8_spectrum(data_dir, report):
    t0 = time.perf_counter()
    worst_qd = 0.0
    for n in range(2, 51):
        w = np.random.default_rng(n).random(n) + 0.01
        s = spectrum(qdrift_matrix(w / w.sum())).eigenvalue_moduli
        worst_qd = max(worst_qd, abs(s[0] - 1), np.abs(s[1:]).max())
    rng = np.random.default_rng(8)
    worst_lead = 0.0
    for k in range(100):
        h = random_hamiltonian(int(rng.integers(2, 7)), int(rng.integers(2, 31)), rng)
        ms = prepare(h, need_gc=True, need_rp=True, rp_trials=4, rp_seed=k)
        for preset in ("baseline", "gc", "gc-rp"):
            m = ms.mix(MixWeights.preset(preset))
            assert validate(m).ok
            worst_lead = max(worst_lead, abs(spectrum(m).eigenvalue_moduli[0] - 1))
    ms = prepare(load_hamiltonian(data_dir / "example_5_5.ham"), need_gc=True, need_rp=True)
    s_gc = spectrum(ms.mix(MixWeights.preset("gc"))).second_modulus
    s_rp = spectrum(ms.mix(MixWeights.preset("gc-rp"))).second_modulus
    elapsed = time.perf_counter() - t0
    ok = worst_qd <= 1e-8 and worst_lead <= 1e-8 and s_rp <= s_gc and elapsed < 60
    report(8, ok, f"P_qd deviation {worst_qd:.1e}, leading-modulus deviation {worst_lead:.1e}, "
                  f"second modulus gc-rp {s_rp:.4f} <= gc {s_gc:.4f}, {elapsed:.1f}s")


def test_c9_variance_reduction(data_dir, report):
    h = load_hamiltonian(data_dir / "random_8q.ham")
    t = math.pi / 4
    ms = prepare(h, need_gc=True, need_rp=True)
    u = exact_evolution(ms.hamiltonian, t)
    sigma, mean = {}, {}
    for preset in ("gc", "gc-rp"):
        req_m = ms.mix(MixWeights.preset(preset))
        f = []
        for s in range(50):
            seq = sample_sequence(CompileRequest(ms.hamiltonian, t, req_m, rng_seed=s, epsilon=0.05), check=False)
            f.append(fidelity(sequence_unitary(seq, ms.hamiltonian), u).fidelity)
        sigma[preset], mean[preset] = float(np.std(f, ddof=1)), float(np.mean(f))
    report(9, sigma["gc-rp"] <= sigma["gc"],
           f"fidelity sigma gc-rp {sigma['gc-rp']:.5f} vs gc {sigma['gc']:.5f} "
           f"(means {mean['gc-rp']:.4f} / {mean['gc']:.4f})")
