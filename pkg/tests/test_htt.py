import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from marqsim.htt import (
    TransitionMatrix, combine, qdrift_matrix, scc_count, spectrum, validate,
)
from oracles import mp_eig_moduli

PI44 = [0.5, 0.25, 0.2, 0.05]
PGC = [[0, .5, .4, .1], [1, 0, 0, 0], [1, 0, 0, 0], [1, 0, 0, 0]]
PMIX = [[.2, .4, .32, .08], [.8, .1, .08, .02], [.8, .1, .08, .02], [.8, .1, .08, .02]]


@st.composite
def distributions(draw, lo=1, hi=12):
    n = draw(st.integers(lo, hi))
    w = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n)))
    return w / w.sum()


def test_qdrift_examples():
    np.testing.assert_array_equal(qdrift_matrix(PI44).p, np.tile(PI44, (4, 1)))
    np.testing.assert_array_equal(qdrift_matrix([1.0]).p, [[1.0]])
    np.testing.assert_array_equal(qdrift_matrix([.5, .5]).p, [[.5, .5], [.5, .5]])


def test_validate_examples():
    assert validate(qdrift_matrix(PI44), tol=1e-10).ok
    r = validate(TransitionMatrix(np.eye(2), [.5, .5]))
    assert r.stationary_preserved and r.row_stochastic
    assert not r.strongly_connected and r.scc_count == 2
    r = validate(TransitionMatrix(PGC, PI44))
    assert r.row_stochastic and r.stationary_preserved and r.strongly_connected


def test_validate_detects_broken_stationarity():
    r = validate(TransitionMatrix([[0, 1], [1, 0]], [.6, .4]))
    assert not r.stationary_preserved
    assert r.max_stationary_residual == pytest.approx(0.2)


def test_combine_example():
    m = combine([(0.4, qdrift_matrix(PI44)), (0.6, TransitionMatrix(PGC, PI44))])
    np.testing.assert_allclose(m.p, PMIX, atol=1e-12)


def test_combine_rejects():
    q = qdrift_matrix(PI44)
    with pytest.raises(ValueError, match="sum"):
        combine([(0.5, q), (0.4, q)])
    with pytest.raises(ValueError, match="non-negative"):
        combine([(1.5, q), (-0.5, q)])
    with pytest.raises(ValueError, match="dimension"):
        combine([(0.5, q), (0.5, qdrift_matrix([.5, .5]))])
    with pytest.raises(ValueError, match="stationary"):
        combine([(0.5, q), (0.5, qdrift_matrix([.4, .3, .2, .1]))])


@settings(max_examples=100, deadline=None)
@given(distributions(2, 10), st.floats(0.0, 1.0))
def test_combine_identities(pi, theta):
    from marqsim.flow import gc_matrix
    a = qdrift_matrix(pi)
    np.testing.assert_allclose(combine([(1.0, a)]).p, a.p)
    np.testing.assert_allclose(combine([(0.5, a), (0.5, a)]).p, a.p, atol=1e-15)
    if pi.max() <= 0.5:
        b = gc_matrix(pi, 1 - np.eye(pi.size))
        m = combine([(theta, a), (1 - theta, b)])
        assert validate(m).stationary_preserved


def test_transition_matrix_checks():
    with pytest.raises(ValueError, match="square"):
        TransitionMatrix(np.ones((2, 3)) / 3, [.5, .5])
    with pytest.raises(ValueError, match="rows"):
        TransitionMatrix([[.5, .4], [.5, .5]], [.5, .5])
    with pytest.raises(ValueError, match="positive"):
        TransitionMatrix([[1, 0], [0, 1]], [1.0, 0.0])
    m = TransitionMatrix([[1 + 1e-13, -1e-13], [.5, .5]], [.5, .5])
    assert m.p.min() >= 0 and np.abs(m.p.sum(axis=1) - 1).max() <= 1e-12
    with pytest.raises(ValueError):
        m.p[0, 0] = 0.3


@settings(max_examples=50, deadline=None)
@given(distributions(1, 10))
def test_json_roundtrip(pi):
    m = qdrift_matrix(pi)
    back = TransitionMatrix.from_json(m.to_json())
    np.testing.assert_array_equal(back.p, m.p)
    np.testing.assert_array_equal(back.target_pi, m.target_pi)
    assert json.loads(m.to_json())["n"] == pi.size


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**32 - 1), st.floats(0.05, 0.8))
def test_scc_matches_networkx(n, seed, density):
    rng = np.random.default_rng(seed)
    p = (rng.random((n, n)) < density) * rng.random((n, n))
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from(zip(*np.nonzero(p > 1e-12)))
    assert scc_count(p) == nx.number_strongly_connected_components(g)


def test_spectrum_examples():
    for n in (2, 5, 17, 50):
        pi = np.arange(1, n + 1, dtype=float)
        s = spectrum(qdrift_matrix(pi / pi.sum())).eigenvalue_moduli
        assert s[0] == pytest.approx(1, abs=1e-8)
        assert np.abs(s[1:]).max() < 1e-8
    np.testing.assert_allclose(spectrum(TransitionMatrix(np.eye(3), [1 / 3] * 3)).eigenvalue_moduli, [1, 1, 1])


def test_spectrum_matches_mpmath(data_dir):
    from marqsim.pauli import load_hamiltonian
    from marqsim.pipeline import MixWeights, build_matrix
    _, m = build_matrix(load_hamiltonian(data_dir / "example_5_5.ham"), MixWeights.preset("gc"))
    s = spectrum(m).eigenvalue_moduli
    np.testing.assert_allclose(s, mp_eig_moduli(m.p), atol=1e-6)
    # known moduli for this mix: 1, 0.46, 0.46, 0.25, 0 (two decimals)
    np.testing.assert_allclose(s, [1, .46, .46, .25, 0], atol=6e-3)


@settings(max_examples=30, deadline=None)
@given(distributions(2, 8), st.integers(0, 2**32 - 1))
def test_spectrum_leading_modulus(pi, seed):
    rng = np.random.default_rng(seed)
    from marqsim.flow import gc_matrix
    if pi.max() > 0.5:
        return
    w = rng.integers(0, 5, (pi.size, pi.size))
    m = combine([(0.3, qdrift_matrix(pi)), (0.7, gc_matrix(pi, w))])
    assert validate(m).ok
    s = spectrum(m)
    assert s.eigenvalue_moduli[0] == pytest.approx(1, abs=1e-8)
    assert s.eigenvalue_moduli.max() <= 1 + 1e-8
