import numpy as np
import pytest

from stringsim import model as md
from stringsim import twobody as tb
from stringsim.errors import IndexOutOfRange, ResonantDenominator


def test_pair_basis_counting_and_index():
    basis = tb.PairBasis(6)
    assert basis.dim == 7 * 6 // 2
    seen = {basis.index(l1, l2) for (l1, l2) in basis.pairs}
    assert seen == set(range(basis.dim))
    with pytest.raises(IndexOutOfRange):
        basis.index(0, 0)


def test_pair_reflection_is_involution():
    basis = tb.PairBasis(7)
    for (l1, l2) in basis.pairs:
        m1, m2 = basis.reflected(l1, l2)
        assert basis.reflected(m1, m2) == (l1, l2)
        basis.index(m1, m2)  # stays inside the triangle


@pytest.mark.parametrize("h", [0.0, 0.3, 0.6])
def test_potential_equals_classical_energy_difference(h):
    L, beta = 8, 0.78
    basis = tb.PairBasis(L)
    spec = md.scenario_spec(L, beta, 0.0, h, "string")
    E0 = md.classical_energy(md.initial_configuration("string", L), spec)
    for (l1, l2) in basis.pairs:
        dE = md.classical_energy(tb.pair_configuration(basis, l1, l2), spec) - E0
        V = tb.two_body_potential(l1, l2, 1.0, beta, h, L)
        assert V == pytest.approx(dE, abs=1e-12)


def test_potential_reflection_symmetry():
    basis = tb.PairBasis(9)
    V = tb.potential_matrix(basis, 1.0, 0.78, 0.25)
    for k, (l1, l2) in enumerate(basis.pairs):
        m = basis.index(*basis.reflected(l1, l2))
        assert V[k] == pytest.approx(V[m], abs=1e-12)


def test_initial_pair_state_support_and_edge_peak():
    basis = tb.PairBasis(13)
    V = tb.potential_matrix(basis, 1.0, 0.78, 0.0)
    psi = tb.initial_pair_state(0.2, basis, V)
    amps = np.abs(psi)
    adjacent = [basis.index(l, l + 1) for l in range(basis.i0, basis.i0 + 13)]
    assert np.count_nonzero(amps) == len(adjacent)
    # pair creation is cheapest right next to the static charges
    assert np.argmax(amps) in (adjacent[0], adjacent[-1])
    assert amps[adjacent[0]] == pytest.approx(amps[adjacent[-1]], abs=1e-12)


def test_initial_pair_state_linear_in_g():
    basis = tb.PairBasis(9)
    V = tb.potential_matrix(basis, 1.0, 0.78, 0.1)
    n1 = np.linalg.norm(tb.initial_pair_state(0.1, basis, V))
    n2 = np.linalg.norm(tb.initial_pair_state(0.05, basis, V))
    assert n1 == pytest.approx(2 * n2)


def test_resonant_denominator_is_an_error():
    L = 9
    basis = tb.PairBasis(L)
    # tune h so the leftmost adjacent pair costs exactly zero
    l = basis.i0
    h0 = tb.two_body_potential(l, l + 1, 1.0, 0.78, 0.0, L) / 2.0
    V = tb.potential_matrix(basis, 1.0, 0.78, h0)
    with pytest.raises(ResonantDenominator):
        tb.initial_pair_state(0.1, basis, V)


def test_heff_structure():
    basis = tb.PairBasis(6)
    V = tb.potential_matrix(basis, 1.0, 0.78, 0.2)
    g = 0.3
    H = tb.build_heff(g, basis, V)
    assert np.allclose(H, H.T)
    assert np.allclose(np.diag(H), V)
    off = H - np.diag(V)
    assert set(np.unique(off)) <= {0.0, -g}
    # hard walls: the tightest pair can only stretch, the widest only shrink
    assert np.count_nonzero(off[basis.index(basis.i0, basis.i0 + 1)]) == 1
    apex = basis.index(basis.i0, basis.i0 + basis.L)
    assert np.count_nonzero(off[apex]) == 2


def test_broken_probability_zero_at_t0():
    basis = tb.PairBasis(7)
    V = tb.potential_matrix(basis, 1.0, 0.78, 0.1)
    s0 = tb.initial_pair_state(0.1, basis, V)
    heff = tb.build_heff(0.1, basis, V)
    states = tb.evolve_pair(s0, heff, [0.0, 1.0])
    assert tb.broken_probability(states[0], s0) == pytest.approx(0.0, abs=1e-12)
    assert tb.broken_probability(states[1], s0) > 0
    with pytest.raises(ValueError):
        tb.broken_probability(states[0][:3], s0)


def test_resonant_configs_sorted_by_separation():
    basis = tb.PairBasis(13)
    V = tb.potential_matrix(basis, 1.0, 0.78, 0.6)
    hits = tb.resonant_configs(basis, V, tol=0.5)
    assert hits
    seps = [l2 - l1 for (l1, l2) in hits]
    assert seps == sorted(seps)
    assert all(abs(V[basis.index(l1, l2)]) < 0.5 for (l1, l2) in hits)
    with pytest.raises(ValueError):
        tb.resonant_configs(basis, V, tol=0.0)


def test_reconstructed_observables_stay_near_string_at_small_g():
    from stringsim import evolve as ev

    L, g, h = 9, 0.05, 0.1
    basis = tb.PairBasis(L)
    V = tb.potential_matrix(basis, 1.0, 0.78, h)
    s0 = tb.initial_pair_state(g, basis, V)
    heff = tb.build_heff(g, basis, V)
    st = tb.evolve_pair(s0, heff, [1.0])[0]
    q, eps = tb.reconstruct_observables(s0, st, basis)
    config = md.initial_configuration("string", L)
    q_ref = ev.charge_density(ev.prepare_state(config), config)
    assert q.shape == q_ref.shape
    assert np.max(np.abs(q - q_ref)) < 0.05
