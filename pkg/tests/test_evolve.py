import numpy as np
import pytest
from scipy.linalg import expm

from stringsim import evolve as ev
from stringsim import model as md
from stringsim.errors import InsufficientSpread, NoOscillation


def _string_setup(L=9, g=0.75, h=0.6):
    spec = md.scenario_spec(L, 0.78, g, h, "string")
    config = md.initial_configuration("string", L)
    return spec, config


def test_prepare_state_is_basis_vector():
    config = md.initial_configuration("string", 5)
    psi = ev.prepare_state(config)
    assert psi[config.basis_index()] == 1.0
    assert np.linalg.norm(psi) == 1.0
    assert np.count_nonzero(psi) == 1


def test_krylov_matches_dense_oracle():
    rng = np.random.default_rng(3)
    spec, _ = _string_setup(L=7)
    op = md.build_hamiltonian(spec)
    psi0 = rng.normal(size=128) + 1j * rng.normal(size=128)
    psi0 /= np.linalg.norm(psi0)
    for t in (0.5, 2.0):
        exact = expm(-1j * t * op.to_dense()) @ psi0
        kry = ev.evolve_to_times(psi0, spec, [t])[0]
        assert np.linalg.norm(kry - exact) < 1e-8


def test_norm_and_energy_conservation():
    spec, config = _string_setup()
    op = md.build_hamiltonian(spec)
    states = ev.propagate(ev.prepare_state(config), spec, 0.3, 10)
    E0 = op.expectation(states[0])
    for s in states:
        assert abs(np.linalg.norm(s) - 1.0) < 1e-9
        assert abs(op.expectation(s) - E0) < 1e-8 * spec.L


def test_evolve_to_times_rejects_descending():
    spec, config = _string_setup(L=5)
    with pytest.raises(ValueError):
        ev.evolve_to_times(ev.prepare_state(config), spec, [1.0, 0.5])


def test_initial_charge_density_of_string():
    _, config = _string_setup(L=9)
    q = ev.charge_density(ev.prepare_state(config), config)
    labels = ev.bond_labels(config)
    # charges sit on the two bonds where the static down spins meet the vacuum
    expected = {labels[0]: 1.0, labels[-1]: 1.0}
    for lab, val in zip(labels, q):
        assert val == pytest.approx(expected.get(lab, 0.0), abs=1e-12)


def test_initial_charge_density_of_single_kink():
    config = md.initial_configuration("charge", 9)
    q = ev.charge_density(ev.prepare_state(config), config)
    labels = ev.bond_labels(config)
    assert q[list(labels).index(0)] == pytest.approx(1.0)
    assert q.sum() == pytest.approx(1.0)


def test_reflection_covariance_of_string_quench():
    spec, config = _string_setup(L=9)
    qmap, _, _ = ev.run_quench(config, spec, np.linspace(0, 2, 11))
    # the string spec is mirror symmetric, so the map must be too
    assert np.max(np.abs(qmap.values - qmap.values[:, ::-1])) < 1e-8


def test_map_shape_validation():
    with pytest.raises(ValueError):
        ev.SpatiotemporalMap(np.arange(3), np.arange(4), np.zeros((3, 3)))


def test_light_cone_threshold_insensitivity():
    spec = md.scenario_spec(13, 0.78, 0.5, 0.0, "charge")
    config = md.initial_configuration("charge", 13)
    qmap, _, _ = ev.run_quench(config, spec, np.linspace(0, 6, 61))
    v4, _ = ev.fit_light_cone(qmap, threshold=0.4)
    v5, _ = ev.fit_light_cone(qmap, threshold=0.5)
    assert abs(v4 - v5) / v5 < 0.10


def test_light_cone_requires_spreading():
    spec = md.scenario_spec(9, 0.78, 0.0, 0.0, "charge")
    config = md.initial_configuration("charge", 9)
    qmap, _, _ = ev.run_quench(config, spec, np.linspace(0, 4, 21))
    with pytest.raises(InsufficientSpread):
        ev.fit_light_cone(qmap)


def test_bloch_period_halves_when_h_doubles():
    config = md.initial_configuration("charge", 13)
    periods = {}
    for h in (0.4, 0.8):
        spec = md.scenario_spec(13, 0.78, 0.5, h, "charge")
        qmap, _, _ = ev.run_quench(config, spec, np.linspace(0, 16 * 0.4 / h, 161))
        _, periods[h], _ = ev.fit_bloch(qmap)
    assert periods[0.8] == pytest.approx(periods[0.4] / 2, rel=0.15)


def test_bloch_needs_oscillation():
    spec = md.scenario_spec(13, 0.78, 0.5, 0.0, "charge")
    config = md.initial_configuration("charge", 13)
    qmap, _, _ = ev.run_quench(config, spec, np.linspace(0, 6, 61))
    with pytest.raises(NoOscillation):
        ev.fit_bloch(qmap)


def test_shots_deterministic_state_has_zero_variance():
    _, config = _string_setup(L=6)
    psi = ev.prepare_state(config)
    shot = ev.sample_shots(psi, config, 40, seed=1)
    assert np.all(shot.eps_err == 0)
    assert np.all(shot.q_err == 0)
    assert shot.eps == pytest.approx(np.full(6, -1.0))


def test_shots_reproducible_and_unbiased():
    spec, config = _string_setup(L=6)
    psi = ev.evolve_to_times(ev.prepare_state(config), spec, [1.5])[0]
    a = ev.sample_shots(psi, config, 500, seed=42)
    b = ev.sample_shots(psi, config, 500, seed=42)
    assert np.all(a.eps == b.eps) and a.counts == b.counts
    exact = ev.electric_field(psi)
    # 5 sigma per site is a loose but honest bound at this shot count
    assert np.all(np.abs(a.eps - exact) <= 5 * np.maximum(a.eps_err, 1e-3))


def test_sampled_maps_align_with_exact():
    spec, config = _string_setup(L=6)
    times = np.linspace(0, 2, 6)
    qmap, emap, _ = ev.sampled_maps(config, spec, times, 200, seed=9)
    q_exact, e_exact, _ = ev.run_quench(config, spec, times)
    assert qmap.values.shape == q_exact.values.shape
    assert np.max(np.abs(emap.values - e_exact.values)) < 0.5
