import numpy as np
import pytest

from stringsim import couplings as cp
from stringsim.errors import (DegenerateGeometry, IllConditioned, NoConvergence,
                              ResonanceError)

WZZ = 2 * np.pi * 2.78e6
MU = -2 * np.pi * 35e3


@pytest.fixture(scope="module")
def modes15():
    pos = cp.chain_positions(15)
    return cp.transverse_modes(pos, cp.com_frequency_for_zigzag(pos, WZZ))


def test_positions_geometry():
    uni = cp.uniform_chain_positions(5, 2e-6)
    assert np.allclose(np.diff(uni), 2e-6)
    harm = cp.harmonic_equilibrium_positions(9, 3.75e-6)
    gaps = np.diff(harm)
    assert gaps[0] > gaps[4]  # edges wider than center
    assert np.allclose(harm, -harm[::-1], atol=1e-12)
    blended = cp.chain_positions(9, 3.75e-6, 0.3)
    assert gaps[0] > np.diff(blended)[0] > 3.75e-6


def test_transverse_modes_structure(modes15):
    b = modes15.participation
    assert np.allclose(b.T @ b, np.eye(15), atol=1e-10)
    assert np.all(np.diff(modes15.frequencies) <= 0)
    # the highest mode is the in-phase COM mode, the lowest the zig-zag
    com = b[:, 0]
    assert np.all(com > 0)
    zz = b[:, -1]
    assert np.all(zz[:-1] * zz[1:] < 0)


def test_zigzag_frequency_is_pinned(modes15):
    assert modes15.zigzag_frequency == pytest.approx(WZZ, rel=1e-12)


def test_degenerate_geometry_rejected():
    with pytest.raises(DegenerateGeometry):
        cp.transverse_modes([0.0, 0.0, 1e-6], 2 * np.pi * 3e6)


def test_jij_zero_without_drive(modes15):
    beams = cp.BeamProfile(np.zeros(15))
    J = cp.jij_from_modes(modes15, beams, MU)
    assert np.all(J == 0)


def test_jij_symmetric_and_scale_invariant(modes15):
    rng = np.random.default_rng(0)
    rabi = rng.uniform(1e5, 5e5, 15)
    J1 = cp.jij_from_modes(modes15, cp.BeamProfile(rabi), MU)
    J2 = cp.jij_from_modes(modes15, cp.BeamProfile(3.0 * rabi), MU)
    assert np.max(np.abs(J1 - J1.T)) == 0
    assert np.allclose(J2, 9.0 * J1)


def test_resonance_floor(modes15):
    beams = cp.BeamProfile(np.full(15, 1e5))
    with pytest.raises(ResonanceError):
        cp.jij_from_modes(modes15, beams, mu=0.0)


def test_stagger_correction_properties():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(6, 6))
    J = A + A.T
    np.fill_diagonal(J, 0)
    twice = cp.stagger_correction(cp.stagger_correction(J))
    assert np.all(twice == J)
    checker = np.outer((-1.0) ** np.arange(6), (-1.0) ** np.arange(6))
    np.fill_diagonal(checker, 0)
    assert np.all(cp.stagger_correction(checker) >= 0)
    w1 = np.sort(np.linalg.eigvalsh(J))
    w2 = np.sort(np.linalg.eigvalsh(cp.stagger_correction(J)))
    assert np.allclose(w1, w2)


def test_fit_profile_recovers_synthetic_law():
    J1, beta, alpha, n = 2.0, 0.7, 0.3, 10
    r = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
    with np.errstate(divide="ignore"):
        M = J1 * np.exp(-beta * (r - 1)) * np.where(r > 0, r, 1.0) ** (-alpha)
    np.fill_diagonal(M, 0)
    fJ, fb, fa, resid = cp.fit_profile(M)
    assert (fJ, fb, fa) == pytest.approx((J1, beta, alpha), abs=1e-10)
    assert resid < 1e-10


def test_fit_profile_scale_equivariant():
    J = cp.synthesize_couplings().couplings
    fJ, fb, fa, _ = cp.fit_profile(J)
    sJ, sb, sa, _ = cp.fit_profile(2.5 * J)
    assert sJ == pytest.approx(2.5 * fJ)
    assert (sb, sa) == pytest.approx((fb, fa))


def test_fit_profile_needs_three_ranges():
    with pytest.raises(IllConditioned):
        cp.fit_profile(np.zeros((3, 3)))


def test_optimize_two_ions_exact():
    pos = cp.uniform_chain_positions(2, 4e-6)
    modes = cp.transverse_modes(pos, cp.com_frequency_for_zigzag(pos, WZZ))
    target = 2 * np.pi * 300.0
    beams = cp.optimize_amplitudes(modes, MU, target)
    J = cp.stagger_correction(cp.jij_from_modes(modes, beams, MU))
    assert abs(abs(J[0, 1]) - target) < 1e-6 * target


def test_optimized_profile_edges_above_center(modes15):
    beams = cp.optimize_amplitudes(modes15, MU, 2 * np.pi * 340.0,
                                   active=np.arange(1, 14))
    rabi = beams.rabi[1:14]
    assert rabi[0] > rabi[6] and rabi[-1] > rabi[6]
    # mirror-symmetric chain gives a mirror-symmetric solution
    assert np.allclose(rabi, rabi[::-1], rtol=1e-6)


def test_no_convergence_carries_best_iterate(modes15):
    # an absurd NNN weight keeps the NN spread above threshold
    with pytest.raises(NoConvergence) as exc:
        cp.optimize_amplitudes(modes15, MU, 2 * np.pi * 340.0,
                               active=np.arange(1, 14), nnn_weight=1e6)
    assert exc.value.best is not None
    assert isinstance(exc.value.best, cp.BeamProfile)


def test_synthesize_couplings_profile():
    r = cp.synthesize_couplings()
    _, beta, alpha, _ = r.fit
    assert abs(beta - 0.78) <= 0.1
    assert abs(alpha) <= 0.1
    assert r.nn_spread <= 0.05
    assert abs(r.nnn_ratio - 0.29) <= 0.1
    assert r.nn_mean == pytest.approx(2 * np.pi * 340.0, rel=0.05)
    assert np.all(np.diag(r.couplings, 1) > 0)
