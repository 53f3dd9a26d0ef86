"""Release acceptance suite: one callable per criterion, shared by CLI and tests.

Each criterion returns a CriterionResult with the measured numbers in its
details string, so a failure localizes immediately.  Tolerances live here,
next to the checks, and nowhere else.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import couplings as cpl
from . import duality as du
from . import evolve as ev
from . import model as md
from . import thermal as th
from . import twobody as tb


@dataclass
class CriterionResult:
    name: str
    passed: bool
    runtime: float
    details: str

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name} ({self.runtime:.1f} s): {self.details}"


def _result(name, t0, passed, details):
    return CriterionResult(name, bool(passed), time.time() - t0, details)


def criterion_duality_oracle() -> CriterionResult:
    """Gauge-sector and dual-Ising spectra agree up to a constant shift."""
    t0 = time.time()
    rng = np.random.default_rng(7)
    worst = 0.0
    for L in range(2, 7):
        n_sites = L + 1
        for _ in range(5):
            g = rng.uniform(0.1, 1.0)
            h = rng.uniform(0.1, 1.0)
            beta = rng.uniform(0.4, 1.5)
            profile = du.truncate_profile(1.0, beta)
            params = du.parameter_dictionary(profile, h)
            sector = du.enumerate_gauge_sector(n_sites, (0, 0))
            w_lgt = np.sort(np.linalg.eigvalsh(
                du.build_lgt_hamiltonian(params, sector, g)))
            spec = du.dual_ising_spec(params, (0, 0), n_sites, g)
            w_spin = np.sort(np.linalg.eigvalsh(md.build_hamiltonian(spec).to_dense()))
            worst = max(worst, np.max(np.abs(
                (w_lgt - w_lgt.mean()) - (w_spin - w_spin.mean()))))
    return _result("duality-oracle", t0, worst < 1e-10,
                   f"max spectral deviation {worst:.2e} (tol 1e-10)")


def criterion_potential_oracle() -> CriterionResult:
    """Closed-form pair potential equals the classical energy difference."""
    t0 = time.time()
    L, beta = 13, 0.78
    basis = tb.PairBasis(L)
    string = md.initial_configuration("string", L)
    worst = 0.0
    for h in (0.0, 0.3, 0.6):
        spec = md.scenario_spec(L, beta, 0.0, h, "string")
        E0 = md.classical_energy(string, spec)
        for (l1, l2) in basis.pairs:
            V = tb.two_body_potential(l1, l2, 1.0, beta, h, L)
            dE = md.classical_energy(tb.pair_configuration(basis, l1, l2), spec) - E0
            worst = max(worst, abs(V - dE))
    return _result("potential-oracle", t0, worst < 1e-10,
                   f"max |V - dE| = {worst:.2e} over {3 * basis.dim} configs (tol 1e-10)")


def criterion_virtual_field_oracle() -> CriterionResult:
    """Closed-form virtual fields match brute-force tail summation; exact parity."""
    t0 = time.time()
    L, J, beta = 13, 1.0, 0.78
    dh_c = md.virtual_field_charge(J, beta, L)
    dh_s = md.virtual_field_string(J, beta, L)
    bf_c = md.brute_force_virtual_field(*md.environment_tails("charge"), J, beta, L)
    bf_s = md.brute_force_virtual_field(*md.environment_tails("string"), J, beta, L)
    dev = max(np.max(np.abs(dh_c - bf_c)), np.max(np.abs(dh_s - bf_s)))
    anti = np.max(np.abs(dh_c + dh_c[::-1]))
    sym = np.max(np.abs(dh_s - dh_s[::-1]))
    ok = dev < 1e-12 * J and anti == 0.0 and sym == 0.0
    return _result("virtual-field-oracle", t0, ok,
                   f"brute-force dev {dev:.2e} (tol 1e-12), "
                   f"antisym {anti:.1e}, sym {sym:.1e} (both exact)")


def criterion_propagation_fidelity() -> CriterionResult:
    """Krylov propagation against the dense oracle; norm and energy drift."""
    t0 = time.time()
    rng = np.random.default_rng(11)
    L = 8
    spec = md.HamiltonianSpec(
        L=L, J=md.exp_profile(1.0, 0.9, L), g=rng.uniform(0.2, 0.8),
        h=rng.uniform(0.0, 0.5), delta_h=rng.normal(0, 0.2, L))
    psi0 = rng.normal(size=1 << L) + 1j * rng.normal(size=1 << L)
    psi0 /= np.linalg.norm(psi0)
    op = md.build_hamiltonian(spec)
    exact = expm(-3j * op.to_dense()) @ psi0
    kry = ev.evolve_to_times(psi0, spec, [3.0])[0]
    dev = np.linalg.norm(kry - exact)
    norm_drift = abs(np.linalg.norm(kry) - 1.0)

    spec13 = md.scenario_spec(13, 0.78, 0.75, 0.6, "string")
    psi13 = ev.prepare_state(md.initial_configuration("string", 13))
    op13 = md.build_hamiltonian(spec13)
    states = ev.propagate(psi13, spec13, 0.25, 12)
    E = [op13.expectation(s) for s in states]
    e_drift = max(abs(e - E[0]) for e in E)
    ok = dev < 1e-8 and norm_drift < 1e-9 and e_drift < 1e-8 * 13
    return _result("propagation-fidelity", t0, ok,
                   f"|dpsi| {dev:.2e} (tol 1e-8), norm drift {norm_drift:.2e} "
                   f"(tol 1e-9), energy drift {e_drift:.2e} (tol {1e-8 * 13:.1e})")


def criterion_light_cone() -> CriterionResult:
    """Charge-front velocity 2g for free kink spreading at h = 0."""
    t0 = time.time()
    times = np.linspace(0, 6, 61)
    parts = []
    ok = True
    for g in (0.3, 0.5):
        spec = md.scenario_spec(13, 0.78, g, 0.0, "charge")
        config = md.initial_configuration("charge", 13)
        qmap, _, _ = ev.run_quench(config, spec, times)
        v, _ = ev.fit_light_cone(qmap)
        rel = abs(v - 2 * g) / (2 * g)
        ok = ok and rel <= 0.20
        parts.append(f"g={g}: v={v:.3f} vs 2g={2 * g} ({100 * rel:.0f}%)")
    return _result("light-cone", t0, ok, "; ".join(parts) + " (tol 20%)")


def criterion_bloch() -> CriterionResult:
    """Breathing amplitude 2g/h and period pi/h for a charge against tension h."""
    t0 = time.time()
    g, h = 0.5, 0.4
    spec = md.scenario_spec(13, 0.78, g, h, "charge")
    config = md.initial_configuration("charge", 13)
    qmap, _, _ = ev.run_quench(config, spec, np.linspace(0, 16, 161))
    amp, period, _ = ev.fit_bloch(qmap)
    amp_ref, per_ref = 2 * g / h, np.pi / h
    ra = abs(amp - amp_ref) / amp_ref
    rp = abs(period - per_ref) / per_ref
    ok = ra <= 0.25 and rp <= 0.25
    return _result("bloch-oscillations", t0, ok,
                   f"amplitude {amp:.2f} vs {amp_ref:.2f} ({100 * ra:.0f}%), "
                   f"period {period:.2f} vs {per_ref:.2f} ({100 * rp:.0f}%) (tol 25%)")


def criterion_edge_first_breaking() -> CriterionResult:
    """Pair creation starts at the string edges; field tilt opens the channel."""
    t0 = time.time()
    times = np.linspace(0, 3, 121)
    config = md.initial_configuration("string", 13)
    qmaps = {}
    for h in (0.0, 0.6):
        spec = md.scenario_spec(13, 0.78, 0.75, h, "string")
        qmaps[h], _, _ = ev.run_quench(config, spec, times)
    qm = qmaps[0.6]
    labels = qm.labels[1:-1]            # dynamical bonds only
    vals = qm.values[:, 1:-1]
    edge_bonds = {labels[0], labels[-1]}
    first = {}
    for b, lab in enumerate(labels):
        hit = np.nonzero(vals[:, b] > 0.25)[0]
        if hit.size:
            first[int(lab)] = times[hit[0]]
    t_edge = min((first[l] for l in first if l in edge_bonds), default=np.inf)
    t_bulk = min((first[l] for l in first if abs(l) <= 3), default=np.inf)
    edge_ok = t_edge < t_bulk

    def bulk_charge(qmap):
        sel = np.abs(qmap.labels.astype(int)) <= 3
        return float(qmap.values[-1, sel].sum())

    q_tilt, q_flat = bulk_charge(qmaps[0.6]), bulk_charge(qmaps[0.0])
    ok = edge_ok and q_tilt > q_flat
    return _result("edge-first-breaking", t0, ok,
                   f"edge q>0.25 at Jt={t_edge:.2f} vs bulk {t_bulk:.2f}; "
                   f"bulk charge at Jt=3: {q_tilt:.3f} (h=0.6) vs {q_flat:.3f} (h=0)")


def _broken_probability_error(g, h, times):
    """Max deviation between perturbative and exact broken-string probability."""
    L, beta = 13, 0.78
    spec = md.scenario_spec(L, beta, g, h, "string")
    config = md.initial_configuration("string", L)
    psi0 = ev.prepare_state(config)
    states = ev.evolve_to_times(psi0, spec, times)
    p_exact = np.array([1.0 - abs(np.vdot(psi0, s)) ** 2 for s in states])

    basis = tb.PairBasis(L)
    V = tb.potential_matrix(basis, 1.0, beta, h)
    s0 = tb.initial_pair_state(g, basis, V)
    heff = tb.build_heff(g, basis, V)
    p_pert = np.array([tb.broken_probability(st, s0)
                       for st in tb.evolve_pair(s0, heff, times)])
    return float(np.max(np.abs(p_exact - p_pert))), float(p_exact.max())


def criterion_perturbative_consistency() -> CriterionResult:
    """First-order error scale shrinks ~16x when g is halved."""
    t0 = time.time()
    times = np.linspace(0, 2, 41)
    err1, pmax = _broken_probability_error(0.1, 0.05, times)
    err2, _ = _broken_probability_error(0.05, 0.05, times)
    ratio = err1 / err2
    ok = 8.0 < ratio < 32.0 and err1 < 0.5 * max(pmax, 1e-12)
    return _result("perturbative-consistency", t0, ok,
                   f"error {err1:.2e} at g=0.1 (max P {pmax:.2e}), "
                   f"shrink ratio {ratio:.1f} (expect ~16, accept 8-32)")


def criterion_thermal_baseline() -> CriterionResult:
    """Temperature matching, g=0 Gibbs oracle, and the non-thermal transient."""
    t0 = time.time()
    spec0 = md.scenario_spec(10, 0.78, 0.0, 0.3, "string")
    spectral0 = th.spectrum(spec0)
    dev_g0 = max(np.max(np.abs(th.gibbs_observable(spectral0, T)
                               - th.classical_gibbs_field(spec0, T)))
                 for T in (0.5, 2.0, np.inf))

    spec = md.scenario_spec(13, 0.78, 0.75, 0.6, "string")
    config = md.initial_configuration("string", 13)
    E0 = md.classical_energy(config, spec)
    spectral = th.spectrum(spec)
    T = th.match_temperature(E0, spectral)
    resid = abs(th.gibbs_energy(spectral, T) - E0) / max(abs(E0), 1.0)

    psi3 = ev.evolve_to_times(ev.prepare_state(config), spec, [3.0])[0]
    eps_t = ev.electric_field(psi3)
    eps_gibbs = th.gibbs_observable(spectral, T)
    bulk = np.abs(spec.sites) <= 3
    diff = eps_t[bulk] - eps_gibbs[bulk]
    signed = np.all(diff > 1e-3) or np.all(diff < -1e-3)
    ok = resid < 1e-10 and dev_g0 < 1e-10 and signed
    return _result("thermal-baseline", t0, ok,
                   f"T={T:.3f}, match residual {resid:.2e} (tol 1e-10), g=0 oracle "
                   f"dev {dev_g0:.2e} (tol 1e-10), bulk eps(t)-eps_Gibbs in "
                   f"[{diff.min():.3f},{diff.max():.3f}] (one sign)")


def criterion_coupling_synthesis() -> CriterionResult:
    """Synthesized ion-chain couplings reproduce the published profile."""
    t0 = time.time()
    r = cpl.synthesize_couplings()
    _, beta, alpha, _ = r.fit
    ok = (abs(beta - 0.78) <= 0.1 and abs(alpha) <= 0.1
          and r.nn_spread <= 0.05 and abs(r.nnn_ratio - 0.29) <= 0.1)
    return _result("coupling-synthesis", t0, ok,
                   f"beta={beta:.3f} (0.78+-0.1), alpha={alpha:.3f} (0+-0.1), "
                   f"NN spread {100 * r.nn_spread:.2f}% (<=5%), "
                   f"NNN/NN {r.nnn_ratio:.3f} (0.29+-0.1)")


def criterion_shot_noise() -> CriterionResult:
    """300-shot estimates cover the exact field at 3 sigma on >= 95% of points."""
    t0 = time.time()
    spec = md.scenario_spec(13, 0.78, 0.75, 0.6, "string")
    config = md.initial_configuration("string", 13)
    times = np.linspace(0, 3, 31)
    _, emap_exact, _ = ev.run_quench(config, spec, times)
    _, emap_shot, _ = ev.sampled_maps(config, spec, times, 300, seed=20240817)
    diff = np.abs(emap_shot.values - emap_exact.values)
    err = emap_shot.stderr
    covered = (diff <= 3 * err) | ((err == 0) & (diff < 1e-12))
    frac = float(covered.mean())
    return _result("shot-noise", t0, frac >= 0.95,
                   f"{100 * frac:.1f}% of {covered.size} (site,time) points within "
                   f"3 combined stderr (need >= 95%)")


CRITERIA = [
    criterion_duality_oracle,
    criterion_potential_oracle,
    criterion_virtual_field_oracle,
    criterion_propagation_fidelity,
    criterion_light_cone,
    criterion_bloch,
    criterion_edge_first_breaking,
    criterion_perturbative_consistency,
    criterion_thermal_baseline,
    criterion_coupling_synthesis,
    criterion_shot_noise,
]


def run_all(names=None) -> list:
    """Run the acceptance criteria (all, or those whose name contains a filter)."""
    out = []
    for crit in CRITERIA:
        label = crit.__name__.replace("criterion_", "").replace("_", "-")
        if names and not any(n in label for n in names):
            continue
        out.append(crit())
    return out
