"""Synthesis of the trapped-ion interaction matrix from phonon-mode data.

Frequencies are angular (rad/s) throughout.  The bichromatic drive detuned
by mu from the lowest (zig-zag) transverse mode generates

    J_ij = sum_k eta_ik eta_jk Omega_i Omega_j / (omega_zz + mu - omega_k)

with Lamb-Dicke parameters eta_ik = 0.08 b_ik.  Because the zig-zag mode
participation alternates in sign, the raw matrix is staggered; flipping the
phase of every other beam (the stagger correction) makes all couplings
sign-uniform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import fsolve, least_squares

from .errors import (DegenerateGeometry, IllConditioned, NoConvergence,
                     ResonanceError)

# 171Yb+ constants (SI)
ION_MASS = 171 * 1.66053906660e-27
COULOMB = (1.602176634e-19) ** 2 * 8.9875517923e9  # e^2 / (4 pi eps0)

LAMB_DICKE_SCALE = 0.08
DEFAULT_RESONANCE_FLOOR = 2 * np.pi * 1e3  # rad/s


@dataclass(frozen=True)
class ModeData:
    """Transverse phonon modes: frequencies (descending) and participation matrix."""

    frequencies: np.ndarray      # (N,) rad/s, descending
    participation: np.ndarray    # (N ions, N modes), orthonormal columns

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float)
        b = np.asarray(self.participation, dtype=float)
        if np.any(w <= 0):
            raise ValueError("mode frequencies must be positive")
        if np.any(np.diff(w) > 0):
            raise ValueError("mode frequencies must be sorted descending")
        if np.linalg.norm(b.T @ b - np.eye(b.shape[1])) > 1e-10:
            raise ValueError("participation matrix must be orthonormal")
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "participation", b)

    @property
    def n_ions(self) -> int:
        return self.participation.shape[0]

    @property
    def zigzag_frequency(self) -> float:
        return float(self.frequencies[-1])


@dataclass(frozen=True)
class BeamProfile:
    """Carrier Rabi frequency and phase flip per addressed ion."""

    rabi: np.ndarray             # (N,) rad/s, >= 0; zero for undriven ions
    phase_flip: np.ndarray = None  # (N,) +-1

    def __post_init__(self):
        r = np.asarray(self.rabi, dtype=float)
        if np.any(r < 0):
            raise ValueError("Rabi frequencies must be non-negative")
        object.__setattr__(self, "rabi", r)
        pf = (np.ones(r.size, dtype=int) if self.phase_flip is None
              else np.asarray(self.phase_flip, dtype=int))
        object.__setattr__(self, "phase_flip", pf)


def uniform_chain_positions(n_ions: int, spacing: float = 3.75e-6) -> np.ndarray:
    """Exactly uniform chain geometry, centered at zero."""
    return (np.arange(n_ions) - (n_ions - 1) / 2.0) * spacing


def harmonic_equilibrium_positions(n_ions: int,
                                   central_spacing: float = 3.75e-6) -> np.ndarray:
    """Equilibrium positions of a Coulomb chain in a harmonic axial trap.

    Solves u_i = sum_{j != i} sign(u_i - u_j) / (u_i - u_j)^2 in trap units,
    then rescales so the central gap equals ``central_spacing``.  Outer gaps
    come out wider than the central ones.
    """
    if n_ions < 2:
        raise DegenerateGeometry("need at least 2 ions")
    u0 = np.linspace(-1.0, 1.0, n_ions) * 0.5 * n_ions ** 0.9

    def force_balance(u):
        d = np.subtract.outer(u, u)
        with np.errstate(divide="ignore"):
            f = np.where(d != 0, np.sign(d) / np.where(d != 0, d, 1.0) ** 2, 0.0)
        return u - f.sum(axis=1)

    u = np.sort(fsolve(force_balance, u0, xtol=1e-12))
    mid = n_ions // 2
    return u * central_spacing / (u[mid] - u[mid - 1])


def chain_positions(n_ions: int, spacing: float = 3.75e-6,
                    edge_relaxation: float = 0.25) -> np.ndarray:
    """Near-uniform chain geometry with residual edge widening.

    Real anharmonic traps flatten the axial potential to equalize the ion
    spacing, but the outermost gaps are never pulled fully uniform.  This
    blends the exactly uniform ladder with the harmonic-trap equilibrium
    (weight ``edge_relaxation``), keeping the central gap at ``spacing``.
    """
    uniform = uniform_chain_positions(n_ions, spacing)
    if edge_relaxation == 0.0:
        return uniform
    relaxed = harmonic_equilibrium_positions(n_ions, spacing)
    return (1.0 - edge_relaxation) * uniform + edge_relaxation * relaxed


def transverse_modes(positions, radial_com_frequency: float,
                     mass: float = ION_MASS) -> ModeData:
    """Normal modes of transverse motion from the Coulomb-chain Hessian.

    Eigenpairs of A_mn = w_t^2 delta_mn - (coulomb/mass) * (delta_mn *
    sum_p 1/d_mp^3 - 1/d_mn^3), sorted by descending frequency; the lowest
    mode is the alternating-sign zig-zag mode.
    """
    x = np.asarray(positions, dtype=float)
    if x.size < 2 or np.any(np.diff(np.sort(x)) <= 0):
        raise DegenerateGeometry("need >= 2 strictly increasing positions")
    n = x.size
    d = np.abs(np.subtract.outer(x, x))
    with np.errstate(divide="ignore"):
        inv3 = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0) ** 3, 0.0)
    c = COULOMB / mass
    A = c * inv3
    np.fill_diagonal(A, radial_com_frequency ** 2 - c * inv3.sum(axis=1))
    w2, b = np.linalg.eigh(A)
    if np.any(w2 <= 0):
        raise DegenerateGeometry("chain is transversally unstable at this trap frequency")
    order = np.argsort(w2)[::-1]
    w = np.sqrt(w2[order])
    b = b[:, order]
    # fix gauge: make the largest-magnitude entry of each mode positive
    for k in range(n):
        j = np.argmax(np.abs(b[:, k]))
        if b[j, k] < 0:
            b[:, k] = -b[:, k]
    return ModeData(w, b)


def com_frequency_for_zigzag(positions, zigzag_frequency: float,
                             mass: float = ION_MASS) -> float:
    """Radial COM frequency that places the zig-zag mode at a target frequency."""
    x = np.asarray(positions, dtype=float)
    d = np.abs(np.subtract.outer(x, x))
    with np.errstate(divide="ignore"):
        inv3 = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0) ** 3, 0.0)
    c = COULOMB / mass
    C = c * inv3.copy()
    np.fill_diagonal(C, -c * inv3.sum(axis=1))
    lam_min = np.linalg.eigvalsh(C).min()  # most negative shift -> zig-zag
    return float(np.sqrt(zigzag_frequency ** 2 - lam_min))


def jij_from_modes(modes: ModeData, beams: BeamProfile, mu: float,
                   active=None,
                   resonance_floor: float = DEFAULT_RESONANCE_FLOOR) -> np.ndarray:
    """Ising coupling matrix over the active ions (rad/s).

    J_ij = sum_k eta_ik eta_jk Omega_i Omega_j / (omega_zz + mu - omega_k),
    eta = 0.08 b.  Zero diagonal; symmetric by construction.
    """
    if active is None:
        active = np.arange(modes.n_ions)
    active = np.asarray(active, dtype=int)
    denom = modes.zigzag_frequency + mu - modes.frequencies
    if np.abs(denom).min() < resonance_floor:
        raise ResonanceError("drive beatnote too close to a motional mode")
    eta = LAMB_DICKE_SCALE * modes.participation[active]      # (n_active, N)
    omega = beams.rabi[active] * beams.phase_flip[active]
    amp = eta * omega[:, None]
    J = (amp / denom) @ amp.T
    J = 0.5 * (J + J.T)  # matmul rounding breaks bit-exact symmetry
    np.fill_diagonal(J, 0.0)
    return J


def stagger_correction(J: np.ndarray) -> np.ndarray:
    """Conjugate by the alternating-sign pattern: J'_ij = (-1)^i (-1)^j J_ij.

    An involution that leaves the spectrum invariant; turns a staggered
    matrix into a sign-uniform one.
    """
    J = np.asarray(J, dtype=float)
    if J.shape[0] != J.shape[1] or not np.allclose(J, J.T):
        raise ValueError("expected a square symmetric matrix")
    sign = (-1.0) ** np.arange(J.shape[0])
    return J * np.outer(sign, sign)


def range_profile(J: np.ndarray) -> np.ndarray:
    """Range-averaged magnitudes |J_r| = mean_i |J_{i,i+r}| for r = 1..L-1."""
    L = J.shape[0]
    return np.array([np.mean(np.abs(np.diag(J, r))) for r in range(1, L)])


def fit_profile(J: np.ndarray, min_bonds: int = 5):
    """Fit |J_r| = J1 * exp(-beta (r-1)) * r^(-alpha) on range-averaged couplings.

    Linear least squares in log space.  Ranges averaged over fewer than
    ``min_bonds`` ion pairs are excluded: they are edge-dominated and orders
    of magnitude below the NN scale.  Returns (J1, beta, alpha, rms_residual).
    """
    prof = range_profile(J)
    n_max = max(J.shape[0] - min_bonds, 3)
    prof = prof[:n_max]
    prof = prof[prof > 0]
    if prof.size < 3:
        raise IllConditioned("need at least 3 interaction ranges to fit")
    r = np.arange(1, prof.size + 1, dtype=float)
    y = np.log(prof)
    A = np.column_stack([np.ones_like(r), -(r - 1.0), -np.log(r)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(np.exp(coef[0])), float(coef[1]), float(coef[2]), resid


def optimize_amplitudes(modes: ModeData, mu: float, target_nn: float,
                        active=None, nnn_weight: float = 0.25,
                        max_iter: int = 200) -> BeamProfile:
    """Beam amplitudes giving uniform NN couplings with quiet NNN couplings.

    Minimizes sum_i (J_{i,i+1} - target)^2 + w * Var(J_{i,i+2}) over the
    Rabi frequencies of the active beams (after the stagger correction and a
    global sign normalization).  Undriven ions keep zero amplitude.
    """
    if active is None:
        active = np.arange(modes.n_ions)
    active = np.asarray(active, dtype=int)
    n = active.size
    sw = np.sqrt(nnn_weight)

    def couplings_for(log_omega):
        rabi = np.zeros(modes.n_ions)
        rabi[active] = np.exp(log_omega)
        J = jij_from_modes(modes, BeamProfile(rabi), mu, active)
        J = stagger_correction(J)
        nn = np.diag(J, 1)
        if np.mean(nn) < 0:
            J = -J
        return J

    def residuals(log_omega):
        J = couplings_for(log_omega)
        nn = np.diag(J, 1)
        nnn = np.diag(J, 2)
        if nnn.size < 2:  # no NNN variance to speak of
            return nn - target_nn
        return np.concatenate([nn - target_nn, sw * (nnn - nnn.mean())])

    # analytic scale guess from the zig-zag term alone
    denom = abs(mu)
    b_zz = np.abs(modes.participation[active, -1]).mean()
    omega0 = np.sqrt(target_nn * denom) / (LAMB_DICKE_SCALE * max(b_zz, 1e-3))
    x0 = np.full(n, np.log(omega0))
    method = "lm" if residuals(x0).size >= n else "trf"
    res = least_squares(residuals, x0, method=method, max_nfev=max_iter * n)
    rabi = np.zeros(modes.n_ions)
    rabi[active] = np.exp(res.x)
    profile = BeamProfile(rabi)
    J = couplings_for(res.x)
    nn = np.diag(J, 1)
    spread = nn.std() / abs(nn.mean())
    if not res.success or spread > 0.05:
        raise NoConvergence(
            f"NN spread {spread:.3f} above 5% after optimization", best=profile)
    return profile


@dataclass(frozen=True)
class SynthesisResult:
    """End-to-end coupling synthesis summary for a driven ion chain."""

    positions: np.ndarray        # all ion positions (m)
    modes: ModeData
    beams: BeamProfile
    couplings: np.ndarray        # active-ion J matrix after stagger correction (rad/s)
    fit: tuple                   # (J1, beta, alpha, rms_residual)
    nn_mean: float               # rad/s
    nn_spread: float             # relative std of NN couplings
    nnn_ratio: float             # mean NNN / mean NN

    @property
    def n_active(self) -> int:
        return self.couplings.shape[0]


def synthesize_couplings(n_ions: int = 15, n_active: int = 13,
                         spacing: float = 3.75e-6,
                         zigzag_frequency: float = 2 * np.pi * 2.78e6,
                         mu: float = -2 * np.pi * 35e3,
                         target_nn: float = 2 * np.pi * 340.0,
                         nnn_weight: float = 0.25,
                         edge_relaxation: float = 0.25) -> SynthesisResult:
    """Full pipeline: geometry, modes, amplitude optimization, stagger fix, fit.

    The central ``n_active`` ions are driven; the outer ions participate in
    the motion but carry no beam.  The radial confinement is chosen so the
    zig-zag mode lands exactly at ``zigzag_frequency``.  The returned matrix
    is sign-normalized so NN couplings are positive.
    """
    if n_active > n_ions:
        raise ValueError("cannot drive more ions than the chain holds")
    positions = chain_positions(n_ions, spacing, edge_relaxation)
    com = com_frequency_for_zigzag(positions, zigzag_frequency)
    modes = transverse_modes(positions, com)
    pad = (n_ions - n_active) // 2
    active = np.arange(pad, pad + n_active)
    beams = optimize_amplitudes(modes, mu, target_nn, active,
                                nnn_weight=nnn_weight)
    J = stagger_correction(jij_from_modes(modes, beams, mu, active))
    nn = np.diag(J, 1)
    if nn.mean() < 0:
        J = -J
        nn = -nn
    nnn = np.diag(J, 2)
    return SynthesisResult(positions, modes, beams, J, fit_profile(J),
                           float(nn.mean()), float(nn.std() / nn.mean()),
                           float(nnn.mean() / nn.mean()))
