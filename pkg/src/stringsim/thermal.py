"""Canonical Gibbs baselines for diagnosing non-thermal transients.

Temperatures are reported in energy units (k_B absorbed into T).  The
infinite-temperature limit is returned as the float infinity sentinel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import MemoryLimit, OutOfBracket, SizeLimit
from .model import HamiltonianSpec, build_hamiltonian, site_signs

L_DENSE_MAX = 13


@dataclass
class SpectralData:
    """Full eigendecomposition of a spin Hamiltonian."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    spec: HamiltonianSpec


def spectrum(spec: HamiltonianSpec, check: bool = True) -> SpectralData:
    """Dense Hermitian eigensolve of the full 2^L operator.

    Residuals of 10 random eigenpairs are verified when ``check`` is set.
    """
    if spec.L > L_DENSE_MAX:
        raise SizeLimit(f"dense spectrum limited to L <= {L_DENSE_MAX}")
    op = build_hamiltonian(spec)
    try:
        H = op.to_dense()
        w, V = np.linalg.eigh(H)
    except MemoryError as exc:
        raise MemoryLimit("eigenvector storage exceeds available memory") from exc
    if check:
        rng = np.random.default_rng(0)
        scale = max(np.abs(w).max(), 1.0)
        for k in rng.integers(0, w.size, size=10):
            r = np.linalg.norm(H @ V[:, k] - w[k] * V[:, k])
            if r > 1e-8 * scale:
                raise AssertionError(f"eigenpair residual {r:.2e} too large")
    return SpectralData(w, V, spec)


def _gibbs_weights(eigenvalues: np.ndarray, T: float) -> np.ndarray:
    """Boltzmann weights exp(-E/T)/Z, evaluated with the max exponent shifted out."""
    if np.isinf(T):
        return np.full(eigenvalues.size, 1.0 / eigenvalues.size)
    x = -(eigenvalues - eigenvalues.min()) / T
    w = np.exp(x)
    return w / w.sum()


def gibbs_energy(spectral: SpectralData, T: float) -> float:
    """Tr[H rho_Gibbs(T)]; strictly increasing in T."""
    return float(_gibbs_weights(spectral.eigenvalues, T) @ spectral.eigenvalues)


def match_temperature(E0: float, spectral: SpectralData,
                      rtol: float = 1e-12) -> float:
    """Temperature at which the Gibbs energy equals the quench energy E0.

    Returns the infinity sentinel when E0 hits the infinite-temperature mean.
    Raises OutOfBracket when E0 is at or below the ground energy or above
    the infinite-temperature mean.
    """
    w = spectral.eigenvalues
    E_min, E_inf = w.min(), w.mean()
    scale = max(abs(E_min), abs(E_inf), 1.0)
    if E0 >= E_inf - 1e-12 * scale:
        if E0 <= E_inf + 1e-12 * scale:
            return np.inf
        raise OutOfBracket("E0 above the infinite-temperature mean energy")
    if E0 <= E_min + 1e-12 * scale:
        raise OutOfBracket("E0 at or below the ground energy")

    def f(T):
        return gibbs_energy(spectral, T) - E0

    lo, hi = 1e-6 * scale, scale
    while f(hi) < 0:
        hi *= 2
        if hi > 1e12 * scale:
            return np.inf
    while f(lo) > 0:
        lo /= 2
        if lo < 1e-15 * scale:
            raise OutOfBracket("E0 unreachable at any positive temperature")
    T = brentq(f, lo, hi, xtol=1e-30, rtol=1e-15)
    resid = abs(gibbs_energy(spectral, T) - E0) / scale
    if resid > rtol * 100:
        raise AssertionError(f"temperature match residual {resid:.2e}")
    return float(T)


def gibbs_observable(spectral: SpectralData, T: float) -> np.ndarray:
    """Thermal per-site <sz_i> = Tr[sz_i rho_Gibbs(T)]."""
    w = _gibbs_weights(spectral.eigenvalues, T)
    S = site_signs(spectral.spec.L).astype(float)
    p_basis = (np.abs(spectral.eigenvectors) ** 2) @ w
    return p_basis @ S


def classical_gibbs_field(spec: HamiltonianSpec, T: float) -> np.ndarray:
    """g = 0 oracle: direct Boltzmann sum over the 2^L classical configurations."""
    op = build_hamiltonian(spec)
    E = op.diag
    w = _gibbs_weights(E, T)
    S = site_signs(spec.L).astype(float)
    return w @ S
