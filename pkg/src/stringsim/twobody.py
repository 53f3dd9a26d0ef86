"""Lowest-order perturbative description of string breaking as a two-charge problem.

The abrupt quench creates a single pair of charges whose positions (l1, l2)
live on a triangular lattice of ordered bond pairs.  The pair hops with
uniform amplitude g through the potential landscape V(l1, l2) set by the
interaction tails and the string tension.

Coordinates: bond labels are external (centered, i0 <= l1 < l2 <= i0+L);
internally the potential formula uses 1-based labels l = external - i0 + 1,
fixed by requiring V to equal the classical-energy difference of the
corresponding flipped spin configurations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, ResonantDenominator
from . import model
from .model import SpinConfiguration


@dataclass(frozen=True)
class PairBasis:
    """Ordered charge-pair positions (l1, l2) with a flat index map."""

    L: int
    i0: int = None

    def __post_init__(self):
        if self.i0 is None:
            object.__setattr__(self, "i0", -(self.L - 1) // 2)
        pairs = [(l1, l2)
                 for l1 in range(self.i0, self.i0 + self.L + 1)
                 for l2 in range(l1 + 1, self.i0 + self.L + 1)]
        object.__setattr__(self, "pairs", tuple(pairs))
        object.__setattr__(self, "_index", {p: k for k, p in enumerate(pairs)})

    @property
    def dim(self) -> int:
        return len(self.pairs)  # (L+1) L / 2

    def index(self, l1: int, l2: int) -> int:
        try:
            return self._index[(l1, l2)]
        except KeyError:
            raise IndexOutOfRange(f"pair ({l1},{l2}) outside the triangle") from None

    def reflected(self, l1: int, l2: int):
        """Pair image under the bond reflection i -> 2*i0 + L - i."""
        lo, hi = self.i0, self.i0 + self.L
        return (lo + hi - l2, lo + hi - l1)


def two_body_potential(l1: int, l2: int, J: float, beta: float, h: float,
                       L: int, i0: int = None) -> float:
    """Energy of the charge pair (l1, l2) relative to the intact string.

    Closed form for the geometric interaction profile; equals the classical
    energy difference of the string configuration with sites l1..l2-1
    flipped up (the potential oracle in the tests).
    """
    if i0 is None:
        i0 = -(L - 1) // 2
    a, b = l1 - i0 + 1, l2 - i0 + 1
    if not (1 <= a < b <= L + 1):
        raise IndexOutOfRange(f"pair ({l1},{l2}) outside the triangle")
    q = np.exp(-beta)
    pref = 4.0 * J / (1.0 - q) ** 2
    return float(
        pref * (1.0 + q ** b - q ** a - q ** (b - a)
                + q ** (L + 2 - a) - q ** (L + 2 - b))
        - 2.0 * h * (b - a)
    )


def potential_matrix(basis: PairBasis, J: float, beta: float, h: float) -> np.ndarray:
    """V over the flat pair basis."""
    return np.array([two_body_potential(l1, l2, J, beta, h, basis.L, basis.i0)
                     for (l1, l2) in basis.pairs])


def pair_configuration(basis: PairBasis, l1: int, l2: int) -> SpinConfiguration:
    """Spin configuration of the string with the charge pair at (l1, l2).

    Dynamical sites l1 .. l2-1 are flipped up inside the down-spin string.
    """
    basis.index(l1, l2)
    spins = tuple(+1 if l1 <= site < l2 else -1
                  for site in range(basis.i0, basis.i0 + basis.L))
    left, right = model.environment_tails("string")
    return SpinConfiguration(spins, left, right, basis.i0)


def initial_pair_state(g: float, basis: PairBasis, V: np.ndarray,
                       tol: float = 1e-8) -> np.ndarray:
    """First-order pair wavefunction right after the quench.

    Supported on adjacent pairs with amplitude i*g/V(l, l+1); peaks at the
    two edge bonds where pair creation is cheapest.  Near-zero denominators
    are an error, not something to regularize away.
    """
    Jscale = max(abs(V).max(), 1.0)
    psi = np.zeros(basis.dim, dtype=complex)
    for l in range(basis.i0, basis.i0 + basis.L):
        k = basis.index(l, l + 1)
        if abs(V[k]) < tol * Jscale:
            raise ResonantDenominator(
                f"V({l},{l + 1}) ~ 0; first-order expansion invalid")
        psi[k] = 1j * g / V[k]
    return psi


def build_heff(g: float, basis: PairBasis, V: np.ndarray) -> np.ndarray:
    """Effective pair Hamiltonian: diagonal V, hopping -g on the triangle."""
    dim = basis.dim
    H = np.diag(V.astype(float))
    for k, (l1, l2) in enumerate(basis.pairs):
        for m1, m2 in ((l1 - 1, l2), (l1 + 1, l2), (l1, l2 - 1), (l1, l2 + 1)):
            if m1 < m2 and (m1, m2) in basis._index:
                H[k, basis._index[(m1, m2)]] = -g
    if not np.allclose(H, H.T):
        raise AssertionError("pair Hamiltonian must be symmetric")
    return H


def evolve_pair(state0: np.ndarray, heff: np.ndarray, times) -> list:
    """Unitary evolution on the pair space via dense eigendecomposition."""
    w, U = np.linalg.eigh(heff)
    c0 = U.conj().T @ state0
    return [U @ (np.exp(-1j * w * t) * c0) for t in np.asarray(times, dtype=float)]


def broken_probability(state_t: np.ndarray, state_0: np.ndarray) -> float:
    """P(t) = 2 (<psi1(0)|psi1(0)> - Re <psi1(0)|psi1(t)>)."""
    if state_t.shape != state_0.shape:
        raise ValueError("states must share a basis")
    return float(2.0 * (np.vdot(state_0, state_0).real
                        - np.vdot(state_0, state_t).real))


def resonant_configs(basis: PairBasis, V: np.ndarray, tol: float,
                     Jscale: float = 1.0) -> list:
    """Charge-pair positions with |V| < tol * J, sorted by separation."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    hits = [(l1, l2) for k, (l1, l2) in enumerate(basis.pairs)
            if abs(V[k]) < tol * Jscale]
    return sorted(hits, key=lambda p: (p[1] - p[0], p[0]))


def reconstruct_observables(state0: np.ndarray, state_t: np.ndarray,
                            basis: PairBasis):
    """(q, eps) profiles of the first-order string wavefunction.

    Assembles |psi> = |string> + (|psi1(t)> - |psi1(0)>) in the full spin
    basis, renormalizes (the first-order expression is not norm-preserving),
    and evaluates the standard observables.
    """
    from . import evolve as ev

    config = model.initial_configuration("string", basis.L, basis.i0)
    psi = ev.prepare_state(config)
    delta = state_t - state0
    for k, (l1, l2) in enumerate(basis.pairs):
        if delta[k] != 0:
            idx = pair_configuration(basis, l1, l2).basis_index()
            psi[idx] += delta[k]
    psi /= np.linalg.norm(psi)
    return ev.charge_density(psi, config), ev.electric_field(psi)
