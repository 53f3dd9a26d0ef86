"""Long-range Ising chain with virtual static environments.

The simulated Hamiltonian is

    H = - sum_{i<j} J_{i,j} sz_i sz_j - sum_i (h + dh_i) sz_i - sum_i g sx_i

acting on L dynamical spins.  Semi-infinite static spin environments are
absorbed exactly into the site-resolved longitudinal fields dh_i.  All
energies are in units of the nearest-neighbor coupling unless a J scale is
passed explicitly; times elsewhere are reported as J*t.

Basis convention: z-basis states are indexed by integers whose bit k gives
the state of dynamical site k (0-based from the left), with bit 0 meaning
spin up (sz = +1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SizeLimit

L_MAX = 24


def exp_profile(J: float, beta: float, L: int) -> np.ndarray:
    """Translationally invariant coupling matrix J_{i,j} = J exp(-beta(|i-j|-1))."""
    r = np.abs(np.subtract.outer(np.arange(L), np.arange(L)))
    with np.errstate(over="ignore"):
        M = J * np.exp(-beta * (r - 1.0))
    np.fill_diagonal(M, 0.0)
    return M


def coupling_at_range(J: float, beta: float, r) -> float:
    """J_r = J exp(-beta(r-1)) for the geometric profile."""
    return J * np.exp(-beta * (np.asarray(r, dtype=float) - 1.0))


def tail_sum(J: float, beta: float, a) -> float:
    """Closed-form geometric tail sum_{r>=a} J exp(-beta(r-1))."""
    a = np.asarray(a, dtype=float)
    return J * np.exp(-beta * (a - 1.0)) / (1.0 - np.exp(-beta))


def virtual_field_charge(J: float, beta: float, L: int) -> np.ndarray:
    """Site fields emulating a static vacuum on the left and a static string on the right.

    dh_i = sum_{r>=i} J_r - sum_{r>=L+1-i} J_r for internal sites i = 1..L.
    Antisymmetric under i -> L+1-i.
    """
    i = np.arange(1, L + 1)
    return tail_sum(J, beta, i) - tail_sum(J, beta, L + 1 - i)


def virtual_field_string(J: float, beta: float, L: int) -> np.ndarray:
    """Site fields emulating a pair of static charges just outside the chain.

    dh_i = -J_i + sum_{r>=i+1} J_r - J_{L+1-i} + sum_{r>=L+2-i} J_r.
    Symmetric under i -> L+1-i.
    """
    i = np.arange(1, L + 1)
    half = -coupling_at_range(J, beta, i) + tail_sum(J, beta, i + 1)
    # one tail per side; summing the mirrored halves keeps the profile
    # symmetric to the last bit
    return half + half[::-1]


@dataclass(frozen=True)
class Tail:
    """Semi-infinite static spin environment, described nearest-spin first.

    ``prefix`` holds the explicit spins closest to the dynamical region;
    beyond it every spin equals ``base``.
    """

    base: int
    prefix: tuple = ()

    def __post_init__(self):
        if self.base not in (-1, 1):
            raise ValueError("tail base spin must be +-1")
        if any(s not in (-1, 1) for s in self.prefix):
            raise ValueError("tail prefix spins must be +-1")

    def window(self, n: int) -> np.ndarray:
        """First n static spins, nearest the dynamical region first."""
        out = np.full(n, self.base, dtype=int)
        k = min(n, len(self.prefix))
        out[:k] = self.prefix[:k]
        return out


@dataclass(frozen=True)
class SpinConfiguration:
    """Classical z-basis state of the dynamical spins plus static environments."""

    dynamical: tuple
    left: Tail = Tail(+1)
    right: Tail = Tail(+1)
    i0: int = None  # leftmost dynamical site label; default -(L-1)//2

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.dynamical):
            raise ValueError("dynamical spins must be +-1")
        if self.i0 is None:
            object.__setattr__(self, "i0", -(len(self.dynamical) - 1) // 2)

    @property
    def L(self) -> int:
        return len(self.dynamical)

    def basis_index(self) -> int:
        """Index of this configuration in the 2^L z-basis (bit set = spin down)."""
        idx = 0
        for k, s in enumerate(self.dynamical):
            if s == -1:
                idx |= 1 << k
        return idx


def brute_force_virtual_field(left: Tail, right: Tail, J: float, beta: float,
                              L: int, cutoff: int = 200) -> np.ndarray:
    """Direct summation oracle for the virtual fields.

    dh_i = sum over static spins j of J_{|i-j|} s_j, truncated at ``cutoff``
    spins per side.  Converges geometrically in the cutoff.
    """
    if cutoff < 100:
        raise ValueError("cutoff must be >= 100")
    sl = left.window(cutoff)
    sr = right.window(cutoff)
    k = np.arange(cutoff)
    dh = np.empty(L)
    for n, i in enumerate(range(1, L + 1)):
        dh[n] = (coupling_at_range(J, beta, i + k) @ sl
                 + coupling_at_range(J, beta, L + 1 - i + k) @ sr)
    return dh


@dataclass(frozen=True)
class HamiltonianSpec:
    """Couplings and fields defining the spin Hamiltonian on L dynamical spins."""

    L: int
    J: np.ndarray
    g: float
    h: float
    delta_h: np.ndarray = None
    i0: int = None

    def __post_init__(self):
        if self.L > L_MAX:
            raise SizeLimit(f"L={self.L} exceeds the hard cap {L_MAX}")
        J = np.asarray(self.J, dtype=float)
        if J.shape != (self.L, self.L):
            raise ValueError("J must be an L x L matrix")
        if not np.allclose(J, J.T):
            raise ValueError("J must be symmetric")
        if np.any(np.diag(J) != 0.0):
            raise ValueError("J must have zero diagonal")
        object.__setattr__(self, "J", J)
        dh = np.zeros(self.L) if self.delta_h is None else np.asarray(self.delta_h, dtype=float)
        if dh.shape != (self.L,):
            raise ValueError("delta_h must have length L")
        object.__setattr__(self, "delta_h", dh)
        if self.i0 is None:
            object.__setattr__(self, "i0", -(self.L - 1) // 2)

    @property
    def sites(self) -> np.ndarray:
        """External (centered) labels of the dynamical sites."""
        return np.arange(self.i0, self.i0 + self.L)

    @property
    def fields(self) -> np.ndarray:
        """Total longitudinal field h + dh_i per site."""
        return self.h + self.delta_h


def site_signs(L: int) -> np.ndarray:
    """(2^L, L) array of sz values per basis state and site."""
    n = np.arange(1 << L)
    return 1 - 2 * ((n[:, None] >> np.arange(L)) & 1)


class IsingOperator:
    """Matrix-free sz-diagonal + uniform single-flip Hamiltonian.

    Stores the 2^L diagonal (ZZ and Z terms); the transverse term couples
    basis states differing in exactly one bit with amplitude -g.
    """

    def __init__(self, spec: HamiltonianSpec):
        self.spec = spec
        self.L = spec.L
        self.dim = 1 << spec.L
        self.g = spec.g
        n = np.arange(self.dim)
        diag = np.zeros(self.dim)
        s = [1.0 - 2.0 * ((n >> i) & 1) for i in range(spec.L)]
        hloc = spec.fields
        for i in range(spec.L):
            diag -= hloc[i] * s[i]
            for j in range(i + 1, spec.L):
                if spec.J[i, j] != 0.0:
                    diag -= spec.J[i, j] * (s[i] * s[j])
        self.diag = diag
        self._flips = [n ^ (1 << i) for i in range(spec.L)]

    @property
    def shape(self):
        return (self.dim, self.dim)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        out = self.diag * psi
        if self.g != 0.0:
            acc = psi[self._flips[0]].copy()
            for f in self._flips[1:]:
                acc += psi[f]
            out -= self.g * acc
        return out

    __matmul__ = apply
    matvec = apply

    def expectation(self, psi: np.ndarray) -> float:
        return float(np.real(np.vdot(psi, self.apply(psi))))

    def to_dense(self) -> np.ndarray:
        if self.L > 14:
            raise SizeLimit("dense matrix only supported for L <= 14")
        H = np.diag(self.diag)
        rows = np.arange(self.dim)
        for f in self._flips:
            H[rows, f] -= self.g
        return H


def build_hamiltonian(spec: HamiltonianSpec) -> IsingOperator:
    """Compile a HamiltonianSpec to a matrix-free Hermitian operator."""
    return IsingOperator(spec)


def classical_energy(config: SpinConfiguration, spec: HamiltonianSpec) -> float:
    """Diagonal energy <config|H_diag|config>, including the dh contributions."""
    if config.L != spec.L:
        raise ValueError("configuration length does not match spec")
    s = np.asarray(config.dynamical, dtype=float)
    return float(-0.5 * s @ spec.J @ s - spec.fields @ s)


# Scenario assembly -----------------------------------------------------------

ENVIRONMENTS = ("none", "charge", "string")


def environment_tails(environment: str):
    """Static tails (left, right) realizing a named virtual environment."""
    if environment == "none":
        return Tail(+1), Tail(+1)
    if environment == "charge":
        # vacuum on the left, excited string on the right
        return Tail(+1), Tail(-1)
    if environment == "string":
        # static charges sit just outside each edge of the physical region
        return Tail(+1, (-1,)), Tail(+1, (-1,))
    raise ValueError(f"unknown environment {environment!r}")


def environment_field(environment: str, J: float, beta: float, L: int) -> np.ndarray:
    """Closed-form dh profile for a named virtual environment."""
    if environment == "none":
        return np.zeros(L)
    if environment == "charge":
        return virtual_field_charge(J, beta, L)
    if environment == "string":
        return virtual_field_string(J, beta, L)
    raise ValueError(f"unknown environment {environment!r}")


def initial_configuration(environment: str, L: int, i0: int = None) -> SpinConfiguration:
    """Classical initial state matching a named environment.

    "charge": single kink at the center bond (up spins left of site 0, down
    from site 0 on).  "string": all dynamical spins down between the two
    static charges.  "none": the vacuum.
    """
    if i0 is None:
        i0 = -(L - 1) // 2
    left, right = environment_tails(environment)
    if environment == "charge":
        spins = tuple(+1 if site < 0 else -1 for site in range(i0, i0 + L))
    elif environment == "string":
        spins = (-1,) * L
    else:
        spins = (+1,) * L
    return SpinConfiguration(spins, left, right, i0)


def scenario_spec(L: int, beta: float, g_over_J: float, h_over_J: float,
                  environment: str = "string", J: float = 1.0,
                  i0: int = None) -> HamiltonianSpec:
    """HamiltonianSpec for the standard quench scenarios (energies in units of J)."""
    return HamiltonianSpec(
        L=L,
        J=exp_profile(J, beta, L),
        g=g_over_J * J,
        h=h_over_J * J,
        delta_h=environment_field(environment, J, beta, L),
        i0=i0,
    )
