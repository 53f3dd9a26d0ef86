"""State-level correspondence between the gauge theory and the spin chain.

Gauge side: fermionic charges on matter sites, two-valued electric fields on
links, constrained by the local Gauss law.  Spin side: one spin per link,
n_l = (1 - sz_l)/2, with charges appearing as kinks between anti-aligned
neighboring spins.  The operator-level unitary behind the mapping is not
implemented; its observable consequence (equality of gauge-sector and spin
spectra) is exposed through :func:`build_lgt_hamiltonian` and
:func:`dual_ising_spec` and checked by the test suite.

Link indexing: a chain of N matter sites 0..N-1 has N+1 links 0..N, where
link k sits between sites k-1 and k.  Links 0 and N are boundary links.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GaussViolation, InvalidProfile, SizeLimit
from .model import HamiltonianSpec, SpinConfiguration

N_SITES_ENUM_MAX = 14
N_SITES_DENSE_MAX = 12


@dataclass(frozen=True)
class GaugeConfig:
    """Gauge-invariant classical configuration: link fields plus derived charges."""

    occupations: tuple  # 0/1 per matter site
    links: tuple        # 0/1 per link, one more than sites

    def __post_init__(self):
        if len(self.links) != len(self.occupations) + 1:
            raise ValueError("need exactly one more link than matter sites")
        if any(v not in (0, 1) for v in self.links + self.occupations):
            raise ValueError("links and occupations must be 0/1")

    @property
    def n_sites(self) -> int:
        return len(self.occupations)

    def gauss_valid(self) -> bool:
        """True iff (-1)^(n_{l-1} + n_l + occ_l) = +1 at every site."""
        return all(
            (self.links[l] + self.links[l + 1] + self.occupations[l]) % 2 == 0
            for l in range(self.n_sites)
        )

    def charge_count(self) -> int:
        return sum(self.occupations)

    def to_json_dict(self) -> dict:
        return {"occupations": list(self.occupations), "links": list(self.links)}

    @classmethod
    def from_json_dict(cls, d: dict) -> "GaugeConfig":
        return cls(tuple(d["occupations"]), tuple(d["links"]))


@dataclass(frozen=True)
class LgtParams:
    """Gauge-theory couplings: minimal coupling g, mass m, electric cost kappa,
    and field self-interactions v_r for r = 2, 3, ... (truncated)."""

    g: float
    m: float
    kappa: float
    v_r: tuple

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("mass must be non-negative")

    def coupling_at_range(self, r: int) -> float:
        """Dual spin coupling J_r implied by these parameters (0 beyond truncation)."""
        if r == 1:
            return self.m / 2.0
        if 2 <= r < 2 + len(self.v_r):
            return self.v_r[r - 2] / 4.0
        return 0.0

    @property
    def dual_field(self) -> float:
        """Uniform longitudinal field h of the dual spin chain."""
        return (self.kappa - sum(self.v_r)) / 2.0


def _spin_window(spins, pad: int = 2) -> np.ndarray:
    """Expand a SpinConfiguration (or plain +-1 sequence) to an explicit window."""
    if isinstance(spins, SpinConfiguration):
        left = spins.left.window(pad)[::-1]
        right = spins.right.window(pad)
        return np.concatenate([left, np.asarray(spins.dynamical), right])
    return np.asarray(spins, dtype=int)


def spins_to_gauge(spins, pad: int = 2) -> GaugeConfig:
    """Map a spin configuration to its gauge-invariant dual.

    Each spin becomes a link (n = (1-s)/2); a charge sits wherever two
    neighboring spins anti-align.  For a SpinConfiguration, ``pad`` static
    spins per side are expanded so edge kinks are captured.
    """
    s = _spin_window(spins, pad)
    links = tuple((1 - s) // 2)
    occ = tuple((links[l] + links[l + 1]) % 2 for l in range(len(links) - 1))
    return GaugeConfig(occ, links)


def gauge_to_spins(gauge: GaugeConfig, leftmost_spin: int = +1) -> tuple:
    """Reconstruct the dual spin chain by integrating kinks from the left.

    The two choices of ``leftmost_spin`` give globally flipped chains; the
    choice matching the stored boundary link reproduces ``gauge`` exactly
    under :func:`spins_to_gauge`.
    """
    if leftmost_spin not in (-1, 1):
        raise ValueError("leftmost_spin must be +-1")
    if not gauge.gauss_valid():
        raise GaussViolation("input configuration violates the Gauss law")
    spins = [leftmost_spin]
    for occ in gauge.occupations:
        spins.append(-spins[-1] if occ else spins[-1])
    return tuple(spins)


def enumerate_gauge_sector(n_sites: int, boundary_links=(0, 0)) -> list:
    """All gauge-invariant configurations of n_sites matter sites at fixed boundary.

    The interior links are free; occupations follow from the Gauss law, so
    exactly 2^(n_sites - 1) states are returned.
    """
    if n_sites > N_SITES_ENUM_MAX:
        raise SizeLimit(f"n_sites={n_sites} exceeds enumeration cap {N_SITES_ENUM_MAX}")
    if n_sites < 1:
        raise ValueError("need at least one matter site")
    bl, br = boundary_links
    n_free = n_sites - 1
    out = []
    for bits in range(1 << n_free):
        links = (bl,) + tuple((bits >> k) & 1 for k in range(n_free)) + (br,)
        occ = tuple((links[l] + links[l + 1]) % 2 for l in range(n_sites))
        out.append(GaugeConfig(occ, links))
    return out


def parameter_dictionary(J_profile, h: float) -> LgtParams:
    """Gauge-theory parameters dual to an Ising profile J_1, J_2, ... and field h.

    m = 2 J_1 and v_r = 4 J_r.  The electric cost is kappa = 2h + sum_r v_r,
    which is the combination that makes the gauge-sector spectrum coincide
    with the spin-chain spectrum (see the duality tests).
    """
    J_profile = [float(x) for x in J_profile]
    if not J_profile or J_profile[0] <= 0:
        raise InvalidProfile("J_1 must be positive")
    J1, rest = J_profile[0], J_profile[1:]
    v_r = tuple(4.0 * Jr for Jr in rest)
    return LgtParams(g=0.0, m=2.0 * J1, kappa=2.0 * h + sum(v_r), v_r=v_r)


def truncate_profile(J: float, beta: float, rtol: float = 1e-12) -> list:
    """Geometric profile J_r = J exp(-beta(r-1)) truncated once J_r < rtol*J_1."""
    out = []
    r = 1
    while True:
        Jr = J * np.exp(-beta * (r - 1))
        if r > 1 and Jr < rtol * out[0]:
            break
        out.append(Jr)
        r += 1
        if r > 10_000:
            break
    return out


def lgt_diagonal_energy(params: LgtParams, config: GaugeConfig) -> float:
    """Classical gauge-theory energy: mass + electric cost + self-interaction."""
    occ = np.asarray(config.occupations)
    n = np.asarray(config.links)
    E = params.m * occ.sum() + params.kappa * n.sum()
    for ridx, v in enumerate(params.v_r):
        r = ridx + 2
        if r < len(n):
            E -= v * float(n[:-r] @ n[r:])
    return float(E)


def build_lgt_hamiltonian(params: LgtParams, sector: list, g: float = None) -> np.ndarray:
    """Dense Hermitian gauge-sector Hamiltonian in the constrained link basis.

    Diagonal: mass, electric and self-interaction energies.  Off-diagonal:
    the minimal coupling flips one interior link with amplitude -g, which in
    the constrained basis realizes charge hops and pair creation/annihilation.
    """
    if not sector:
        raise ValueError("empty sector")
    n_sites = sector[0].n_sites
    if n_sites > N_SITES_DENSE_MAX:
        raise SizeLimit(f"n_sites={n_sites} exceeds dense cap {N_SITES_DENSE_MAX}")
    if g is None:
        g = params.g
    dim = len(sector)
    index = {cfg.links: a for a, cfg in enumerate(sector)}
    H = np.zeros((dim, dim))
    for a, cfg in enumerate(sector):
        H[a, a] = lgt_diagonal_energy(params, cfg)
        for k in range(1, n_sites):  # interior links only
            flipped = list(cfg.links)
            flipped[k] ^= 1
            b = index.get(tuple(flipped))
            if b is not None:
                H[a, b] -= g
    if not np.allclose(H, H.T):
        raise AssertionError("gauge Hamiltonian must be symmetric")
    return H


def dual_ising_spec(params: LgtParams, boundary_links, n_sites: int,
                    g: float = None) -> HamiltonianSpec:
    """Spin-chain spec whose spectrum matches the gauge sector up to a constant.

    The interior links become L = n_sites - 1 dynamical spins; the two fixed
    boundary links act as static spins absorbed into delta_h.
    """
    L = n_sites - 1
    Jmat = np.zeros((L, L))
    for i in range(L):
        for j in range(i + 1, L):
            Jmat[i, j] = Jmat[j, i] = params.coupling_at_range(j - i)
    bl, br = boundary_links
    s_left, s_right = 1 - 2 * bl, 1 - 2 * br
    # Static boundary spins absorbed as fields, plus a compensation for the
    # distance-r partners each link near an edge is missing in the finite
    # electrostatic sum (the bulk field already accounts for two per range).
    dh = np.empty(L)
    for k in range(1, L + 1):
        val = (params.coupling_at_range(k) * s_left
               + params.coupling_at_range(n_sites - k) * s_right)
        for ridx in range(len(params.v_r)):
            r = ridx + 2
            present = (k - r >= 0) + (k + r <= n_sites)
            val += params.coupling_at_range(r) * (2 - present)
        dh[k - 1] = val
    return HamiltonianSpec(L=L, J=Jmat, g=params.g if g is None else g,
                           h=params.dual_field, delta_h=dh, i0=1)
