"""stringsim: confined-charge and string-breaking dynamics in a long-range Ising chain.

A classical simulation toolkit for the (1+1)D Z2 lattice gauge theory dual
of a long-range transverse-field Ising chain: duality mapping, virtual
static environments, Krylov quench dynamics, a perturbative two-charge
model, canonical thermal baselines, and trapped-ion coupling synthesis.
"""

from . import couplings, duality, evolve, model, thermal, twobody
from .errors import StringSimError
from .model import (HamiltonianSpec, SpinConfiguration, initial_configuration,
                    scenario_spec)

__version__ = "0.1.0"

__all__ = [
    "couplings", "duality", "evolve", "model", "thermal", "twobody",
    "StringSimError", "HamiltonianSpec", "SpinConfiguration",
    "initial_configuration", "scenario_spec", "__version__",
]
