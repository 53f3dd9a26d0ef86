"""stringplots: publication-style figures from stringsim run artifacts.

Consumes only the CSV/JSON files a run directory contains (qmap.csv,
emap.csv, twobody.csv, thermal.csv, fits.json, manifest.json); every
overlay is computed from manifest parameters, never hard-coded.
"""

from .io import SchemaError, read_manifest, read_map, read_thermal, read_twobody
from .render import FigureRecipe, render, render_run

__version__ = "0.1.0"

__all__ = ["SchemaError", "read_manifest", "read_map", "read_thermal",
           "read_twobody", "FigureRecipe", "render", "render_run", "__version__"]
