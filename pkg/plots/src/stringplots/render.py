"""Deterministic figure rendering for run directories.

Heatmaps put time on the vertical axis increasing upward and centered site
labels horizontally.  All annotation geometry (light cones, breathing
arrows, static-charge bars, virtual-region boundaries) is computed from the
manifest parameters of the run being drawn.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, read_fits, read_manifest, read_map, read_thermal, \
    read_twobody

# frozen ids and no timestamps make SVG output byte-reproducible
matplotlib.rcParams["svg.hashsalt"] = "stringplots"

DPI = 150
PANELS = ("qmap", "emap", "potential", "thermal")


@dataclass
class FigureRecipe:
    """What to draw from one run directory and where to put it."""

    run_dir: str
    out_dir: str
    panels: tuple = PANELS
    formats: tuple = ("png", "svg")
    prefix: str = field(default=None)

    def __post_init__(self):
        unknown = [p for p in self.panels if p not in PANELS]
        if unknown:
            raise ValueError(f"unknown panels {unknown}; choose from {PANELS}")
        if self.prefix is None:
            self.prefix = os.path.basename(os.path.normpath(self.run_dir))


def _save(fig, out_dir, name, formats):
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for ext in formats:
        path = os.path.join(out_dir, f"{name}.{ext}")
        meta = {"Date": None} if ext == "svg" else {}
        fig.savefig(path, dpi=DPI, metadata=meta)
        paths.append(path)
    plt.close(fig)
    return paths


def _heat_axes(ax, times, labels):
    ax.set_xlabel("bond / site")
    ax.set_ylabel("time  (1/J)")
    ax.set_xticks(labels[:: max(1, len(labels) // 8)])


def _extent(times, labels):
    dl = 1.0
    dt = times[1] - times[0] if len(times) > 1 else 1.0
    return [labels[0] - dl / 2, labels[-1] + dl / 2,
            times[0] - dt / 2, times[-1] + dt / 2]


def _overlay_charge(ax, params, times):
    g = params["g_over_J"]
    h = params["h_over_J"]
    t = np.asarray(times, dtype=float)
    if h == 0 and g > 0:
        for sign in (+1, -1):
            ax.plot(sign * 2 * g * t, t, color="w", lw=1.0, ls="--")
    elif h > 0:
        amp = 2 * g / h
        period = np.pi / h
        ax.annotate("", xy=(amp, 0.0), xytext=(-amp, 0.0),
                    arrowprops=dict(arrowstyle="<->", color="w", lw=1.2))
        if period < t[-1]:
            ax.annotate("", xy=(0.0, period), xytext=(0.0, 0.0),
                        arrowprops=dict(arrowstyle="<->", color="w", lw=1.2))


def _overlay_string(ax, params, labels):
    L = params["L"]
    i0 = -(L - 1) // 2
    # static charges at the outermost reported bonds
    for edge in (labels[0], labels[-1]):
        ax.axvline(edge, color="gold", lw=3.0, alpha=0.9)
    # dashed boundaries of the virtually-extended region
    for x in (i0 - 0.5, i0 + L - 0.5):
        ax.axvline(x, color="w", lw=0.8, ls=":")


def _panel_qmap(run_dir, params):
    times, labels, vals, _ = read_map(os.path.join(run_dir, "qmap.csv"),
                                      "bond", "q")
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    im = ax.imshow(vals, origin="lower", aspect="auto", cmap="magma",
                   vmin=0.0, vmax=1.0, extent=_extent(times, labels))
    fig.colorbar(im, ax=ax, label="q")
    if params["environment"] == "charge":
        _overlay_charge(ax, params, times)
    elif params["environment"] == "string":
        _overlay_string(ax, params, labels)
    _heat_axes(ax, times, labels)
    ax.set_title(f"charge density  g/J={params['g_over_J']}, "
                 f"h/J={params['h_over_J']}")
    fig.tight_layout()
    return fig


def _panel_emap(run_dir, params):
    times, labels, vals, _ = read_map(os.path.join(run_dir, "emap.csv"),
                                      "site", "eps")
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    im = ax.imshow(vals, origin="lower", aspect="auto", cmap="RdBu_r",
                   vmin=-1.0, vmax=1.0, extent=_extent(times, labels))
    fig.colorbar(im, ax=ax, label="eps")
    if params["environment"] == "string":
        _overlay_string(ax, params, labels)
    _heat_axes(ax, times, labels)
    ax.set_title(f"electric field  g/J={params['g_over_J']}, "
                 f"h/J={params['h_over_J']}")
    fig.tight_layout()
    return fig


def _panel_potential(run_dir, params):
    l1, l2, V, resonant = read_twobody(os.path.join(run_dir, "twobody.csv"))
    fig, ax = plt.subplots(figsize=(4.0, 3.6))
    vmax = np.abs(V).max()
    sc = ax.scatter(l1, l2, c=V, cmap="RdBu_r", vmin=-vmax, vmax=vmax,
                    marker="s", s=55)
    if resonant.any():
        ax.scatter(l1[resonant], l2[resonant], marker="*", s=90,
                   facecolor="k", edgecolor="w", linewidth=0.4)
    fig.colorbar(sc, ax=ax, label="V / J")
    ax.set_xlabel("l1")
    ax.set_ylabel("l2")
    ax.set_title(f"pair potential  h/J={params['h_over_J']}")
    ax.set_aspect("equal")
    fig.tight_layout()
    return fig


def _panel_thermal(run_dir, params):
    sites, eps_th, eps_ev = read_thermal(os.path.join(run_dir, "thermal.csv"))
    fits = read_fits(run_dir)
    T = fits.get("thermal", {}).get("temperature")
    fig, ax = plt.subplots(figsize=(4.2, 3.0))
    ax.plot(sites, eps_ev, "o-", label=f"evolved (Jt={params['t_max']})")
    label = "Gibbs" if T is None else f"Gibbs (T={T:.2f} J)"
    ax.plot(sites, eps_th, "s--", label=label)
    ax.set_xlabel("site")
    ax.set_ylabel("eps")
    ax.set_ylim(-1.05, 1.05)
    ax.legend(frameon=False, fontsize=8)
    ax.set_title(f"thermal baseline  h/J={params['h_over_J']}")
    fig.tight_layout()
    return fig


_PANEL_FNS = {"qmap": _panel_qmap, "emap": _panel_emap,
              "potential": _panel_potential, "thermal": _panel_thermal}


def render(recipe: FigureRecipe) -> list:
    """Draw every requested panel whose input files exist; returns file paths."""
    manifest = read_manifest(recipe.run_dir)
    params = manifest["parameters"]
    out = []
    for panel in recipe.panels:
        src = {"qmap": "qmap.csv", "emap": "emap.csv",
               "potential": "twobody.csv", "thermal": "thermal.csv"}[panel]
        if panel not in ("qmap", "emap") and \
                not os.path.exists(os.path.join(recipe.run_dir, src)):
            continue  # optional artifact not produced by this run
        fig = _PANEL_FNS[panel](recipe.run_dir, params)
        out += _save(fig, recipe.out_dir, f"{recipe.prefix}_{panel}",
                     recipe.formats)
    if not out:
        raise SchemaError(f"{recipe.run_dir}: no renderable artifacts found")
    return out


def render_run(run_dir: str, out_dir: str, formats=("png", "svg")) -> list:
    """Render the default panel set for one run directory."""
    return render(FigureRecipe(run_dir, out_dir, formats=tuple(formats)))
