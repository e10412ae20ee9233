"""Static contour and event-map figures."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

from .geo import project_arrays  # noqa: E402

FIELD_LABELS = {
    "displacement": ("|w| [m]", "viridis"),
    "von_mises": ("von Mises stress [Pa]", "magma"),
}


def _figure_for(width_m: float, height_m: float, base: float = 8.0):
    """Figure whose axes box follows the domain aspect ratio."""
    aspect = height_m / width_m
    fig = plt.figure(figsize=(base, base * aspect))
    ax = fig.add_axes([0.0, 0.0, 1.0, 1.0])
    ax.set_axis_off()
    return fig, ax


def read_boundary(path) -> list[np.ndarray]:
    """Lon/lat rings from a GeoJSON file (Polygon, MultiPolygon or LineString geometries)."""
    doc = json.loads(Path(path).read_text())
    geoms = []
    features = doc.get("features", [doc]) if isinstance(doc, dict) else []
    for feat in features:
        geom = feat.get("geometry", feat)
        kind, coords = geom.get("type"), geom.get("coordinates", [])
        if kind == "LineString":
            geoms.append(np.asarray(coords, dtype=float))
        elif kind == "Polygon":
            geoms.extend(np.asarray(r, dtype=float) for r in coords)
        elif kind == "MultiPolygon":
            geoms.extend(np.asarray(r, dtype=float) for poly in coords for r in poly)
    return geoms


def _overlay(ax, result, boundary) -> None:
    d = result.domain
    x0, y0 = d.origin.x + d.buffer_m, d.origin.y + d.buffer_m
    ax.plot(
        np.array([x0, x0 + d.interior_width_m, x0 + d.interior_width_m, x0, x0]) / 1e3,
        np.array([y0, y0, y0 + d.interior_height_m, y0 + d.interior_height_m, y0]) / 1e3,
        color="white", lw=0.8, ls="--",
    )
    if boundary is not None:
        for ring in read_boundary(boundary):
            x, y = project_arrays(ring[:, 0], ring[:, 1], d.ref)
            ax.plot(x / 1e3, y / 1e3, color="black", lw=0.8)


def contour_plot(result, kind: str, path, boundary=None, dpi: int = 100) -> Path:
    """Filled contours of displacement (nodes) or von Mises stress (element centres)."""
    mesh = result.mesh
    label, cmap = FIELD_LABELS[kind]
    if kind == "displacement":
        X, Y = np.meshgrid(mesh.x_coords, mesh.y_coords)
        Z = np.abs(result.field.w)
    else:
        X, Y = mesh.element_centres[..., 0], mesh.element_centres[..., 1]
        Z = result.stress.von_mises
    fig, ax = _figure_for(mesh.width, mesh.height)
    levels = 20 if np.ptp(Z) > 0 else 1
    cs = ax.contourf(X / 1e3, Y / 1e3, Z, levels=levels, cmap=cmap)
    ax.set_xlim(mesh.origin.x / 1e3, (mesh.origin.x + mesh.width) / 1e3)
    ax.set_ylim(mesh.origin.y / 1e3, (mesh.origin.y + mesh.height) / 1e3)
    _overlay(ax, result, boundary)
    cax = ax.inset_axes([0.03, 0.09, 0.3, 0.03])
    fig.colorbar(cs, cax=cax, orientation="horizontal", label=label, ticks=MaxNLocator(4))
    path = Path(path)
    fig.savefig(path, dpi=dpi, metadata={"Description": f"config_hash={result.config_hash} field={kind}"})
    plt.close(fig)
    return path


def event_map(result, path, boundary=None, dpi: int = 100) -> Path:
    """Force locations over the domain, marker area scaled by magnitude."""
    mesh = result.mesh
    fig, ax = _figure_for(mesh.width, mesh.height)
    ax.set_facecolor("#f4f1ea")
    ax.set_xlim(mesh.origin.x / 1e3, (mesh.origin.x + mesh.width) / 1e3)
    ax.set_ylim(mesh.origin.y / 1e3, (mesh.origin.y + mesh.height) / 1e3)
    _overlay(ax, result, boundary)
    if result.forces:
        types = sorted({f.event_type or "configured" for f in result.forces})
        colours = plt.get_cmap("tab10")
        mags = np.array([f.magnitude for f in result.forces])
        scale = 80.0 / mags.max()
        for i, t in enumerate(types):
            sel = [f for f in result.forces if (f.event_type or "configured") == t]
            ax.scatter(
                [f.location.x / 1e3 for f in sel], [f.location.y / 1e3 for f in sel],
                s=[max(f.magnitude * scale, 2.0) for f in sel], color=colours(i % 10),
                alpha=0.6, label=t, edgecolors="none",
            )
        ax.legend(loc="upper left", fontsize="small", frameon=True)
    path = Path(path)
    fig.savefig(path, dpi=dpi, metadata={"Description": f"config_hash={result.config_hash} field=forces"})
    plt.close(fig)
    return path
