"""Render the fidelity-vs-N chart from a sweep CSV.

Input is the sweep schema emitted by the embezzle CLI
(``family,N,n,target,fidelity,...``); each (family, target) pair becomes
one series, colored by family and marked by target.  An optional fit
JSON (the embezzle ``fit`` report) overlays the fitted
``a + b/N + c/N^2`` curve per series.  Inputs are read-only and the
series inventory is deterministic: legend entries are sorted by
(family, target).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

REQUIRED_COLUMNS = ("family", "N", "target", "fidelity")

DEFAULT_MARKERS = {"phi+": "+", "phi*": "*", "phio": "o"}
DEFAULT_COLORS = {"gh": "tab:blue", "fdh": "tab:red"}


class PlotDataError(ValueError):
    """The CSV/JSON inputs cannot be rendered."""


@dataclass(frozen=True)
class PlotSpec:
    """What to read, where to render, and how series are styled."""

    input_csv: str
    output_image: str
    fit_json: str | None = None
    markers: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_MARKERS))
    colors: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COLORS))


@dataclass(frozen=True)
class Series:
    family: str
    target: str
    Ns: tuple[float, ...]
    fidelities: tuple[float, ...]
    marker: str
    color: str

    @property
    def label(self) -> str:
        return f"{self.family} {self.target}"


def load_series(spec: PlotSpec) -> list[Series]:
    """Parse the CSV into styled series, validating the schema and maps."""
    try:
        with open(spec.input_csv, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [col for col in REQUIRED_COLUMNS if col not in header]
            if missing:
                raise PlotDataError(f"missing columns: {', '.join(missing)}")
            rows = list(reader)
    except OSError as exc:
        raise PlotDataError(f"cannot read {spec.input_csv!r}: {exc}") from exc
    if not rows:
        raise PlotDataError("no data rows")
    grouped: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for row in rows:
        family, target = row["family"], row["target"]
        if family not in spec.colors:
            raise PlotDataError(f"no color mapping for family {family!r}")
        if target not in spec.markers:
            raise PlotDataError(f"no marker mapping for target {target!r}")
        try:
            grouped.setdefault((family, target), []).append(
                (float(row["N"]), float(row["fidelity"]))
            )
        except (TypeError, ValueError) as exc:
            raise PlotDataError(f"malformed row {row!r}: {exc}") from exc
    series = []
    for (family, target) in sorted(grouped):
        points = sorted(grouped[(family, target)])
        series.append(
            Series(
                family=family,
                target=target,
                Ns=tuple(N for N, _ in points),
                fidelities=tuple(F for _, F in points),
                marker=spec.markers[target],
                color=spec.colors[family],
            )
        )
    return series


def load_fits(spec: PlotSpec) -> dict[tuple[str, str], tuple[float, float, float]]:
    """(family, target) -> (a, b, c) from the fit report, if one was given."""
    if spec.fit_json is None:
        return {}
    try:
        payload = json.loads(Path(spec.fit_json).read_text())
        return {
            (entry["family"], entry["target"]): (
                float(entry["model"]["a"]),
                float(entry["model"]["b"]),
                float(entry["model"]["c"]),
            )
            for entry in payload["fits"]
        }
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise PlotDataError(f"cannot read fit json {spec.fit_json!r}: {exc}") from exc


def render(spec: PlotSpec) -> list[Series]:
    """Write the chart and return the series inventory that was drawn."""
    series = load_series(spec)
    fits = load_fits(spec)
    fig, ax = plt.subplots(figsize=(7.2, 4.8))
    for s in series:
        ax.plot(
            s.Ns,
            s.fidelities,
            linestyle="none",
            marker=s.marker,
            color=s.color,
            label=s.label,
        )
        model = fits.get((s.family, s.target))
        if model is not None:
            a, b, c = model
            xs = np.linspace(min(s.Ns), max(s.Ns), 200)
            ax.plot(xs, a + b / xs + c / xs**2, color=s.color, linewidth=0.8, alpha=0.7)
    low = min(min(s.fidelities) for s in series)
    ax.set_ylim(low - 0.01, 1.0)
    ax.set_xlabel("N = log2 n")
    ax.set_ylabel("optimal fidelity")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(True, alpha=0.25)
    fig.tight_layout()
    try:
        fig.savefig(spec.output_image)
    except (OSError, ValueError) as exc:
        raise PlotDataError(f"cannot write {spec.output_image!r}: {exc}") from exc
    finally:
        plt.close(fig)
    return series
