"""Renderers for the three figure kinds: wells | crossing | dephasing."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "fluxfig"

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("wells", "crossing", "dephasing")


class MissingColumnError(ValueError):
    """A required column is absent from an input CSV."""


@dataclass
class FigureSpec:
    kind: str
    inputs: list[str]
    output: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choices: {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


@dataclass
class Table:
    path: str
    columns: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def col(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise MissingColumnError(
                f"column '{name}' not present in {self.path}; "
                f"available: {', '.join(self.columns)}")
        return self.columns[name]


def read_table(path: str) -> Table:
    meta: dict = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("# ")
                if "=" in body:
                    key, _, value = body.partition("=")
                    key, value = key.strip(), value.strip()
                    if key == "config":
                        try:
                            meta.update(json.loads(value))
                        except json.JSONDecodeError:
                            meta[key] = value
                    else:
                        try:
                            meta[key] = float(value)
                        except ValueError:
                            meta[key] = value
                continue
            if header is None:
                header = line.split(",")
            else:
                rows.append([float(v) for v in line.split(",")])
    if header is None or not rows:
        raise ValueError(f"no data rows in {path}")
    data = np.array(rows)
    return Table(path, {name: data[:, k] for k, name in enumerate(header)}, meta)


def _save(fig, output: str) -> list[str]:
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    paths = []
    fig.savefig(out, dpi=160)
    paths.append(str(out))
    svg = out.with_suffix(".svg")
    fig.savefig(svg, metadata={"Date": None})
    paths.append(str(svg))
    plt.close(fig)
    return paths


def _render_wells(spec: FigureSpec) -> dict:
    tables = [read_table(p) for p in spec.inputs]
    fig, axes = plt.subplots(len(tables), 1, figsize=(6.0, 3.0 * len(tables)),
                             sharex=True)
    axes = np.atleast_1d(axes)
    for ax, table in zip(axes, tables):
        phi = table.col("phi")
        u = table.col("potential_ghz")
        ax.plot(phi, u, lw=0.8, color="tab:blue")
        umin, umax = float(u.min()), float(table.meta.get("u_barrier_ghz", u.max()))
        scale = 0.35 * (umax - umin)
        for name, color in (("psi0", "tab:orange"), ("psi1", "tab:green")):
            dens = table.col(name) ** 2
            offset = float(table.meta.get(f"e{name[-1]}_ghz", umin))
            ax.plot(phi, offset + scale * dens / dens.max(), lw=2.0, color=color,
                    label=f"|{name[-1]}>")
        phi_x = table.meta.get("params", {}).get("phi_x") if isinstance(
            table.meta.get("params"), dict) else None
        ax.set_ylim(umin - 0.1 * (umax - umin), umax + 0.7 * (umax - umin))
        ax.set_ylabel("energy (GHz)")
        if phi_x is not None:
            ax.set_title(f"bias flux {phi_x:g}", fontsize=9)
        ax.legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("flux (Phi_0)")
    center = np.median(tables[0].col("phi"))
    axes[-1].set_xlim(center - 0.7, center + 0.7)
    fig.tight_layout()
    return {"outputs": _save(fig, spec.output)}


def _render_crossing(spec: FigureSpec) -> dict:
    table = read_table(spec.inputs[0])
    phi_x = table.col("phi_x")
    i0, i1 = table.meta.get("target_indices", [0, 1])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(phi_x, table.col(f"e{i0}"), color="tab:blue", label=f"level {i0}")
    ax.plot(phi_x, table.col(f"e{i1}"), color="tab:red", label=f"level {i1}")
    dashed = ("e_target0_dephased", "e_target1_dephased")
    if all(name in table.columns for name in dashed):
        ax.plot(phi_x, table.col(dashed[0]), "--", color="tab:blue",
                label=f"level {i0}, dephased")
        ax.plot(phi_x, table.col(dashed[1]), "--", color="tab:red",
                label=f"level {i1}, dephased")
    ax.set_xlabel("bias flux (Phi_0)")
    ax.set_ylabel("energy (GHz)")
    ax.legend(fontsize=8)
    if "e_ground_dephased" in table.columns and "e0" in table.columns:
        inset = ax.inset_axes([0.4, 0.12, 0.27, 0.3])
        inset.plot(phi_x, table.col("e0"), color="tab:gray")
        inset.plot(phi_x, table.col("e_ground_dephased"), "--", color="tab:gray")
        inset.set_title("ground level", fontsize=7)
        inset.tick_params(labelsize=6)
    fig.tight_layout()
    return {"outputs": _save(fig, spec.output)}


def _render_dephasing(spec: FigureSpec) -> dict:
    table = read_table(spec.inputs[0])
    x = table.col("gamma_over_sigma_ref")
    irel = np.maximum(table.col("i_rel_0"), table.col("i_rel_1"))
    gap = np.abs(table.col("gap_rel_diff"))
    in_zone = (irel <= 1.0) & (gap <= 1e-3)
    zone = (float(x[in_zone].min()), float(x[in_zone].max())) if in_zone.any() else None

    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.0, 5.6), sharex=True)
    top.loglog(x, table.col("i_rel_0"), "o-", ms=3, label="state 0")
    top.loglog(x, table.col("i_rel_1"), "s-", ms=3, label="state 1")
    top.axhline(1.0, color="gray", lw=0.8)
    top.set_ylabel("relative coherence")
    top.legend(fontsize=8)

    bottom.loglog(x, np.maximum(gap, 1e-16), "o-", ms=3, color="tab:purple")
    bottom.axhline(1e-3, color="gray", lw=0.8)
    bottom.set_ylabel("1 - dE/dE0")
    bottom.set_xlabel("correlation length / reference width")

    for ax in (top, bottom):
        if zone is not None:
            ax.axvspan(zone[0], zone[1], color="0.85", zorder=0)
        if "marker" in table.columns:
            marked = table.col("marker") == 1.0
            if marked.any():
                ys = (irel if ax is top else np.maximum(gap, 1e-16))[marked]
                ax.plot(x[marked], ys, "o", ms=9, mfc="gold", mec="black", zorder=5)
    fig.tight_layout()
    return {"outputs": _save(fig, spec.output), "zone": zone}


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns output paths plus kind-specific metadata."""
    if spec.kind == "wells":
        return _render_wells(spec)
    if spec.kind == "crossing":
        return _render_crossing(spec)
    return _render_dephasing(spec)
