"""Static figure emission (SVG, optionally PNG) from stored result files.

Figures are a pure function of the loaded results: anything plotted can be
re-emitted from the CSV/JSON on disk without re-running a simulation.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ConfigurationError, ResultsError  # noqa: E402

# Stable ids inside the SVG output so repeated emission is diffable.
plt.rcParams["svg.hashsalt"] = "darkcavity"

FIGURE_KINDS = ("pr_vs_n", "pr_vs_layers", "pr_vs_shell", "pr_vs_sigma", "pr_vs_lz", "dispersion")

_EXPECTED_RESULT_KIND = {
    "pr_vs_n": "size_sweep",
    "pr_vs_layers": "layer_sweep",
    "pr_vs_shell": "shell_sweep",
    "pr_vs_sigma": "disorder_sweep",
    "pr_vs_lz": "cavity_length_sweep",
    "dispersion": "dispersion",
}

_AXIS_LABEL = {
    "pr_vs_layers": "number of layers $N_z$",
    "pr_vs_sigma": r"$\sigma_e$ (eV)",
    "pr_vs_lz": "$L_z$ (nm)",
    "pr_vs_shell": r"shell $m_{max}$",
}


def _stat_arrays(summary):
    xs, means, stds = [], [], []
    for entry in summary["stats"]:
        if entry["mean"] is None:
            continue
        xs.append(entry["axis_value"])
        means.append(entry["mean"])
        stds.append(entry["std"])
    if not xs:
        raise ResultsError("no populated ensemble statistics to plot")
    return xs, means, stds


def _meta_by_axis(summary):
    return {entry["axis_value"]: entry for entry in summary["axis_meta"]}


def _mean_energy_from_manifest(loaded):
    manifest = loaded.get("manifest")
    if manifest:
        return manifest["resolved_plan"]["disorder"]["mean_energy"]
    return None


def emit_figure(loaded: dict, kind: str, path, png: bool = False) -> list:
    """Render one figure kind from ``load_results`` output; returns paths."""
    if kind not in FIGURE_KINDS:
        raise ConfigurationError(f"unknown figure kind {kind!r}; expected one of {FIGURE_KINDS}")
    summary = loaded["summary"]
    expected = _EXPECTED_RESULT_KIND[kind]
    if summary.get("kind") != expected:
        raise ConfigurationError(
            f"figure {kind!r} needs {expected!r} results, got {summary.get('kind')!r}"
        )

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if kind == "dispersion":
        _draw_dispersion(ax, fig, loaded, summary)
    elif kind == "pr_vs_n":
        _draw_pr_vs_n(ax, summary)
    elif kind == "pr_vs_shell":
        _draw_pr_vs_shell(ax, loaded, summary)
    else:
        xs, means, stds = _stat_arrays(summary)
        ax.errorbar(xs, means, yerr=stds, fmt="o-", capsize=3, color="tab:blue")
        ax.set_xlabel(_AXIS_LABEL[kind])
        ax.set_ylabel("dark-state PR")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()

    path = Path(path)
    paths = []
    svg_path = path if path.suffix == ".svg" else path.with_suffix(".svg")
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    paths.append(svg_path)
    if png:
        png_path = svg_path.with_suffix(".png")
        fig.savefig(png_path, format="png", dpi=200)
        paths.append(png_path)
    plt.close(fig)
    return paths


def _draw_pr_vs_n(ax, summary):
    meta = _meta_by_axis(summary)
    xs, means, stds = _stat_arrays(summary)
    n_molecules = [meta[v]["n_molecules"] for v in xs]
    ax.errorbar(n_molecules, means, yerr=stds, fmt="o", capsize=3, color="tab:blue")
    fit = summary.get("fit")
    if fit:
        lo, hi = min(n_molecules), max(n_molecules)
        ax.plot(
            [lo, hi],
            [fit["slope"] * lo + fit["intercept"], fit["slope"] * hi + fit["intercept"]],
            "k--",
            label=f"fit slope {fit['slope']:.4f}",
        )
        ax.legend(loc="upper left")
    ax.set_xlabel("number of molecules $N$")
    ax.set_ylabel("dark-state PR")


def _draw_pr_vs_shell(ax, loaded, summary):
    meta = _meta_by_axis(summary)
    xs, means, stds = _stat_arrays(summary)
    ax.errorbar(xs, means, yerr=stds, fmt="o-", capsize=3, color="tab:blue", zorder=3)
    ax.set_xlabel(_AXIS_LABEL["pr_vs_shell"])
    ax.set_ylabel("dark-state PR", color="tab:blue")
    ax2 = ax.twinx()
    for v in xs:
        ax2.plot(
            [v, v],
            [meta[v]["omega_shell_min"], meta[v]["omega_shell_max"]],
            color="tab:red",
            linewidth=4,
            alpha=0.7,
            solid_capstyle="butt",
        )
    mean_energy = _mean_energy_from_manifest(loaded)
    if mean_energy is not None:
        ax2.axhline(mean_energy, color="tab:green", linestyle=":", linewidth=1.2)
    ax2.set_ylabel("shell photon energy range (eV)", color="tab:red")


def _draw_dispersion(ax, fig, loaded, summary):
    rows = loaded.get("dispersion")
    if rows is None:
        raise ResultsError("dispersion.csv missing from the results directory")
    k = [r["k_mag"] for r in rows]
    energy = [r["energy"] for r in rows]
    fraction = [r["photon_fraction"] for r in rows]
    scatter = ax.scatter(k, energy, c=fraction, cmap="viridis", vmin=0.0, vmax=1.0, s=28, zorder=3)
    fig.colorbar(scatter, ax=ax, label="photon fraction")
    bare = summary["bare_modes"]
    ax.scatter(
        [b[0] for b in bare],
        [b[1] for b in bare],
        marker="D",
        facecolors="none",
        edgecolors="gray",
        s=24,
        label="bare modes",
    )
    ax.axhline(summary["mean_energy"], color="black", linestyle=":", linewidth=1.2)
    shown = [b[1] for b in bare if energy and b[1] <= max(energy)]
    if energy:
        pad = 0.05 * (max(energy) - min(energy) + 1e-6)
        top = max(energy + shown) + pad
        ax.set_ylim(min(energy) - pad, top)
    ax.set_xlabel(r"$|\mathbf{k}|$ (nm$^{-1}$)")
    ax.set_ylabel("energy (eV)")
    ax.legend(loc="lower right")
