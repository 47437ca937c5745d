"""Console tables and figure rendering for completed experiment runs.

Figures are SVGs rendered with a pinned hash salt and no date metadata, so
re-rendering an unchanged results directory reproduces identical bytes.
"""
import json
from pathlib import Path

import numpy as np

from .evaluate import EvalMatrix

_SVG_SALT = "surroforge"


def _matplotlib():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = _SVG_SALT
    return plt


def load_results(results_dir):
    path = Path(results_dir) / "results.json"
    if not path.exists():
        raise FileNotFoundError(f"no results.json in {results_dir}; "
                                f"run an experiment first")
    with open(path) as fh:
        return json.load(fh)


def format_ranking(results):
    ranking = results.get("ranking")
    if not ranking:
        return "No ranking: the evaluation matrix is incomplete."
    lines = ["Averaged R² by training sampler (over all test sets)"]
    for i, (sid, mean) in enumerate(ranking, 1):
        lines.append(f"  {i:>2}. {sid:<8} {mean: .6f}")
    return "\n".join(lines)


def format_groups(results):
    groups = results.get("groups")
    if not groups:
        return "No group summary: the evaluation matrix is incomplete."
    sig = results.get("significance") or {}
    starred = sig.get("best") if sig.get("significant") else None
    lines = ["Group summary (raw averaged R², pooled over group samplers x test sets)"]
    for row in groups:
        mark = " *" if row["group"] == starred else ""
        lines.append(f"  {row['group']:<12} mean {row['mean']: .6f}  "
                     f"std {row['std']:.6f}{mark}")
    if starred:
        lines.append(f"  * best group, Welch p < {sig['alpha']} against every "
                     f"other group")
    elif sig:
        lines.append(f"  (best group {sig.get('best')!r} not separated at "
                     f"p < {sig.get('alpha')})")
    return "\n".join(lines)


def render_report(results_dir):
    results = load_results(results_dir)
    header = (f"Environment: {results['env']}   samples: {results['samples']}   "
              f"config: {results['config_hash']}")
    return "\n\n".join([header, format_ranking(results), format_groups(results)])


# -- figures -----------------------------------------------------------------
def render_heatmap(matrix, family, path, lo=-1.0, hi=1.0):
    """Clamped mean-R² grid (rows = test dataset, columns = train sampler)."""
    plt = _matplotlib()
    sids = matrix.samplers
    grid = np.full((len(sids), len(sids)), np.nan)
    for i, test_sid in enumerate(sids):
        for j, train_sid in enumerate(sids):
            cell = matrix.cells[(family, train_sid, test_sid)]
            if cell["mean"] is not None:
                grid[i, j] = min(max(cell["mean"], lo), hi)
    masked = np.ma.masked_invalid(grid)
    fig, ax = plt.subplots(figsize=(1.0 + 0.75 * len(sids), 0.9 + 0.7 * len(sids)))
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad("lightgray")
    image = ax.imshow(masked, vmin=lo, vmax=hi, cmap=cmap)
    ax.set_xticks(range(len(sids)), sids, rotation=45, ha="right")
    ax.set_yticks(range(len(sids)), sids)
    ax.set_xlabel("training sampler")
    ax.set_ylabel("test dataset")
    ax.set_title(f"{matrix.env} · {family} · mean R² (clamped to [{lo:g}, {hi:g}])")
    mid = 0.5 * (lo + hi)
    for i in range(len(sids)):
        for j in range(len(sids)):
            if np.isnan(grid[i, j]):
                ax.text(j, i, "x", ha="center", va="center", color="black")
            else:
                color = "white" if grid[i, j] < mid else "black"
                ax.text(j, i, f"{grid[i, j]:.2f}", ha="center", va="center",
                        color=color, fontsize=8)
    fig.colorbar(image, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)


def render_scatter(csv_path, out_path, title):
    """State-visitation scatter of the first two state variables."""
    plt = _matplotlib()
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    ax.scatter(data[:, 0], data[:, 1], s=2, alpha=0.35, linewidths=0)
    ax.set_xlabel("state[0]")
    ax.set_ylabel("state[1]")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(out_path)


def render_figures(results_dir):
    """Heatmap per family plus a scatter figure per stored agent dataset."""
    results_dir = Path(results_dir)
    results = load_results(results_dir)
    matrix = EvalMatrix.from_dict(results["matrix"])
    paths = []
    for family in matrix.families:
        paths.append(render_heatmap(matrix, family,
                                    results_dir / f"heatmap_{family}.svg"))
    for csv_path in sorted(results_dir.glob("scatter_*.csv")):
        sid = csv_path.stem.replace("scatter_", "")
        out = csv_path.with_suffix(".svg")
        paths.append(render_scatter(csv_path, out,
                                    f"{results['env']} · {sid} · visited states"))
    return paths
