"""End-to-end experiment runs.

Builds (or reuses cached) datasets for every configured sampler, fits every
configured surrogate family on every training split, scores the full
train-by-test R² matrix, and emits results as CSV, JSON, and SVG files.

All result files are written atomically from the main process, and floats
are serialized at full precision, so a repeated run with the same config and
seeds reproduces byte-identical CSVs.
"""
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

from .cache import Cache
from .config import config_hash
from .evaluate import (aggregate_groups, average_by_trainer, clamp_scores,
                       cross_validate, group_significance)
from .provider import DatasetProvider, group_of
from .report import render_heatmap

log = logging.getLogger("surroforge.experiment")

RESULTS_FORMAT_VERSION = 1


def _atomic_write_text(path, text):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def _fmt(value):
    # repr keeps full float precision; empty marks a failed cell
    return "" if value is None else repr(float(value))


def matrix_csv_text(matrix, family):
    lines = ["test_dataset," + ",".join(matrix.samplers)]
    for test_sid in matrix.samplers:
        means = [matrix.cells[(family, train_sid, test_sid)]["mean"]
                 for train_sid in matrix.samplers]
        lines.append(test_sid + "," + ",".join(_fmt(v) for v in means))
    return "\n".join(lines) + "\n"


def groups_csv_text(groups):
    lines = ["group,mean,std"]
    for row in groups:
        lines.append(f"{row.group},{_fmt(row.mean)},{_fmt(row.std)}")
    return "\n".join(lines) + "\n"


def ranking_csv_text(ranking):
    lines = ["train_sampler,mean_r2"]
    for sid, mean in ranking:
        lines.append(f"{sid},{_fmt(mean)}")
    return "\n".join(lines) + "\n"


def scatter_csv_text(dataset):
    lines = ["s0,s1"]
    for row in dataset.states:
        lines.append(f"{_fmt(row[0])},{_fmt(row[1])}")
    return "\n".join(lines) + "\n"


@dataclass
class ExperimentResult:
    out_dir: Path
    matrix: object
    groups: object
    ranking: object
    significance: object
    files: dict
    elapsed_seconds: float

    @property
    def failed(self):
        return bool(self.matrix.missing())


def run_experiment(config, jobs=1, cache=None):
    """Run the configured experiment and emit results under config.out_dir."""
    t0 = time.monotonic()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache = cache if cache is not None else Cache()
    provider = DatasetProvider(config.env, config.samples,
                               params=config.sampler_params(), cache=cache)
    log.info("experiment: env=%s samplers=%d families=%d seeds=%d k=%d",
             config.env, len(config.samplers), len(config.families),
             len(config.seeds), config.samples)

    matrix = cross_validate(config.env, config.samplers, config.families,
                            config.samples, config.seeds,
                            family_configs=config.family_configs(),
                            train_fraction=config.train_fraction,
                            provider=provider, jobs=jobs)
    for key in matrix.missing():
        log.error("cell %s failed: %s", key, matrix.cells[key]["error"])

    clamped = clamp_scores(matrix)
    files = {}
    for family in matrix.families:
        path = out_dir / f"matrix_{family}.csv"
        _atomic_write_text(path, matrix_csv_text(matrix, family))
        files[f"matrix_{family}"] = path

    groups = None
    ranking = None
    significance = None
    if matrix.complete():
        groups = aggregate_groups(matrix)
        ranking = average_by_trainer(matrix)
        significance = group_significance(matrix)
        _atomic_write_text(out_dir / "groups.csv", groups_csv_text(groups))
        _atomic_write_text(out_dir / "ranking.csv", ranking_csv_text(ranking))
        files["groups"] = out_dir / "groups.csv"
        files["ranking"] = out_dir / "ranking.csv"
    else:
        log.warning("matrix incomplete: group and ranking summaries skipped")

    # visited-state scatters for the agent-collected datasets (first seed)
    for sid in config.samplers:
        if group_of(sid) != "agent_based":
            continue
        dataset = provider.dataset(sid, config.seeds[0])
        if dataset.states.shape[1] < 2:
            continue
        path = out_dir / f"scatter_{sid}.csv"
        _atomic_write_text(path, scatter_csv_text(dataset))
        files[f"scatter_{sid}"] = path

    bundle = {
        "format_version": RESULTS_FORMAT_VERSION,
        "env": config.env,
        "config_hash": config_hash(config),
        "samples": config.samples,
        "train_fraction": config.train_fraction,
        "seeds": list(config.seeds),
        "matrix": clamped.to_dict(),
        "groups": None if groups is None else
            [{"group": g.group, "mean": g.mean, "std": g.std} for g in groups],
        "ranking": None if ranking is None else
            [[sid, mean] for sid, mean in ranking],
        "significance": significance,
    }
    _atomic_write_text(out_dir / "results.json",
                       json.dumps(bundle, indent=2, sort_keys=True) + "\n")
    files["results"] = out_dir / "results.json"

    for family in matrix.families:
        path = out_dir / f"heatmap_{family}.svg"
        render_heatmap(clamped, family, path)
        files[f"heatmap_{family}"] = path

    elapsed = time.monotonic() - t0
    log.info("experiment finished in %.1fs -> %s", elapsed, out_dir)
    return ExperimentResult(out_dir=out_dir, matrix=matrix, groups=groups,
                            ranking=ranking, significance=significance,
                            files=files, elapsed_seconds=elapsed)
