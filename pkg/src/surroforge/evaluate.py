"""Cross-validation harness: every trained surrogate scored on every test
split, with R² aggregation by sampler group, per-trainer rankings, and
Welch t-tests between groups.
"""
import warnings
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .provider import GROUPS, DatasetProvider
from .surrogates import make_surrogate


def _derived_seed(*parts):
    key = [int(zlib.crc32(p.encode())) if isinstance(p, str) else int(p)
           for p in parts]
    return int(np.random.SeedSequence(key).generate_state(1)[0])


# -- scoring ---------------------------------------------------------------
@dataclass(frozen=True)
class R2Result:
    per_dim: tuple        # nan marks a dimension with zero truth variance
    average: float        # unweighted mean over the defined dimensions
    undefined_dims: tuple


def r2_score(truth, pred):
    """Per-dimension and uniform-average coefficient of determination."""
    t = np.asarray(truth, dtype=float)
    p = np.asarray(pred, dtype=float)
    if t.ndim == 1:
        t = t[:, None]
    if p.ndim == 1:
        p = p[:, None]
    if t.shape != p.shape:
        raise ValueError(f"truth shape {t.shape} != pred shape {p.shape}")
    if t.shape[0] < 2:
        raise ValueError("need at least 2 samples for R²")
    ss_tot = np.sum((t - t.mean(axis=0)) ** 2, axis=0)
    ss_res = np.sum((t - p) ** 2, axis=0)
    per_dim, undefined = [], []
    for d in range(t.shape[1]):
        if ss_tot[d] == 0.0:
            undefined.append(d)
            per_dim.append(float("nan"))
            warnings.warn(f"R² undefined for dimension {d}: truth has zero "
                          f"variance; excluded from the average")
        else:
            per_dim.append(float(1.0 - ss_res[d] / ss_tot[d]))
    defined = [v for v in per_dim if not np.isnan(v)]
    average = float(np.mean(defined)) if defined else float("nan")
    return R2Result(tuple(per_dim), average, tuple(undefined))


def split_dataset(dataset, train_fraction, seed):
    """Disjoint shuffled split with sizes floor(f*k) and k - floor(f*k)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    k = len(dataset)
    if k < 2:
        raise ValueError("need at least 2 transitions to split")
    perm = np.random.default_rng(int(seed)).permutation(k)
    n_train = int(train_fraction * k)
    train = dataset.subset(perm[:n_train], split="train")
    test = dataset.subset(perm[n_train:], split="test")
    return train, test


# -- the matrix --------------------------------------------------------------
@dataclass
class EvalMatrix:
    """R² grid over (family, train sampler, test dataset).

    Each cell holds the seed-mean of the uniform-average R², its std over
    seeds, the per-seed values, the seed-mean per-dimension scores, and an
    error string when the cell could not be computed.
    """
    env: str
    samplers: tuple
    families: tuple
    seeds: tuple
    cells: dict = field(default_factory=dict)

    def cell(self, family, train, test):
        return self.cells[(family, train, test)]

    def missing(self):
        return sorted(key for key, cell in self.cells.items()
                      if cell["mean"] is None)

    def complete(self):
        expected = len(self.families) * len(self.samplers) ** 2
        return len(self.cells) == expected and not self.missing()

    def to_dict(self):
        return {
            "env": self.env,
            "samplers": list(self.samplers),
            "families": list(self.families),
            "seeds": list(self.seeds),
            "cells": {"|".join(key): cell for key, cell in self.cells.items()},
        }

    @classmethod
    def from_dict(cls, payload):
        cells = {tuple(key.split("|")): cell
                 for key, cell in payload["cells"].items()}
        return cls(env=payload["env"], samplers=tuple(payload["samplers"]),
                   families=tuple(payload["families"]),
                   seeds=tuple(payload["seeds"]), cells=cells)


# -- grid computation --------------------------------------------------------
_CTX = None


def _run_task(task):
    """Fit one (family, train sampler, seed) model and score it on every
    test split; failures are captured per cell, never raised."""
    family, train_sid, seed = task
    splits = _CTX["splits"]
    scores, errors = {}, {}
    try:
        model = make_surrogate(family, _CTX["configs"].get(family))
        model.fit(splits[(train_sid, seed)][0],
                  seed=_derived_seed(seed, family, train_sid, "fit"))
    except Exception as err:
        msg = f"fit failed: {err}"
        return task, scores, {sid: msg for sid in _CTX["samplers"]}
    for test_sid in _CTX["samplers"]:
        test = splits[(test_sid, seed)][1]
        try:
            pred = model.predict(test.states, test.actions)
            scores[test_sid] = r2_score(test.next_states, pred)
        except Exception as err:
            errors[test_sid] = f"score failed: {err}"
    return task, scores, errors


def cross_validate(env, samplers, model_families, k_samples, seeds,
                   family_configs=None, train_fraction=0.8, provider=None,
                   sampler_params=None, jobs=1):
    """Build one dataset per sampler and seed, split each, train every
    family on every train split, and score on every test split."""
    samplers = tuple(samplers)
    families = tuple(model_families)
    seeds = tuple(int(s) for s in seeds)
    if not samplers or not families or not seeds:
        raise ValueError("need at least one sampler, family, and seed")
    if len(set(samplers)) != len(samplers):
        raise ValueError("duplicate sampler ids")
    if provider is None:
        provider = DatasetProvider(env, k_samples, sampler_params)

    splits = {}
    for seed in seeds:
        for sid in samplers:
            ds = provider.dataset(sid, seed)
            splits[(sid, seed)] = split_dataset(
                ds, train_fraction, _derived_seed(seed, sid, "split"))

    tasks = [(family, train_sid, seed)
             for family in families for train_sid in samplers for seed in seeds]
    global _CTX
    _CTX = {"splits": splits, "samplers": samplers,
            "configs": dict(family_configs or {})}
    try:
        if jobs > 1:
            # fork workers inherit the splits without pickling them
            import multiprocessing as mp
            from concurrent.futures import ProcessPoolExecutor
            with ProcessPoolExecutor(max_workers=jobs,
                                     mp_context=mp.get_context("fork")) as pool:
                raw = list(pool.map(_run_task, tasks))
        else:
            raw = [_run_task(t) for t in tasks]
    finally:
        _CTX = None

    # order-independent reduction: results keyed, then assembled in a fixed
    # deterministic order
    by_task = {task: (scores, errors) for task, scores, errors in raw}
    matrix = EvalMatrix(env=env, samplers=samplers, families=families,
                        seeds=seeds)
    for family in families:
        for train_sid in samplers:
            for test_sid in samplers:
                per_seed, per_dim_rows, errs = [], [], []
                for seed in seeds:
                    scores, errors = by_task[(family, train_sid, seed)]
                    res = scores.get(test_sid)
                    if res is None:
                        per_seed.append(None)
                        errs.append(f"seed {seed}: {errors.get(test_sid)}")
                    else:
                        per_seed.append(res.average)
                        per_dim_rows.append(res.per_dim)
                vals = [v for v in per_seed if v is not None]
                matrix.cells[(family, train_sid, test_sid)] = {
                    "mean": float(np.mean(vals)) if vals else None,
                    "std": float(np.std(vals)) if vals else None,
                    "per_seed": per_seed,
                    "per_dim": (np.mean(np.asarray(per_dim_rows), axis=0).tolist()
                                if per_dim_rows else None),
                    "error": "; ".join(errs) if errs else None,
                }
    return matrix


# -- aggregation -------------------------------------------------------------
@dataclass(frozen=True)
class GroupSummary:
    group: str
    mean: float
    std: float


def _group_values(matrix, members):
    values = []
    for family in matrix.families:
        for train_sid in members:
            for test_sid in matrix.samplers:
                cell = matrix.cells[(family, train_sid, test_sid)]
                if cell["mean"] is None:
                    raise ValueError(
                        f"matrix incomplete at {(family, train_sid, test_sid)}: "
                        f"{cell['error']}")
                values.append(cell["mean"])
    return values


def matrix_groups(matrix):
    """Groups with at least one member in the matrix roster, in fixed order."""
    present = {}
    for name, members in GROUPS.items():
        here = tuple(s for s in matrix.samplers if s in members)
        if here:
            present[name] = here
    return present


def aggregate_groups(matrix, groups=None):
    """Mean and std of averaged R² pooled over every (group sampler, test
    dataset) pair; raw values, no clamping."""
    if groups is None:
        groups = matrix_groups(matrix)
        if not groups:
            raise ValueError("no known sampler group present in the matrix")
    out = []
    for name, members in groups.items():
        members = tuple(s for s in members if s in matrix.samplers)
        if not members:
            raise ValueError(f"group {name!r} has no samplers in the matrix")
        values = _group_values(matrix, members)
        out.append(GroupSummary(name, float(np.mean(values)),
                                float(np.std(values))))
    return out


def average_by_trainer(matrix):
    """Mean averaged R² per training sampler over all test datasets, sorted
    descending (ties broken by sampler id)."""
    ranking = []
    for train_sid in matrix.samplers:
        values = _group_values(matrix, (train_sid,))
        ranking.append((train_sid, float(np.mean(values))))
    ranking.sort(key=lambda kv: (-kv[1], kv[0]))
    return ranking


def welch_t_test(a, b):
    """Welch's unequal-variance t statistic and two-sided p-value.

    Degenerate convention: both samples constant → p = 1 if the means are
    equal, else p = 0 with an infinite t.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 values")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    ma, mb = a.mean(), b.mean()
    if va == 0.0 and vb == 0.0:
        if ma == mb:
            return 0.0, 1.0
        return float(np.inf if ma > mb else -np.inf), 0.0
    sea, seb = va / a.size, vb / b.size
    t = (ma - mb) / np.sqrt(sea + seb)
    df = (sea + seb) ** 2 / (sea**2 / (a.size - 1) + seb**2 / (b.size - 1))
    p = 2.0 * stats.t.sf(abs(t), df)
    return float(t), float(p)


def group_significance(matrix, groups=None, alpha=0.001):
    """Best group by mean, with Welch p-values against every other group;
    `significant` is true only when every pairwise p is below alpha."""
    if groups is None:
        groups = matrix_groups(matrix)
    summaries = aggregate_groups(matrix, groups)
    best = max(summaries, key=lambda s: s.mean)
    pooled = {name: _group_values(matrix, members)
              for name, members in groups.items()}
    pairwise = {}
    significant = True
    for other in summaries:
        if other.group == best.group:
            continue
        t, p = welch_t_test(pooled[best.group], pooled[other.group])
        pairwise[f"{best.group}|{other.group}"] = {"t": t, "p": p}
        if not p < alpha:
            significant = False
    return {"best": best.group, "significant": significant,
            "alpha": alpha, "pairwise": pairwise}


def clamp_scores(matrix, lo=-1.0, hi=1.0):
    """Copy of the matrix with a display-clamped mean per cell; raw values
    stay in "mean"."""
    if not lo < hi:
        raise ValueError("lo must be < hi")
    clamped = EvalMatrix(env=matrix.env, samplers=matrix.samplers,
                         families=matrix.families, seeds=matrix.seeds)
    for key, cell in matrix.cells.items():
        new = dict(cell)
        if new["mean"] is not None:
            new["clamped"] = float(min(max(new["mean"], lo), hi))
        clamped.cells[key] = new
    return clamped
