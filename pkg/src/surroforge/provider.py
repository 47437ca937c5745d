"""Sampler taxonomy and the provider that turns sampler ids into datasets.

The roster covers three groups: the uncertainty-driven Kriging builder
("al"), the space-filling generative samplers ("lhs", "sobol", "random"),
and the agent-based collectors ("ra", "ea", "mea", the ε-blended partial
experts "pa25"/"pa50"/"pa75", and the mixes "ma", "mpa"). A provider is
bound to one environment and sample budget; it memoizes datasets per
(sampler, seed), resolves mix dependencies recursively, and persists
everything through an optional cache.
"""
import numpy as np

from .collect import collect, mix_datasets
from .envs import make_env
from .max_entropy import MEAConfig, train_max_entropy_policy
from .policies import expert_policy, partial_expert_policy, random_policy
from .sampling import build_generative_dataset, generative_plan
from .surrogates import ALConfig, GPConfig, kriging_active_learning

GENERATIVE_SAMPLERS = ("lhs", "sobol", "random")
KRIGING_SAMPLERS = ("al",)
AGENT_SAMPLERS = ("ra", "ea", "mea", "pa25", "pa50", "pa75", "ma", "mpa")
SAMPLER_IDS = GENERATIVE_SAMPLERS + KRIGING_SAMPLERS + AGENT_SAMPLERS

DEFAULT_ROSTER = ("lhs", "sobol", "random", "al", "ra", "ea", "mea", "ma", "mpa")

GROUPS = {
    "kriging": KRIGING_SAMPLERS,
    "generative": GENERATIVE_SAMPLERS,
    "agent_based": AGENT_SAMPLERS,
}

_PARTIAL_EPSILON = {"pa25": 0.25, "pa50": 0.5, "pa75": 0.75}
_MIXES = {
    "ma": (("ea", 1 / 3), ("ra", 1 / 3), ("mea", 1 / 3)),
    "mpa": (("ea", 0.5), ("ra", 0.5)),
}


def group_of(sampler_id):
    for group, members in GROUPS.items():
        if sampler_id in members:
            return group
    raise ValueError(f"unknown sampler id {sampler_id!r}")


class DatasetProvider:
    """Resolves sampler ids to datasets for one environment and budget k.

    `params` holds optional config sections: "al", "gp" (Kriging builder)
    and "mea" (exploration policy training). With a cache, datasets and
    trained policies are reused across runs.
    """

    def __init__(self, env_name, k, params=None, cache=None):
        self.env_name = env_name
        self.k = int(k)
        self.params = dict(params or {})
        self.cache = cache
        self._datasets = {}
        self._policies = {}

    # -- policies ----------------------------------------------------------
    def mea_config(self):
        return MEAConfig(**self.params.get("mea", {}))

    def mea_policy(self, seed):
        seed = int(seed)
        if seed not in self._policies:
            cfg = self.mea_config()
            builder = lambda: train_max_entropy_policy(self.env_name, cfg, seed=seed)
            if self.cache is not None:
                policy = self.cache.policy(self.env_name, seed,
                                           {"mea": self.params.get("mea", {})},
                                           builder)
            else:
                policy = builder()
            self._policies[seed] = policy
        return self._policies[seed]

    # -- datasets ----------------------------------------------------------
    def dataset(self, sampler_id, seed):
        if sampler_id not in SAMPLER_IDS:
            raise ValueError(f"unknown sampler id {sampler_id!r} "
                             f"(known: {', '.join(SAMPLER_IDS)})")
        key = (sampler_id, int(seed))
        if key not in self._datasets:
            self._datasets[key] = self._resolve(sampler_id, int(seed))
        return self._datasets[key]

    def _cache_params(self, sampler_id):
        if sampler_id == "al":
            return {"al": self.params.get("al", {}), "gp": self.params.get("gp", {})}
        if sampler_id in ("mea", "ma"):
            return {"mea": self.params.get("mea", {})}
        return {}

    def _resolve(self, sampler_id, seed):
        builder = lambda: self._build(sampler_id, seed)
        if self.cache is not None:
            return self.cache.dataset(self.env_name, sampler_id, self.k, seed,
                                      self._cache_params(sampler_id), builder)
        return builder()

    def _build(self, sampler_id, seed):
        if sampler_id in GENERATIVE_SAMPLERS:
            env = make_env(self.env_name)
            plan = generative_plan(env, sampler_id, self.k, seed)
            return build_generative_dataset(env, plan)
        if sampler_id == "al":
            _, ds = kriging_active_learning(
                self.env_name,
                ALConfig(**self.params.get("al", {})),
                GPConfig(**{k: _tupled(k, v)
                            for k, v in self.params.get("gp", {}).items()}),
                seed=seed)
            return ds
        if sampler_id in _MIXES:
            parts = [(self.dataset(cid, seed), prop)
                     for cid, prop in _MIXES[sampler_id]]
            return mix_datasets(parts, self.k, seed, sampler_id=sampler_id)
        env = make_env(self.env_name)
        if sampler_id == "ra":
            policy = random_policy(self.env_name)
        elif sampler_id == "ea":
            policy = expert_policy(self.env_name)
        elif sampler_id == "mea":
            policy = self.mea_policy(seed)
        else:
            policy = partial_expert_policy(self.env_name,
                                           _PARTIAL_EPSILON[sampler_id])
        return collect(env, policy, self.k, seed, sampler_id=sampler_id)


def _tupled(key, value):
    return tuple(value) if key == "length_scale" and isinstance(value, list) else value
