"""Keyed reuse of generated datasets and trained policies across runs.

Cache entries are plain dataset CSVs (with their metadata sidecars) and
policy JSON files, named by environment, sampler, sample budget, seed, and
a hash of every parameter that influences the content. The root directory
comes from the SURROFORGE_CACHE environment variable when set.
"""
import hashlib
import json
import logging
import os
from pathlib import Path

from .dataset import Dataset
from .policies import MaxEntropyPolicy

log = logging.getLogger("surroforge.cache")

ENV_VAR = "SURROFORGE_CACHE"


def cache_root():
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return Path.home() / ".cache" / "surroforge"


def params_hash(payload):
    """Short stable digest of a JSON-serializable parameter payload."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


class Cache:
    def __init__(self, root=None):
        self.root = Path(root) if root is not None else cache_root()

    def dataset_path(self, env, sampler_id, k, seed, params):
        h = params_hash({"env": env, "sampler": sampler_id, "k": int(k),
                         "seed": int(seed), "params": params})
        name = f"{sampler_id}-k{k}-s{seed}-{h}.csv"
        return self.root / "datasets" / env / name

    def dataset(self, env, sampler_id, k, seed, params, builder):
        """Load the dataset if present, else build and persist it."""
        path = self.dataset_path(env, sampler_id, k, seed, params)
        if path.exists():
            log.info("cache hit: %s", path)
            return Dataset.load(path)
        ds = builder()
        path.parent.mkdir(parents=True, exist_ok=True)
        ds.save(path)
        log.info("cache write: %s", path)
        return ds

    def policy_path(self, env, seed, params):
        h = params_hash({"env": env, "seed": int(seed), "params": params})
        return self.root / "policies" / f"{env}-mea-s{seed}-{h}.json"

    def policy(self, env, seed, params, builder):
        """Load the max-entropy policy if present, else train and persist."""
        path = self.policy_path(env, seed, params)
        if path.exists():
            log.info("cache hit: %s", path)
            return MaxEntropyPolicy.load(path)
        policy = builder()
        path.parent.mkdir(parents=True, exist_ok=True)
        policy.save(path)
        log.info("cache write: %s", path)
        return policy
