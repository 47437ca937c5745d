"""Experiment configuration: packaged defaults overlaid by a user TOML file
and command-line overrides, validated before any work starts."""
import hashlib
import json
from dataclasses import dataclass
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .envs import ENV_NAMES
from .provider import SAMPLER_IDS
from .max_entropy import MEAConfig
from .surrogates import ALConfig, FAMILIES, GBTConfig, GPConfig, MLPConfig


class ConfigError(ValueError):
    pass


_EXPERIMENT_KEYS = ("env", "samplers", "samples", "families",
                    "train_fraction", "seeds", "out_dir")
_SECTIONS = ("experiment", "gbt", "mlp", "gp", "al", "mea")
_FAMILY_CONFIGS = {"gbt": GBTConfig, "mlp": MLPConfig, "gp": GPConfig}
_TUPLE_KEYS = ("layers", "length_scale")


@dataclass(frozen=True)
class ExperimentConfig:
    env: str
    samplers: tuple
    samples: int
    families: tuple
    train_fraction: float
    seeds: tuple
    out_dir: str
    sections: dict  # parameter tables: gbt/mlp/gp/al/mea

    def sampler_params(self):
        """Sections consumed by the dataset provider."""
        return {name: dict(self.sections.get(name, {}))
                for name in ("al", "gp", "mea")}

    def family_config(self, family):
        return _make_section_config(_FAMILY_CONFIGS[family],
                                    family, self.sections.get(family, {}))

    def family_configs(self):
        return {family: self.family_config(family) for family in self.families}


def _make_section_config(cls, name, params):
    kwargs = {k: tuple(v) if k in _TUPLE_KEYS and isinstance(v, list) else v
              for k, v in params.items()}
    try:
        return cls(**kwargs)
    except TypeError as err:
        raise ConfigError(f"[{name}] {err}") from err
    except ValueError as err:
        raise ConfigError(f"[{name}] {err}") from err


def load_defaults():
    text = resources.files("surroforge").joinpath("defaults.toml").read_text()
    return tomllib.loads(text)


def _merge(base, overlay):
    out = dict(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path=None, overrides=None):
    """Resolve defaults <- optional TOML file <- CLI overrides, validate,
    and return the frozen config."""
    tables = load_defaults()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                user = tomllib.load(fh)
        except FileNotFoundError as err:
            raise ConfigError(f"config file not found: {path}") from err
        except tomllib.TOMLDecodeError as err:
            raise ConfigError(f"invalid TOML in {path}: {err}") from err
        tables = _merge(tables, user)

    overrides = overrides or {}
    exp = dict(tables.get("experiment", {}))
    if overrides.get("seed") is not None:
        exp["seeds"] = [int(overrides["seed"])]
    if overrides.get("samples") is not None:
        exp["samples"] = int(overrides["samples"])
    if overrides.get("out") is not None:
        exp["out_dir"] = str(overrides["out"])
    tables["experiment"] = exp

    return _validate(tables)


def _validate(tables):
    unknown = sorted(set(tables) - set(_SECTIONS))
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(unknown)}")
    exp = tables.get("experiment", {})
    bad_keys = sorted(set(exp) - set(_EXPERIMENT_KEYS))
    if bad_keys:
        raise ConfigError(f"unknown [experiment] keys: {', '.join(bad_keys)}")

    env = exp.get("env")
    if env not in ENV_NAMES:
        raise ConfigError(f"unknown env {env!r} (known: {', '.join(ENV_NAMES)})")

    samplers = tuple(exp.get("samplers", ()))
    if not samplers:
        raise ConfigError("sampler roster must not be empty")
    bad = [s for s in samplers if s not in SAMPLER_IDS]
    if bad:
        raise ConfigError(f"unknown sampler ids: {', '.join(map(str, bad))} "
                          f"(known: {', '.join(SAMPLER_IDS)})")
    if len(set(samplers)) != len(samplers):
        raise ConfigError("duplicate sampler ids in roster")

    samples = exp.get("samples")
    if not isinstance(samples, int) or isinstance(samples, bool) or samples < 100:
        raise ConfigError(f"samples must be an integer >= 100, got {samples!r}")

    families = tuple(exp.get("families", ()))
    if not families:
        raise ConfigError("families must not be empty")
    bad = [f for f in families if f not in FAMILIES]
    if bad:
        raise ConfigError(f"unknown model families: {', '.join(map(str, bad))} "
                          f"(known: {', '.join(sorted(FAMILIES))})")

    fraction = exp.get("train_fraction")
    if not isinstance(fraction, (int, float)) or not 0.0 < fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {fraction!r}")

    seeds = exp.get("seeds", ())
    if (not seeds or not all(isinstance(s, int) and not isinstance(s, bool)
                             for s in seeds)):
        raise ConfigError(f"seeds must be a non-empty list of integers, got {seeds!r}")

    out_dir = exp.get("out_dir")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError(f"out_dir must be a non-empty string, got {out_dir!r}")

    config = ExperimentConfig(
        env=env,
        samplers=samplers,
        samples=samples,
        families=families,
        train_fraction=float(fraction),
        seeds=tuple(int(s) for s in seeds),
        out_dir=out_dir,
        sections={name: dict(tables.get(name, {}))
                  for name in _SECTIONS if name != "experiment"},
    )
    # constructing every parameter object validates section keys and
    # invariants before any work starts, whether or not the run uses them
    for family, cls in _FAMILY_CONFIGS.items():
        _make_section_config(cls, family, config.sections.get(family, {}))
    _make_section_config(ALConfig, "al", config.sections.get("al", {}))
    _make_section_config(GPConfig, "gp", config.sections.get("gp", {}))
    _make_section_config(MEAConfig, "mea", config.sections.get("mea", {}))
    return config


def config_hash(config):
    """Digest of everything that influences results (output location
    excluded)."""
    payload = {
        "env": config.env,
        "samplers": list(config.samplers),
        "samples": config.samples,
        "families": list(config.families),
        "train_fraction": config.train_fraction,
        "seeds": list(config.seeds),
        "sections": config.sections,
    }
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]
