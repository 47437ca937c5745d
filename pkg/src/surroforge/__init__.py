"""Surrogate dynamics models of deterministic control environments.

The package builds transition datasets with generative space samplers
(Latin hypercube, Sobol, uniform random, Gaussian-process active learning)
and with agent trajectories (random, expert, maximum-entropy and blended
policies), fits surrogate regressors (boosted trees, multilayer perceptron,
Gaussian process) that map (state, action) to the next state, and
cross-validates every surrogate against every dataset.
"""

__version__ = "0.1.0"

from .envs import ENV_NAMES, env_spec, make_env
from .dataset import Dataset
from .sampling import SamplePlan, build_generative_dataset, generative_plan
from .entropy import knn_entropy
from .policies import (ExpertPolicy, MaxEntropyPolicy, PartialExpertPolicy,
                       RandomPolicy)
from .max_entropy import MEAConfig, train_max_entropy_policy
from .collect import collect, mix_datasets
from .surrogates import (ALConfig, GBTConfig, GPConfig, MLPConfig, Surrogate,
                         kriging_active_learning, load_model, make_surrogate)
from .evaluate import (EvalMatrix, aggregate_groups, average_by_trainer,
                       cross_validate, group_significance, r2_score,
                       split_dataset, welch_t_test)
from .provider import DatasetProvider, group_of
from .cache import Cache
from .config import ConfigError, ExperimentConfig, load_config
from .experiment import ExperimentResult, run_experiment
from .report import render_figures, render_report

__all__ = [
    "ALConfig", "Cache", "ConfigError", "Dataset", "DatasetProvider",
    "ENV_NAMES", "EvalMatrix", "ExperimentConfig", "ExperimentResult",
    "ExpertPolicy", "GBTConfig", "GPConfig", "MEAConfig", "MLPConfig",
    "MaxEntropyPolicy", "PartialExpertPolicy", "RandomPolicy", "SamplePlan",
    "Surrogate", "__version__", "aggregate_groups", "average_by_trainer",
    "build_generative_dataset", "collect", "cross_validate", "env_spec",
    "generative_plan", "group_of", "group_significance", "knn_entropy",
    "kriging_active_learning", "load_config", "load_model", "make_env",
    "make_surrogate", "mix_datasets", "r2_score", "render_figures",
    "render_report", "run_experiment", "split_dataset", "train_max_entropy_policy",
    "welch_t_test",
]
