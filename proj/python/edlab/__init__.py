"""Energy discrepancy lab: losses, training runs, experiments and checks.

Thin layer over the compiled ``_edlab`` module; arrays go in and out as
float64 numpy arrays.
"""

import json

from edlab._edlab import (  # noqa: F401
    EnergyModel,
    LossResult,
    cd_loss,
    dataset_sample,
    dataset_logp,
    dataset_names,
    dsm_loss,
    ed_discrete_loss,
    ed_loss,
    eval_density,
    experiment_names,
    load_checkpoint,
    sample,
    sm_loss,
    verify_check_names,
    _train,
    _experiment,
    _verify,
)

__all__ = [
    "EnergyModel",
    "LossResult",
    "cd_loss",
    "dataset_logp",
    "dataset_names",
    "dataset_sample",
    "dsm_loss",
    "ed_discrete_loss",
    "ed_loss",
    "eval_density",
    "experiment",
    "experiment_names",
    "load_checkpoint",
    "sample",
    "sm_loss",
    "train",
    "verify",
    "verify_check_names",
]


def _flatten(overrides):
    return {str(k): str(v).lower() if isinstance(v, bool) else str(v) for k, v in (overrides or {}).items()}


def train(out_dir, overrides=None, config_file=None):
    """Run a training job; overrides use dotted keys, e.g. {"train.iters": 500}."""
    return _train(str(out_dir), _flatten(overrides), config_file or "")


def experiment(name, out_dir, overrides=None, config_file=None):
    """Run a named experiment and return its JSON summary as a dict."""
    return json.loads(_experiment(name, str(out_dir), _flatten(overrides), config_file or ""))


def verify(check="all", seed=0):
    """Theory checks as a list of report dicts."""
    return [json.loads(line) for line in _verify(check, seed)]
