"""Python access to the custody-classification audit core."""

import json

from . import _core
from ._core import ConfigError, PactError, SeparationError, render_report, smote, stratified_folds, synth_cohort

__version__ = _core.__version__

__all__ = [
    "ConfigError",
    "PactError",
    "SeparationError",
    "fit_binary",
    "fit_multinomial",
    "metrics",
    "render_report",
    "run_audit",
    "smote",
    "stratified_folds",
    "synth_cohort",
]


def fit_binary(x, y, names=(), tolerance=1e-8, max_iterations=100):
    return json.loads(_core.fit_binary(x, y, list(names), tolerance, max_iterations))


def fit_multinomial(x, y, names=(), reference=None, tolerance=1e-8, max_iterations=100):
    return json.loads(_core.fit_multinomial(x, y, list(names), reference, tolerance, max_iterations))


def metrics(predicted, truth, classes):
    return json.loads(_core.metrics(list(predicted), list(truth), list(classes)))


def run_audit(config_text, out_dir, overrides=None):
    """Runs every configured task and writes the report directory; returns the manifest."""
    return json.loads(_core.run_audit(config_text, str(out_dir), dict(overrides or {})))
