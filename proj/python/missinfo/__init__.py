"""Relative information measures for incomplete-data likelihood inference."""

import json
import os

from . import _core
from ._core import (
    HeavyTailError,
    NumericalError,
    UnsupportedError,
    ValidationError,
    bernoulli_statistics,
    entropy_measure,
    model_tags,
    normal_closed_forms,
    two_sample_lrt,
)

__version__ = _core.__version__

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_DIAGNOSTIC = 0, 2, 3, 4


def run_manifest(manifest, out_dir=".", seed=None, workers=1, base_dir=None):
    """Run a manifest given as a path or a dict.

    Relative dataset paths resolve against the manifest's directory, or
    base_dir (default: the working directory) for a dict. Returns a dict with
    exit_code, entries (name, exit_code, report, report_path, files) and errors.
    """
    if isinstance(manifest, (str, os.PathLike)):
        path = os.fspath(manifest)
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if base_dir is None:
            base_dir = os.path.dirname(os.path.abspath(path))
    else:
        doc = manifest
    if base_dir is None:
        base_dir = os.getcwd()
    text = _core.run_manifest(json.dumps(doc), os.fspath(base_dir), os.fspath(out_dir), seed, workers)
    return json.loads(text)


def check_manifest(manifest):
    """List every problem with a manifest dict; empty when it is valid."""
    return _core.check_manifest(json.dumps(manifest))


def validate_dataset(path, model="", model_options=None):
    """Check a dataset file; returns {path, model, problems, ok}."""
    return json.loads(_core.validate_dataset(os.fspath(path), model, json.dumps(model_options or {})))


__all__ = [
    "EXIT_DIAGNOSTIC",
    "EXIT_NUMERICAL",
    "EXIT_OK",
    "EXIT_VALIDATION",
    "HeavyTailError",
    "NumericalError",
    "UnsupportedError",
    "ValidationError",
    "bernoulli_statistics",
    "check_manifest",
    "entropy_measure",
    "model_tags",
    "normal_closed_forms",
    "run_manifest",
    "two_sample_lrt",
    "validate_dataset",
]
