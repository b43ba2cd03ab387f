"""Euclidean and Riemannian alignment for cross-subject EEG decoding."""

import json

from ._core import (
    Dataset,
    EegAlignError,
    SubjectRecord,
    TaskKind,
    Trial,
    TrialKind,
    accuracy,
    arithmetic_mean,
    auc_curve,
    balanced_accuracy,
    bca,
    build_reference,
    covariance,
    design_fir_bandpass,
    ea_align,
    filter_causal,
    load_archive,
    paired_t_test,
    ra_align,
    riemannian_distance,
    riemannian_mean,
    run_cli,
    save_archive,
    spd_log,
    spd_power,
)
from . import _core

__version__ = "0.1.0"


def synth_mi(seed=0, **config):
    return _core.synth_mi(json.dumps(config), seed)


def synth_erp(seed=0, **config):
    return _core.synth_erp(json.dumps(config), seed)


def loso_eval(dataset, pipeline, seed=0, threads=1):
    """pipeline: dict with the same keys as a config's pipelines[] entry."""
    return json.loads(_core.loso_eval_json(dataset, json.dumps(pipeline), seed, threads))


def online_eval(dataset, pipeline, online, threads=1):
    return json.loads(_core.online_eval_json(dataset, json.dumps(pipeline), json.dumps(online), threads))
