import importlib
import logging
import os
import subprocess

import numpy as np
import yaml

from ergocert import HERMITIAN_TOL
from ergocert import __version__
from ergocert.exception import ConfigurationError
from ergocert.exception import DimensionMismatch
from ergocert.exception import NotHermitian

logger = logging.getLogger(__name__)


def modsplit(s):
    """Split importable"""
    if ":" in s:
        c = s.split(":")
        if len(c) != 2:
            raise ValueError("Syntax error: {}".format(s))
        return c[0], c[1]
    else:
        c = s.split(".")
        if len(c) < 2:
            raise ValueError("Syntax error: {}".format(s))
        return ".".join(c[:-1]), c[-1]


def importer(name):
    """Import by name"""
    c1, c2 = modsplit(name)
    module = importlib.import_module(c1)
    return getattr(module, c2)


def instantiate(cls, **kwargs):
    if isinstance(cls, str):
        return importer(cls)(**kwargs)
    else:
        return cls(**kwargs)


def as_matrix(obj):
    """
    Return the square complex array behind a matrix-like object.

    Accepts plain arrays and anything carrying a ``matrix`` attribute
    (DensityMatrix, HamiltonianData).
    """
    _mat = np.asarray(getattr(obj, "matrix", obj))
    if _mat.ndim != 2 or _mat.shape[0] != _mat.shape[1]:
        raise DimensionMismatch("Expected a square matrix, got shape {}".format(_mat.shape))
    return _mat


def hermitian_deviation(mat):
    return float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0


def check_hermitian(mat, tol=HERMITIAN_TOL):
    """
    Verify Hermiticity, tolerance scaled by the largest entry when that
    exceeds one.

    :return: The Hermitian part of the matrix
    """
    mat = as_matrix(mat)
    _scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
    _dev = hermitian_deviation(mat)
    if _dev > tol * _scale:
        raise NotHermitian("Deviation from Hermiticity {:.3e} exceeds {:.1e}".format(_dev, tol))
    return hermitize(mat)


def hermitize(mat):
    return (mat + mat.conj().T) / 2


def is_power_of_two(d):
    return d >= 1 and (d & (d - 1)) == 0


def qubit_count(d):
    return int(d).bit_length() - 1


def seed_sequence(seed, *index):
    """
    Derive a SeedSequence from a base seed and a position.

    Identical (seed, index) pairs give identical streams whatever the
    order in which work items are scheduled.
    """
    if isinstance(seed, np.random.SeedSequence):
        if not index:
            return seed
        return np.random.SeedSequence(
            seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(index)
        )
    if isinstance(seed, (list, tuple)):
        return np.random.SeedSequence(list(seed) + list(index))
    if seed is None:
        raise ConfigurationError("A seed is required for reproducible runs")
    return np.random.SeedSequence([int(seed)] + list(index))


def make_rng(seed, *index):
    if isinstance(seed, np.random.Generator) and not index:
        return seed
    return np.random.default_rng(seed_sequence(seed, *index))


def load_config(path):
    """
    Read a YAML or JSON configuration file into a dict.
    JSON is a subset of YAML so one loader serves both.
    """
    with open(path, "r", encoding="utf-8") as fp:
        conf = yaml.safe_load(fp)

    if conf is None:
        return {}
    if not isinstance(conf, dict):
        raise ConfigurationError("Configuration in {} is not a mapping".format(path))
    return conf


def merge_conf(base, override):
    """
    Recursively merge override into a copy of base. None values are
    skipped and sections left empty are dropped.
    """
    res = dict(base)
    for key, val in override.items():
        if val is None:
            continue
        if isinstance(val, dict):
            _base = res.get(key)
            _merged = merge_conf(_base if isinstance(_base, dict) else {}, val)
            if _merged:
                res[key] = _merged
        else:
            res[key] = val
    return res


def describe_version():
    """
    git-describe style version string, falling back to the package
    version outside a checkout.
    """
    _dir = os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=_dir,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
    except (OSError, subprocess.SubprocessError):
        return "v{}".format(__version__)

    _desc = out.stdout.strip()
    if not _desc:
        return "v{}".format(__version__)
    return "v{}-{}".format(__version__, _desc)
