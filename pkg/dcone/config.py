"""
Run configuration: defaults, optional YAML/JSON file, then command-line flags.
"""

import copy
import json
import os
from pathlib import Path

from jsonschema import validate
from jsonschema.exceptions import ValidationError
from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from dcone.exception import InvalidConfigError

THREADS_ENV = "DCONE_THREADS"

DEFAULTS = {
    "pair": "case1",
    "grid": {"n": 257, "L": 1.0},
    "solver": {"omega": 1.8, "sweep": "lexicographic"},
    "boundary": "mu:1.5707963267948966,1.5707963267948966",
    "radii": [0.5, 0.4, 0.32, 0.25, 0.22, 0.2, 0.18, 0.16],
    "mask_tol": 0.1,
    "seed": 0,
}


def thread_limit():
    """
    Worker cap from DCONE_THREADS, falling back to the CPU count.

    :rtype: int
    """
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise InvalidConfigError(THREADS_ENV, "expected an integer, got {!r}".format(value))
    return os.cpu_count() or 1


def load_run_config_schema():
    with open(Path(__file__).parent / "run_config_schema.json") as f:
        return json.load(f)


def _validated(data):
    try:
        validate(data, load_run_config_schema())
    except ValidationError as e:
        path = "/".join(str(part) for part in e.absolute_path)
        raise InvalidConfigError(path, e.message)
    return data


def _pruned(overrides):
    """Drop None values, and nested mappings left empty by that."""
    pruned = {}
    for key, value in overrides.items():
        if isinstance(value, dict):
            value = _pruned(value)
            if not value:
                continue
        if value is not None:
            pruned[key] = value
    return pruned


def _merge(base, overrides):
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_run_config(path):
    """
    Load a run configuration file. JSON files go through the YAML loader too.

    :param str path: Path to a .json, .yml or .yaml file.
    :rtype: RunConfig
    :raises InvalidConfigError: If the file does not parse or fails schema validation.
    """
    with open(path) as f:
        try:
            data = YAML(typ="safe").load(f)
        except YAMLError as e:
            raise InvalidConfigError(str(path), str(e))
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise InvalidConfigError("", "expected a mapping at the top level")
    return RunConfig(_validated(data))


class RunConfig:
    """
    Settings of one command. Missing values fall back to DEFAULTS.
    """

    def __init__(self, config_dict=None):
        self.dict = config_dict or {}
        self._resolved = _merge(DEFAULTS, self.dict)

    def merged(self, overrides):
        """
        New config with `overrides` (from command-line flags) taking precedence.
        None values are ignored.

        :param dict overrides: Nested dict shaped like the config file.
        :rtype: RunConfig
        """
        return RunConfig(_validated(_merge(self.dict, _pruned(overrides))))

    @property
    def subcommand(self):
        return self.dict.get("subcommand")

    @property
    def pair(self):
        return self._resolved.get("pair")

    @property
    def field(self):
        return self._resolved.get("field")

    @property
    def out(self):
        return self._resolved.get("out")

    @property
    def n(self):
        return self._resolved["grid"]["n"]

    @property
    def L(self):
        return self._resolved["grid"]["L"]

    @property
    def omega(self):
        return self._resolved["solver"]["omega"]

    @property
    def tol(self):
        return self._resolved["solver"].get("tol")

    @property
    def max_iters(self):
        return self._resolved["solver"].get("max_iters")

    @property
    def sweep(self):
        return self._resolved["solver"]["sweep"]

    @property
    def boundary(self):
        return self._resolved["boundary"]

    @property
    def radii(self):
        return list(self._resolved["radii"])

    @property
    def mask_tol(self):
        return self._resolved["mask_tol"]

    @property
    def seed(self):
        return self._resolved["seed"]

    @property
    def gallery(self):
        return self._resolved.get("gallery")

    @property
    def solutions(self):
        return self._resolved.get("solutions")

    @property
    def alphas(self):
        """(alpha1, alpha2) for Case 1 double cones; either may be None."""
        return self._resolved.get("alpha1"), self._resolved.get("alpha2")

    @property
    def a1(self):
        return self._resolved.get("a1", -1.0)

    @property
    def a2(self):
        return self._resolved.get("a2", 1.0)

    @property
    def threads(self):
        limit = thread_limit()
        requested = self._resolved.get("threads")
        return min(requested, limit) if requested else limit

    def as_dict(self):
        return copy.deepcopy(self._resolved)
