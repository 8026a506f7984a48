import os
import json
import logging
from dataclasses import dataclass, field, replace
from math import pi

import numpy as np

import config
from errors import ConfigError, ProfileError
from skr import IRREDUCIBLE, REDUCIBLE, derived_functions, polynomial_profile, tabulated_profile

# Reads the run configuration (a single JSON document) and validates it into a RunConfig.

PROFILE_SCHEMA = {
    IRREDUCIBLE: ("mode", "c_bar", "tau_min"),
    REDUCIBLE: ("mode", "tau_min"),
}

VALIDATION_SAMPLES = 64


@dataclass(frozen=True)
class Numerics:
    series_order: int = config.SERIES_ORDER
    quadrature_nodes: int = config.QUADRATURE_NODES
    fd_step: float = config.FD_STEP


@dataclass(frozen=True)
class RunConfig:
    profile: object
    numerics: Numerics
    signature: int = 0
    output_directory: str = config.OUTPUT_PATH
    source: dict = field(default_factory=dict)

    def with_output(self, directory):
        return replace(self, output_directory=directory)

    def echo(self):
        data = dict(self.source)
        data["output"] = {"directory": self.output_directory}
        return data


# Parameter : file_path (str): Input directory and filename of the configuration
# Reads a JSON configuration and returns a validated RunConfig.
def read_config(file_path):

    if not os.path.exists(file_path) or os.stat(file_path).st_size == 0:
        raise ConfigError(f"Config file {file_path} is empty or missing.")

    try:
        with open(file_path, "r", encoding="utf-8") as jsonfile:
            logging.info(f"Started reading config:{file_path}")
            loaded_data = json.load(jsonfile)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Error decoding JSON file {file_path}: {e}")

    run_config = build_config(loaded_data, source=file_path)
    logging.info(f"Config {file_path} validated: {run_config.profile.mode} profile")
    return run_config


def _section(data, name, source):
    section = data.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"Section '{name}' in {source} must be an object")
    return section


def _number(section, key, default, source, kind=float):
    if key not in section:
        logging.warning(f"Property {key} not set in {source}, using default {default}")
        return default
    try:
        value = float(section[key])
    except (TypeError, ValueError):
        raise ConfigError(f"Property {key} in {source} must be a number, got {section[key]!r}")
    if kind is int:
        if not value.is_integer():
            raise ConfigError(f"Property {key} in {source} must be an integer, got {section[key]!r}")
        return int(value)
    return value


def _build_profile(section, topology, source):
    mode = section.get("mode")
    if mode not in PROFILE_SCHEMA:
        raise ConfigError(f"Profile mode in {source} must be one of {sorted(PROFILE_SCHEMA)}, got {mode!r}")
    missing_columns = set(PROFILE_SCHEMA[mode]) - section.keys()
    if missing_columns:
        raise ConfigError(f"Missing required property: {', '.join(sorted(missing_columns))} in the file {source}")

    kwargs = {
        "tau_min": _number(section, "tau_min", None, source),
        "a_const": _number(section, "a", 1.0, source),
        "base_curv": _number(section, "base_curvature", 0.0, source),
        "base_area": _number(topology, "base_area", 1.0, source),
        "fiber_period": _number(topology, "fiber_period", 2 * pi, source),
    }
    if mode == IRREDUCIBLE:
        kwargs["c_bar"] = _number(section, "c_bar", None, source)
    function_key = "phi" if mode == IRREDUCIBLE else "q"

    try:
        if function_key in section:
            return polynomial_profile(mode, section[function_key], **kwargs)
        if "samples" in section:
            samples = section["samples"]
            return tabulated_profile(mode, samples["tau"], samples["values"], int(samples.get("order", 3)),
                                     **kwargs)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Invalid profile data in {source}: {e}")
    raise ConfigError(f"Missing required property: {function_key} or samples in the file {source}")


def _validate_profile(profile, source):
    # Q > 0 on (tau_min, 0], in particular at the boundary
    taus = np.linspace(profile.tau_min, 0.0, VALIDATION_SAMPLES + 1)[1:]
    try:
        for tau in taus[::-1]:
            derived_functions(profile, float(tau))
    except ProfileError as e:
        raise ConfigError(f"Profile in {source} fails validation: {e}")


def build_config(loaded_data, source="<memory>"):
    if not isinstance(loaded_data, dict):
        raise ConfigError(f"Config {source} must be a JSON object")
    profile_section = _section(loaded_data, "profile", source)
    numerics_section = _section(loaded_data, "numerics", source)
    topology_section = _section(loaded_data, "topology", source)
    output_section = _section(loaded_data, "output", source)

    try:
        profile = _build_profile(profile_section, topology_section, source)
    except ProfileError as e:
        raise ConfigError(f"Invalid profile in {source}: {e}")
    _validate_profile(profile, source)

    numerics = Numerics(
        series_order=_number(numerics_section, "series_order", config.SERIES_ORDER, source, int),
        quadrature_nodes=_number(numerics_section, "quadrature_nodes", config.QUADRATURE_NODES, source, int),
        fd_step=_number(numerics_section, "fd_step", config.FD_STEP, source),
    )
    if not 1 <= numerics.series_order <= config.MAX_SERIES_ORDER:
        raise ConfigError(f"series_order must be in 1..{config.MAX_SERIES_ORDER}, got {numerics.series_order}")
    if numerics.quadrature_nodes < 2:
        raise ConfigError(f"quadrature_nodes must be at least 2, got {numerics.quadrature_nodes}")
    if numerics.fd_step <= 0.0:
        raise ConfigError(f"fd_step must be positive, got {numerics.fd_step}")

    signature = _number(topology_section, "signature", 0, source, int)
    output_directory = str(output_section.get("directory", config.OUTPUT_PATH))
    return RunConfig(profile, numerics, signature, output_directory, source=dict(loaded_data))
