"""Scenario description files.

A scenario file is a JSON object with up to four keys:

    preset           name of a built-in scenario family (see _PRESETS)
    params           parameters of that preset, plus optional monitoring
                     transformations applied afterwards:
                       homodyne_shifts          [re, im] per channel
                       heterodyne_amplitudes    positive float per channel
                       heterodyne_frequencies   positive float per channel
                       phases                   detector phase per channel
    initial_state    four [re, im] amplitude pairs in the {uu,ud,du,dd}
                     basis; renormalized on load (a deviation larger than
                     1e-6 triggers a warning)
    custom_channels  explicit channel list instead of a preset; each entry
                     has id, locality ("A"|"B"|"joint"), matrix (nested
                     [re, im] pairs, 2x2 or 4x4), rate, and optional
                     shift [re, im] / het_freq

Exactly one of ``preset`` or ``custom_channels`` must be present.  Unknown
keys anywhere are errors — misspelled parameters must not pass silently.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .models import (
    Scenario, JumpChannel, preset_common_bath, preset_dephasing,
    preset_photon_counting, preset_rotated_thermal, preset_thermal,
    scenario_from_channels, validate_scenario, with_heterodyne,
    with_homodyne_shift, with_phase_rotation,
)

__all__ = ["load_scenario", "scenario_from_dict", "bundled_scenario_path",
           "bundled_scenario_names"]

_TOP_KEYS = {"preset", "params", "initial_state", "custom_channels"}
_CHANNEL_KEYS = {"id", "locality", "matrix", "rate", "shift", "het_freq"}
_TRANSFORM_KEYS = {"homodyne_shifts", "heterodyne_amplitudes",
                   "heterodyne_frequencies", "phases"}

_PRESET_PARAMS = {
    "photon_counting": {"gamma_a", "gamma_b"},
    "thermal": {"gamma_plus_a", "gamma_minus_a", "gamma_plus_b",
                "gamma_minus_b"},
    "dephasing": {"v_a", "v_b", "gamma_a", "gamma_b"},
    "rotated_thermal": {"u_a", "u_b", "gamma_plus_a", "gamma_minus_a",
                        "gamma_plus_b", "gamma_minus_b",
                        "channel_rates_a", "channel_rates_b"},
    "common_bath": {"gamma"},
}


def _complex(pair, where: str) -> complex:
    if (not isinstance(pair, (list, tuple)) or len(pair) != 2
            or not all(isinstance(x, (int, float)) for x in pair)):
        raise ConfigError(f"{where}: expected a [re, im] pair, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def _complex_matrix(rows, where: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ConfigError(f"{where}: expected a nested list of [re, im] pairs")
    try:
        return np.array([[_complex(x, where) for x in row] for row in rows])
    except (TypeError, ConfigError) as exc:
        raise ConfigError(f"{where}: malformed matrix ({exc})") from exc


def _number(value, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _build_preset(name: str, params: dict) -> Scenario:
    if name not in _PRESET_PARAMS:
        raise ConfigError(f"unknown preset {name!r}; valid presets: "
                          f"{sorted(_PRESET_PARAMS)}")
    own = {k: v for k, v in params.items() if k not in _TRANSFORM_KEYS}
    unknown = set(own) - _PRESET_PARAMS[name]
    if unknown:
        raise ConfigError(f"unknown parameter(s) {sorted(unknown)} for preset "
                          f"{name!r}; accepted: {sorted(_PRESET_PARAMS[name])}")
    try:
        if name == "photon_counting":
            return preset_photon_counting(_number(own["gamma_a"], "gamma_a"),
                                          _number(own["gamma_b"], "gamma_b"))
        if name == "thermal":
            return preset_thermal(
                _number(own["gamma_plus_a"], "gamma_plus_a"),
                _number(own["gamma_minus_a"], "gamma_minus_a"),
                _number(own["gamma_plus_b"], "gamma_plus_b"),
                _number(own["gamma_minus_b"], "gamma_minus_b"))
        if name == "dephasing":
            return preset_dephasing(
                [_number(x, "v_a") for x in own["v_a"]],
                [_number(x, "v_b") for x in own["v_b"]],
                _number(own["gamma_a"], "gamma_a"),
                _number(own["gamma_b"], "gamma_b"))
        if name == "rotated_thermal":
            kw = {}
            for side in ("a", "b"):
                cr = own.get(f"channel_rates_{side}")
                if cr is not None:
                    kw[f"channel_rates_{side}"] = [
                        _number(x, f"channel_rates_{side}") for x in cr]
            return preset_rotated_thermal(
                _complex_matrix(own["u_a"], "u_a"),
                _complex_matrix(own["u_b"], "u_b"),
                _number(own["gamma_plus_a"], "gamma_plus_a"),
                _number(own["gamma_minus_a"], "gamma_minus_a"),
                _number(own["gamma_plus_b"], "gamma_plus_b"),
                _number(own["gamma_minus_b"], "gamma_minus_b"), **kw)
        return preset_common_bath(_number(own["gamma"], "gamma"))
    except KeyError as exc:
        raise ConfigError(f"preset {name!r} is missing parameter {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"preset {name!r}: {exc}") from exc


def _apply_transforms(s: Scenario, params: dict) -> Scenario:
    try:
        if "phases" in params:
            s = with_phase_rotation(s, [_number(x, "phases")
                                        for x in params["phases"]])
        if "homodyne_shifts" in params:
            shifts = [_complex(x, "homodyne_shifts")
                      for x in params["homodyne_shifts"]]
            s = with_homodyne_shift(s, shifts)
        has_amp = "heterodyne_amplitudes" in params
        has_freq = "heterodyne_frequencies" in params
        if has_amp != has_freq:
            raise ConfigError("heterodyne_amplitudes and "
                              "heterodyne_frequencies must be given together")
        if has_amp:
            s = with_heterodyne(
                s, [_number(x, "heterodyne_amplitudes")
                    for x in params["heterodyne_amplitudes"]],
                [_number(x, "heterodyne_frequencies")
                 for x in params["heterodyne_frequencies"]])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return s


def _parse_channel(entry: dict, i: int) -> JumpChannel:
    if not isinstance(entry, dict):
        raise ConfigError(f"custom_channels[{i}] must be an object")
    unknown = set(entry) - _CHANNEL_KEYS
    if unknown:
        raise ConfigError(f"custom_channels[{i}]: unknown key(s) "
                          f"{sorted(unknown)}")
    try:
        cid = entry["id"]
        locality = entry["locality"]
        matrix = _complex_matrix(entry["matrix"], f"custom_channels[{i}].matrix")
        rate = _number(entry["rate"], f"custom_channels[{i}].rate")
    except KeyError as exc:
        raise ConfigError(f"custom_channels[{i}] is missing key {exc}") from exc
    shift = entry.get("shift")
    if shift is not None:
        shift = _complex(shift, f"custom_channels[{i}].shift")
    het = entry.get("het_freq")
    if het is not None:
        het = _number(het, f"custom_channels[{i}].het_freq")
    return JumpChannel(id=str(cid), locality=str(locality), op=matrix,
                       rate=rate, shift=shift, het_freq=het)


def scenario_from_dict(doc: dict, source: str = "<dict>") -> Scenario:
    """Build and validate a scenario from a parsed description."""
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{source}: unknown top-level key(s) "
                          f"{sorted(unknown)}; accepted: {sorted(_TOP_KEYS)}")
    preset = doc.get("preset")
    custom = doc.get("custom_channels")
    if (preset is None) == (custom is None):
        raise ConfigError(f"{source}: exactly one of 'preset' or "
                          "'custom_channels' is required")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{source}: 'params' must be an object")

    if preset is not None:
        s = _build_preset(str(preset), params)
        s = _apply_transforms(s, params)
    else:
        unknown_p = set(params) - _TRANSFORM_KEYS
        if unknown_p:
            raise ConfigError(f"{source}: unknown parameter(s) "
                              f"{sorted(unknown_p)} with custom channels")
        if not isinstance(custom, list) or not custom:
            raise ConfigError(f"{source}: custom_channels must be a non-empty "
                              "list")
        channels = tuple(_parse_channel(c, i) for i, c in enumerate(custom))
        s = scenario_from_channels(channels)
        s = _apply_transforms(s, params)

    if "initial_state" in doc:
        raw = doc["initial_state"]
        if not isinstance(raw, list) or len(raw) != 4:
            raise ConfigError(f"{source}: initial_state must list 4 "
                              "[re, im] amplitude pairs")
        psi = np.array([_complex(x, "initial_state") for x in raw])
        norm = np.linalg.norm(psi)
        if norm == 0.0:
            raise ConfigError(f"{source}: initial_state is the zero vector")
        if abs(norm - 1.0) > 1e-6:
            warnings.warn(f"{source}: initial state norm {norm:.8f} differs "
                          "from 1; renormalizing", stacklevel=2)
        s = s.with_initial(psi / norm)

    report = validate_scenario(s)
    if not report.ok:
        raise ConfigError(f"{source}: invalid scenario:\n  "
                          + "\n  ".join(report.violations))
    return s


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario description file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return scenario_from_dict(doc, source=str(path))


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario file shipped with the package (e.g. 'thermal_bell')."""
    if not name.endswith(".json"):
        name += ".json"
    path = Path(__file__).parent / "scenarios" / name
    if not path.is_file():
        raise ConfigError(f"no bundled scenario {name!r}; available: "
                          f"{', '.join(bundled_scenario_names())}")
    return path


def bundled_scenario_names() -> list[str]:
    return sorted(p.stem for p in
                  (Path(__file__).parent / "scenarios").glob("*.json"))
