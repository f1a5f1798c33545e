"""Typed TOML experiment configuration: loading, validation, overrides.

The format is deliberately flat: a ``[code]`` section, one ``[decoder.<name>]``
section per decoder variant, and a ``[run]`` section, holding only strings,
numbers, booleans and lists.  Unknown keys are fatal.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .codes import make_code_spec
from .flip_decoder import DecoderConfig
from .sim_harness import ExperimentPlan

WORKERS_ENV_VAR = "POLARFLIP_WORKERS"


class ConfigError(ValueError):
    """Configuration file or override is invalid."""


# (type, default, description); REQUIRED means no default.
REQUIRED = object()

CODE_KEYS = {
    "block_length": (int, REQUIRED, "code length N, a power of two"),
    "payload_bits": (int, REQUIRED, "payload dimension k"),
    "crc_bits": (int, 16, "CRC width r (0 or 16)"),
    "design_ebno_db": (float, 0.0, "construction design point, dB"),
    "construction": (str, "gaussian-approx",
                     "gaussian-approx | bhattacharyya | file"),
    "frozen_file": (str, "", "info-set file for construction = 'file'"),
    "label": (str, "", "row label; defaults to P<N>_<k>"),
}

DECODER_KEYS = {
    "algorithm": (str, REQUIRED, "sc | scf | dscf"),
    "tmax": (int, 1, "maximum number of trials including the first pass"),
    "omega": (int, 1, "maximum simultaneous flips per trial (dscf)"),
    "srm": (bool, False, "enable the restart mechanism"),
    "penalty": (str, "approx", "flip-metric penalty: approx | exact"),
    "penalty_c": (float, 1.0, "scale of the exact penalty, in (0, 1]"),
    "pe_count": (int, 64, "processing elements of the latency model"),
}

RUN_KEYS = {
    "ebno_db": (list, REQUIRED, "Eb/N0 sweep points, dB"),
    "min_frames": (int, 100_000, "minimum frames per point"),
    "min_frame_errors": (int, 1_000, "frame errors required to stop"),
    "max_frames": (int, 10_000_000, "hard frame cap per point"),
    "seed": (int, 1, "run seed; frame i uses stream (seed, i)"),
    "paired": (bool, False, "decode every frame with restart off and on"),
    "workers": (int, 0, f"worker processes; 0 = ${WORKERS_ENV_VAR} or 1"),
    "chunk_size": (int, 4096, "frames per scheduling chunk"),
}

_SECTIONS = {"code": CODE_KEYS, "run": RUN_KEYS}


def describe_keys() -> str:
    """Human-readable key reference for --help."""
    lines = []
    for section, keys in (("code", CODE_KEYS), ("decoder.<name>", DECODER_KEYS),
                          ("run", RUN_KEYS)):
        lines.append(f"[{section}]")
        for key, (typ, default, info) in keys.items():
            d = "required" if default is REQUIRED else f"default {default!r}"
            lines.append(f"  {key} ({typ.__name__}, {d}): {info}")
    return "\n".join(lines)


def _coerce(section: str, key: str, value, typ):
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if typ is not list and isinstance(value, bool) is not (typ is bool):
        raise ConfigError(f"[{section}] {key}: expected {typ.__name__}, got {value!r}")
    if not isinstance(value, typ):
        raise ConfigError(f"[{section}] {key}: expected {typ.__name__}, got {value!r}")
    return value


def _validate_section(name: str, table: dict, schema: dict) -> dict:
    if not isinstance(table, dict):
        raise ConfigError(f"[{name}] must be a table")
    out = {}
    for key, value in table.items():
        if key not in schema:
            raise ConfigError(f"[{name}] has unknown key {key!r}")
        out[key] = _coerce(name, key, value, schema[key][0])
    for key, (typ, default, _) in schema.items():
        if key not in out:
            if default is REQUIRED:
                raise ConfigError(f"[{name}] is missing required key {key!r}")
            out[key] = default
    return out


def parse_config_text(text: str) -> dict:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    return _normalize(raw)


def load_config(path) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error in {path}: {exc}") from exc
    return _normalize(raw)


def _normalize(raw: dict) -> dict:
    for section in raw:
        if section not in ("code", "decoder", "run"):
            raise ConfigError(f"unknown section [{section}]")
    if "code" not in raw:
        raise ConfigError("missing [code] section")
    if "run" not in raw:
        raise ConfigError("missing [run] section")
    if "decoder" not in raw or not raw["decoder"]:
        raise ConfigError("missing [decoder.<name>] section")

    config = {"code": _validate_section("code", raw["code"], CODE_KEYS),
              "run": _validate_section("run", raw["run"], RUN_KEYS),
              "decoder": {}}
    decoder_table = raw["decoder"]
    if any(not isinstance(v, dict) for v in decoder_table.values()):
        # A bare [decoder] section: treat it as a single unnamed variant.
        decoder_table = {"default": decoder_table}
    for name, table in decoder_table.items():
        config["decoder"][name] = _validate_section(
            f"decoder.{name}", table, DECODER_KEYS)

    ebno = config["run"]["ebno_db"]
    if not ebno or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                           for v in ebno):
        raise ConfigError("[run] ebno_db must be a non-empty list of numbers")
    config["run"]["ebno_db"] = [float(v) for v in ebno]
    return config


def _parse_override_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(config: dict, overrides) -> dict:
    """Apply ``key=value`` strings.  Dotted keys address a section
    (``run.seed=7``, ``decoder.scf.tmax=9``); bare keys go to whichever
    schema defines them, decoder keys fanning out to every variant."""
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, _, raw_value = item.partition("=")
        value = _parse_override_value(raw_value.strip())
        parts = path.strip().split(".")
        if len(parts) == 1:
            key = parts[0]
            if key in DECODER_KEYS:
                typ = DECODER_KEYS[key][0]
                for name in config["decoder"]:
                    config["decoder"][name][key] = _coerce(
                        f"decoder.{name}", key, value, typ)
            elif key in RUN_KEYS:
                config["run"][key] = _coerce("run", key, value, RUN_KEYS[key][0])
            elif key in CODE_KEYS:
                config["code"][key] = _coerce("code", key, value, CODE_KEYS[key][0])
            else:
                raise ConfigError(f"override {key!r} matches no known key")
        elif len(parts) == 2 and parts[0] in _SECTIONS:
            section, key = parts
            schema = _SECTIONS[section]
            if key not in schema:
                raise ConfigError(f"[{section}] has no key {key!r}")
            config[section][key] = _coerce(section, key, value, schema[key][0])
        elif len(parts) == 3 and parts[0] == "decoder":
            _, name, key = parts
            if name not in config["decoder"]:
                raise ConfigError(f"no decoder section named {name!r}")
            if key not in DECODER_KEYS:
                raise ConfigError(f"[decoder.{name}] has no key {key!r}")
            config["decoder"][name][key] = _coerce(
                f"decoder.{name}", key, value, DECODER_KEYS[key][0])
        else:
            raise ConfigError(f"override path {path!r} not understood")
    return config


def resolve_workers(config_workers: int, cli_workers=None) -> int:
    if cli_workers is not None:
        return max(1, cli_workers)
    if config_workers > 0:
        return config_workers
    env = os.environ.get(WORKERS_ENV_VAR, "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"${WORKERS_ENV_VAR}={env!r} is not an integer") from exc
    return 1


def build_code_spec(config: dict):
    code = config["code"]
    try:
        return make_code_spec(
            N=code["block_length"], k=code["payload_bits"], crc_bits=code["crc_bits"],
            design_ebno_db=code["design_ebno_db"], construction=code["construction"],
            frozen_file=code["frozen_file"] or None, label=code["label"])
    except (ValueError, OSError) as exc:
        raise ConfigError(f"invalid [code] section: {exc}") from exc


def build_plans(config: dict, cli_workers=None, paired=None):
    """Instantiate one ExperimentPlan per decoder variant."""
    spec = build_code_spec(config)
    run = config["run"]
    workers = resolve_workers(run["workers"], cli_workers)
    plans = []
    for name, dec in config["decoder"].items():
        try:
            decoder = DecoderConfig(
                spec=spec, algorithm=dec["algorithm"], t_max=dec["tmax"],
                omega=dec["omega"], srm_enabled=dec["srm"],
                penalty_mode=dec["penalty"], penalty_c=dec["penalty_c"],
                pe_count=dec["pe_count"])
            plan = ExperimentPlan(
                code=spec, decoder=decoder, ebno_points=list(run["ebno_db"]),
                min_frames=run["min_frames"], min_frame_errors=run["min_frame_errors"],
                max_frames=run["max_frames"], seed=run["seed"],
                paired_mode=run["paired"] if paired is None else paired,
                workers=workers, chunk_size=run["chunk_size"],
                decoder_label=name if name != "default" else "")
        except ValueError as exc:
            raise ConfigError(f"invalid configuration for decoder {name!r}: {exc}") from exc
        plans.append((name, plan))
    return plans
