"""Experiment configs in, run records and CSV tables out."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any

from pbsgates.devices import DEFAULT_PAIR_RATE, DEVICES, HeraldPolicy
from pbsgates.imperfections import DEFAULT_COHERENCE_LENGTH_UM, ExtinctionSpec, VisibilityModel
from pbsgates.qubit import QubitState

SCHEMA_VERSION = 1
TOOL = "pbsgates"

_TOP_KEYS = {
    "schema_version",
    "device",
    "inputs",
    "policy",
    "visibility",
    "delay_um",
    "coherence_length_um",
    "leak",
    "pair_rate",
    "format",
    "scan",
    "visibilities",
    "n_random",
    "seed",
}
_SCAN_KEYS = {"start_deg", "stop_deg", "step_deg"}
_INPUT_NAMES = {"control", "target", "q1", "q2"}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class InvariantViolation(RuntimeError):
    """A numerical result broke a physical invariant."""


@dataclass(frozen=True)
class ScanRange:
    start_deg: float = 0.0
    stop_deg: float = 180.0
    step_deg: float = 5.0

    def angles(self) -> list[float]:
        if not self.step_deg > 0:
            raise ConfigError(f"scan step must be positive, got {self.step_deg!r}")
        if self.stop_deg < self.start_deg:
            raise ConfigError(f"empty scan range [{self.start_deg}, {self.stop_deg}]")
        n = int(math.floor((self.stop_deg - self.start_deg) / self.step_deg + 1e-9))
        return [self.start_deg + k * self.step_deg for k in range(n + 1)]


@dataclass(frozen=True)
class ExperimentConfig:
    device: str = "dcnot"
    control: QubitState = field(default_factory=QubitState.zero)
    target: QubitState = field(default_factory=QubitState.zero)
    policy: HeraldPolicy = HeraldPolicy.STRICT
    visibility: VisibilityModel = field(default_factory=VisibilityModel)
    extinction: ExtinctionSpec = field(default_factory=ExtinctionSpec)
    pair_rate: float = DEFAULT_PAIR_RATE
    format: str = "csv"
    scan: ScanRange = field(default_factory=ScanRange)
    visibilities: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    n_random: int = 100
    seed: int = 0
    raw: dict = field(default_factory=dict, compare=False, repr=False)


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{name} must be a finite number, got {value!r}")
    return float(value)


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {', '.join(unknown)}")


def parse_qubit(spec: Any, name: str) -> QubitState:
    """``{"angle_deg", "phase_deg"}`` or ``{"amplitudes": [[re, im], [re, im]]}`` (renormalized)."""
    if isinstance(spec, dict) and "amplitudes" in spec:
        _reject_unknown(spec, {"amplitudes"}, f"inputs.{name}")
        amps = spec["amplitudes"]
        if not (isinstance(amps, list) and len(amps) == 2 and all(isinstance(a, list) and len(a) == 2 for a in amps)):
            raise ConfigError(f"inputs.{name}.amplitudes must be [[re, im], [re, im]]")
        alpha, beta = (complex(_number(re, name), _number(im, name)) for re, im in amps)
        try:
            return QubitState.normalized(alpha, beta)
        except ValueError as exc:
            raise ConfigError(f"inputs.{name}: {exc}") from None
    if isinstance(spec, dict):
        _reject_unknown(spec, {"angle_deg", "phase_deg"}, f"inputs.{name}")
        if "angle_deg" not in spec:
            raise ConfigError(f"inputs.{name} needs angle_deg or amplitudes")
        return QubitState.from_angle(_number(spec["angle_deg"], name), _number(spec.get("phase_deg", 0.0), name))
    if spec in (0, 1) and not isinstance(spec, bool):
        return QubitState.basis(spec)
    raise ConfigError(f"inputs.{name} must be 0, 1, or an object")


def qubit_to_json(q: QubitState) -> dict:
    return {"amplitudes": [[q.alpha.real, q.alpha.imag], [q.beta.real, q.beta.imag]]}


def parse_config(data: Any) -> ExperimentConfig:
    _reject_unknown(data, _TOP_KEYS, "config")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {data.get('schema_version')!r}")
    device = data.get("device", "dcnot")
    if device not in DEVICES:
        raise ConfigError(f"device must be one of {DEVICES}, got {device!r}")
    inputs = data.get("inputs", {})
    _reject_unknown(inputs, _INPUT_NAMES, "inputs")
    # parity check: q1 is the transferred (target-role) qubit, q2 the reference
    if ("q1" in inputs and "target" in inputs) or ("q2" in inputs and "control" in inputs):
        raise ConfigError("use either control/target or q1/q2, not both")
    control = parse_qubit(inputs.get("control", inputs.get("q2", 0)), "control")
    target = parse_qubit(inputs.get("target", inputs.get("q1", 0)), "target")
    try:
        policy = HeraldPolicy(data.get("policy", "strict"))
    except ValueError:
        raise ConfigError(f"policy must be 'strict' or 'feedforward', got {data.get('policy')!r}") from None
    try:
        if "delay_um" in data:
            if "visibility" in data:
                raise ConfigError("give visibility or delay_um, not both")
            visibility = VisibilityModel(
                delay=_number(data["delay_um"], "delay_um"),
                coherence_length=_number(data.get("coherence_length_um", DEFAULT_COHERENCE_LENGTH_UM), "coherence_length_um"),
            )
        else:
            visibility = VisibilityModel(_number(data.get("visibility", 1.0), "visibility"))
        extinction = ExtinctionSpec(_number(data.get("leak", 0.0), "leak"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    pair_rate = _number(data.get("pair_rate", DEFAULT_PAIR_RATE), "pair_rate")
    if pair_rate < 0:
        raise ConfigError("pair_rate must be non-negative")
    fmt = data.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be 'csv' or 'json', got {fmt!r}")
    scan_data = data.get("scan", {})
    _reject_unknown(scan_data, _SCAN_KEYS, "scan")
    scan = ScanRange(**{k: _number(v, f"scan.{k}") for k, v in scan_data.items()})
    vis = data.get("visibilities", list(ExperimentConfig.visibilities))
    if not isinstance(vis, list) or not vis:
        raise ConfigError("visibilities must be a non-empty list")
    vis = tuple(_number(v, "visibilities") for v in vis)
    for v in vis:
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"visibility {v!r} outside [0, 1]")
    n_random = data.get("n_random", 100)
    seed = data.get("seed", 0)
    for name, value in (("n_random", n_random), ("seed", seed)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise ConfigError(f"{name} must be a non-negative integer, got {value!r}")
    return ExperimentConfig(
        device=device,
        control=control,
        target=target,
        policy=policy,
        visibility=visibility,
        extinction=extinction,
        pair_rate=pair_rate,
        format=fmt,
        scan=scan,
        visibilities=vis,
        n_random=n_random,
        seed=seed,
        raw=dict(data),
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    return parse_config(data)


def format_number(x) -> str:
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if x == 0.0:
        return "0"
    return f"{x:.12g}"


def to_csv(columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(v) if isinstance(v, (int, float)) else v for v in row])
    return buf.getvalue()


@dataclass
class RunRecord:
    command: str
    config: dict
    columns: list[str]
    rows: list[list]
    extra: dict = field(default_factory=dict)
    tool_version: str = ""
    timestamp: str = ""
    schema_version: int = SCHEMA_VERSION
    tool: str = TOOL

    def __post_init__(self):
        if not self.tool_version:
            from pbsgates import __version__

            self.tool_version = __version__
        if not self.timestamp:
            self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


_RECORD_KEYS = {"command", "config", "columns", "rows", "extra", "tool_version", "timestamp", "schema_version", "tool"}


def parse_run_record(text: str) -> RunRecord:
    """Parse and validate a JSON run record, including its echoed config."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed run record: {exc}") from None
    _reject_unknown(data, _RECORD_KEYS, "run record")
    missing = sorted(_RECORD_KEYS - set(data))
    if missing:
        raise ConfigError(f"run record missing field(s): {', '.join(missing)}")
    if data["schema_version"] != SCHEMA_VERSION or data["tool"] != TOOL:
        raise ConfigError("run record has an unsupported schema or tool")
    parse_config(data["config"])
    width = len(data["columns"])
    for row in data["rows"]:
        if len(row) != width:
            raise ConfigError(f"row {row!r} does not match {width} columns")
    return RunRecord(**data)
