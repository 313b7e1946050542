"""Scenario configuration: JSON in, validated immutable config out.

Rational-valued fields accept integers or exact ``"p/q"`` strings; floats
are rejected so a config can never smuggle rounding error into a run.
Unknown keys are errors, not warnings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Union

from .workload import ClientSpec, Phase, WorkloadError, check_phases

MAX_SEED = (1 << 64) - 1


class ConfigError(Exception):
    """A scenario document failed validation."""


def _rational(value: Any, field: str) -> Fraction:
    if type(value) is int:
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{field}: bad rational {value!r}") from exc
    if isinstance(value, float):
        raise ConfigError(
            f"{field}: floats are inexact, use an integer or a 'p/q' string")
    raise ConfigError(f"{field}: expected an integer or 'p/q' string")


def _positive(value: Any, field: str) -> Fraction:
    r = _rational(value, field)
    if r <= 0:
        raise ConfigError(f"{field} must be positive")
    return r


def _nonnegative(value: Any, field: str) -> Fraction:
    r = _rational(value, field)
    if r < 0:
        raise ConfigError(f"{field} must be >= 0")
    return r


def _int_at_least(value: Any, field: str, floor: int) -> int:
    if type(value) is not int:
        raise ConfigError(f"{field} must be an integer")
    if value < floor:
        raise ConfigError(f"{field} must be >= {floor}")
    return value


def _check_keys(obj: dict, allowed: dict, where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")
    for key, required in allowed.items():
        if required and key not in obj:
            raise ConfigError(f"missing key {key!r} in {where}")


@dataclass(frozen=True)
class BillingSpec:
    price: Fraction
    period: Fraction


@dataclass(frozen=True)
class StaticMode:
    workers: int


@dataclass(frozen=True)
class DynamicMode:
    baseline: int
    resize_cycle: Fraction


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    mode: Union[StaticMode, DynamicMode]
    per_vm_speed: Fraction
    deadline: Fraction
    db_duration: Fraction
    billing: BillingSpec
    horizon: int
    phases: tuple
    runs: int
    seed: int


_TOP_KEYS = {
    "name": True, "mode": True, "perVmSpeed": True, "deadline": True,
    "dbDuration": False, "billing": True, "horizon": True, "phases": True,
    "runs": True, "seed": True,
}
_BILLING_KEYS = {"price": True, "period": True}
_STATIC_KEYS = {"workers": True}
_DYNAMIC_KEYS = {"baseline": True, "resizeCycle": True}
_PHASE_KEYS = {
    "start": True, "count": True, "kind": True, "cycle": True,
    "taskCost": True, "jobs": True,
}


def _parse_mode(value: Any) -> Union[StaticMode, DynamicMode]:
    if not isinstance(value, dict) or len(value) != 1:
        raise ConfigError("mode must be {'static': {...}} or {'dynamic': {...}}")
    kind, body = next(iter(value.items()))
    if not isinstance(body, dict):
        raise ConfigError(f"mode.{kind} must be an object")
    if kind == "static":
        _check_keys(body, _STATIC_KEYS, "mode.static")
        return StaticMode(workers=_int_at_least(body["workers"],
                                                "mode.static.workers", 1))
    if kind == "dynamic":
        _check_keys(body, _DYNAMIC_KEYS, "mode.dynamic")
        return DynamicMode(
            baseline=_int_at_least(body["baseline"], "mode.dynamic.baseline", 1),
            resize_cycle=_positive(body["resizeCycle"],
                                   "mode.dynamic.resizeCycle"),
        )
    raise ConfigError(f"unknown mode {kind!r}")


def _parse_phase(obj: Any, where: str) -> Phase:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    _check_keys(obj, _PHASE_KEYS, where)
    kind = obj["kind"]
    if not isinstance(kind, str):
        raise ConfigError(f"{where}.kind must be a string")
    try:
        spec = ClientSpec(
            kind=kind,
            cycle=_positive(obj["cycle"], f"{where}.cycle"),
            task_cost=_positive(obj["taskCost"], f"{where}.taskCost"),
            jobs=_int_at_least(obj["jobs"], f"{where}.jobs", 1),
        )
        return Phase(
            start=_nonnegative(obj["start"], f"{where}.start"),
            count=_int_at_least(obj["count"], f"{where}.count", 1),
            spec=spec,
        )
    except WorkloadError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(data: Any, source: str = "<config>") -> ScenarioConfig:
    """Validate a decoded JSON document into a :class:`ScenarioConfig`."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be an object")
    _check_keys(data, _TOP_KEYS, "the scenario")
    name = data["name"]
    if not isinstance(name, str) or not name:
        raise ConfigError("name must be a non-empty string")

    billing_obj = data["billing"]
    if not isinstance(billing_obj, dict):
        raise ConfigError("billing must be an object")
    _check_keys(billing_obj, _BILLING_KEYS, "billing")
    billing = BillingSpec(
        price=_positive(billing_obj["price"], "billing.price"),
        period=_positive(billing_obj["period"], "billing.period"),
    )

    phases_obj = data["phases"]
    if not isinstance(phases_obj, list) or not phases_obj:
        raise ConfigError("phases must be a non-empty list")
    try:
        phases = check_phases(
            [_parse_phase(p, f"phases[{i}]") for i, p in enumerate(phases_obj)])
    except WorkloadError as exc:
        raise ConfigError(str(exc)) from None

    horizon = _int_at_least(data["horizon"], "horizon", 1)
    if horizon <= phases[-1].start:
        raise ConfigError("horizon must exceed the last phase start")

    seed = _int_at_least(data["seed"], "seed", 0)
    if seed > MAX_SEED:
        raise ConfigError("seed must fit in 64 bits")

    return ScenarioConfig(
        name=name,
        mode=_parse_mode(data["mode"]),
        per_vm_speed=_positive(data["perVmSpeed"], "perVmSpeed"),
        deadline=_positive(data["deadline"], "deadline"),
        db_duration=_nonnegative(data.get("dbDuration", 1), "dbDuration"),
        billing=billing,
        horizon=horizon,
        phases=phases,
        runs=_int_at_least(data["runs"], "runs", 1),
        seed=seed,
    )


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    """Read and validate a scenario JSON file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON: {exc}") from exc
    return parse_config(data, source=str(p))


def bundled_names() -> list:
    """Names of the scenario configs shipped inside the package."""
    root = resources.files(__package__) / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def find_config(name_or_path: Union[str, Path]) -> ScenarioConfig:
    """Load a config by file path or by bundled scenario name."""
    p = Path(name_or_path)
    if p.suffix == ".json" or p.exists():
        return load_config(p)
    packaged = resources.files(__package__) / "configs" / f"{name_or_path}.json"
    if packaged.is_file():
        return parse_config(json.loads(packaged.read_text()),
                            source=str(name_or_path))
    raise ConfigError(
        f"no such config {name_or_path!r}; bundled scenarios: "
        + ", ".join(bundled_names()))
