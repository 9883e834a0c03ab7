"""Scenario files: one INI document describing a complete simulated run.

A scenario pins everything that feeds the deterministic stack: ambient
curves, model gains, initial conditions, network timing, loop periods,
ports, the control mode, and a list of timed events.  Same file, same
seed, same build: byte-identical trajectory output.

Unknown sections or keys are errors.  Typos silently reverting a gain to
its default would invalidate a run, so strictness wins over tolerance.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from greenhouse.fuzzy import Setpoints
from greenhouse.plant import AmbientProfile, PlantParams

EVENT_COMMANDS = ("set-soil", "auto", "manual", "net-down", "net-up")


class ScenarioError(ValueError):
    """Malformed scenario text."""


@dataclass(frozen=True)
class ScenarioEvent:
    at: float
    command: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class Scenario:
    name: str = "default"
    ambient: AmbientProfile = AmbientProfile()
    params: PlantParams = PlantParams()
    initial_temperature: float = 18.0
    initial_humidity: float = 65.0
    initial_light: float = 8000.0
    initial_soil: float = 0.5
    seed: int = 0
    sampling_period: float = 2.0
    hop_latency: float = 0.05
    serial_latency: float = 0.02
    join_delay: float = 1.0
    split_banks: bool = False
    push_period: float = 5.0
    alarm_period: float = 1.0
    auto_period: float = 10.0
    staleness_bound: float = 15.0
    queue_bound: int = 64
    mode: str = "manual"
    setpoints: Setpoints = Setpoints()
    duration: float = 600.0
    dt: float = 1.0
    gateway_port: int = 8080
    app_port: int = 8088
    bridge_port: int = 8090
    events: tuple[ScenarioEvent, ...] = ()


# (section, key) -> scenario construction slot.  "ambient." and "params."
# prefixes land inside the nested dataclasses.
_SCHEMA: dict[str, dict[str, tuple[str, type]]] = {
    "ambient": {
        "temp_mean": ("ambient.temp_mean", float),
        "temp_swing": ("ambient.temp_swing", float),
        "hum_mean": ("ambient.hum_mean", float),
        "hum_swing": ("ambient.hum_swing", float),
        "daylight_peak": ("ambient.daylight_peak", float),
        "sunrise_hour": ("ambient.sunrise_hour", float),
        "sunset_hour": ("ambient.sunset_hour", float),
        "daylight_constant": ("ambient.daylight_constant", float),
    },
    "plant": {
        "lambda_temp": ("params.lambda_temp", float),
        "gain_heat": ("params.gain_heat", float),
        "gain_cool": ("params.gain_cool", float),
        "lambda_hum": ("params.lambda_hum", float),
        "gain_humidifier": ("params.gain_humidifier", float),
        "gain_dehumidify": ("params.gain_dehumidify", float),
        "gain_evaporation": ("params.gain_evaporation", float),
        "gain_led": ("params.gain_led", float),
        "gain_drip": ("params.gain_drip", float),
        "drying_rate": ("params.drying_rate", float),
        "soil_threshold": ("params.soil_threshold", float),
        "noise_temp": ("params.noise_temp", float),
        "noise_hum": ("params.noise_hum", float),
        "temperature": ("initial_temperature", float),
        "humidity": ("initial_humidity", float),
        "light": ("initial_light", float),
        "soil": ("initial_soil", float),
    },
    "network": {
        "sampling_period": ("sampling_period", float),
        "hop_latency": ("hop_latency", float),
        "serial_latency": ("serial_latency", float),
        "join_delay": ("join_delay", float),
        "split_banks": ("split_banks", bool),
    },
    "gateway": {
        "push_period": ("push_period", float),
        "alarm_period": ("alarm_period", float),
    },
    "server": {
        "auto_period": ("auto_period", float),
        "staleness_bound": ("staleness_bound", float),
        "queue_bound": ("queue_bound", int),
    },
    "control": {
        "mode": ("mode", str),
        "temperature": ("setpoints.temperature", float),
        "humidity": ("setpoints.humidity", float),
        "light": ("setpoints.light", float),
    },
    "run": {
        "duration": ("duration", float),
        "dt": ("dt", float),
        "seed": ("seed", int),
    },
    "ports": {
        "gateway": ("gateway_port", int),
        "app": ("app_port", int),
        "bridge": ("bridge_port", int),
    },
}


def _parse_event(key: str, value: str) -> ScenarioEvent:
    parts = value.split()
    if len(parts) < 3 or parts[0] != "at":
        raise ScenarioError(
            f"event {key!r}: expected 'at <seconds> <command> [args]', got {value!r}"
        )
    try:
        at = float(parts[1])
    except ValueError:
        raise ScenarioError(f"event {key!r}: bad time {parts[1]!r}") from None
    command = parts[2]
    if command not in EVENT_COMMANDS:
        raise ScenarioError(
            f"event {key!r}: unknown command {command!r}"
            f" (expected one of {', '.join(EVENT_COMMANDS)})"
        )
    return ScenarioEvent(at=at, command=command, args=tuple(parts[3:]))


def parse_scenario(text: str, name: str = "inline") -> Scenario:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=name)
    except configparser.Error as exc:
        raise ScenarioError(str(exc)) from exc

    flat: dict[str, object] = {}
    ambient_kw: dict[str, float] = {}
    params_kw: dict[str, float] = {}
    setpoint_kw: dict[str, float] = {}
    events: list[ScenarioEvent] = []

    for section in parser.sections():
        if section == "events":
            for key, value in parser.items("events"):
                events.append(_parse_event(key, value))
            continue
        schema = _SCHEMA.get(section)
        if schema is None:
            raise ScenarioError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in schema:
                raise ScenarioError(f"unknown key {key!r} in [{section}]")
            slot, cast = schema[key]
            try:
                if cast is bool:
                    value: object = parser.getboolean(section, key)
                else:
                    value = cast(raw)
            except ValueError:
                raise ScenarioError(
                    f"bad value {raw!r} for {key!r} in [{section}]"
                ) from None
            if slot.startswith("ambient."):
                ambient_kw[slot.split(".", 1)[1]] = value  # type: ignore[assignment]
            elif slot.startswith("params."):
                params_kw[slot.split(".", 1)[1]] = value  # type: ignore[assignment]
            elif slot.startswith("setpoints."):
                setpoint_kw[slot.split(".", 1)[1]] = value  # type: ignore[assignment]
            else:
                flat[slot] = value

    if "sunrise_hour" in ambient_kw:
        ambient_kw["sunrise"] = ambient_kw.pop("sunrise_hour") * 3600.0
    if "sunset_hour" in ambient_kw:
        ambient_kw["sunset"] = ambient_kw.pop("sunset_hour") * 3600.0

    mode = flat.get("mode", "manual")
    if mode not in ("manual", "automatic"):
        raise ScenarioError(f"mode must be manual or automatic, got {mode!r}")

    events.sort(key=lambda e: e.at)
    return Scenario(
        name=name,
        ambient=AmbientProfile(**ambient_kw),
        params=PlantParams(**params_kw),
        setpoints=Setpoints(**setpoint_kw),
        events=tuple(events),
        **flat,  # type: ignore[arg-type]
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), name=path.stem)


def default_scenario() -> Scenario:
    return Scenario()
