"""Automatic-mode temperature and humidity controller.

A quantized table-lookup controller: crisp error -> integer level -> label
-> rule cell -> crisp output -> gear.  There are no membership functions;
the quantization factors and the two 35-cell rule tables fully determine
the behavior.  Positive temperature output drives the heating plate,
negative the cooling fan; positive humidity output drives the humidifier,
negative the dehumidify fan.

The rule tables also ship as a plain-text data file which is verified
against the constants below at import time, so the tables can be audited
without reading code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

from greenhouse.protocol import ActuatorBank
from greenhouse.util import round_half_away

RULES_RESOURCE = "fuzzy_rules.txt"

LABELS_7 = ("NB", "NM", "NS", "ZO", "PS", "PM", "PB")  # levels -3..3
LABELS_5_INPUT = ("NM", "NS", "ZO", "PS", "PM")  # levels -2..2
LABELS_5_HCON = ("NB", "NM", "NS", "ZO", "PS")  # levels -3..1


class DomainError(ValueError):
    """Level or label outside the set it belongs to."""


# -- Quantization ------------------------------------------------------------


@dataclass(frozen=True)
class QuantizerSpec:
    """Maps a crisp value from a basic domain onto integer fuzzy levels."""

    lo: float
    hi: float
    factor: float
    level_min: int
    level_max: int

    def quantize(self, value: float) -> int:
        clamped = max(self.lo, min(self.hi, value))
        level = round_half_away(clamped * self.factor)
        return max(self.level_min, min(self.level_max, level))


TEMP_ERROR_SPEC = QuantizerSpec(-5.0, 5.0, 3 / 5, -3, 3)
TEMP_DELTA_SPEC = QuantizerSpec(-2.0, 2.0, 2 / 2, -2, 2)
# Humidity errors are in percentage points.
HUM_ERROR_SPEC = QuantizerSpec(-20.0, 20.0, 3 / 20, -3, 3)
HUM_DELTA_SPEC = QuantizerSpec(-5.0, 5.0, 2 / 5, -2, 2)

# Output factor, shared by both channels; crisp output = level / factor.
OUTPUT_FACTOR = 3 / 5


def level_to_label(level: int, labels: tuple[str, ...]) -> str:
    offset = {LABELS_7: 3, LABELS_5_INPUT: 2, LABELS_5_HCON: 3}[labels]
    index = level + offset
    if not 0 <= index < len(labels):
        raise DomainError(f"level {level} outside {labels}")
    return labels[index]


def label_to_level(label: str, labels: tuple[str, ...]) -> int:
    offset = {LABELS_7: 3, LABELS_5_INPUT: 2, LABELS_5_HCON: 3}[labels]
    try:
        return labels.index(label) - offset
    except ValueError:
        raise DomainError(f"label {label} outside {labels}") from None


# -- Rule tables -------------------------------------------------------------

# Keyed by (delta-error label, error label).  Row order NM..PM, column
# order NB..PB.


def _table(rows: dict[str, str]) -> dict[tuple[str, str], str]:
    out = {}
    for de_label, cells in rows.items():
        for e_label, cell in zip(LABELS_7, cells.split()):
            out[(de_label, e_label)] = cell
    return out


TEMP_RULES = _table(
    {
        "NM": "NB NB NM NS PS PS PM",
        "NS": "NB NM NS NS PS PM PM",
        "ZO": "NM NS NS ZO PS PM PM",
        "PS": "NS NS NS PS PM PM PB",
        "PM": "NS NS PS PS PM PB PB",
    }
)

HUM_RULES = _table(
    {
        "NM": "NB NB NM NS PS PS PS",
        "NS": "NB NM NS NS PS PS PS",
        "ZO": "NM NS NS ZO PS PS PS",
        "PS": "NS NS NS ZO PS PS PS",
        "PM": "NS NS ZO PS PS PS PS",
    }
)


def rule_lookup(
    e_label: str, de_label: str, table: dict[tuple[str, str], str]
) -> str:
    if e_label not in LABELS_7:
        raise DomainError(f"error label {e_label} outside {LABELS_7}")
    if de_label not in LABELS_5_INPUT:
        raise DomainError(f"delta label {de_label} outside {LABELS_5_INPUT}")
    return table[(de_label, e_label)]


def dequantize(out_label: str, channel: str) -> float:
    """Crisp output for a rule-cell label.  Temperature outputs use the
    full 7-label set; humidity outputs stop at PS (level +1), giving the
    asymmetric crisp range [-5, 5/3]."""
    if channel == "temperature":
        level = label_to_level(out_label, LABELS_7)
    elif channel == "humidity":
        level = label_to_level(out_label, LABELS_5_HCON)
    else:
        raise DomainError(f"unknown channel {channel!r}")
    return level / OUTPUT_FACTOR


# -- Rule-table data file ----------------------------------------------------


def load_rule_tables(text: str | None = None) -> dict[str, dict[tuple[str, str], str]]:
    """Parse the shipped rule-table file: a [channel] header followed by
    five rows of `DE: cell cell cell cell cell cell cell`."""
    if text is None:
        text = (
            resources.files("greenhouse")
            .joinpath("data", RULES_RESOURCE)
            .read_text(encoding="utf-8")
        )
    tables: dict[str, dict[tuple[str, str], str]] = {}
    channel = None
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            channel = line[1:-1]
            tables[channel] = {}
            continue
        if channel is None:
            raise ValueError(f"rule row before any [channel] header: {line!r}")
        de_label, _, cells = line.partition(":")
        de_label = de_label.strip()
        parts = cells.split()
        if de_label not in LABELS_5_INPUT or len(parts) != 7:
            raise ValueError(f"bad rule row: {line!r}")
        for e_label, cell in zip(LABELS_7, parts):
            tables[channel][(de_label, e_label)] = cell
    return tables


def verify_rule_tables() -> None:
    """Check the shipped table file against the built-in constants; raises
    ValueError on any cell mismatch."""
    tables = load_rule_tables()
    for name, builtin in (("temperature", TEMP_RULES), ("humidity", HUM_RULES)):
        shipped = tables.get(name)
        if shipped is None:
            raise ValueError(f"rule file is missing channel [{name}]")
        if len(shipped) != 35:
            raise ValueError(f"channel [{name}] has {len(shipped)} cells, not 35")
        for key in builtin:
            if shipped[key] != builtin[key]:
                raise ValueError(
                    f"channel [{name}] cell {key}: file says {shipped[key]}, "
                    f"code says {builtin[key]}"
                )


# -- Output mapping ----------------------------------------------------------


def commands_from_outputs(t_crisp: float, h_crisp: float) -> dict[str, int]:
    """Map the two crisp controller outputs onto actuator gears.  Heating
    and cooling are mutually exclusive by sign, as are the dehumidify fan
    and the humidifier."""
    heating = cooling = dehumidify = humidifier = 0
    if t_crisp > 0:
        heating = min(5, round_half_away(t_crisp))
    elif t_crisp < 0:
        cooling = min(5, round_half_away(-t_crisp))
    if h_crisp < 0:
        dehumidify = min(5, round_half_away(-h_crisp))
    elif h_crisp >= 0.5:
        humidifier = 1
    return {
        "heating_gear": heating,
        "cooling_gear": cooling,
        "dehumidify_gear": dehumidify,
        "humidifier_switch": humidifier,
    }


LIGHT_HYSTERESIS = 0.05


def light_rule(
    setpoint_lux: float, measured_lux: float, prev_gear: int | None = None
) -> int:
    """Proportional-band LED gear: the deeper the light deficit relative to
    the setpoint, the higher the gear.  With a previous gear supplied, the
    deficit ratio must clear the band edge by 5 points before the gear
    changes, which stops chattering at the boundary."""
    if setpoint_lux <= 0:
        return 0
    ratio = (setpoint_lux - measured_lux) / setpoint_lux
    target = 0 if ratio <= 0 else min(3, max(1, math.ceil(3 * ratio)))
    if prev_gear is None or target == prev_gear:
        return target
    if target > prev_gear:
        if ratio > prev_gear / 3 + LIGHT_HYSTERESIS:
            return target
        return prev_gear
    if ratio <= (prev_gear - 1) / 3 - LIGHT_HYSTERESIS:
        return target
    return prev_gear


def soil_rule(soil_states) -> int:
    """Drip irrigation: on while any location reports dry (0)."""
    return 1 if any(s == 0 for s in soil_states) else 0


# -- Controller --------------------------------------------------------------


@dataclass(frozen=True)
class ControllerState:
    prev_temp_error: float = 0.0
    prev_hum_error: float = 0.0
    initialized: bool = False


@dataclass(frozen=True)
class Setpoints:
    temperature: float = 25.0
    humidity: float = 60.0
    light: float = 10000.0


def channel_output(
    error: float,
    delta: float,
    error_spec: QuantizerSpec,
    delta_spec: QuantizerSpec,
    table: dict[tuple[str, str], str],
    channel: str,
) -> float:
    e_label = level_to_label(error_spec.quantize(error), LABELS_7)
    de_label = level_to_label(delta_spec.quantize(delta), LABELS_5_INPUT)
    return dequantize(rule_lookup(e_label, de_label, table), channel)


def controller_step(
    setpoints: Setpoints,
    measured_temperature: float,
    measured_humidity: float,
    state: ControllerState,
) -> tuple[dict[str, int], ControllerState]:
    """One temperature/humidity control cycle.

    Errors are setpoint minus measurement, so positive error means too
    cold or too dry.  The error variation is zero on the first cycle.
    Returns the four temperature/humidity gears and the carried state.
    """
    e_t = setpoints.temperature - measured_temperature
    e_h = setpoints.humidity - measured_humidity
    de_t = e_t - state.prev_temp_error if state.initialized else 0.0
    de_h = e_h - state.prev_hum_error if state.initialized else 0.0
    t_crisp = channel_output(
        e_t, de_t, TEMP_ERROR_SPEC, TEMP_DELTA_SPEC, TEMP_RULES, "temperature"
    )
    h_crisp = channel_output(
        e_h, de_h, HUM_ERROR_SPEC, HUM_DELTA_SPEC, HUM_RULES, "humidity"
    )
    commands = commands_from_outputs(t_crisp, h_crisp)
    return commands, ControllerState(e_t, e_h, True)


def auto_bank(
    setpoints: Setpoints,
    measured_temperature: float,
    measured_humidity: float,
    measured_light: float,
    soil_states,
    state: ControllerState,
    prev_led_gear: int | None = None,
) -> tuple[ActuatorBank, ControllerState]:
    """Full automatic cycle: fuzzy temperature/humidity channels plus the
    light band rule and the soil alarm rule, combined into one bank."""
    commands, new_state = controller_step(
        setpoints, measured_temperature, measured_humidity, state
    )
    bank = ActuatorBank(
        led_gear=light_rule(setpoints.light, measured_light, prev_led_gear),
        drip_switch=soil_rule(soil_states),
        **commands,
    )
    return bank, new_state
