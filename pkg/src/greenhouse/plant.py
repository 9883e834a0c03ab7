"""Discrete-time environment model for the simulated greenhouse.

Six locations each carry temperature, humidity, light, and a continuous
soil-moisture level.  Dynamics are first-order linear: each variable
relaxes toward ambient and is pushed by actuator terms scaled by
per-gear gains.  The model is deliberately simple so closed-loop behavior
has closed-form references; gains are simulation parameters, not
measurements.

State is a value.  One stepping agent per greenhouse instance; determinism
comes from the seeded noise generator.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, fields, replace

from greenhouse.protocol import ActuatorBank
from greenhouse.util import clamp

LOCATIONS = 6

TEMP_RANGE = (-10.0, 40.0)
HUM_RANGE = (10.0, 100.0)
LIGHT_RANGE = (0.0, 30000.0)
SOIL_RANGE = (0.0, 1.0)


class ParamError(ValueError):
    """A model parameter outside its allowed range."""


@dataclass(frozen=True)
class PlantParams:
    """Model gains, all per second (or per second-gear).  Negative gains
    make no physical sense here and are rejected."""

    lambda_temp: float = 0.002  # leak toward outdoor temperature
    gain_heat: float = 0.004  # degC per second per heating gear
    gain_cool: float = 0.005  # degC per second per cooling gear
    lambda_hum: float = 0.002
    gain_humidifier: float = 0.05  # percent per second when on
    gain_dehumidify: float = 0.02  # percent per second per gear
    gain_evaporation: float = 0.005  # percent per second while drip runs
    gain_led: float = 2000.0  # lux per LED gear, instantaneous
    gain_drip: float = 0.005  # soil moisture per second while drip runs
    drying_rate: float = 0.0002  # soil moisture lost per second
    soil_threshold: float = 0.3  # digital dry/wet boundary
    noise_temp: float = 0.0  # uniform noise amplitude, degC
    noise_hum: float = 0.0  # uniform noise amplitude, percent

    def __post_init__(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ParamError(f"{f.name} must be non-negative")


@dataclass(frozen=True)
class AmbientProfile:
    """Daily outdoor curves.  Temperature peaks mid-afternoon, humidity
    moves opposite, daylight is a half-sine between sunrise and sunset.
    Setting a swing to 0 gives a constant; ``daylight_constant`` overrides
    the solar curve entirely (useful for reproducible scenarios)."""

    temp_mean: float = 18.0
    temp_swing: float = 6.0
    hum_mean: float = 65.0
    hum_swing: float = 10.0
    daylight_peak: float = 20000.0
    sunrise: float = 6 * 3600.0
    sunset: float = 18 * 3600.0
    day_length: float = 86400.0
    daylight_constant: float | None = None

    def temperature(self, t: float) -> float:
        phase = 2 * math.pi * ((t % self.day_length) / self.day_length - 0.375)
        return self.temp_mean + self.temp_swing * math.sin(phase)

    def humidity(self, t: float) -> float:
        phase = 2 * math.pi * ((t % self.day_length) / self.day_length - 0.375)
        return self.hum_mean - self.hum_swing * math.sin(phase)

    def daylight(self, t: float) -> float:
        if self.daylight_constant is not None:
            return self.daylight_constant
        tod = t % self.day_length
        if tod < self.sunrise or tod > self.sunset:
            return 0.0
        span = self.sunset - self.sunrise
        return self.daylight_peak * math.sin(math.pi * (tod - self.sunrise) / span)


CONSTANT_DAY = AmbientProfile(
    temp_swing=0.0, hum_swing=0.0, daylight_constant=8000.0
)


@dataclass(frozen=True)
class LocationMix:
    """Per-location multipliers so the six sensors can disagree: ``shade``
    scales incoming daylight, ``actuator`` scales every actuator term."""

    shade: tuple[float, ...] = (1.0,) * LOCATIONS
    actuator: tuple[float, ...] = (1.0,) * LOCATIONS


@dataclass(frozen=True)
class EnvState:
    temperature: tuple[float, ...]
    humidity: tuple[float, ...]
    light: tuple[float, ...]
    soil: tuple[float, ...]
    clock: float = 0.0


def uniform_state(
    temperature: float = 18.0,
    humidity: float = 65.0,
    light: float = 8000.0,
    soil: float = 0.5,
    clock: float = 0.0,
) -> EnvState:
    return EnvState(
        (temperature,) * LOCATIONS,
        (humidity,) * LOCATIONS,
        (light,) * LOCATIONS,
        (soil,) * LOCATIONS,
        clock,
    )


@dataclass(frozen=True)
class EnvAggregate:
    temperature: float
    humidity: float
    light: float
    soil_states: tuple[int, ...]  # wire convention: 0 dry, 1 wet

    @property
    def any_dry(self) -> bool:
        return 0 in self.soil_states


def step_env(
    state: EnvState,
    actuators: ActuatorBank,
    ambient: AmbientProfile,
    params: PlantParams,
    dt: float,
    rng: random.Random | None = None,
    mix: LocationMix = LocationMix(),
) -> EnvState:
    """Advance every location by ``dt`` seconds under the given gear
    settings.  Noise (if enabled) requires a generator; trajectories are
    bit-identical for identical seeds and inputs."""
    if dt <= 0:
        raise ParamError(f"dt must be positive, got {dt}")
    if (params.noise_temp or params.noise_hum) and rng is None:
        raise ParamError("noise amplitude set but no generator supplied")

    t_now = state.clock
    t_out = ambient.temperature(t_now)
    h_out = ambient.humidity(t_now)
    sun = ambient.daylight(t_now)

    temps = []
    hums = []
    lights = []
    soils = []
    for i in range(LOCATIONS):
        act = mix.actuator[i]
        heat = act * (
            params.gain_heat * actuators.heating_gear
            - params.gain_cool * actuators.cooling_gear
        )
        t_new = state.temperature[i] + dt * (
            params.lambda_temp * (t_out - state.temperature[i]) + heat
        )
        if params.noise_temp:
            t_new += rng.uniform(-params.noise_temp, params.noise_temp)
        temps.append(clamp(t_new, *TEMP_RANGE))

        wet = act * (
            params.gain_humidifier * actuators.humidifier_switch
            - params.gain_dehumidify * actuators.dehumidify_gear
            + params.gain_evaporation * actuators.drip_switch
        )
        h_new = state.humidity[i] + dt * (
            params.lambda_hum * (h_out - state.humidity[i]) + wet
        )
        if params.noise_hum:
            h_new += rng.uniform(-params.noise_hum, params.noise_hum)
        hums.append(clamp(h_new, *HUM_RANGE))

        lights.append(
            clamp(
                sun * mix.shade[i] + params.gain_led * actuators.led_gear * act,
                *LIGHT_RANGE,
            )
        )

        s_new = state.soil[i] + dt * (
            params.gain_drip * actuators.drip_switch * act - params.drying_rate
        )
        soils.append(clamp(s_new, *SOIL_RANGE))

    return EnvState(
        tuple(temps), tuple(hums), tuple(lights), tuple(soils), t_now + dt
    )


def aggregate(state: EnvState, soil_threshold: float) -> EnvAggregate:
    """Arithmetic means over the six locations plus per-location digital
    soil states (dry when moisture is below the threshold)."""
    return EnvAggregate(
        temperature=sum(state.temperature) / LOCATIONS,
        humidity=sum(state.humidity) / LOCATIONS,
        light=sum(state.light) / LOCATIONS,
        soil_states=tuple(
            0 if s < soil_threshold else 1 for s in state.soil
        ),
    )


@dataclass
class Plant:
    """Stateful wrapper bundling state, parameters, ambient, and the noise
    generator for one greenhouse."""

    state: EnvState = field(default_factory=uniform_state)
    params: PlantParams = field(default_factory=PlantParams)
    ambient: AmbientProfile = field(default_factory=AmbientProfile)
    mix: LocationMix = field(default_factory=LocationMix)
    seed: int = 0

    def __post_init__(self) -> None:
        self._rng = random.Random(self.seed)

    def step(self, actuators: ActuatorBank, dt: float) -> EnvState:
        self.state = step_env(
            self.state, actuators, self.ambient, self.params, dt, self._rng, self.mix
        )
        return self.state

    def aggregate(self) -> EnvAggregate:
        return aggregate(self.state, self.params.soil_threshold)

    def set_soil(self, moisture: float) -> None:
        """Force every location's soil moisture (scenario events)."""
        self.state = replace(self.state, soil=(moisture,) * LOCATIONS)
