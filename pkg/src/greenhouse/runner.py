"""Deterministic in-process run of the whole stack.

One loop owns time.  Each step advances the radio network and the
environment by ``dt``, then runs the gateway's cycles and the server's
control loop at the same instant.  All cross-component traffic moves
over the same byte interfaces the live deployment uses; nothing here
reaches into another component's state.

The gateway-to-server link is an in-memory object honoring the same
non-blocking contract as the TCP version, with an ``up`` switch so
scenarios can sever and restore it.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from greenhouse import protocol
from greenhouse.auth import Authenticator, UserStore
from greenhouse.gateway import Gateway
from greenhouse.persistence import HistoryStore
from greenhouse.plant import Plant, uniform_state
from greenhouse.protocol import (
    ACTUATOR_FIELD,
    ActuatorBank,
    AppAutoInstruction,
    AppData,
    GearInstruction,
    light_setpoint_byte,
)
from greenhouse.scenario import Scenario, ScenarioError, ScenarioEvent
from greenhouse.sensor_net import SensorNetwork
from greenhouse.server_core import ServerCore, Session
from greenhouse.util import round_half_away

SIM_USER = "operator"
SIM_PASSWORD = "operator"

CSV_COLUMNS = (
    "time",
    "temperature",
    "humidity",
    "light",
    "soil_moisture",
    "led",
    "heating",
    "cooling",
    "dehumidify",
    "drip",
    "humidifier",
    "mode",
)

_FIELD_BY_NAME = {
    "led": "led_gear",
    "heating": "heating_gear",
    "cooling": "cooling_gear",
    "dehumidify": "dehumidify_gear",
    "drip": "drip_switch",
    "humidifier": "humidifier_switch",
}


class StackLink:
    """Gateway-side network link backed by an in-process server core."""

    def __init__(self, core: ServerCore, clock: Callable[[], float]) -> None:
        self.core = core
        self.clock = clock
        self.up = True

    def _ensure_session(self) -> None:
        # The server side of a loopback accepts instantly.
        if self.up and self.core.gateway_session is None:
            self.core.attach_gateway(self.clock())

    def connect(self) -> bool:
        if not self.up:
            return False
        self._ensure_session()
        return True

    def send(self, data: bytes) -> bool:
        if not self.up:
            return False
        self._ensure_session()
        self.core.gateway_bytes(data, self.clock())
        return True

    def recv(self) -> bytes:
        if not self.up:
            return b""
        self._ensure_session()
        return self.core.gateway_session.drain()


def _manual_bank(args: tuple[str, ...]) -> ActuatorBank:
    bank = ActuatorBank()
    for item in args:
        name, _, raw = item.partition("=")
        field = _FIELD_BY_NAME.get(name)
        if field is None or not raw:
            raise ScenarioError(f"manual event: bad argument {item!r}")
        try:
            value = int(raw)
        except ValueError:
            raise ScenarioError(f"manual event: bad gear {item!r}") from None
        bank = bank.with_gear(
            next(t for t, f in ACTUATOR_FIELD.items() if f == field), value
        )
    return bank


def _auto_setpoint_frame(args: tuple[str, ...]) -> AppAutoInstruction:
    values = {"t": 25.0, "h": 60.0, "l": 10000.0}
    for item in args:
        name, _, raw = item.partition("=")
        if name not in values or not raw:
            raise ScenarioError(f"auto event: bad argument {item!r}")
        try:
            values[name] = float(raw)
        except ValueError:
            raise ScenarioError(f"auto event: bad value {item!r}") from None
    return AppAutoInstruction(
        temperature=round_half_away(values["t"]),
        humidity=round_half_away(values["h"]),
        light_hlux=light_setpoint_byte(values["l"]),
    )


@dataclass
class RunResult:
    rows: list[dict]
    pushes: list[tuple[float, AppData]]
    csv_text: str
    stack: "SimStack | None" = None

    @property
    def final(self) -> dict:
        return self.rows[-1]


class SimStack:
    """Plant, sensor network, gateway, and server wired together under a
    single simulated clock."""

    def __init__(self, scenario: Scenario, data_dir: str | Path) -> None:
        self.scenario = scenario
        data_dir = Path(data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)

        self.plant = Plant(
            state=uniform_state(
                temperature=scenario.initial_temperature,
                humidity=scenario.initial_humidity,
                light=scenario.initial_light,
                soil=scenario.initial_soil,
            ),
            params=scenario.params,
            ambient=scenario.ambient,
            seed=scenario.seed,
        )
        self.net = SensorNetwork(
            self.plant,
            sampling_period=scenario.sampling_period,
            hop_latency=scenario.hop_latency,
            serial_latency=scenario.serial_latency,
            join_delay=scenario.join_delay,
            split_banks=scenario.split_banks,
        )

        self.store = HistoryStore(data_dir)
        users_path = data_dir / "users.tsv"
        users = UserStore(users_path)
        if SIM_USER not in users:
            users.create_user(SIM_USER, SIM_PASSWORD)
        self.core = ServerCore(
            self.store,
            Authenticator(users),
            queue_bound=scenario.queue_bound,
            auto_period=scenario.auto_period,
            staleness_bound=scenario.staleness_bound,
        )

        self.now = 0.0
        self.link = StackLink(self.core, lambda: self.now)
        self.gateway = Gateway(
            serial_read=self.net.read_serial,
            serial_write=self.net.write_serial,
            net_link=self.link,
            push_period=scenario.push_period,
            alarm_period=scenario.alarm_period,
        )

        self.app_session: Session = self.core.open_app_session(0.0)
        token = self.core.login_session(
            self.app_session, SIM_USER, SIM_PASSWORD, 0.0
        )
        self.token = token
        self.pushes: list[tuple[float, AppData]] = []
        self._pending = sorted(scenario.events, key=lambda e: e.at)
        self._event_index = 0

        if scenario.mode == "automatic":
            frame = AppAutoInstruction(
                temperature=round_half_away(scenario.setpoints.temperature),
                humidity=round_half_away(scenario.setpoints.humidity),
                light_hlux=light_setpoint_byte(scenario.setpoints.light),
            )
            self.core.app_bytes(
                self.app_session, protocol.encode_frame(frame), 0.0
            )

    # -- events ---------------------------------------------------------------

    def _apply_event(self, event: ScenarioEvent) -> None:
        if event.command == "set-soil":
            if len(event.args) != 1:
                raise ScenarioError("set-soil takes one moisture value")
            self.plant.set_soil(float(event.args[0]))
        elif event.command == "manual":
            frame = GearInstruction(_manual_bank(event.args))
            self.core.app_bytes(
                self.app_session, protocol.encode_frame(frame), self.now
            )
        elif event.command == "auto":
            frame = _auto_setpoint_frame(event.args)
            self.core.app_bytes(
                self.app_session, protocol.encode_frame(frame), self.now
            )
        elif event.command == "net-down":
            self.link.up = False
            if self.core.gateway_session is not None:
                self.core.detach_gateway(self.now)
        elif event.command == "net-up":
            self.link.up = True

    def _run_due_events(self) -> None:
        while (
            self._event_index < len(self._pending)
            and self._pending[self._event_index].at <= self.now
        ):
            self._apply_event(self._pending[self._event_index])
            self._event_index += 1

    # -- stepping -------------------------------------------------------------

    def step(self) -> dict:
        """Advance the whole stack by one dt and return the trajectory row.

        Events scheduled for the current instant fire first, then the
        radio network and environment advance, then the gateway and
        server run their cycles at the new instant."""
        dt = self.scenario.dt
        self._run_due_events()
        self.net.tick(dt)
        self.plant.step(self.net.active_bank, dt)
        self.now += dt
        self.gateway.tick(self.now)
        self.core.tick(self.now)
        for push in self._drain_app_frames():
            self.pushes.append((self.now, push))
        return self._row()

    def _drain_app_frames(self) -> list[AppData]:
        data = self.app_session.drain()
        if not data:
            return []
        frames, _, _ = protocol.frame_stream_scan(data)
        return [f for f in frames if isinstance(f, AppData)]

    def _row(self) -> dict:
        state = self.plant.state
        bank = self.net.active_bank
        return {
            "time": self.now,
            "temperature": sum(state.temperature) / 6,
            "humidity": sum(state.humidity) / 6,
            "light": sum(state.light) / 6,
            "soil_moisture": min(state.soil),
            "led": bank.led_gear,
            "heating": bank.heating_gear,
            "cooling": bank.cooling_gear,
            "dehumidify": bank.dehumidify_gear,
            "drip": bank.drip_switch,
            "humidifier": bank.humidifier_switch,
            "mode": self.core.control.mode,
        }

    def diagnostics(self) -> dict:
        return {
            "network": self.net.diagnostics(),
            "gateway": self.gateway.diagnostics(),
            "server": dict(self.core.counters),
        }


def format_rows(rows: list[dict]) -> str:
    """Fixed-precision CSV so identical runs produce identical bytes."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                f"{row['time']:.1f}",
                f"{row['temperature']:.4f}",
                f"{row['humidity']:.4f}",
                f"{row['light']:.1f}",
                f"{row['soil_moisture']:.4f}",
                row["led"],
                row["heating"],
                row["cooling"],
                row["dehumidify"],
                row["drip"],
                row["humidifier"],
                row["mode"],
            ]
        )
    return out.getvalue()


def run_scenario(
    scenario: Scenario,
    data_dir: str | Path,
    csv_path: str | Path | None = None,
) -> RunResult:
    stack = SimStack(scenario, data_dir)
    steps = int(round(scenario.duration / scenario.dt))
    rows = [stack.step() for _ in range(steps)]
    stack.store.close()
    text = format_rows(rows)
    if csv_path is not None:
        Path(csv_path).write_text(text, encoding="utf-8")
    return RunResult(rows=rows, pushes=stack.pushes, csv_text=text, stack=stack)
