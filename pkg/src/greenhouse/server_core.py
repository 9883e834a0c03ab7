"""Management-server state machine, independent of any transport.

The network front ends (TCP listeners, the WebSocket bridge, or the
in-process test driver) own sockets; this core owns everything else:
sessions and their bounded send queues, the live snapshot, control mode,
the automatic control loop, history persistence, and login.  All methods
are synchronous and non-blocking; callers hand in bytes and drain queued
output.  One caller at a time: the front ends serialize onto this object
(an asyncio event loop or the single-threaded test driver).

Isolation contract: every session's outbound bytes go through its own
bounded queue.  A client that stops draining overflows its queue and
loses frames (counted), while other sessions and the gateway path are
untouched.
"""

from __future__ import annotations

import itertools
import time
from collections import Counter, deque
from dataclasses import dataclass, replace
from typing import Callable

from greenhouse import fuzzy, protocol
from greenhouse.auth import AuthError, Authenticator, InvalidCredentials, RateLimited
from greenhouse.fuzzy import ControllerState, Setpoints
from greenhouse.persistence import HistoryStore, Record, bucket_means
from greenhouse.protocol import (
    ActuatorBank,
    AppAutoInstruction,
    AppData,
    GearInstruction,
    NetExecutorStatus,
    NetSensorData,
    StreamScanner,
)
from greenhouse.util import round_half_away

DEFAULT_QUEUE_BOUND = 64
DEFAULT_AUTO_PERIOD = 10.0
DEFAULT_STALENESS = 15.0  # 3 x default gateway push period


class Session:
    """One connected peer (gateway, app client, or bridge client)."""

    _ids = itertools.count(1)

    def __init__(self, kind: str, queue_bound: int) -> None:
        self.id = next(self._ids)
        self.kind = kind
        self.scanner = StreamScanner()
        self.queue: deque[bytes] = deque()
        self.queue_bound = queue_bound
        self.authenticated = kind == "gateway"
        self.username: str | None = None
        self.dropped = 0
        # Transport wake-up, called after each successful enqueue.
        self.notify: Callable[[], None] | None = None

    def enqueue(self, data: bytes) -> bool:
        if len(self.queue) >= self.queue_bound:
            self.dropped += 1
            return False
        self.queue.append(data)
        if self.notify is not None:
            self.notify()
        return True

    def drain(self) -> bytes:
        out = b"".join(self.queue)
        self.queue.clear()
        return out


@dataclass(frozen=True)
class ControlMode:
    mode: str = "manual"  # "automatic" | "manual"
    setpoints: Setpoints = Setpoints()
    manual_bank: ActuatorBank = ActuatorBank()


@dataclass(frozen=True)
class LiveSnapshot:
    readings: NetSensorData | None = None
    readings_at: float | None = None
    bank: ActuatorBank = ActuatorBank()
    bank_at: float | None = None

    def mean_temperature(self) -> float:
        return sum(self.readings.temperatures) / 6

    def mean_humidity(self) -> float:
        return sum(self.readings.humidities) / 6

    def mean_light(self) -> float:
        return sum(self.readings.light_levels) / 6

    def app_data(self) -> AppData:
        """Compose the application-layer push: six gears plus the four
        averaged results, each rounded half away from zero to a byte."""
        return AppData(
            bank=self.bank,
            temperature=round_half_away(self.mean_temperature()),
            humidity=round_half_away(self.mean_humidity()),
            light=min(30000, round_half_away(self.mean_light())),
            soil=round_half_away(sum(self.readings.soil_states) / 6),
        )


class ServerCore:
    def __init__(
        self,
        store: HistoryStore,
        authenticator: Authenticator,
        queue_bound: int = DEFAULT_QUEUE_BOUND,
        auto_period: float = DEFAULT_AUTO_PERIOD,
        staleness_bound: float = DEFAULT_STALENESS,
        crash_hook: Callable[[Record], None] | None = None,
    ) -> None:
        self.store = store
        self.authenticator = authenticator
        self.queue_bound = queue_bound
        self.auto_period = auto_period
        self.staleness_bound = staleness_bound
        # Test-only failure injection: called after an append returns,
        # before any broadcast happens.
        self.crash_hook = crash_hook

        self.live = LiveSnapshot()
        self.control = ControlMode()
        self.controller_state = ControllerState()
        self.last_commanded: ActuatorBank | None = None
        self.pending_instruction: ActuatorBank | None = None
        self.gateway_session: Session | None = None
        self.app_sessions: dict[int, Session] = {}
        self.counters: Counter = Counter()
        self.persist_latency_max = 0.0
        self._next_auto = 0.0

    # -- persistence ----------------------------------------------------------

    def _persist(self, now: float, record_class: str, body: str) -> Record:
        t0 = time.perf_counter()
        record = self.store.append(now, record_class, body)
        latency = time.perf_counter() - t0
        self.persist_latency_max = max(self.persist_latency_max, latency)
        if self.crash_hook is not None:
            self.crash_hook(record)
        return record

    # -- session lifecycle ----------------------------------------------------

    def open_app_session(self, now: float, kind: str = "app") -> Session:
        session = Session(kind, self.queue_bound)
        self.app_sessions[session.id] = session
        self._persist(now, "session", f"open {kind} id={session.id}")
        return session

    def close_app_session(self, session: Session, now: float) -> None:
        self.app_sessions.pop(session.id, None)
        self._persist(now, "session", f"close {session.kind} id={session.id}")

    def attach_gateway(self, now: float) -> Session:
        session = Session("gateway", self.queue_bound)
        self.gateway_session = session
        self._persist(now, "session", "open gateway")
        if self.pending_instruction is not None:
            bank, self.pending_instruction = self.pending_instruction, None
            self._emit_instruction(bank, now, source="queued")
        return session

    def detach_gateway(self, now: float) -> None:
        self.gateway_session = None
        self._persist(now, "session", "close gateway")

    # -- login ----------------------------------------------------------------

    def login_session(
        self, session: Session, username: str, password: str, now: float
    ) -> str:
        try:
            token = self.authenticator.login(username, password, now=now)
        except RateLimited:
            self._persist(now, "session", f"auth-ratelimited {username}")
            raise
        except InvalidCredentials:
            self._persist(now, "session", f"auth-fail {username}")
            raise
        session.authenticated = True
        session.username = username
        self._persist(now, "session", f"auth-ok {username}")
        return token

    def login_token(self, session: Session, token: str) -> bool:
        username = self.authenticator.check_token(token)
        if username is None:
            return False
        session.authenticated = True
        session.username = username
        return True

    # -- gateway ingress -------------------------------------------------------

    def gateway_bytes(self, data: bytes, now: float) -> None:
        if self.gateway_session is None:
            self.counters["gateway_bytes_without_session"] += 1
            return
        frames, errors = self.gateway_session.scanner.feed(data)
        for error in errors:
            self.counters["gateway_decode_errors"] += 1
            self._persist(now, "error", f"gateway {type(error).__name__}")
        for frame in frames:
            self.on_gateway_frame(frame, now)

    def on_gateway_frame(self, frame, now: float) -> None:
        raw = protocol.encode_frame(frame)
        if isinstance(frame, NetSensorData):
            self.live = replace(self.live, readings=frame, readings_at=now)
            self._persist(now, "reading", raw.hex().upper())
        elif isinstance(frame, NetExecutorStatus):
            self.live = replace(self.live, bank=frame.bank, bank_at=now)
            self._persist(now, "status", raw.hex().upper())
        else:
            self.counters["gateway_unexpected_kind"] += 1
            self._persist(now, "error", f"gateway kind {type(frame).__name__}")
            return
        self.broadcast_push()

    def broadcast_push(self) -> AppData | None:
        if self.live.readings is None:
            self.counters["push_without_readings"] += 1
            return None
        app_frame = self.live.app_data()
        raw = protocol.encode_frame(app_frame)
        for session in self.app_sessions.values():
            if not session.authenticated:
                continue
            if session.enqueue(raw):
                self.counters["frames_broadcast"] += 1
            else:
                self.counters["frames_dropped_stalled"] += 1
        return app_frame

    # -- app ingress -----------------------------------------------------------

    def app_bytes(self, session: Session, data: bytes, now: float) -> None:
        frames, errors = session.scanner.feed(data)
        for error in errors:
            self.counters["app_decode_errors"] += 1
            self._persist(now, "error", f"app {type(error).__name__}")
        for frame in frames:
            self.on_app_frame(session, frame, now)

    def on_app_frame(self, session: Session, frame, now: float) -> None:
        if not session.authenticated:
            self.counters["frames_unauthenticated"] += 1
            return
        if isinstance(frame, AppAutoInstruction):
            setpoints = Setpoints(
                temperature=float(frame.temperature),
                humidity=float(frame.humidity),
                light=float(protocol.light_setpoint_lux(frame.light_hlux)),
            )
            self.control = ControlMode(mode="automatic", setpoints=setpoints)
            self.controller_state = ControllerState()
            self._persist(
                now,
                "mode",
                f"automatic t={setpoints.temperature:g} "
                f"h={setpoints.humidity:g} l={setpoints.light:g}",
            )
        elif isinstance(frame, GearInstruction):
            self.control = ControlMode(mode="manual", manual_bank=frame.bank)
            self._persist(now, "mode", "manual")
            self._emit_instruction(frame.bank, now, source="manual")
        else:
            self.counters["app_unexpected_kind"] += 1

    # -- gateway egress ----------------------------------------------------------

    def _emit_instruction(self, bank: ActuatorBank, now: float, source: str) -> None:
        raw = protocol.encode_frame(GearInstruction(bank))
        self._persist(now, "instruction", f"{raw.hex().upper()} src={source}")
        self.last_commanded = bank
        if self.gateway_session is None:
            self.pending_instruction = bank  # depth-1, last-writer-wins
            self.counters["instructions_queued"] += 1
            return
        self.gateway_session.enqueue(raw)
        self.counters["instructions_sent"] += 1

    # -- automatic control -------------------------------------------------------

    def auto_control_cycle(self, now: float) -> GearInstruction | None:
        if self.control.mode != "automatic":
            return None
        if self.live.readings is None or self.live.readings_at is None:
            self.counters["auto_skipped_no_data"] += 1
            return None
        if now - self.live.readings_at > self.staleness_bound:
            self.counters["auto_skipped_stale"] += 1
            self._persist(now, "error", "auto-cycle skipped: snapshot stale")
            return None
        reference = (
            self.last_commanded if self.last_commanded is not None else self.live.bank
        )
        bank, self.controller_state = fuzzy.auto_bank(
            self.control.setpoints,
            self.live.mean_temperature(),
            self.live.mean_humidity(),
            self.live.mean_light(),
            self.live.readings.soil_states,
            self.controller_state,
            prev_led_gear=reference.led_gear,
        )
        if bank == reference:
            return None
        self._emit_instruction(bank, now, source="auto")
        return GearInstruction(bank)

    def tick(self, now: float) -> None:
        """Periodic driver for the control loop."""
        if now >= self._next_auto:
            self.auto_control_cycle(now)
            self._next_auto = now + self.auto_period

    # -- queries -----------------------------------------------------------------

    def query_history(
        self,
        record_class: str | None = None,
        start: float | None = None,
        end: float | None = None,
    ) -> list[Record]:
        return self.store.records(record_class, start, end)

    def reading_series(
        self,
        variable: str,
        start: float | None = None,
        end: float | None = None,
        buckets: int | None = None,
    ) -> list[tuple[float, float]]:
        """Numeric series for one variable from persisted reading records,
        optionally bucket-mean downsampled."""
        if variable not in ("temperature", "humidity", "light", "soil"):
            raise ValueError(f"unknown variable {variable!r}")
        points = []
        for record in self.store.records("reading", start, end):
            frame = protocol.decode_frame(bytes.fromhex(record.body))
            if variable == "temperature":
                value = sum(frame.temperatures) / 6
            elif variable == "humidity":
                value = sum(frame.humidities) / 6
            elif variable == "light":
                value = sum(frame.light_levels) / 6
            else:
                value = sum(frame.soil_states) / 6
            points.append((record.timestamp, value))
        if buckets is not None:
            return bucket_means(points, buckets)
        return points

    def status_view(self) -> dict:
        """Plain-data summary for the CLI status command and the REST
        surface."""
        live = self.live
        out: dict = {
            "mode": self.control.mode,
            "setpoints": {
                "temperature": self.control.setpoints.temperature,
                "humidity": self.control.setpoints.humidity,
                "light": self.control.setpoints.light,
            },
            "gears": protocol.frame_fields(NetExecutorStatus(live.bank)),
            "app_sessions": len(self.app_sessions),
            "gateway_connected": self.gateway_session is not None,
            "records": self.store.log.records_on_disk,
            "counters": dict(self.counters),
        }
        out["gears"].pop("kind", None)
        if live.readings is not None:
            out["aggregates"] = {
                "temperature": live.mean_temperature(),
                "humidity": live.mean_humidity(),
                "light": live.mean_light(),
                "soil_states": list(live.readings.soil_states),
            }
            out["readings_at"] = live.readings_at
        return out
