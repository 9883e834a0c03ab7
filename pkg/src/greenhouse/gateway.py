"""Portable gateway state machine bridging the sensor serial link and the
server connection.

Five logical tasks (serial receive, serial transmit, network receive,
network transmit, alarm) share exactly two mailboxes.  The data mailbox is
written only by the serial-receive path and hands out atomic snapshots;
the instruction mailbox is a single pending-instruction slot with a flag
bit, last-writer-wins, consumed atomically.  Every method takes the
current time as an argument and performs no blocking call, so the same
object runs under a deterministic round-robin driver in tests and under
threads or an event loop in live mode.

The network path never blocks the serial path: a send that cannot
complete marks the link down, drops the frame, and arms an exponential
reconnect timer (1 s doubling to a 30 s cap).  The alarm task writes
directly to the serial link, bypassing the instruction mailbox, so server
traffic cannot starve safety actions.
"""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Protocol

from greenhouse import protocol
from greenhouse.protocol import (
    ActuatorBank,
    GearInstruction,
    NetExecutorStatus,
    NetSensorData,
    SensorData,
    SensorInstruction,
    StreamScanner,
)

RECONNECT_INITIAL = 1.0
RECONNECT_CAP = 30.0

_QUANTITY_BY_TYPE = {
    protocol.TYPE_DATA_TEMPERATURE: "temperatures",
    protocol.TYPE_DATA_HUMIDITY: "humidities",
    protocol.TYPE_DATA_LIGHT: "light_levels",
    protocol.TYPE_DATA_SOIL: "soil_states",
}


class NetLink(Protocol):
    """Client side of the server connection.  ``send`` returns False when
    the link is down or cannot accept bytes right now (it must never
    block); ``connect`` attempts (re-)establishment."""

    def connect(self) -> bool: ...

    def send(self, data: bytes) -> bool: ...

    def recv(self) -> bytes: ...


@dataclass(frozen=True)
class MailboxSnapshot:
    """Consistent copy of the data mailbox at one instant."""

    temperatures: tuple
    humidities: tuple
    light_levels: tuple
    soil_states: tuple
    gears: dict
    updated_at: float | None

    @property
    def complete(self) -> bool:
        return all(
            None not in seq
            for seq in (
                self.temperatures,
                self.humidities,
                self.light_levels,
                self.soil_states,
            )
        )

    def bank(self) -> ActuatorBank:
        """Last-known gears as a bank; unknown gears read as 0."""
        return ActuatorBank(
            **{
                protocol.ACTUATOR_FIELD[t]: (self.gears[t] or 0)
                for t in protocol.INSTRUCTION_TYPES
            }
        )

    def net_frames(self) -> tuple[NetSensorData, NetExecutorStatus]:
        if not self.complete:
            raise ValueError("snapshot incomplete")
        return (
            NetSensorData(
                self.temperatures,
                self.humidities,
                self.light_levels,
                self.soil_states,
            ),
            NetExecutorStatus(self.bank()),
        )


class DataMailbox:
    """Latest readings and gears.  Single writer (the serial-receive
    task); any task may take a snapshot without seeing a torn update."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._readings = {name: [None] * 6 for name in _QUANTITY_BY_TYPE.values()}
        self._gears: dict[int, int | None] = {
            t: None for t in protocol.INSTRUCTION_TYPES
        }
        self._updated_at: float | None = None

    def update_reading(self, type_code: int, address: int, value: int, now: float) -> None:
        name = _QUANTITY_BY_TYPE[type_code]
        with self._lock:
            self._readings[name][address - 1] = value
            self._updated_at = now

    def update_gear(self, status_type: int, gear: int, now: float) -> None:
        with self._lock:
            self._gears[status_type - protocol.STATUS_OFFSET] = gear
            self._updated_at = now

    def known_gear(self, instruction_type: int) -> int | None:
        with self._lock:
            return self._gears[instruction_type]

    def snapshot(self) -> MailboxSnapshot:
        with self._lock:
            return MailboxSnapshot(
                temperatures=tuple(self._readings["temperatures"]),
                humidities=tuple(self._readings["humidities"]),
                light_levels=tuple(self._readings["light_levels"]),
                soil_states=tuple(self._readings["soil_states"]),
                gears=dict(self._gears),
                updated_at=self._updated_at,
            )


class InstructionMailbox:
    """One pending instruction and a flag bit.  Posting overwrites any
    pending payload (last-writer-wins); consuming atomically returns the
    payload and resets the flag."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._payload: ActuatorBank | None = None

    @property
    def flag(self) -> int:
        with self._lock:
            return 1 if self._payload is not None else 0

    def post(self, bank: ActuatorBank) -> None:
        with self._lock:
            self._payload = bank

    def consume(self) -> ActuatorBank | None:
        with self._lock:
            payload, self._payload = self._payload, None
            return payload


class AlarmState:
    """Per-location soil latches plus whether the current drip run was
    started by the alarm path."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._latches: set[int] = set()
        self.alarm_drip_active = False

    def report(self, address: int, wet: bool) -> None:
        with self._lock:
            if wet:
                self._latches.discard(address)
            else:
                self._latches.add(address)

    @property
    def active(self) -> bool:
        with self._lock:
            return bool(self._latches)

    def latched(self) -> frozenset[int]:
        with self._lock:
            return frozenset(self._latches)


class Gateway:
    """The gateway state machine.  Wire it to a serial pair and an
    optional network link; call the task cycles from any driver."""

    def __init__(
        self,
        serial_read: Callable[[], bytes],
        serial_write: Callable[[bytes], None],
        net_link: NetLink | None = None,
        push_period: float = 5.0,
        alarm_period: float = 1.0,
        executive_address: int = protocol.PRIMARY_EXECUTIVE,
    ) -> None:
        self._serial_read = serial_read
        self._serial_write = serial_write
        self.net_link = net_link
        self.push_period = push_period
        self.alarm_period = alarm_period
        self.executive_address = executive_address

        self.data_mailbox = DataMailbox()
        self.instruction_mailbox = InstructionMailbox()
        self.alarms = AlarmState()
        self.counters: Counter = Counter()

        self._serial_scanner = StreamScanner()
        self._net_scanner = StreamScanner()
        self.connected = net_link is not None
        self._backoff = RECONNECT_INITIAL
        self._next_reconnect = 0.0
        self._next_push = 0.0
        self._next_alarm = 0.0

    # -- serial receive -------------------------------------------------------

    def serial_rx_cycle(self, now: float) -> int:
        """Drain the serial link and fold frames into the mailboxes.
        Returns the number of frames absorbed."""
        data = self._serial_read()
        if not data:
            return 0
        frames, errors = self._serial_scanner.feed(data)
        self.counters["serial_decode_errors"] += len(errors)
        count = 0
        for frame in frames:
            if not isinstance(frame, SensorData):
                self.counters["serial_unexpected_kind"] += 1
                continue
            self._on_sensor_data(frame, now)
            count += 1
        return count

    def _on_sensor_data(self, frame: SensorData, now: float) -> None:
        if frame.type_code in protocol.STATUS_TYPES:
            self.data_mailbox.update_gear(frame.type_code, frame.value, now)
            self.counters["status_frames"] += 1
            return
        self.data_mailbox.update_reading(
            frame.type_code, frame.address, frame.value, now
        )
        self.counters["reading_frames"] += 1
        if frame.type_code == protocol.TYPE_DATA_SOIL:
            self.alarms.report(frame.address, wet=frame.value == 1)

    # -- serial transmit ------------------------------------------------------

    def serial_tx_cycle(self) -> list[SensorInstruction]:
        """If an instruction is pending, translate it to per-actuator
        frames (only for gears that differ from the last-known state) and
        write them to the serial link.  Always leaves the flag at 0."""
        bank = self.instruction_mailbox.consume()
        if bank is None:
            return []
        emitted = []
        for type_code in protocol.INSTRUCTION_TYPES:
            target = bank.gear_for(type_code)
            known = self.data_mailbox.known_gear(type_code)
            if known is not None and known == target:
                continue
            emitted.append(
                SensorInstruction(self.executive_address, type_code, target)
            )
        if emitted:
            self._serial_write(
                b"".join(protocol.encode_frame(f) for f in emitted)
            )
        self.counters["instructions_emitted"] += len(emitted)
        return emitted

    # -- network receive ------------------------------------------------------

    def net_rx(self, data: bytes) -> None:
        """Bytes from the server connection: extract instruction frames,
        keep only the newest payload pending."""
        frames, errors = self._net_scanner.feed(data)
        self.counters["net_decode_errors"] += len(errors)
        for frame in frames:
            if isinstance(frame, GearInstruction):
                self.instruction_mailbox.post(frame.bank)
                self.counters["instructions_received"] += 1
            else:
                self.counters["net_unexpected_kind"] += 1

    def poll_net(self) -> None:
        """Pull any buffered instruction bytes off the link."""
        if self.net_link is not None and self.connected:
            data = self.net_link.recv()
            if data:
                self.net_rx(data)

    # -- network transmit -----------------------------------------------------

    def net_tx_cycle(self, now: float) -> list:
        """Push the mailbox snapshot to the server: one bulk-readings
        frame, one executor-status frame.  Never blocks: a refused send
        drops the frames and arms the reconnect timer."""
        if self.net_link is None:
            return []
        if not self.connected:
            if now < self._next_reconnect:
                return []
            if self.net_link.connect():
                self.connected = True
                self._backoff = RECONNECT_INITIAL
                self.counters["reconnects"] += 1
            else:
                self._next_reconnect = now + self._backoff
                self._backoff = min(RECONNECT_CAP, self._backoff * 2)
                self.counters["reconnect_failures"] += 1
                return []
        snapshot = self.data_mailbox.snapshot()
        if not snapshot.complete:
            self.counters["push_skipped_incomplete"] += 1
            return []
        frames = list(snapshot.net_frames())
        payload = b"".join(protocol.encode_frame(f) for f in frames)
        if self.net_link.send(payload):
            self.counters["pushes_sent"] += 1
            return frames
        self.connected = False
        self._next_reconnect = now + self._backoff
        self._backoff = min(RECONNECT_CAP, self._backoff * 2)
        self.counters["push_send_failures"] += 1
        return []

    # -- alarm ----------------------------------------------------------------

    def alarm_cycle(self, now: float) -> SensorInstruction | None:
        """Local safety loop, independent of the server link: dry soil
        turns the drip on directly over serial; when every latch clears
        and the run was alarm-initiated, turn it back off."""
        drip_known = self.data_mailbox.known_gear(protocol.TYPE_DRIP)
        frame = None
        if self.alarms.active:
            if (drip_known or 0) == 0:
                frame = SensorInstruction(
                    self.executive_address, protocol.TYPE_DRIP, 1
                )
                self.alarms.alarm_drip_active = True
        elif self.alarms.alarm_drip_active:
            frame = SensorInstruction(self.executive_address, protocol.TYPE_DRIP, 0)
            self.alarms.alarm_drip_active = False
        if frame is not None:
            self._serial_write(protocol.encode_frame(frame))
            self.counters["alarm_frames"] += 1
        return frame

    # -- periodic driver ------------------------------------------------------

    def tick(self, now: float) -> None:
        """Run every task due at ``now``.  Safe to call at any cadence;
        periods are tracked internally."""
        self.serial_rx_cycle(now)
        self.poll_net()
        self.serial_tx_cycle()
        if now >= self._next_alarm:
            self.alarm_cycle(now)
            self._next_alarm = now + self.alarm_period
        if now >= self._next_push:
            self.net_tx_cycle(now)
            self._next_push = now + self.push_period
    # -- views ----------------------------------------------------------------

    def diagnostics(self) -> dict[str, int]:
        out = dict(self.counters)
        out["connected"] = int(self.connected)
        out["flag"] = self.instruction_mailbox.flag
        return out
