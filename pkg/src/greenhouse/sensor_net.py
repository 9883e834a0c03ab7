"""Simulated short-range sensor/actuator network.

Nine nodes: one coordinator bridging a serial byte link, six detecting
terminals (addresses 0x01..0x06) that sample the environment model, and
two executive terminals (0x07, 0x08) that hold actuator banks.  Radio
behavior is reduced to a discrete-event system: frames hop with a
configurable latency, queries route to the addressed detecting terminal,
actuator instructions broadcast to both executive terminals and only the
addressed one acts and echoes status.

By default terminal 0x08 silently mirrors every executed command into its
own bank (redundant zone) while 0x07 remains the authoritative bank that
drives the plant.  With ``split_banks`` each bank changes only through
frames addressed to its own terminal.

A single tick driver advances the network; the serial endpoints are
lock-guarded so a gateway on another thread can read and write safely.
"""

from __future__ import annotations

import heapq
import itertools
import threading
from collections import Counter

from greenhouse import protocol
from greenhouse.plant import Plant
from greenhouse.protocol import (
    ActuatorBank,
    SensorData,
    SensorInstruction,
    StreamScanner,
)
from greenhouse.util import clamp, round_half_away

QUERY_QUANTITIES = {
    protocol.QUERY_TEMPERATURE: "temperature",
    protocol.QUERY_HUMIDITY: "humidity",
    protocol.QUERY_LIGHT: "light",
    protocol.QUERY_SOIL: "soil",
}


class SensorNetwork:
    """Discrete-event network bound to one Plant instance."""

    def __init__(
        self,
        plant: Plant,
        sampling_period: float = 2.0,
        hop_latency: float = 0.0,
        serial_latency: float = 0.0,
        join_delay: float = 0.0,
        split_banks: bool = False,
    ):
        self.plant = plant
        self.sampling_period = sampling_period
        self.hop_latency = hop_latency
        self.serial_latency = serial_latency
        self.join_delay = join_delay
        self.split_banks = split_banks

        self.clock = 0.0
        self.banks: dict[int, ActuatorBank] = {
            addr: ActuatorBank() for addr in protocol.EXECUTIVE_ADDRESSES
        }
        self.counters: Counter = Counter()

        self._lock = threading.RLock()
        self._seq = itertools.count()
        self._radio: list[tuple[float, int, int, SensorInstruction]] = []
        self._serial_out: list[tuple[float, int, bytes]] = []
        self._scanner = StreamScanner()
        self._next_sample = join_delay + sampling_period

    # -- serial endpoints (gateway side) -------------------------------------

    def write_serial(self, data: bytes) -> None:
        """Bytes from the gateway toward the coordinator."""
        with self._lock:
            frames, errors = self._scanner.feed(data)
            self.counters["serial_decode_errors"] += len(errors)
            for frame in frames:
                self._route(frame)

    def read_serial(self) -> bytes:
        """All bytes due at the gateway by the current network clock."""
        with self._lock:
            due = []
            while self._serial_out and self._serial_out[0][0] <= self.clock:
                due.append(heapq.heappop(self._serial_out)[2])
            return b"".join(due)

    # -- routing -------------------------------------------------------------

    def _route(self, frame) -> None:
        if not isinstance(frame, SensorInstruction):
            self.counters["non_instruction_dropped"] += 1
            return
        if not protocol.ADDRESS_MIN <= frame.address <= protocol.ADDRESS_MAX:
            self.counters["bad_address_dropped"] += 1
            return
        deliver_at = max(self.clock + self.hop_latency, self.join_delay)
        if frame.type_code == protocol.TYPE_QUERY:
            if frame.address in protocol.DETECTING_ADDRESSES:
                self._push_radio(deliver_at, frame.address, frame)
            else:
                self.counters["bad_address_dropped"] += 1
            return
        # Actuator instruction: broadcast to both executive terminals.
        for addr in protocol.EXECUTIVE_ADDRESSES:
            self._push_radio(deliver_at, addr, frame)

    def _push_radio(self, due: float, target: int, frame: SensorInstruction) -> None:
        heapq.heappush(self._radio, (due, next(self._seq), target, frame))
        self.counters["radio_scheduled"] += 1

    def _push_serial(self, emit_time: float, frame) -> None:
        due = emit_time + self.hop_latency + self.serial_latency
        heapq.heappush(
            self._serial_out, (due, next(self._seq), protocol.encode_frame(frame))
        )
        self.counters["frames_to_gateway"] += 1

    # -- terminals -----------------------------------------------------------

    def _location_readings(self, address: int) -> dict[str, int]:
        state = self.plant.state
        i = address - 1
        return {
            "temperature": int(
                clamp(round_half_away(state.temperature[i]), -10, 40)
            ),
            "humidity": int(clamp(round_half_away(state.humidity[i]), 0, 100)),
            "light": int(clamp(round_half_away(state.light[i]), 0, 30000)),
            "soil": 0 if state.soil[i] < self.plant.params.soil_threshold else 1,
        }

    def _sample_node(self, address: int, emit_time: float, quantities=None) -> None:
        readings = self._location_readings(address)
        for name, type_code in (
            ("temperature", protocol.TYPE_DATA_TEMPERATURE),
            ("humidity", protocol.TYPE_DATA_HUMIDITY),
            ("light", protocol.TYPE_DATA_LIGHT),
            ("soil", protocol.TYPE_DATA_SOIL),
        ):
            if quantities is not None and name not in quantities:
                continue
            self._push_serial(emit_time, SensorData(address, type_code, readings[name]))

    def _deliver_to_detecting(self, address: int, frame: SensorInstruction, at: float) -> None:
        quantity = QUERY_QUANTITIES.get(frame.value)
        if quantity is None:
            self.counters["bad_query_dropped"] += 1
            return
        self._sample_node(address, at, quantities={quantity})

    def _deliver_to_executive(self, address: int, frame: SensorInstruction, at: float) -> None:
        if frame.type_code not in protocol.GEAR_LIMIT:
            self.counters["bad_type_dropped"] += 1
            return
        applied = protocol.clamp_gear(frame.type_code, frame.value)
        if frame.address == address:
            if applied != frame.value:
                self.counters["gears_clamped"] += 1
            self.banks[address] = self.banks[address].with_gear(
                frame.type_code, applied
            )
            self._push_serial(
                at,
                SensorData(
                    address, frame.type_code + protocol.STATUS_OFFSET, applied
                ),
            )
        elif not self.split_banks and address == protocol.EXECUTIVE_ADDRESSES[1]:
            # Redundant-zone mirror: shadow the command, no status echo.
            self.banks[address] = self.banks[address].with_gear(
                frame.type_code, applied
            )
        else:
            self.counters["not_addressed_ignored"] += 1

    # -- tick driver ---------------------------------------------------------

    def tick(self, dt: float) -> None:
        """Advance the network clock: deliver due radio frames (including
        cascaded replies) and fire periodic sampling."""
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        with self._lock:
            self.clock += dt
            while self._next_sample <= self.clock:
                for address in protocol.DETECTING_ADDRESSES:
                    self._sample_node(address, self._next_sample)
                self._next_sample += self.sampling_period
            while self._radio and self._radio[0][0] <= self.clock:
                at, _, target, frame = heapq.heappop(self._radio)
                self.counters["radio_delivered"] += 1
                if target in protocol.DETECTING_ADDRESSES:
                    self._deliver_to_detecting(target, frame, at)
                else:
                    self._deliver_to_executive(target, frame, at)

    # -- views ---------------------------------------------------------------

    @property
    def active_bank(self) -> ActuatorBank:
        """The authoritative bank (terminal 0x07) that drives the plant."""
        return self.banks[protocol.PRIMARY_EXECUTIVE]

    def diagnostics(self) -> dict[str, int]:
        with self._lock:
            out = dict(self.counters)
            out["radio_in_flight"] = len(self._radio)
            out["serial_frames_queued"] = len(self._serial_out)
            return out
