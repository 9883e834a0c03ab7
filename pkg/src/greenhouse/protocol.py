"""Frame encoding and decoding for the greenhouse wire protocol.

Every message exchanged between the sensor network, the gateway, the
management server, and app clients is a single binary frame built from six
fields: header byte, length byte, address (sensor-layer frames only), type
codes, values, and a terminator byte.  The full layout reference, with byte
offsets for each frame kind, lives in docs/frames.md.

All functions here are pure and operate on immutable inputs; they are safe
to call from any thread.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

# -- Protocol constants ------------------------------------------------------

FRAME_HEADER = 0xA5
FRAME_END = 0x0D
# Optional second terminator for serial links that expect CR LF.  Off by
# default: the canonical frames end with a single 0x0D.
FRAME_END_LF = 0x0A

# Instruction type codes, one per actuator class.
TYPE_LED = 0x30
TYPE_HEATING = 0x31
TYPE_COOLING = 0x32
TYPE_DEHUMIDIFY = 0x33
TYPE_DRIP = 0x34
TYPE_HUMIDIFIER = 0x35

# Status type codes mirror the instruction codes at +0x20.
STATUS_OFFSET = 0x20

# Setpoint type codes carried by automatic-control instruction frames.
TYPE_SET_TEMPERATURE = 0x40
TYPE_SET_HUMIDITY = 0x41
TYPE_SET_LIGHT = 0x42

# Aggregated sensor type codes used by network- and application-layer frames.
TYPE_AGG_TEMPERATURE = 0x60
TYPE_AGG_HUMIDITY = 0x61
TYPE_AGG_LIGHT = 0x62
TYPE_AGG_SOIL = 0x63

# Sensor-layer query type plus the per-quantity selector codes it carries.
TYPE_QUERY = 0x20
QUERY_TEMPERATURE = 0x10
QUERY_HUMIDITY = 0x11
QUERY_LIGHT = 0x12
QUERY_SOIL = 0x13

# Per-sensor reply type codes (sensor-layer data frames).
TYPE_DATA_TEMPERATURE = 0x01
TYPE_DATA_HUMIDITY = 0x02
TYPE_DATA_LIGHT = 0x03
TYPE_DATA_SOIL = 0x04

QUERY_TO_DATA_TYPE = {
    QUERY_TEMPERATURE: TYPE_DATA_TEMPERATURE,
    QUERY_HUMIDITY: TYPE_DATA_HUMIDITY,
    QUERY_LIGHT: TYPE_DATA_LIGHT,
    QUERY_SOIL: TYPE_DATA_SOIL,
}

# Terminal addressing: six detecting terminals and two executive terminals.
DETECTING_ADDRESSES = tuple(range(0x01, 0x07))
EXECUTIVE_ADDRESSES = (0x07, 0x08)
PRIMARY_EXECUTIVE = 0x07
ADDRESS_MIN = 0x01
ADDRESS_MAX = 0x08

# Sensor value ranges on the wire.
TEMP_MIN_C = -10
TEMP_MAX_C = 40
HUMIDITY_MIN = 0
HUMIDITY_MAX = 100
LIGHT_MIN = 0
LIGHT_MAX = 30000
SOIL_DRY = 0
SOIL_WET = 1

# Total frame lengths (the length byte equals the full encoded size).
LEN_SENSOR = 6
LEN_SENSOR_LIGHT = 7
LEN_AUTO_INSTRUCTION = 9
LEN_GEAR_FRAME = 15
LEN_APP_DATA = 24
LEN_NET_SENSOR_DATA = 37

KNOWN_LENGTHS = frozenset(
    {
        LEN_SENSOR,
        LEN_SENSOR_LIGHT,
        LEN_AUTO_INSTRUCTION,
        LEN_GEAR_FRAME,
        LEN_APP_DATA,
        LEN_NET_SENSOR_DATA,
    }
)


# -- Error taxonomy ----------------------------------------------------------


class ProtocolError(Exception):
    """Base class for every codec failure."""


class DecodeError(ProtocolError):
    """Base class for failures while decoding received bytes."""


class BadHeader(DecodeError):
    """First byte is not the 0xA5 frame header."""


class BadLength(DecodeError):
    """Length byte disagrees with the actual byte count, or the input is
    too short to be any frame."""


class BadEnd(DecodeError):
    """Missing 0x0D terminator."""


class UnknownType(DecodeError):
    """Type code (or length/type combination) outside the protocol tables."""


class RangeError(ProtocolError):
    """A gear, setpoint, or reading is outside its declared range.  Raised
    both when encoding out-of-range values and when decoding them."""


# -- Actuator bank -----------------------------------------------------------

# (instruction type, field name, display name, maximum gear)
ACTUATOR_TABLE = (
    (TYPE_LED, "led_gear", "LED", 3),
    (TYPE_HEATING, "heating_gear", "heating plate", 5),
    (TYPE_COOLING, "cooling_gear", "cooling fan", 5),
    (TYPE_DEHUMIDIFY, "dehumidify_gear", "dehumidify fan", 5),
    (TYPE_DRIP, "drip_switch", "drip irrigation", 1),
    (TYPE_HUMIDIFIER, "humidifier_switch", "humidifier", 1),
)

GEAR_LIMIT = {entry[0]: entry[3] for entry in ACTUATOR_TABLE}
ACTUATOR_FIELD = {entry[0]: entry[1] for entry in ACTUATOR_TABLE}
ACTUATOR_NAME = {entry[0]: entry[2] for entry in ACTUATOR_TABLE}
INSTRUCTION_TYPES = tuple(entry[0] for entry in ACTUATOR_TABLE)
STATUS_TYPES = tuple(t + STATUS_OFFSET for t in INSTRUCTION_TYPES)


@dataclass(frozen=True)
class ActuatorBank:
    """Gear settings for the six actuator classes.  Gear 0 is always off."""

    led_gear: int = 0
    heating_gear: int = 0
    cooling_gear: int = 0
    dehumidify_gear: int = 0
    drip_switch: int = 0
    humidifier_switch: int = 0

    def gears(self) -> tuple[int, ...]:
        """Gear values in wire order (LED, heating, cooling, dehumidify,
        drip, humidifier)."""
        return tuple(getattr(self, entry[1]) for entry in ACTUATOR_TABLE)

    def validate(self) -> None:
        for type_code, field_name, name, limit in ACTUATOR_TABLE:
            value = getattr(self, field_name)
            if not 0 <= value <= limit:
                raise RangeError(
                    f"{name} gear {value} outside 0..{limit}"
                )

    def with_gear(self, type_code: int, value: int) -> "ActuatorBank":
        """Copy of this bank with one actuator (by instruction type code)
        replaced."""
        return replace(self, **{ACTUATOR_FIELD[type_code]: value})

    def gear_for(self, type_code: int) -> int:
        return getattr(self, ACTUATOR_FIELD[type_code])


def clamp_gear(type_code: int, value: int) -> int:
    """Force a gear value into the actuator's range."""
    return max(0, min(GEAR_LIMIT[type_code], value))


# -- Frame kinds -------------------------------------------------------------


@dataclass(frozen=True)
class SensorInstruction:
    """Sensor-layer instruction: an actuator command (types 0x30..0x35, value
    is the gear) or a data query (type 0x20, value selects the quantity).

    The value byte is carried verbatim; executive terminals clamp
    out-of-range gears on application rather than rejecting the frame.
    """

    address: int
    type_code: int
    value: int


@dataclass(frozen=True)
class SensorData:
    """Sensor-layer data: a per-location reading (types 0x01..0x04) or an
    executor status echo (types 0x50..0x55).

    ``value`` holds the decoded engineering value: degrees C for
    temperature (signed), percent for humidity, lux for light (two bytes on
    the wire), 0/1 for soil (0 dry, 1 wet), or the applied gear for status
    types.
    """

    address: int
    type_code: int
    value: int


@dataclass(frozen=True)
class NetSensorData:
    """Network-layer bulk readings: all four quantities at all six
    locations, pushed by the gateway to the server."""

    temperatures: tuple[int, ...]
    humidities: tuple[int, ...]
    light_levels: tuple[int, ...]
    soil_states: tuple[int, ...]


@dataclass(frozen=True)
class NetExecutorStatus:
    """Network-layer executor status: the six current gears, pushed by the
    gateway to the server."""

    bank: ActuatorBank


@dataclass(frozen=True)
class GearInstruction:
    """Full actuator-bank command (types 0x30..0x35 with one gear each).

    The same byte layout serves two links: the server sends it to the
    gateway as the network-layer instruction, and app clients send it to
    the server as the manual-mode instruction.  The server forwards the
    app form to the gateway unchanged, byte for byte.
    """

    bank: ActuatorBank


@dataclass(frozen=True)
class AppData:
    """Application-layer data: six gears plus the four sensor aggregates
    (averages over the six locations), pushed by the server to app
    clients."""

    bank: ActuatorBank
    temperature: int
    humidity: int
    light: int
    soil: int


@dataclass(frozen=True)
class AppAutoInstruction:
    """Automatic-mode setpoints from an app client.

    ``light_hlux`` is the light setpoint in hectolux (units of 100 lux) so
    it fits one byte; 0x64 therefore means 10000 lux.  Setpoints above
    25500 lux are not representable and must be clamped by the sender.
    """

    temperature: int
    humidity: int
    light_hlux: int


Frame = (
    SensorInstruction
    | SensorData
    | NetSensorData
    | NetExecutorStatus
    | GearInstruction
    | AppData
    | AppAutoInstruction
)

# The manual-mode app instruction and the network-layer instruction share one
# frame kind because their encodings are identical.
NetInstruction = GearInstruction
AppManualInstruction = GearInstruction


# -- Value codecs ------------------------------------------------------------


def _check_range(name: str, value: int, lo: int, hi: int) -> int:
    if not lo <= value <= hi:
        raise RangeError(f"{name} {value} outside {lo}..{hi}")
    return value


def encode_temperature(celsius: int) -> int:
    """Temperature to a signed two's-complement byte (-10..40 C)."""
    _check_range("temperature", celsius, TEMP_MIN_C, TEMP_MAX_C)
    return celsius & 0xFF


def decode_temperature(byte: int) -> int:
    value = byte - 256 if byte > 127 else byte
    return _check_range("temperature", value, TEMP_MIN_C, TEMP_MAX_C)


def encode_humidity(percent: int) -> int:
    return _check_range("humidity", percent, HUMIDITY_MIN, HUMIDITY_MAX)


decode_humidity = encode_humidity


def encode_light(lux: int) -> tuple[int, int]:
    """Light level to two big-endian bytes (0..30000 lux)."""
    _check_range("light", lux, LIGHT_MIN, LIGHT_MAX)
    return (lux >> 8) & 0xFF, lux & 0xFF


def decode_light(hi: int, lo: int) -> int:
    return _check_range("light", (hi << 8) | lo, LIGHT_MIN, LIGHT_MAX)


def encode_soil(state: int) -> int:
    """Soil digital state: 0 dry, 1 wet."""
    return _check_range("soil state", state, SOIL_DRY, SOIL_WET)


decode_soil = encode_soil

# Quantity helpers keyed by the per-sensor data type code, used by the
# sensor-layer data frame codec.
_READING_CODECS = {
    TYPE_DATA_TEMPERATURE: (encode_temperature, decode_temperature, 1),
    TYPE_DATA_HUMIDITY: (encode_humidity, decode_humidity, 1),
    TYPE_DATA_LIGHT: (encode_light, decode_light, 2),
    TYPE_DATA_SOIL: (encode_soil, decode_soil, 1),
}


def light_setpoint_byte(lux: int) -> int:
    """Quantize a lux setpoint to the one-byte hectolux field used by
    automatic-control frames (clamped to the representable 0..25500)."""
    return max(0, min(255, int(round(lux / 100.0))))


def light_setpoint_lux(byte: int) -> int:
    return byte * 100


# -- Encoding ----------------------------------------------------------------


def _finish(body: list[int], append_lf: bool) -> bytes:
    total = len(body) + 3  # header + length + end
    out = bytes([FRAME_HEADER, total, *body, FRAME_END])
    if append_lf:
        # Link-layer suffix for serial consoles that want CR LF.  Not part
        # of the frame: the length byte does not cover it and the stream
        # scanner skips it silently.
        out += bytes([FRAME_END_LF])
    return out


def encode_frame(frame: Frame, *, append_lf: bool = False) -> bytes:
    """Build the canonical byte sequence for a frame.

    ``append_lf`` adds a trailing 0x0A after the 0x0D terminator for serial
    links that want CR LF; the length byte then covers the extra byte.  The
    decoder only accepts the canonical single-0x0D form.

    Raises:
        RangeError: If any gear, setpoint, or reading is outside its
            declared range, or a sensor-layer address is outside 0x01..0x08.
    """
    if isinstance(frame, SensorInstruction):
        _check_range("address", frame.address, ADDRESS_MIN, ADDRESS_MAX)
        if frame.type_code not in INSTRUCTION_TYPES and frame.type_code != TYPE_QUERY:
            raise UnknownType(f"not an instruction type: 0x{frame.type_code:02X}")
        _check_range("instruction value", frame.value, 0, 255)
        return _finish([frame.address, frame.type_code, frame.value], append_lf)

    if isinstance(frame, SensorData):
        _check_range("address", frame.address, ADDRESS_MIN, ADDRESS_MAX)
        if frame.type_code in STATUS_TYPES:
            gear = frame.value
            limit = GEAR_LIMIT[frame.type_code - STATUS_OFFSET]
            _check_range("status gear", gear, 0, limit)
            return _finish([frame.address, frame.type_code, gear], append_lf)
        if frame.type_code in _READING_CODECS:
            enc, _, width = _READING_CODECS[frame.type_code]
            raw = enc(frame.value)
            payload = list(raw) if width == 2 else [raw]
            return _finish([frame.address, frame.type_code, *payload], append_lf)
        raise UnknownType(f"not a data type: 0x{frame.type_code:02X}")

    if isinstance(frame, NetSensorData):
        for name, seq in (
            ("temperatures", frame.temperatures),
            ("humidities", frame.humidities),
            ("light_levels", frame.light_levels),
            ("soil_states", frame.soil_states),
        ):
            if len(seq) != 6:
                raise RangeError(f"{name} needs 6 entries, got {len(seq)}")
        body = [TYPE_AGG_TEMPERATURE]
        body += [encode_temperature(t) for t in frame.temperatures]
        body.append(TYPE_AGG_HUMIDITY)
        body += [encode_humidity(h) for h in frame.humidities]
        body.append(TYPE_AGG_LIGHT)
        for lux in frame.light_levels:
            body += encode_light(lux)
        body.append(TYPE_AGG_SOIL)
        body += [encode_soil(s) for s in frame.soil_states]
        return _finish(body, append_lf)

    if isinstance(frame, (NetExecutorStatus, GearInstruction)):
        frame.bank.validate()
        base = STATUS_TYPES if isinstance(frame, NetExecutorStatus) else INSTRUCTION_TYPES
        body: list[int] = []
        for type_code, gear in zip(base, frame.bank.gears()):
            body += [type_code, gear]
        return _finish(body, append_lf)

    if isinstance(frame, AppData):
        frame.bank.validate()
        body = []
        for type_code, gear in zip(STATUS_TYPES, frame.bank.gears()):
            body += [type_code, gear]
        body += [TYPE_AGG_TEMPERATURE, encode_temperature(frame.temperature)]
        body += [TYPE_AGG_HUMIDITY, encode_humidity(frame.humidity)]
        body += [TYPE_AGG_LIGHT, *encode_light(frame.light)]
        body += [TYPE_AGG_SOIL, encode_soil(frame.soil)]
        return _finish(body, append_lf)

    if isinstance(frame, AppAutoInstruction):
        _check_range("temperature setpoint", frame.temperature, TEMP_MIN_C, TEMP_MAX_C)
        _check_range("humidity setpoint", frame.humidity, HUMIDITY_MIN, HUMIDITY_MAX)
        _check_range("light setpoint", frame.light_hlux, 0, 255)
        body = [
            TYPE_SET_TEMPERATURE,
            frame.temperature & 0xFF,
            TYPE_SET_HUMIDITY,
            frame.humidity,
            TYPE_SET_LIGHT,
            frame.light_hlux,
        ]
        return _finish(body, append_lf)

    raise ProtocolError(f"not a frame: {frame!r}")


# -- Decoding ----------------------------------------------------------------


def _expect_type(data: bytes, offset: int, expected: int) -> None:
    if data[offset] != expected:
        raise UnknownType(
            f"expected type 0x{expected:02X} at offset {offset}, "
            f"got 0x{data[offset]:02X}"
        )


def _decode_gear_run(data: bytes, type_base: tuple[int, ...]) -> ActuatorBank:
    values = {}
    for slot, type_code in enumerate(type_base):
        offset = 2 + slot * 2
        _expect_type(data, offset, type_code)
        gear = data[offset + 1]
        instr = type_code if type_code in GEAR_LIMIT else type_code - STATUS_OFFSET
        if gear > GEAR_LIMIT[instr]:
            raise RangeError(
                f"{ACTUATOR_NAME[instr]} gear {gear} outside 0..{GEAR_LIMIT[instr]}"
            )
        values[ACTUATOR_FIELD[instr]] = gear
    return ActuatorBank(**values)


def decode_frame(data: bytes) -> Frame:
    """Parse raw bytes into exactly one frame.

    Accepts arbitrary input.  Validation order follows the wire contract:
    header first, then the length byte against the actual byte count, then
    the terminator, then type codes, then value ranges.

    Raises:
        BadHeader: First byte is not 0xA5 (or the input is empty).
        BadLength: Length byte mismatch, or no frame kind is this short.
        BadEnd: Last byte is not 0x0D.
        UnknownType: Type code or length/type combination not in the tables.
        RangeError: A decoded field is outside its declared range.
    """
    if len(data) == 0:
        raise BadHeader("empty input")
    if data[0] != FRAME_HEADER:
        raise BadHeader(f"header 0x{data[0]:02X}, expected 0x{FRAME_HEADER:02X}")
    if len(data) < LEN_SENSOR:
        raise BadLength(f"{len(data)} bytes is shorter than any frame")
    if data[1] != len(data):
        raise BadLength(f"length byte {data[1]}, actual {len(data)}")
    if data[-1] != FRAME_END:
        raise BadEnd(f"terminator 0x{data[-1]:02X}, expected 0x{FRAME_END:02X}")

    size = len(data)

    if size == LEN_SENSOR:
        address, type_code, value = data[2], data[3], data[4]
        if type_code == TYPE_QUERY or type_code in INSTRUCTION_TYPES:
            return SensorInstruction(address, type_code, value)
        if type_code in STATUS_TYPES:
            limit = GEAR_LIMIT[type_code - STATUS_OFFSET]
            if value > limit:
                raise RangeError(f"status gear {value} outside 0..{limit}")
            return SensorData(address, type_code, value)
        if type_code in _READING_CODECS and _READING_CODECS[type_code][2] == 1:
            _, dec, _ = _READING_CODECS[type_code]
            return SensorData(address, type_code, dec(value))
        raise UnknownType(f"type 0x{type_code:02X} in a {size}-byte frame")

    if size == LEN_SENSOR_LIGHT:
        address, type_code = data[2], data[3]
        if type_code != TYPE_DATA_LIGHT:
            raise UnknownType(f"type 0x{type_code:02X} in a {size}-byte frame")
        return SensorData(address, type_code, decode_light(data[4], data[5]))

    if size == LEN_AUTO_INSTRUCTION:
        _expect_type(data, 2, TYPE_SET_TEMPERATURE)
        _expect_type(data, 4, TYPE_SET_HUMIDITY)
        _expect_type(data, 6, TYPE_SET_LIGHT)
        return AppAutoInstruction(
            temperature=decode_temperature(data[3]),
            humidity=decode_humidity(data[5]),
            light_hlux=data[7],
        )

    if size == LEN_GEAR_FRAME:
        lead = data[2]
        if lead == TYPE_LED:
            return GearInstruction(_decode_gear_run(data, INSTRUCTION_TYPES))
        if lead == TYPE_LED + STATUS_OFFSET:
            return NetExecutorStatus(_decode_gear_run(data, STATUS_TYPES))
        raise UnknownType(f"type 0x{lead:02X} in a {size}-byte frame")

    if size == LEN_APP_DATA:
        bank = _decode_gear_run(data, STATUS_TYPES)
        _expect_type(data, 14, TYPE_AGG_TEMPERATURE)
        _expect_type(data, 16, TYPE_AGG_HUMIDITY)
        _expect_type(data, 18, TYPE_AGG_LIGHT)
        _expect_type(data, 21, TYPE_AGG_SOIL)
        return AppData(
            bank=bank,
            temperature=decode_temperature(data[15]),
            humidity=decode_humidity(data[17]),
            light=decode_light(data[19], data[20]),
            soil=decode_soil(data[22]),
        )

    if size == LEN_NET_SENSOR_DATA:
        _expect_type(data, 2, TYPE_AGG_TEMPERATURE)
        _expect_type(data, 9, TYPE_AGG_HUMIDITY)
        _expect_type(data, 16, TYPE_AGG_LIGHT)
        _expect_type(data, 29, TYPE_AGG_SOIL)
        temps = tuple(decode_temperature(b) for b in data[3:9])
        hums = tuple(decode_humidity(b) for b in data[10:16])
        light = tuple(
            decode_light(data[17 + 2 * i], data[18 + 2 * i]) for i in range(6)
        )
        soil = tuple(decode_soil(b) for b in data[30:36])
        return NetSensorData(temps, hums, light, soil)

    raise UnknownType(f"no frame kind is {size} bytes long")


# -- Stream scanning ---------------------------------------------------------


def frame_stream_scan(
    buffer: bytes,
) -> tuple[list[Frame], list[ProtocolError], bytes]:
    """Greedily extract complete frames from a byte stream.

    Returns ``(frames, errors, residual)``.  Errors are returned rather
    than raised so a long-lived connection survives malformed input; after
    an error the scanner resynchronizes at the next 0xA5 byte.  ``residual``
    holds a trailing partial frame (or partial header) to be prepended to
    the next read.
    """
    frames: list[Frame] = []
    errors: list[ProtocolError] = []
    pos = 0
    n = len(buffer)
    while pos < n:
        while pos < n and buffer[pos] == FRAME_END_LF:
            pos += 1  # tolerate CR LF serial links
        start = buffer.find(FRAME_HEADER, pos)
        if start < 0:
            if pos < n:
                errors.append(BadHeader(f"{n - pos} bytes without a frame header"))
            pos = n
            break
        if start > pos:
            errors.append(BadHeader(f"{start - pos} bytes before frame header"))
            pos = start
        if start + 1 >= n:
            break  # header byte only; wait for the length byte
        declared = buffer[start + 1]
        if declared not in KNOWN_LENGTHS:
            errors.append(BadLength(f"declared length {declared} matches no frame"))
            pos = start + 1
            continue
        if start + declared > n:
            break  # partial frame; wait for the rest
        try:
            frames.append(decode_frame(bytes(buffer[start : start + declared])))
        except ProtocolError as exc:
            # includes RangeError: a well-formed envelope with a bad field
            errors.append(exc)
            pos = start + 1
            continue
        pos = start + declared
    return frames, errors, bytes(buffer[pos:])


class StreamScanner:
    """Stateful wrapper around :func:`frame_stream_scan` that carries the
    residual bytes between reads."""

    def __init__(self) -> None:
        self._residual = b""

    def feed(self, data: bytes) -> tuple[list[Frame], list[ProtocolError]]:
        frames, errors, self._residual = frame_stream_scan(self._residual + data)
        return frames, errors

    @property
    def residual(self) -> bytes:
        return self._residual


# -- Pretty printing ---------------------------------------------------------


def describe_frame(frame: Frame) -> str:
    """One-line human-readable rendering, used by the CLI and logs."""
    if isinstance(frame, SensorInstruction):
        if frame.type_code == TYPE_QUERY:
            quantity = {
                QUERY_TEMPERATURE: "temperature",
                QUERY_HUMIDITY: "humidity",
                QUERY_LIGHT: "light",
                QUERY_SOIL: "soil",
            }.get(frame.value, f"0x{frame.value:02X}")
            return f"SensorInstruction addr={frame.address:02X} query {quantity}"
        name = ACTUATOR_NAME[frame.type_code]
        return f"SensorInstruction addr={frame.address:02X} {name} gear={frame.value}"
    if isinstance(frame, SensorData):
        if frame.type_code in STATUS_TYPES:
            name = ACTUATOR_NAME[frame.type_code - STATUS_OFFSET]
            return f"SensorData addr={frame.address:02X} {name} status gear={frame.value}"
        unit = {
            TYPE_DATA_TEMPERATURE: "C",
            TYPE_DATA_HUMIDITY: "%",
            TYPE_DATA_LIGHT: "lux",
            TYPE_DATA_SOIL: "(0=dry,1=wet)",
        }[frame.type_code]
        quantity = {
            TYPE_DATA_TEMPERATURE: "temperature",
            TYPE_DATA_HUMIDITY: "humidity",
            TYPE_DATA_LIGHT: "light",
            TYPE_DATA_SOIL: "soil",
        }[frame.type_code]
        return (
            f"SensorData addr={frame.address:02X} {quantity} {frame.value} {unit}"
        )
    if isinstance(frame, NetSensorData):
        return (
            f"NetSensorData T={list(frame.temperatures)} "
            f"H={list(frame.humidities)} L={list(frame.light_levels)} "
            f"soil={list(frame.soil_states)}"
        )
    if isinstance(frame, NetExecutorStatus):
        gears = " ".join(
            f"{entry[1].split('_')[0]}={g}"
            for entry, g in zip(ACTUATOR_TABLE, frame.bank.gears())
        )
        return f"NetExecutorStatus {gears}"
    if isinstance(frame, GearInstruction):
        gears = " ".join(
            f"{entry[1].split('_')[0]}={g}"
            for entry, g in zip(ACTUATOR_TABLE, frame.bank.gears())
        )
        return f"GearInstruction {gears}"
    if isinstance(frame, AppData):
        gears = " ".join(
            f"{entry[1].split('_')[0]}={g}"
            for entry, g in zip(ACTUATOR_TABLE, frame.bank.gears())
        )
        return (
            f"AppData {gears} temp={frame.temperature}C hum={frame.humidity}% "
            f"light={frame.light}lux soil={'wet' if frame.soil else 'dry'}"
        )
    if isinstance(frame, AppAutoInstruction):
        return (
            f"AutoSetpoints temp={frame.temperature}C hum={frame.humidity}% "
            f"light={light_setpoint_lux(frame.light_hlux)}lux"
        )
    raise ProtocolError(f"not a frame: {frame!r}")


FRAME_KINDS = {
    "SensorInstruction": SensorInstruction,
    "SensorData": SensorData,
    "NetSensorData": NetSensorData,
    "NetExecutorStatus": NetExecutorStatus,
    "NetInstruction": GearInstruction,
    "GearInstruction": GearInstruction,
    "AppManualInstruction": GearInstruction,
    "AppData": AppData,
    "AppAutoInstruction": AppAutoInstruction,
}

_BANK_FIELDS = tuple(entry[1] for entry in ACTUATOR_TABLE)


def frame_from_fields(kind: str, values: dict) -> Frame:
    """Build a frame from its kind name and a flat field dict (the inverse
    of :func:`frame_fields`).  Unknown kinds raise ProtocolError; bad field
    sets raise TypeError from the dataclass constructor."""
    try:
        cls = FRAME_KINDS[kind]
    except KeyError:
        raise ProtocolError(f"unknown frame kind: {kind}") from None
    values = dict(values)
    values.pop("kind", None)
    if any(f.name == "bank" for f in fields(cls)):
        # Omitted gears mean off, same as the ActuatorBank defaults.
        bank = ActuatorBank(**{k: int(values.pop(k, 0)) for k in _BANK_FIELDS})
        rest = {
            k: tuple(v) if isinstance(v, list) else v for k, v in values.items()
        }
        return cls(bank=bank, **rest)
    return cls(**{
        k: tuple(v) if isinstance(v, list) else v for k, v in values.items()
    })


def frame_fields(frame: Frame) -> dict:
    """Flat field dict for a frame, used by the API and CLI encoders."""
    out: dict = {"kind": type(frame).__name__}
    for f in fields(frame):
        value = getattr(frame, f.name)
        if isinstance(value, ActuatorBank):
            for entry in ACTUATOR_TABLE:
                out[entry[1]] = getattr(value, entry[1])
        elif isinstance(value, tuple):
            out[f.name] = list(value)
        else:
            out[f.name] = value
    return out
