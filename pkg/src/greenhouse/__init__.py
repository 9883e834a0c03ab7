"""Simulated three-layer IoT greenhouse: wire protocol, sensor network,
gateway, management server, and control loop."""

from greenhouse.protocol import (
    ActuatorBank,
    AppAutoInstruction,
    AppData,
    AppManualInstruction,
    BadEnd,
    BadHeader,
    BadLength,
    DecodeError,
    Frame,
    GearInstruction,
    NetExecutorStatus,
    NetInstruction,
    NetSensorData,
    ProtocolError,
    RangeError,
    SensorData,
    SensorInstruction,
    UnknownType,
    decode_frame,
    describe_frame,
    encode_frame,
    frame_stream_scan,
)

__all__ = [
    "ActuatorBank",
    "AppAutoInstruction",
    "AppData",
    "AppManualInstruction",
    "BadEnd",
    "BadHeader",
    "BadLength",
    "DecodeError",
    "Frame",
    "GearInstruction",
    "NetExecutorStatus",
    "NetInstruction",
    "NetSensorData",
    "ProtocolError",
    "RangeError",
    "SensorData",
    "SensorInstruction",
    "UnknownType",
    "decode_frame",
    "describe_frame",
    "encode_frame",
    "frame_stream_scan",
]

__version__ = "0.1.0"
