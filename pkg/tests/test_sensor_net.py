"""Sensor network tests: routing, sampling, execution, latency, isolation."""

import pytest

from greenhouse.plant import Plant, PlantParams, uniform_state
from greenhouse.protocol import (
    SensorData,
    SensorInstruction,
    StreamScanner,
    encode_frame,
)
from greenhouse.sensor_net import SensorNetwork


def make_net(**kwargs):
    plant_kwargs = {}
    if "state" in kwargs:
        plant_kwargs["state"] = kwargs.pop("state")
    plant = Plant(**plant_kwargs)
    return SensorNetwork(plant, **kwargs)


def read_frames(net):
    frames, errors = StreamScanner().feed(net.read_serial())
    assert not errors
    return frames


def test_instruction_applies_and_echoes():
    net = make_net()
    net.write_serial(encode_frame(SensorInstruction(7, 0x31, 2)))
    net.tick(1.0)
    assert net.banks[7].heating_gear == 2
    assert net.banks[8].heating_gear == 2  # mirrored silently
    frames = read_frames(net)
    assert frames == [SensorData(7, 0x51, 2)]


def test_instruction_bytes_match_published_row():
    net = make_net()
    net.write_serial(bytes.fromhex("A5060730010D"))
    net.tick(1.0)
    assert net.active_bank.led_gear == 1
    assert net.read_serial() == bytes.fromhex("A5060750010D")


def test_split_banks_isolation():
    net = make_net(split_banks=True)
    net.write_serial(encode_frame(SensorInstruction(7, 0x32, 4)))
    net.tick(1.0)
    assert net.banks[7].cooling_gear == 4
    assert net.banks[8].cooling_gear == 0
    net.write_serial(encode_frame(SensorInstruction(8, 0x33, 1)))
    net.tick(1.0)
    assert net.banks[7].dehumidify_gear == 0
    assert net.banks[8].dehumidify_gear == 1


def test_gear_clamped_with_diagnostic():
    net = make_net()
    net.write_serial(encode_frame(SensorInstruction(7, 0x30, 9)))
    net.tick(1.0)
    assert net.active_bank.led_gear == 3
    assert read_frames(net) == [SensorData(7, 0x50, 3)]
    assert net.diagnostics()["gears_clamped"] == 1


def test_bad_address_dropped():
    net = make_net()
    net.write_serial(bytes.fromhex("A5060930010D"))  # address 0x09
    net.tick(1.0)
    assert net.read_serial() == b""
    assert net.diagnostics()["bad_address_dropped"] == 1


def test_garbage_on_serial_counted():
    net = make_net()
    net.write_serial(b"\x01\x02" + bytes.fromhex("A5060730010D"))
    net.tick(1.0)
    assert net.active_bank.led_gear == 1
    assert net.diagnostics()["serial_decode_errors"] == 1


def test_query_routes_to_one_node():
    net = make_net(state=uniform_state(temperature=20.0))
    net.write_serial(encode_frame(SensorInstruction(3, 0x20, 0x10)))
    net.tick(1.0)
    frames = read_frames(net)
    assert frames == [SensorData(3, 0x01, 20)]


def test_bad_query_value_dropped():
    net = make_net()
    net.write_serial(encode_frame(SensorInstruction(3, 0x20, 0x99)))
    net.tick(1.0)
    assert net.read_serial() == b""
    assert net.diagnostics()["bad_query_dropped"] == 1


def test_sampling_schedule():
    net = make_net(sampling_period=2.0)
    net.tick(1.0)
    assert read_frames(net) == []
    net.tick(1.0)
    frames = read_frames(net)
    assert len(frames) == 24  # 6 nodes x 4 quantities
    addresses = {f.address for f in frames}
    assert addresses == {1, 2, 3, 4, 5, 6}


def test_sample_encodings():
    state = uniform_state(temperature=-10.0, humidity=60.0, light=30000.0, soil=0.1)
    net = make_net(state=state)
    net.tick(2.0)
    raw = net.read_serial()
    assert bytes.fromhex("A5060101F60D") in raw  # -10 C two's complement
    assert bytes.fromhex("A50701037530" + "0D") in raw  # 30000 lux, 2 bytes
    assert bytes.fromhex("A5060104000D") in raw  # soil dry below threshold


def test_soil_digital_threshold():
    net = make_net(state=uniform_state(soil=0.31))
    assert net._location_readings(1)["soil"] == 1
    net.plant.set_soil(0.29)
    assert net._location_readings(1)["soil"] == 0


def test_latency_delays_echo():
    net = make_net(hop_latency=0.1)
    net.write_serial(encode_frame(SensorInstruction(7, 0x30, 1)))
    net.tick(0.15)  # delivered to the terminal, echo still in flight
    assert net.read_serial() == b""
    net.tick(0.05)  # echo due at 0.2
    assert read_frames(net) == [SensorData(7, 0x50, 1)]


def test_join_delay_defers_everything():
    net = make_net(join_delay=5.0, sampling_period=2.0)
    net.write_serial(encode_frame(SensorInstruction(7, 0x30, 1)))
    net.tick(4.0)
    assert net.read_serial() == b""
    assert net.active_bank.led_gear == 0
    net.tick(1.0)  # join barrier passes at t=5
    assert net.active_bank.led_gear == 1
    net.tick(2.0)  # first sample at join + period = 7
    frames = read_frames(net)
    assert any(isinstance(f, SensorData) and f.address == 1 for f in frames)


def test_tick_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        make_net().tick(0)


def test_frame_conservation():
    net = make_net()
    for gear in (1, 2, 3):
        net.write_serial(encode_frame(SensorInstruction(7, 0x30, gear)))
    net.tick(2.0)
    net.read_serial()
    diag = net.diagnostics()
    assert diag["radio_scheduled"] == diag["radio_delivered"] + diag["radio_in_flight"]
