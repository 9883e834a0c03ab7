"""Command-line interface, exercised through click's test runner."""

import json
from pathlib import Path

import httpx
import pytest
from click.testing import CliRunner

from greenhouse import cli

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture()
def runner():
    return CliRunner()


class TestFrameDecode:
    def test_single_frame(self, runner):
        result = runner.invoke(cli.main, ["frame", "decode", "A5060730010D"])
        assert result.exit_code == 0
        assert result.output.strip() == "SensorInstruction addr=07 LED gear=1"

    def test_multiple_frames_one_line_each(self, runner):
        result = runner.invoke(
            cli.main, ["frame", "decode", "A5060730010D", "A5060101190D"]
        )
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert len(lines) == 2
        assert "temperature" in lines[1]

    def test_error_frame_reports_and_fails(self, runner):
        result = runner.invoke(cli.main, ["frame", "decode", "A6060730010D"])
        assert result.exit_code == 1
        assert "BadHeader" in result.output

    def test_not_hex(self, runner):
        result = runner.invoke(cli.main, ["frame", "decode", "zz"])
        assert result.exit_code == 1
        assert "not hex" in result.output


class TestFrameEncode:
    def test_instruction(self, runner):
        result = runner.invoke(
            cli.main,
            [
                "frame",
                "encode",
                "SensorInstruction",
                "address=7",
                "type_code=0x30",
                "value=1",
            ],
        )
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert lines[0] == "A5060730010D"
        assert "LED" in lines[1]

    def test_list_fields(self, runner):
        result = runner.invoke(
            cli.main,
            [
                "frame",
                "encode",
                "NetExecutorStatus",
                "led_gear=1",
                "heating_gear=0",
                "cooling_gear=0",
                "dehumidify_gear=2",
                "drip_switch=0",
                "humidifier_switch=1",
            ],
        )
        assert result.exit_code == 0
        hex_line = result.output.strip().splitlines()[0]
        assert hex_line.startswith("A50F") and hex_line.endswith("0D")

    def test_bad_kind(self, runner):
        result = runner.invoke(cli.main, ["frame", "encode", "Mystery"])
        assert result.exit_code != 0

    def test_instruction_values_ride_leniently(self, runner):
        # The wire carries any byte; the executive clamps at apply time.
        result = runner.invoke(
            cli.main,
            [
                "frame",
                "encode",
                "SensorInstruction",
                "address=7",
                "type_code=0x30",
                "value=9",
            ],
        )
        assert result.exit_code == 0
        assert result.output.strip().splitlines()[0] == "A5060730090D"

    def test_status_gear_out_of_range_rejected(self, runner):
        result = runner.invoke(
            cli.main,
            [
                "frame",
                "encode",
                "NetExecutorStatus",
                "led_gear=9",
                "heating_gear=0",
                "cooling_gear=0",
                "dehumidify_gear=0",
                "drip_switch=0",
                "humidifier_switch=0",
            ],
        )
        assert result.exit_code != 0

    def test_omitted_bank_fields_mean_off(self, runner):
        result = runner.invoke(
            cli.main,
            ["frame", "encode", "GearInstruction", "led_gear=2", "drip_switch=1"],
        )
        assert result.exit_code == 0
        assert result.output.splitlines()[0] == "A50F3002310032003300340135000D"


class TestFrameSelftest:
    def test_shipped_vectors_pass(self, runner):
        result = runner.invoke(cli.main, ["frame", "selftest"])
        assert result.exit_code == 0
        summary = result.output.strip().splitlines()[-1]
        assert "vectors ok" in summary
        passed, total = summary.split()[0].split("/")
        assert passed == total and int(total) > 30

    def test_broken_vector_file_fails(self, runner, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("A5060730010D  SensorInstruction  address=8 type_code=48 value=1\n")
        result = runner.invoke(
            cli.main, ["frame", "selftest", "--vectors", str(bad)]
        )
        assert result.exit_code == 1
        assert "line 1" in result.output


class TestRunSim:
    def test_default_run_summarizes(self, runner, tmp_path):
        result = runner.invoke(
            cli.main,
            [
                "run-sim",
                "--scenario",
                str(SCENARIO_DIR / "default.cfg"),
                "--data-dir",
                str(tmp_path / "sim"),
            ],
        )
        assert result.exit_code == 0, result.output
        assert "600s simulated" in result.output
        assert "final: temperature" in result.output

    def test_csv_output(self, runner, tmp_path):
        csv_path = tmp_path / "out.csv"
        result = runner.invoke(
            cli.main,
            [
                "run-sim",
                "--scenario",
                str(SCENARIO_DIR / "default.cfg"),
                "--data-dir",
                str(tmp_path / "sim"),
                "--csv",
                str(csv_path),
                "--quiet",
            ],
        )
        assert result.exit_code == 0, result.output
        lines = csv_path.read_text().splitlines()
        assert lines[0].startswith("time,temperature")
        assert len(lines) == 601

    def test_bad_scenario_path(self, runner):
        result = runner.invoke(cli.main, ["run-sim", "--scenario", "/no/such"])
        assert result.exit_code != 0


class TestThinClients:
    def test_status_unreachable_server(self, runner):
        result = runner.invoke(
            cli.main, ["status", "--server", "http://127.0.0.1:9"]
        )
        assert result.exit_code == 1
        assert "unreachable" in result.output

    def test_export_history_records(self, runner, monkeypatch, tmp_path):
        def handler(request: httpx.Request) -> httpx.Response:
            if request.url.path == "/auth/login":
                return httpx.Response(200, json={"token": "ab" * 16})
            assert request.headers["Authorization"] == "Bearer " + "ab" * 16
            assert request.url.path == "/history"
            return httpx.Response(
                200,
                json={
                    "records": [
                        {
                            "timestamp": 1.5,
                            "record_class": "reading",
                            "body": "A5250D",
                        }
                    ]
                },
            )

        monkeypatch.setattr(
            cli,
            "_client",
            lambda server: httpx.Client(
                base_url=server, transport=httpx.MockTransport(handler)
            ),
        )
        out = tmp_path / "hist.csv"
        result = runner.invoke(
            cli.main, ["export-history", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert out.read_text() == "timestamp,record_class,body\n1.5,reading,A5250D\n"

    def test_export_series(self, runner, monkeypatch):
        def handler(request: httpx.Request) -> httpx.Response:
            if request.url.path == "/auth/login":
                return httpx.Response(200, json={"token": "cd" * 16})
            assert request.url.path == "/history/series"
            assert request.url.params["variable"] == "temperature"
            assert request.url.params["buckets"] == "3"
            return httpx.Response(
                200,
                json={"variable": "temperature", "series": [[1.0, 20.5]]},
            )

        monkeypatch.setattr(
            cli,
            "_client",
            lambda server: httpx.Client(
                base_url=server, transport=httpx.MockTransport(handler)
            ),
        )
        result = runner.invoke(
            cli.main,
            ["export-history", "--series", "temperature", "--buckets", "3"],
        )
        assert result.exit_code == 0, result.output
        assert "time,value" in result.output
        assert "1.0,20.5" in result.output


class TestEntryPoint:
    def test_help_lists_subcommands(self, runner):
        result = runner.invoke(cli.main, ["--help"])
        for name in (
            "run-all",
            "run-server",
            "run-gateway",
            "run-sim",
            "frame",
            "export-history",
            "status",
        ):
            assert name in result.output
