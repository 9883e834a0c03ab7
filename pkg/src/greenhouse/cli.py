"""Command-line entry points.

Local work (codec, simulation) runs in-process; anything touching a
running server goes through its HTTP interface, keeping this a thin
client.
"""

from __future__ import annotations

import sys
import tempfile
import time
from pathlib import Path

import click
import httpx

from greenhouse import goldens, protocol
from greenhouse.scenario import (
    Scenario,
    ScenarioError,
    default_scenario,
    load_scenario,
)

DEFAULT_SERVER = "http://127.0.0.1:8090"


def _load_scenario_opt(path: str | None) -> Scenario:
    if path is None:
        return default_scenario()
    try:
        return load_scenario(path)
    except (OSError, ScenarioError) as exc:
        raise click.ClickException(f"scenario: {exc}")


@click.group()
@click.version_option(package_name="greenhouse")
def main() -> None:
    """Simulated smart-greenhouse stack: codec, simulator, server, tools."""


# -- full stack, server, gateway ------------------------------------------------


scenario_option = click.option(
    "--scenario",
    "scenario_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Scenario file (INI). Defaults to built-in settings.",
)


@main.command("run-server")
@scenario_option
@click.option("--data-dir", default="greenhouse-data", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def run_server(scenario_path: str | None, data_dir: str, host: str) -> None:
    """Run the management server: TCP listeners plus HTTP/WS."""
    import uvicorn

    from greenhouse.api import create_app
    from greenhouse.service import open_server_core

    scenario = _load_scenario_opt(scenario_path)
    core = open_server_core(scenario, data_dir)
    app = create_app(core, scenario, host=host)
    click.echo(
        f"server: gateway tcp {scenario.gateway_port}, app tcp "
        f"{scenario.app_port}, http/ws {scenario.bridge_port}, data {data_dir}"
    )
    uvicorn.run(app, host=host, port=scenario.bridge_port, log_level="warning")


@main.command("run-gateway")
@scenario_option
@click.option("--server-host", default="127.0.0.1", show_default=True)
@click.option("--server-port", type=int, default=None, help="Gateway TCP port.")
def run_gateway(
    scenario_path: str | None, server_host: str, server_port: int | None
) -> None:
    """Run the gateway plus simulated sensor network against a server."""
    from greenhouse.service import GatewayRuntime

    scenario = _load_scenario_opt(scenario_path)
    runtime = GatewayRuntime(scenario, server_host, server_port)
    runtime.start()
    port = server_port if server_port is not None else scenario.gateway_port
    click.echo(f"gateway: pushing to {server_host}:{port}, ctrl-c to stop")
    try:
        while True:
            time.sleep(1)
    except KeyboardInterrupt:
        pass
    finally:
        runtime.stop()


@main.command("run-all")
@scenario_option
@click.option("--data-dir", default="greenhouse-data", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def run_all(scenario_path: str | None, data_dir: str, host: str) -> None:
    """Run server and gateway together in one process."""
    import uvicorn

    from greenhouse.api import create_app
    from greenhouse.service import GatewayRuntime, open_server_core

    scenario = _load_scenario_opt(scenario_path)
    core = open_server_core(scenario, data_dir)
    app = create_app(core, scenario, host=host)
    runtime = GatewayRuntime(scenario, host)
    runtime.start()
    click.echo(
        f"full stack: gateway tcp {scenario.gateway_port}, app tcp "
        f"{scenario.app_port}, http/ws {scenario.bridge_port}, data {data_dir}"
    )
    try:
        uvicorn.run(
            app, host=host, port=scenario.bridge_port, log_level="warning"
        )
    finally:
        runtime.stop()


# -- simulation ------------------------------------------------------------------


@main.command("run-sim")
@scenario_option
@click.option("--data-dir", default=None, help="Defaults to a fresh temp dir.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--quiet", is_flag=True)
def run_sim(
    scenario_path: str | None,
    data_dir: str | None,
    csv_path: str | None,
    quiet: bool,
) -> None:
    """Run a scenario to completion in simulated time and summarize."""
    from greenhouse.runner import run_scenario

    scenario = _load_scenario_opt(scenario_path)
    if data_dir is None:
        data_dir = tempfile.mkdtemp(prefix="greenhouse-sim-")
    try:
        result = run_scenario(scenario, data_dir, csv_path=csv_path)
    except ScenarioError as exc:
        raise click.ClickException(str(exc))
    final = result.final
    if not quiet:
        click.echo(
            f"{scenario.name}: {final['time']:.0f}s simulated, "
            f"{len(result.pushes)} pushes, mode {final['mode']}"
        )
        click.echo(
            f"final: temperature {final['temperature']:.2f}  "
            f"humidity {final['humidity']:.2f}  light {final['light']:.0f}  "
            f"soil {final['soil_moisture']:.3f}"
        )
        click.echo(
            "gears: led {led} heating {heating} cooling {cooling} "
            "dehumidify {dehumidify} drip {drip} humidifier "
            "{humidifier}".format(**final)
        )
        if csv_path:
            click.echo(f"trajectory written to {csv_path}")
        click.echo(f"history in {data_dir}")


# -- codec tools -----------------------------------------------------------------


@main.group()
def frame() -> None:
    """Encode, decode, and self-test wire frames."""


@frame.command("decode")
@click.argument("hex_frames", nargs=-1, required=True)
def frame_decode(hex_frames: tuple[str, ...]) -> None:
    """Decode hex frames and print one description per line."""
    failed = False
    for text in hex_frames:
        try:
            raw = bytes.fromhex(text)
        except ValueError:
            click.echo(f"{text}: not hex")
            failed = True
            continue
        try:
            click.echo(protocol.describe_frame(protocol.decode_frame(raw)))
        except protocol.ProtocolError as exc:
            click.echo(f"{text}: {type(exc).__name__}: {exc}")
            failed = True
    if failed:
        sys.exit(1)


@frame.command("encode")
@click.argument("kind")
@click.argument("fields", nargs=-1)
def frame_encode(kind: str, fields: tuple[str, ...]) -> None:
    """Build a frame from KIND and FIELD=VALUE pairs, print its hex.

    Example: frame encode SensorInstruction address=7 type_code=0x30 value=1
    """
    values: dict = {}
    for item in fields:
        key, sep, raw = item.partition("=")
        if not sep:
            raise click.ClickException(f"expected FIELD=VALUE, got {item!r}")
        try:
            if "," in raw:
                values[key] = [int(part, 0) for part in raw.split(",")]
            else:
                values[key] = int(raw, 0)
        except ValueError:
            raise click.ClickException(f"bad integer in {item!r}")
    try:
        built = protocol.frame_from_fields(kind, values)
        encoded = protocol.encode_frame(built)
    except (protocol.ProtocolError, KeyError, TypeError, ValueError) as exc:
        raise click.ClickException(str(exc))
    click.echo(encoded.hex().upper())
    click.echo(protocol.describe_frame(built))


@frame.command("selftest")
@click.option("--vectors", type=click.Path(exists=True, dir_okay=False))
def frame_selftest(vectors: str | None) -> None:
    """Run the golden-vector file through the codec."""
    text = Path(vectors).read_text(encoding="utf-8") if vectors else None
    results = goldens.check_all(text)
    bad = 0
    for vector, problem in results:
        if problem is None:
            continue
        bad += 1
        click.echo(f"line {vector.line_no}: {problem}")
    click.echo(f"{len(results) - bad}/{len(results)} vectors ok")
    if bad:
        sys.exit(1)


# -- server clients --------------------------------------------------------------


server_option = click.option(
    "--server", default=DEFAULT_SERVER, show_default=True, help="HTTP base URL."
)


def _client(server: str) -> httpx.Client:
    return httpx.Client(base_url=server, timeout=10.0)


def _login(client: httpx.Client, username: str, password: str) -> str:
    response = client.post(
        "/auth/login", json={"username": username, "password": password}
    )
    if response.status_code != 200:
        raise click.ClickException(
            f"login failed ({response.status_code}): {response.text}"
        )
    return response.json()["token"]


@main.command()
@server_option
def status(server: str) -> None:
    """Show a running server's live state."""
    try:
        with _client(server) as client:
            response = client.get("/status")
            response.raise_for_status()
            view = response.json()
    except httpx.HTTPError as exc:
        raise click.ClickException(f"server unreachable: {exc}")
    click.echo(f"mode: {view['mode']}")
    sp = view["setpoints"]
    click.echo(
        f"setpoints: temperature {sp['temperature']:g}  "
        f"humidity {sp['humidity']:g}  light {sp['light']:g}"
    )
    if "aggregates" in view:
        ag = view["aggregates"]
        click.echo(
            f"measured: temperature {ag['temperature']:.2f}  "
            f"humidity {ag['humidity']:.2f}  light {ag['light']:.0f}  "
            f"soil {ag['soil_states']}"
        )
    gears = view["gears"]
    click.echo(
        "gears: led {led_gear} heating {heating_gear} cooling {cooling_gear} "
        "dehumidify {dehumidify_gear} drip {drip_switch} humidifier "
        "{humidifier_switch}".format(**gears)
    )
    click.echo(
        f"gateway connected: {view['gateway_connected']}  "
        f"app sessions: {view['app_sessions']}  records: {view['records']}"
    )


@main.command("export-history")
@server_option
@click.option("--username", default="operator", show_default=True)
@click.option("--password", default="operator", show_default=True)
@click.option(
    "--record-class",
    default=None,
    help="Filter by record class (reading, status, instruction, ...).",
)
@click.option("--start", type=float, default=None)
@click.option("--end", type=float, default=None)
@click.option(
    "--series",
    "series_variable",
    default=None,
    help="Export a numeric series (temperature, humidity, light, soil) "
    "instead of raw records.",
)
@click.option("--buckets", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def export_history(
    server: str,
    username: str,
    password: str,
    record_class: str | None,
    start: float | None,
    end: float | None,
    series_variable: str | None,
    buckets: int | None,
    out: str | None,
) -> None:
    """Download persisted history as CSV (stdout or --out)."""
    try:
        with _client(server) as client:
            token = _login(client, username, password)
            headers = {"Authorization": f"Bearer {token}"}
            if series_variable is not None:
                params: dict = {"variable": series_variable}
                if start is not None:
                    params["start"] = start
                if end is not None:
                    params["end"] = end
                if buckets is not None:
                    params["buckets"] = buckets
                response = client.get(
                    "/history/series", params=params, headers=headers
                )
                response.raise_for_status()
                rows = ["time,value"]
                rows += [
                    f"{t!r},{v!r}" for t, v in response.json()["series"]
                ]
            else:
                params = {}
                if record_class is not None:
                    params["record_class"] = record_class
                if start is not None:
                    params["start"] = start
                if end is not None:
                    params["end"] = end
                response = client.get("/history", params=params, headers=headers)
                response.raise_for_status()
                rows = ["timestamp,record_class,body"]
                rows += [
                    f"{r['timestamp']!r},{r['record_class']},{r['body']}"
                    for r in response.json()["records"]
                ]
    except httpx.HTTPError as exc:
        raise click.ClickException(f"export failed: {exc}")
    text = "\n".join(rows) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"{len(rows) - 1} rows written to {out}", err=True)


if __name__ == "__main__":
    main()
