"""Network front ends: TCP listeners for gateway and app clients, plus
the live (wall-clock) gateway loop used when everything runs as real
processes on real sockets.

Listener layout:

* gateway port (default 8080): raw binary frames both ways.  One
  gateway connection at a time; a second connect displaces the first.
* app port (default 8088): a short line-oriented login preamble
  (``AUTH <user> <pass>`` or ``TOKEN <hex>``), answered with
  ``OK <token>`` or ``ERR <reason>``; after OK the stream switches to
  raw binary frames both ways.

Every ServerCore call happens on the event loop thread, so the core
needs no locking.  The live gateway loop runs in its own thread and
talks to the server exclusively through a TCP socket.
"""

from __future__ import annotations

import asyncio
import socket
import threading
import time
from pathlib import Path

from greenhouse.auth import AuthError, Authenticator, UserStore
from greenhouse.gateway import Gateway
from greenhouse.persistence import HistoryStore
from greenhouse.plant import Plant, uniform_state
from greenhouse.runner import SIM_PASSWORD, SIM_USER
from greenhouse.scenario import Scenario
from greenhouse.sensor_net import SensorNetwork
from greenhouse.server_core import ServerCore, Session

AUTH_LINE_LIMIT = 10


def open_server_core(scenario: Scenario, data_dir: str | Path) -> ServerCore:
    """Build a ServerCore over on-disk state, seeding the default
    operator account on first run."""
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    store = HistoryStore(data_dir)
    users = UserStore(data_dir / "users.tsv")
    if SIM_USER not in users:
        users.create_user(SIM_USER, SIM_PASSWORD)
    return ServerCore(
        store,
        Authenticator(users),
        queue_bound=scenario.queue_bound,
        auto_period=scenario.auto_period,
        staleness_bound=scenario.staleness_bound,
    )


class ServerService:
    """Owns the core plus its asyncio servers and periodic tasks."""

    def __init__(self, core: ServerCore, scenario: Scenario) -> None:
        self.core = core
        self.scenario = scenario
        self.servers: list[asyncio.base_events.Server] = []
        self._tasks: list[asyncio.Task] = []
        self.started = asyncio.Event()

    # -- outbound pumps -------------------------------------------------------

    async def _pump_session(
        self, session: Session, writer: asyncio.StreamWriter
    ) -> None:
        wake = asyncio.Event()
        session.notify = wake.set
        if session.queue:
            wake.set()
        try:
            while True:
                await wake.wait()
                wake.clear()
                data = session.drain()
                if data:
                    writer.write(data)
                    await writer.drain()
        except (ConnectionError, asyncio.CancelledError):
            pass

    # -- gateway listener -----------------------------------------------------

    async def _handle_gateway(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        if self.core.gateway_session is not None:
            self.core.detach_gateway(time.time())
        session = self.core.attach_gateway(time.time())
        pump = asyncio.create_task(self._pump_session(session, writer))
        try:
            while True:
                data = await reader.read(4096)
                if not data:
                    break
                self.core.gateway_bytes(data, time.time())
        except ConnectionError:
            pass
        finally:
            pump.cancel()
            if self.core.gateway_session is session:
                self.core.detach_gateway(time.time())
            writer.close()

    # -- app listener ---------------------------------------------------------

    async def _login_preamble(
        self,
        session: Session,
        reader: asyncio.StreamReader,
        writer: asyncio.StreamWriter,
    ) -> bool:
        for _ in range(AUTH_LINE_LIMIT):
            try:
                line = await reader.readline()
            except ConnectionError:
                return False
            if not line:
                return False
            parts = line.decode("utf-8", "replace").split()
            reply = b"ERR expected AUTH <user> <pass> or TOKEN <token>\n"
            if len(parts) == 3 and parts[0] == "AUTH":
                try:
                    token = self.core.login_session(
                        session, parts[1], parts[2], time.time()
                    )
                    reply = f"OK {token}\n".encode()
                except AuthError as exc:
                    reply = f"ERR {type(exc).__name__}\n".encode()
            elif len(parts) == 2 and parts[0] == "TOKEN":
                if self.core.login_token(session, parts[1]):
                    reply = f"OK {parts[1]}\n".encode()
                else:
                    reply = b"ERR InvalidToken\n"
            writer.write(reply)
            await writer.drain()
            if reply.startswith(b"OK"):
                return True
        return False

    async def _handle_app(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        session = self.core.open_app_session(time.time())
        pump: asyncio.Task | None = None
        try:
            if not await self._login_preamble(session, reader, writer):
                return
            pump = asyncio.create_task(self._pump_session(session, writer))
            while True:
                data = await reader.read(4096)
                if not data:
                    break
                self.core.app_bytes(session, data, time.time())
        except ConnectionError:
            pass
        finally:
            if pump is not None:
                pump.cancel()
            self.core.close_app_session(session, time.time())
            writer.close()

    # -- periodic control loop ------------------------------------------------

    async def _control_task(self) -> None:
        while True:
            await asyncio.sleep(min(1.0, self.scenario.auto_period))
            self.core.tick(time.time())

    # -- lifecycle ------------------------------------------------------------

    async def start(self, host: str = "127.0.0.1") -> None:
        self.servers.append(
            await asyncio.start_server(
                self._handle_gateway, host, self.scenario.gateway_port
            )
        )
        self.servers.append(
            await asyncio.start_server(
                self._handle_app, host, self.scenario.app_port
            )
        )
        self._tasks.append(asyncio.create_task(self._control_task()))
        self.started.set()

    async def stop(self) -> None:
        for task in self._tasks:
            task.cancel()
        for server in self.servers:
            server.close()
            await server.wait_closed()
        self.core.store.close()


class TcpNetLink:
    """Gateway-side NetLink over a real socket.  Non-blocking by
    construction: a send that cannot complete immediately counts as a
    link failure and the gateway's reconnect logic takes over."""

    def __init__(self, host: str, port: int) -> None:
        self.host = host
        self.port = port
        self.sock: socket.socket | None = None

    def connect(self) -> bool:
        self.close()
        try:
            sock = socket.create_connection((self.host, self.port), timeout=1.0)
        except OSError:
            return False
        sock.setblocking(False)
        self.sock = sock
        return True

    def close(self) -> None:
        if self.sock is not None:
            try:
                self.sock.close()
            except OSError:
                pass
            self.sock = None

    def send(self, data: bytes) -> bool:
        if self.sock is None:
            return False
        try:
            self.sock.sendall(data)
            return True
        except (BlockingIOError, OSError):
            self.close()
            return False

    def recv(self) -> bytes:
        if self.sock is None:
            return b""
        try:
            data = self.sock.recv(4096)
        except BlockingIOError:
            return b""
        except OSError:
            self.close()
            return b""
        if data == b"":
            self.close()
        return data


class GatewayRuntime:
    """Wall-clock driver for the simulated greenhouse plus gateway,
    pointed at a server over TCP.  Runs in a daemon thread."""

    def __init__(
        self,
        scenario: Scenario,
        server_host: str = "127.0.0.1",
        server_port: int | None = None,
        tick_interval: float = 0.05,
    ) -> None:
        self.scenario = scenario
        self.tick_interval = tick_interval
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
        self.link = TcpNetLink(
            server_host,
            scenario.gateway_port if server_port is None else server_port,
        )
        self.gateway = Gateway(
            serial_read=self.net.read_serial,
            serial_write=self.net.write_serial,
            net_link=self.link,
            push_period=scenario.push_period,
            alarm_period=scenario.alarm_period,
        )
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def _loop(self) -> None:
        last = time.monotonic()
        start = last
        while not self._stop.is_set():
            time.sleep(self.tick_interval)
            now = time.monotonic()
            dt = now - last
            last = now
            if dt > 0:
                self.net.tick(dt)
                self.plant.step(self.net.active_bank, dt)
            self.gateway.tick(now - start)

    def start(self) -> None:
        self._thread = threading.Thread(
            target=self._loop, name="gateway-loop", daemon=True
        )
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
        self.link.close()
