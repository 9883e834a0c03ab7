"""HTTP and WebSocket surface over the server core.

REST handles login, status, history, codec utilities, and control.
The WebSocket bridge carries live traffic for browser clients: binary
frames travel as plain hex text messages (uppercase, no separators),
while login and history queries ride as small JSON objects on the same
socket.  A text message that parses as hex is a frame; anything else
must be JSON with an ``op`` field.
"""

from __future__ import annotations

import asyncio
import json
import time
from contextlib import asynccontextmanager

from fastapi import Depends, FastAPI, HTTPException, Query, WebSocket
from fastapi.security import HTTPAuthorizationCredentials, HTTPBearer
from pydantic import BaseModel, Field
from starlette.websockets import WebSocketDisconnect

from greenhouse import protocol
from greenhouse.auth import InvalidCredentials, RateLimited
from greenhouse.persistence import CLASSES
from greenhouse.protocol import ProtocolError
from greenhouse.scenario import Scenario
from greenhouse.server_core import ServerCore, Session
from greenhouse.service import ServerService


# -- request/response models ---------------------------------------------------


class LoginRequest(BaseModel):
    username: str = Field(min_length=1, max_length=64)
    password: str = Field(min_length=1, max_length=256)


class LoginResponse(BaseModel):
    token: str
    username: str


class DecodeRequest(BaseModel):
    hex: str = Field(min_length=2, pattern=r"^[0-9A-Fa-f]+$")


class DecodeResponse(BaseModel):
    kind: str
    text: str
    fields: dict


class EncodeRequest(BaseModel):
    kind: str
    fields: dict


class EncodeResponse(BaseModel):
    hex: str
    text: str


class ManualControlRequest(BaseModel):
    led: int = Field(0, ge=0, le=3)
    heating: int = Field(0, ge=0, le=5)
    cooling: int = Field(0, ge=0, le=5)
    dehumidify: int = Field(0, ge=0, le=5)
    drip: int = Field(0, ge=0, le=1)
    humidifier: int = Field(0, ge=0, le=1)


class AutoControlRequest(BaseModel):
    temperature: float = Field(ge=-10, le=40)
    humidity: float = Field(ge=0, le=100)
    light: float = Field(ge=0, le=25500)


class ControlResponse(BaseModel):
    mode: str
    hex: str


class RecordModel(BaseModel):
    timestamp: float
    record_class: str
    body: str


class HistoryResponse(BaseModel):
    records: list[RecordModel]


class SeriesResponse(BaseModel):
    variable: str
    series: list[tuple[float, float]]


# -- app factory ---------------------------------------------------------------


def create_app(
    core: ServerCore, scenario: Scenario, host: str = "127.0.0.1"
) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        service = ServerService(core, scenario)
        await service.start(host)
        app.state.service = service
        yield
        await service.stop()

    app = FastAPI(title="greenhouse", lifespan=lifespan)
    bearer = HTTPBearer(auto_error=False)
    started = time.time()

    # One pre-authorized loopback session for REST-originated control;
    # it is not registered for pushes, so its queue stays empty.  Every
    # control endpoint passes require_user first.
    rest_session = Session("rest", core.queue_bound)
    rest_session.authenticated = True

    def require_user(
        credentials: HTTPAuthorizationCredentials | None = Depends(bearer),
    ) -> str:
        if credentials is not None:
            username = core.authenticator.check_token(credentials.credentials)
            if username is not None:
                return username
        raise HTTPException(status_code=401, detail="invalid or missing token")

    # -- auth --

    @app.post("/auth/login", response_model=LoginResponse)
    def login(body: LoginRequest) -> LoginResponse:
        session = core.open_app_session(time.time(), kind="rest-login")
        try:
            token = core.login_session(
                session, body.username, body.password, time.time()
            )
        except RateLimited:
            raise HTTPException(status_code=429, detail="too many failures")
        except InvalidCredentials:
            raise HTTPException(status_code=401, detail="invalid credentials")
        finally:
            core.close_app_session(session, time.time())
        return LoginResponse(token=token, username=body.username)

    # -- health and status --

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "uptime": time.time() - started}

    @app.get("/status")
    def status() -> dict:
        return core.status_view()

    # -- history --

    @app.get("/history", response_model=HistoryResponse)
    def history(
        record_class: str | None = Query(None),
        start: float | None = Query(None),
        end: float | None = Query(None),
        _user: str = Depends(require_user),
    ) -> HistoryResponse:
        if record_class is not None and record_class not in CLASSES:
            raise HTTPException(
                status_code=400,
                detail=f"record_class must be one of {', '.join(CLASSES)}",
            )
        records = core.query_history(record_class, start, end)
        return HistoryResponse(
            records=[
                RecordModel(
                    timestamp=r.timestamp,
                    record_class=r.record_class,
                    body=r.body,
                )
                for r in records
            ]
        )

    @app.get("/history/series", response_model=SeriesResponse)
    def history_series(
        variable: str = Query(...),
        start: float | None = Query(None),
        end: float | None = Query(None),
        buckets: int | None = Query(None, ge=1, le=10000),
        _user: str = Depends(require_user),
    ) -> SeriesResponse:
        try:
            series = core.reading_series(variable, start, end, buckets)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return SeriesResponse(variable=variable, series=series)

    # -- codec utilities --

    @app.post("/frame/decode", response_model=DecodeResponse)
    def frame_decode(body: DecodeRequest) -> DecodeResponse:
        try:
            frame = protocol.decode_frame(bytes.fromhex(body.hex))
        except ProtocolError as exc:
            raise HTTPException(
                status_code=400, detail=f"{type(exc).__name__}: {exc}"
            )
        fields = protocol.frame_fields(frame)
        kind = fields.pop("kind")
        return DecodeResponse(
            kind=kind, text=protocol.describe_frame(frame), fields=fields
        )

    @app.post("/frame/encode", response_model=EncodeResponse)
    def frame_encode(body: EncodeRequest) -> EncodeResponse:
        try:
            frame = protocol.frame_from_fields(body.kind, body.fields)
            raw = protocol.encode_frame(frame)
        except (ProtocolError, KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return EncodeResponse(
            hex=raw.hex().upper(), text=protocol.describe_frame(frame)
        )

    # -- control --

    @app.post("/control/manual", response_model=ControlResponse)
    def control_manual(
        body: ManualControlRequest, _user: str = Depends(require_user)
    ) -> ControlResponse:
        bank = protocol.ActuatorBank(
            led_gear=body.led,
            heating_gear=body.heating,
            cooling_gear=body.cooling,
            dehumidify_gear=body.dehumidify,
            drip_switch=body.drip,
            humidifier_switch=body.humidifier,
        )
        frame = protocol.GearInstruction(bank)
        core.on_app_frame(rest_session, frame, time.time())
        return ControlResponse(
            mode=core.control.mode, hex=protocol.encode_frame(frame).hex().upper()
        )

    @app.post("/control/auto", response_model=ControlResponse)
    def control_auto(
        body: AutoControlRequest, _user: str = Depends(require_user)
    ) -> ControlResponse:
        frame = protocol.AppAutoInstruction(
            temperature=round(body.temperature),
            humidity=round(body.humidity),
            light_hlux=protocol.light_setpoint_byte(body.light),
        )
        core.on_app_frame(rest_session, frame, time.time())
        return ControlResponse(
            mode=core.control.mode, hex=protocol.encode_frame(frame).hex().upper()
        )

    # -- websocket bridge --

    @app.websocket("/ws")
    async def ws_bridge(ws: WebSocket) -> None:
        await ws.accept()
        session = core.open_app_session(time.time(), kind="ws")
        wake = asyncio.Event()
        session.notify = wake.set

        async def pump() -> None:
            while True:
                await wake.wait()
                wake.clear()
                while session.queue:
                    raw = session.queue.popleft()
                    await ws.send_text(raw.hex().upper())

        pump_task = asyncio.create_task(pump())
        try:
            while True:
                message = await ws.receive_text()
                await _ws_message(core, session, ws, message)
        except WebSocketDisconnect:
            pass
        finally:
            pump_task.cancel()
            core.close_app_session(session, time.time())

    return app


def _is_hex(message: str) -> bool:
    if len(message) < 2 or len(message) % 2:
        return False
    try:
        bytes.fromhex(message)
        return True
    except ValueError:
        return False


async def _ws_message(
    core: ServerCore, session: Session, ws: WebSocket, message: str
) -> None:
    if _is_hex(message):
        core.app_bytes(session, bytes.fromhex(message), time.time())
        return
    try:
        body = json.loads(message)
        op = body["op"]
    except (ValueError, KeyError, TypeError):
        await ws.send_text(json.dumps({"ok": False, "error": "bad message"}))
        return

    if op == "auth":
        reply: dict = {"op": "auth"}
        token = body.get("token")
        if token is not None:
            reply["ok"] = core.login_token(session, str(token))
            if reply["ok"]:
                reply["token"] = token
            else:
                reply["error"] = "invalid token"
        else:
            try:
                reply["token"] = core.login_session(
                    session,
                    str(body.get("username", "")),
                    str(body.get("password", "")),
                    time.time(),
                )
                reply["ok"] = True
            except (InvalidCredentials, RateLimited) as exc:
                reply["ok"] = False
                reply["error"] = type(exc).__name__
        await ws.send_text(json.dumps(reply))
    elif op == "status":
        view = core.status_view()
        view["op"] = "status"
        view["ok"] = True
        await ws.send_text(json.dumps(view))
    elif op == "history":
        reply = {"op": "history"}
        if not session.authenticated:
            reply.update(ok=False, error="not authenticated")
        else:
            try:
                buckets = body.get("buckets")
                series = core.reading_series(
                    str(body.get("variable", "temperature")),
                    None if body.get("start") is None else float(body["start"]),
                    None if body.get("end") is None else float(body["end"]),
                    None if buckets is None else int(buckets),
                )
                reply.update(ok=True, series=series)
            except (ValueError, TypeError) as exc:
                reply.update(ok=False, error=str(exc))
        await ws.send_text(json.dumps(reply))
    else:
        await ws.send_text(
            json.dumps({"ok": False, "error": f"unknown op {op!r}"})
        )
