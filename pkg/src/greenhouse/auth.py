"""Account storage and login with salted hashes and rate limiting.

Passwords are stored as PBKDF2-HMAC-SHA256 digests with per-user random
salts, compared in constant time.  Five failed attempts for the same
username within a minute lock further tries until the window drains.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import time
from collections import deque
from pathlib import Path

PBKDF2_ITERATIONS = 100_000
RATE_WINDOW = 60.0
RATE_MAX_FAILURES = 5


class AuthError(Exception):
    pass


class InvalidCredentials(AuthError):
    pass


class RateLimited(AuthError):
    pass


class UserStore:
    """Accounts persisted as TSV: username, salt, hash, iterations,
    created-at.  Usernames are unique; clear passwords never touch disk."""

    def __init__(self, path: Path | str, iterations: int = PBKDF2_ITERATIONS):
        self.path = Path(path)
        self.iterations = iterations
        self._users: dict[str, tuple[bytes, bytes, int]] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                name, salt, digest, iters, _created = line.split("\t")
                self._users[name] = (
                    bytes.fromhex(salt),
                    bytes.fromhex(digest),
                    int(iters),
                )

    def _digest(self, password: str, salt: bytes, iterations: int) -> bytes:
        return hashlib.pbkdf2_hmac(
            "sha256", password.encode(), salt, iterations
        )

    def create_user(
        self, username: str, password: str, created_at: float | None = None
    ) -> None:
        if "\t" in username or "\n" in username:
            raise ValueError("username must not contain tabs or newlines")
        if username in self._users:
            raise ValueError(f"username {username!r} already exists")
        salt = secrets.token_bytes(16)
        digest = self._digest(password, salt, self.iterations)
        self._users[username] = (salt, digest, self.iterations)
        created = time.time() if created_at is None else created_at
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(
                f"{username}\t{salt.hex()}\t{digest.hex()}"
                f"\t{self.iterations}\t{created!r}\n"
            )

    def verify(self, username: str, password: str) -> bool:
        entry = self._users.get(username)
        if entry is None:
            # Burn comparable time so unknown usernames are not detectable
            # by response latency.
            self._digest(password, b"\x00" * 16, self.iterations)
            return False
        salt, digest, iterations = entry
        return hmac.compare_digest(digest, self._digest(password, salt, iterations))

    def __contains__(self, username: str) -> bool:
        return username in self._users


class Authenticator:
    """Login front end: verifies against a UserStore, throttles failures,
    and issues opaque session tokens."""

    def __init__(
        self,
        users: UserStore,
        window: float = RATE_WINDOW,
        max_failures: int = RATE_MAX_FAILURES,
    ):
        self.users = users
        self.window = window
        self.max_failures = max_failures
        self._failures: dict[str, deque[float]] = {}
        self._tokens: dict[str, str] = {}

    def _recent_failures(self, username: str, now: float) -> deque[float]:
        times = self._failures.setdefault(username, deque())
        while times and now - times[0] > self.window:
            times.popleft()
        return times

    def login(self, username: str, password: str, now: float | None = None) -> str:
        if now is None:
            now = time.monotonic()
        times = self._recent_failures(username, now)
        if len(times) >= self.max_failures:
            raise RateLimited(
                f"too many failures for {username!r}; wait and retry"
            )
        if not self.users.verify(username, password):
            times.append(now)
            raise InvalidCredentials("unknown username or wrong password")
        token = secrets.token_hex(16)
        self._tokens[token] = username
        return token

    def check_token(self, token: str) -> str | None:
        return self._tokens.get(token)

    def revoke(self, token: str) -> None:
        self._tokens.pop(token, None)
