"""Loader and checker for the shipped golden-vector file.

The vector file pins the wire protocol: every codec implementation (this
package and the browser dashboard) must reproduce it exactly.  The CLI's
``frame selftest`` subcommand and the test suite both run through here.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from greenhouse import protocol

VECTOR_RESOURCE = "golden_vectors.txt"


@dataclass(frozen=True)
class GoldenVector:
    line_no: int
    raw: bytes
    kind: str | None  # None for expected-failure vectors
    fields: dict
    expect_error: str | None


def _parse_value(text: str):
    if "," in text:
        return [int(part) for part in text.split(",")]
    return int(text)


def default_vector_text() -> str:
    return (
        resources.files("greenhouse")
        .joinpath("data", VECTOR_RESOURCE)
        .read_text(encoding="utf-8")
    )


def load_vectors(text: str | None = None) -> list[GoldenVector]:
    if text is None:
        text = default_vector_text()
    vectors = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        raw = bytes.fromhex(tokens[0])
        if tokens[1] == "!":
            vectors.append(GoldenVector(line_no, raw, None, {}, tokens[2]))
            continue
        field_map = {}
        for token in tokens[2:]:
            key, _, value = token.partition("=")
            field_map[key] = _parse_value(value)
        vectors.append(GoldenVector(line_no, raw, tokens[1], field_map, None))
    return vectors


def check_vector(vector: GoldenVector) -> str | None:
    """Run one vector through the codec.  Returns None on success, or a
    description of the mismatch."""
    if vector.expect_error is not None:
        try:
            frame = protocol.decode_frame(vector.raw)
        except protocol.ProtocolError as exc:
            got = type(exc).__name__
            if got != vector.expect_error:
                return f"expected {vector.expect_error}, raised {got}"
            return None
        return f"expected {vector.expect_error}, decoded {frame!r}"

    try:
        frame = protocol.decode_frame(vector.raw)
    except protocol.ProtocolError as exc:
        return f"decode failed: {type(exc).__name__}: {exc}"
    got_fields = protocol.frame_fields(frame)
    expected = dict(vector.fields, kind=vector.kind)
    if got_fields != expected:
        return f"decoded fields {got_fields}, expected {expected}"
    rebuilt = protocol.frame_from_fields(vector.kind, dict(vector.fields))
    encoded = protocol.encode_frame(rebuilt)
    if encoded != vector.raw:
        return f"encoded {encoded.hex().upper()}, expected {vector.raw.hex().upper()}"
    return None


def check_all(text: str | None = None) -> list[tuple[GoldenVector, str | None]]:
    return [(v, check_vector(v)) for v in load_vectors(text)]
