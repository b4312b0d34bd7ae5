"""Binary container framing shared by corpus, index, and model files.

Every persisted file starts with an 8-byte magic string and a one-byte
format version, followed by a type-specific payload. Writers are
deterministic: the same logical content always produces the same bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import DataFormatError

MAGIC_CORPUS = b"LRUSHCRP"
MAGIC_INDEX = b"LRUSHIDX"
MAGIC_MODEL = b"LRUSHMDL"
FORMAT_VERSION = 1

_MAGIC_LEN = 8


def write_container(path: str | Path, magic: bytes, payload: bytes) -> None:
    assert len(magic) == _MAGIC_LEN
    Path(path).write_bytes(magic + bytes([FORMAT_VERSION]) + payload)


def read_container(path: str | Path, magic: bytes) -> bytes:
    data = Path(path).read_bytes()
    if len(data) < _MAGIC_LEN + 1 or data[:_MAGIC_LEN] != magic:
        raise DataFormatError(
            f"{path}: not a {magic.decode('ascii')} file (bad magic header)"
        )
    version = data[_MAGIC_LEN]
    if version != FORMAT_VERSION:
        raise DataFormatError(
            f"{path}: unsupported format version {version} (expected {FORMAT_VERSION})"
        )
    return data[_MAGIC_LEN + 1 :]


def dump_json(obj: object) -> bytes:
    """Canonical JSON encoding: sorted keys, no whitespace, UTF-8."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":")).encode(
        "utf-8"
    )


def load_json(payload: bytes, path: str | Path) -> object:
    try:
        return json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: corrupt container payload: {exc}") from exc
