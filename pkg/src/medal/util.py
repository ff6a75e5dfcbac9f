"""Small shared helpers."""

from __future__ import annotations

import json
from typing import Any


def canonical_json(obj: Any) -> str:
    """The one JSON rendering used by both the CLI and the HTTP API.

    Compact separators, sorted keys, UTF-8 kept as-is — query results must
    compare byte-for-byte across the two surfaces.
    """
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
