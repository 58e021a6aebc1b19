"""SQLite cache for alpha certificates, keyed by fan fingerprint and subset."""

from __future__ import annotations

import json
import sqlite3
import time
from pathlib import Path
from typing import Any

from conefan.core import config


def _db_path() -> Path:
    return config.current().cache_dir / "alpha.db"


def _get_conn() -> sqlite3.Connection:
    path = _db_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    conn = sqlite3.connect(str(path))
    conn.execute(
        """CREATE TABLE IF NOT EXISTS alpha (
            fan TEXT NOT NULL,
            subset_key TEXT NOT NULL,
            data TEXT NOT NULL,
            computed_at REAL NOT NULL,
            PRIMARY KEY (fan, subset_key)
        )"""
    )
    conn.commit()
    return conn


def enabled() -> bool:
    return config.current().use_cache


def get(fan: str, key: str) -> Any | None:
    """Cached certificate payload, or None."""
    if not enabled():
        return None
    conn = _get_conn()
    try:
        row = conn.execute(
            "SELECT data FROM alpha WHERE fan = ? AND subset_key = ?",
            (fan, key),
        ).fetchone()
        if row is None:
            return None
        return json.loads(row[0])
    finally:
        conn.close()


def put(fan: str, key: str, data: Any) -> None:
    if not enabled():
        return
    conn = _get_conn()
    try:
        conn.execute(
            """INSERT OR REPLACE INTO alpha (fan, subset_key, data, computed_at)
               VALUES (?, ?, ?, ?)""",
            (fan, key, json.dumps(data), time.time()),
        )
        conn.commit()
    finally:
        conn.close()


def clear(fan: str | None = None) -> None:
    """Clear certificates for one fan or for all fans."""
    conn = _get_conn()
    try:
        if fan:
            conn.execute("DELETE FROM alpha WHERE fan = ?", (fan,))
        else:
            conn.execute("DELETE FROM alpha")
        conn.commit()
    finally:
        conn.close()
