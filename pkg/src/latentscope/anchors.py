"""Durable, attribute-tagged anchor-set storage.

One JSON document per store, written atomically, so a crash between
operations always leaves either the old or the new complete file. A
store-version counter detects unsupported concurrent external writers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import ConflictError, FormatError, IOFailureError, NotFoundError
from .image import atomic_write_bytes
from .latent import AnchorSet, parse_latent, serialize_latent

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AnchorSetSummary:
    name: str
    tags: frozenset[str]
    size: int
    created_at: str


class AnchorStore:
    """Single-writer, multi-reader anchor-set store backed by one JSON file."""

    def __init__(self, path):
        self.path = Path(path)
        self._last_seen_version: int | None = None

    def _read(self) -> dict:
        if not self.path.exists():
            return {"schema_version": SCHEMA_VERSION, "store_version": 0, "sets": []}
        try:
            raw = self.path.read_text(encoding="utf-8")
        except OSError as e:
            raise IOFailureError(f"cannot read anchor store {self.path}: {e}") from e
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as e:
            raise FormatError(
                f"anchor store {self.path} is corrupt at byte {e.pos}: {e.msg}"
            ) from e
        if (
            not isinstance(data, dict)
            or data.get("schema_version") != SCHEMA_VERSION
            or not isinstance(data.get("store_version"), int)
            or not isinstance(data.get("sets"), list)
        ):
            raise FormatError(f"anchor store {self.path} has an unrecognized schema")
        return data

    def _check_version(self, data: dict) -> None:
        if (
            self._last_seen_version is not None
            and data["store_version"] != self._last_seen_version
        ):
            raise ConflictError(
                f"anchor store {self.path} was modified by another writer "
                f"(saw version {data['store_version']}, expected {self._last_seen_version})"
            )

    def _write(self, data: dict) -> None:
        data["store_version"] += 1
        atomic_write_bytes(
            self.path, (json.dumps(data, indent=2) + "\n").encode("utf-8")
        )
        self._last_seen_version = data["store_version"]

    @staticmethod
    def _to_record(s: AnchorSet, created_at: str) -> dict:
        return {
            "name": s.name,
            "tags": sorted(s.attribute_tags),
            "members": [serialize_latent(m) for m in s.members],
            "created_at": created_at,
        }

    @staticmethod
    def _from_record(rec: dict) -> AnchorSet:
        try:
            return AnchorSet(
                name=rec["name"],
                attribute_tags=frozenset(rec.get("tags", [])),
                members=tuple(parse_latent(line) for line in rec["members"]),
            )
        except (KeyError, TypeError) as e:
            raise FormatError(f"malformed anchor-set record: {e}") from e

    def put(self, s: AnchorSet, overwrite: bool = False) -> None:
        data = self._read()
        self._check_version(data)
        existing = [i for i, rec in enumerate(data["sets"]) if rec.get("name") == s.name]
        if existing and not overwrite:
            raise ConflictError(
                f"anchor set {s.name!r} already exists (pass overwrite to replace)"
            )
        record = self._to_record(s, datetime.now(timezone.utc).isoformat())
        if existing:
            data["sets"][existing[0]] = record
        else:
            data["sets"].append(record)
        self._write(data)

    def get(self, name: str) -> AnchorSet:
        data = self._read()
        self._last_seen_version = data["store_version"]
        for rec in data["sets"]:
            if rec.get("name") == name:
                return self._from_record(rec)
        raise NotFoundError(f"no anchor set named {name!r}")

    def list(self, tag_filter: set[str] | None = None) -> list[AnchorSetSummary]:
        """Summaries of stored sets; tag_filter keeps sets carrying ALL tags."""
        data = self._read()
        self._last_seen_version = data["store_version"]
        wanted = {t.lower() for t in tag_filter} if tag_filter else set()
        out = []
        for rec in data["sets"]:
            tags = frozenset(rec.get("tags", []))
            if wanted and not wanted.issubset(tags):
                continue
            out.append(
                AnchorSetSummary(
                    name=rec.get("name", ""),
                    tags=tags,
                    size=len(rec.get("members", [])),
                    created_at=rec.get("created_at", ""),
                )
            )
        return out

    def delete(self, name: str) -> None:
        data = self._read()
        self._check_version(data)
        kept = [rec for rec in data["sets"] if rec.get("name") != name]
        if len(kept) == len(data["sets"]):
            raise NotFoundError(f"no anchor set named {name!r}")
        data["sets"] = kept
        self._write(data)
