"""Embedded document store: versioned JSON documents plus content-addressed blobs.

On-disk layout under the store root:

* ``collections/<collection>/<quoted-key>.json`` — one document per file,
  ``{"key": ..., "version": n, "body": ...}``
* ``blobs/<sha256>`` — raw bytes, keyed by their own hash
* ``blobs/<sha256>.meta.json`` — media type sidecar

Every write goes through temp-file + fsync + atomic rename + directory fsync,
so a crash at any instant leaves either the old or the new version of a
document, never a torn file. Compare-and-swap updates are serialized by an
in-process lock; the store is safe for concurrent request handlers.

``failpoint`` is a test hook: a callable invoked with a site name at each
step of the write protocol, letting a harness simulate crashes mid-write.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable
from urllib.parse import quote, unquote

from .errors import ConflictError, NotFoundError

DEFAULT_MEDIA_TYPE = "application/octet-stream"


class SimulatedCrash(BaseException):
    """Raised by a failpoint to emulate the process dying mid-write.

    Derives from BaseException so ordinary error handling cannot swallow it.
    """


@dataclass(frozen=True)
class Document:
    collection: str
    key: str
    version: int
    body: object


class DocumentStore:
    def __init__(self, root: str | Path, failpoint: Callable[[str], None] | None = None):
        self.root = Path(root)
        self._collections = self.root / "collections"
        self._blobs = self.root / "blobs"
        self._failpoint = failpoint
        self._lock = threading.Lock()
        self._tmp_counter = 0
        self._collections.mkdir(parents=True, exist_ok=True)
        self._blobs.mkdir(parents=True, exist_ok=True)
        self._sweep_temp_files()

    # -- documents ----------------------------------------------------------

    def put(self, collection: str, key: str, body) -> Document:
        """Unconditional write; the version still increments by exactly one."""
        with self._lock:
            current = self._read(collection, key)
            version = (current.version if current else 0) + 1
            return self._write(collection, key, version, body)

    def atomic_update(self, collection: str, key: str, expected_version: int, body) -> Document:
        """Compare-and-swap: succeeds only if the stored version matches.

        ``expected_version=0`` means "create"; it fails if the key exists.
        """
        with self._lock:
            current = self._read(collection, key)
            actual = current.version if current else 0
            if actual != expected_version:
                if current is None:
                    raise NotFoundError(
                        f"{collection}/{key} does not exist (expected version "
                        f"{expected_version})"
                    )
                raise ConflictError(
                    f"{collection}/{key} is at version {actual}, "
                    f"caller expected {expected_version}"
                )
            return self._write(collection, key, actual + 1, body)

    def get(self, collection: str, key: str) -> Document:
        doc = self._read(collection, key)
        if doc is None:
            raise NotFoundError(f"{collection}/{key} not found")
        return doc

    def get_or_none(self, collection: str, key: str) -> Document | None:
        return self._read(collection, key)

    def exists(self, collection: str, key: str) -> bool:
        return self._doc_path(collection, key).exists()

    def list(self, collection: str, prefix: str = "") -> list[Document]:
        """All documents whose key starts with ``prefix``, ordered by key."""
        cdir = self._collections / quote(collection, safe="")
        if not cdir.is_dir():
            return []
        keys = []
        for entry in cdir.iterdir():
            if not entry.name.endswith(".json"):
                continue
            key = unquote(entry.name[: -len(".json")])
            if key.startswith(prefix):
                keys.append(key)
        keys.sort()
        return [self.get(collection, key) for key in keys]

    # -- blobs ----------------------------------------------------------------

    def put_blob(self, data: bytes, media_type: str = DEFAULT_MEDIA_TYPE) -> str:
        """Store bytes under their SHA-256; duplicate content is stored once."""
        key = hashlib.sha256(data).hexdigest()
        path = self._blobs / key
        if path.exists():
            return key
        with self._lock:
            if not path.exists():
                self._atomic_write_bytes(path, data, site="blob")
                meta = json.dumps({"media_type": media_type}).encode()
                self._atomic_write_bytes(path.with_suffix(".meta.json"), meta, site="blobmeta")
        return key

    def get_blob(self, key: str) -> tuple[bytes, str]:
        path = self._blobs / key
        if not _is_hex_key(key) or not path.is_file():
            raise NotFoundError(f"blob {key} not found")
        data = path.read_bytes()
        meta_path = path.with_suffix(".meta.json")
        media_type = DEFAULT_MEDIA_TYPE
        if meta_path.is_file():
            try:
                media_type = json.loads(meta_path.read_text()).get(
                    "media_type", DEFAULT_MEDIA_TYPE
                )
            except json.JSONDecodeError:
                pass
        return data, media_type

    def has_blob(self, key: str) -> bool:
        return _is_hex_key(key) and (self._blobs / key).is_file()

    # -- write protocol -------------------------------------------------------

    def _doc_path(self, collection: str, key: str) -> Path:
        return self._collections / quote(collection, safe="") / (quote(key, safe="") + ".json")

    def _read(self, collection: str, key: str) -> Document | None:
        path = self._doc_path(collection, key)
        try:
            raw = path.read_bytes()
        except FileNotFoundError:
            return None
        record = json.loads(raw.decode("utf-8"))
        return Document(
            collection=collection, key=key,
            version=record["version"], body=record["body"],
        )

    def _write(self, collection: str, key: str, version: int, body) -> Document:
        path = self._doc_path(collection, key)
        path.parent.mkdir(parents=True, exist_ok=True)
        record = {"key": key, "version": version, "body": body}
        data = json.dumps(record, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
        self._atomic_write_bytes(path, data, site="doc")
        return Document(collection=collection, key=key, version=version, body=body)

    def _atomic_write_bytes(self, path: Path, data: bytes, site: str) -> None:
        self._tmp_counter += 1
        tmp = path.parent / f".{path.name}.tmp{self._tmp_counter}"
        fd = os.open(tmp, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o644)
        try:
            half = len(data) // 2
            os.write(fd, data[:half])
            self._hit(f"{site}.tmp.partial")
            os.write(fd, data[half:])
            os.fsync(fd)
        finally:
            os.close(fd)
        self._hit(f"{site}.tmp.full")
        os.replace(tmp, path)
        self._hit(f"{site}.replaced")
        self._fsync_dir(path.parent)

    def _hit(self, name: str) -> None:
        if self._failpoint is not None:
            self._failpoint(name)

    @staticmethod
    def _fsync_dir(directory: Path) -> None:
        fd = os.open(directory, os.O_RDONLY)
        try:
            os.fsync(fd)
        finally:
            os.close(fd)

    def _sweep_temp_files(self) -> None:
        # leftovers from a crash mid-write are never part of committed state
        for base in (self._collections, self._blobs):
            for tmp in base.rglob(".*.tmp*"):
                try:
                    tmp.unlink()
                except OSError:
                    pass


def _is_hex_key(key: str) -> bool:
    return len(key) == 64 and all(ch in "0123456789abcdef" for ch in key)
