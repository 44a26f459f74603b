"""Embedded key-value persistence with role-scoped namespaces.

Three namespaces keep the separation the protocol depends on: election data
(ballots, prompts, logs; no identities next to votes), registrar data (tokens
keyed by value, issued-flags keyed by voter; never both in one record), and
confidential dispute claims (panel only).
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from enum import Enum
from pathlib import Path
from typing import Any

from .errors import AccessDenied
from .model import Role


class Namespace(str, Enum):
    ELECTION = "election"
    REGISTRAR = "registrar"
    CLAIMS = "claims"


READ_ACCESS: dict[Role, frozenset[Namespace]] = {
    Role.EA: frozenset({Namespace.ELECTION, Namespace.REGISTRAR}),
    Role.CHAIR: frozenset({Namespace.ELECTION}),
    Role.T1: frozenset({Namespace.ELECTION}),
    Role.T2: frozenset({Namespace.ELECTION}),
    Role.PANEL: frozenset({Namespace.ELECTION, Namespace.CLAIMS}),
    Role.VOTER: frozenset(),
}


class KeyValueStore:
    """JSON-file backed store; in-memory when no path is given."""

    def __init__(self, path: str | Path | None = None):
        self._path = Path(path) if path else None
        self._lock = threading.RLock()
        self._data: dict[str, dict[str, Any]] = {ns.value: {} for ns in Namespace}
        if self._path and self._path.exists():
            with open(self._path, encoding="utf-8") as handle:
                loaded = json.load(handle)
            for ns in Namespace:
                self._data[ns.value].update(loaded.get(ns.value, {}))

    def put(self, namespace: Namespace, key: str, value: Any) -> None:
        with self._lock:
            self._data[namespace.value][key] = value
            self._flush()

    def get(self, namespace: Namespace, key: str, default: Any = None) -> Any:
        with self._lock:
            return self._data[namespace.value].get(key, default)

    def delete(self, namespace: Namespace, key: str) -> None:
        with self._lock:
            self._data[namespace.value].pop(key, None)
            self._flush()

    def keys(self, namespace: Namespace, prefix: str = "") -> list[str]:
        with self._lock:
            return sorted(k for k in self._data[namespace.value] if k.startswith(prefix))

    def items(self, namespace: Namespace, prefix: str = "") -> list[tuple[str, Any]]:
        with self._lock:
            return [
                (k, self._data[namespace.value][k]) for k in self.keys(namespace, prefix)
            ]

    # --- role-scoped reads ---------------------------------------------------

    def readable_namespaces(self, role: Role) -> frozenset[Namespace]:
        return READ_ACCESS[role]

    def scan(self, namespace: Namespace, role: Role | None = None) -> list[tuple[str, Any]]:
        """Read out a namespace as a given role; None means internal access.
        The access check is eager so a denied caller fails at the call site."""
        if role is not None and namespace not in READ_ACCESS[role]:
            raise AccessDenied(f"{role.value} may not read the {namespace.value} namespace")
        return self.items(namespace)

    # --- durability ------------------------------------------------------------

    def _flush(self) -> None:
        if self._path is None:
            return
        self._path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=str(self._path.parent), suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(self._data, handle, sort_keys=True)
            os.replace(tmp, self._path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
