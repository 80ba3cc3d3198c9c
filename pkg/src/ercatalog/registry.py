"""Catalog registry: allocates catalog ids, resolves them to stores, and
owns the ACL evaluation rules.

Rights nest: owner > model_write > data_write > data_read, so membership
in any ACL at or above the required one grants access.  The "*" member
matches every client including anonymous ones.
"""
from __future__ import annotations

import json as _json
import os
import threading
from dataclasses import dataclass, field

from .errors import (AuthenticationRequired, Conflict, Forbidden, NotFound,
                     ValidationError)
from .storage import CatalogStore

ANONYMOUS = "*absent*"
ACL_NAMES = ("owner", "model_write", "data_write", "data_read")

_SUFFICIENT = {
    "owner": ("owner",),
    "model_write": ("owner", "model_write"),
    "data_write": ("owner", "model_write", "data_write"),
    "data_read": ("owner", "model_write", "data_write", "data_read"),
}


@dataclass(frozen=True)
class ClientContext:
    identity: str = ANONYMOUS
    attributes: frozenset = field(default_factory=frozenset)

    def is_authenticated(self) -> bool:
        return self.identity != ANONYMOUS

    def roles(self) -> frozenset:
        base = {"*"} | set(self.attributes)
        if self.is_authenticated():
            base.add(self.identity)
        return frozenset(base)


def has_right(acls: dict, right: str, ctx: ClientContext) -> bool:
    if right not in _SUFFICIENT:
        raise NotFound(f"unknown ACL name {right!r}")
    roles = ctx.roles()
    for name in _SUFFICIENT[right]:
        if not roles.isdisjoint(acls.get(name, ())):
            return True
    return False


def enforce_right(acls: dict, right: str, ctx: ClientContext):
    if not has_right(acls, right, ctx):
        raise Forbidden(f"this request requires the {right} right")


def check_acl_update(name: str, members):
    if name not in ACL_NAMES:
        raise NotFound(f"unknown ACL name {name!r}")
    if not isinstance(members, list) or not all(isinstance(m, str) and m for m in members):
        raise ValidationError("ACL members must be a list of non-empty strings")
    if name == "owner" and not members:
        raise Conflict("the owner ACL may not be emptied")


class Registry:
    """Linearizable catalog id allocation with optional persistence."""

    def __init__(self, data_dir: str | None = None):
        self._lock = threading.Lock()
        self._data_dir = data_dir
        self._stores: dict[int, CatalogStore] = {}
        self._next_id = 1
        if data_dir is not None:
            os.makedirs(data_dir, exist_ok=True)
            self._load()

    def _registry_path(self):
        return os.path.join(self._data_dir, "registry.json")

    def _wal_path(self, catalog_id: int):
        return os.path.join(self._data_dir, f"catalog_{catalog_id}.wal")

    def _load(self):
        try:
            with open(self._registry_path(), "r", encoding="utf-8") as fh:
                doc = _json.load(fh)
        except FileNotFoundError:
            return
        self._next_id = doc["next_id"]
        for catalog_id in doc["catalogs"]:
            self._stores[catalog_id] = CatalogStore.open(
                catalog_id, self._wal_path(catalog_id))

    def _persist(self):
        if self._data_dir is None:
            return
        doc = {"next_id": self._next_id, "catalogs": sorted(self._stores)}
        tmp = self._registry_path() + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            _json.dump(doc, fh)
            fh.write("\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self._registry_path())

    def create_catalog(self, ctx: ClientContext) -> CatalogStore:
        if not ctx.is_authenticated():
            raise AuthenticationRequired("catalog creation requires an authenticated client")
        with self._lock:
            catalog_id = self._next_id
            self._next_id += 1
            wal = self._wal_path(catalog_id) if self._data_dir is not None else None
            store = CatalogStore.create(catalog_id, ctx.identity, wal)
            self._stores[catalog_id] = store
            self._persist()
            return store

    def get(self, catalog_id) -> CatalogStore:
        try:
            key = int(str(catalog_id), 10)
        except ValueError:
            raise NotFound(f"no catalog {catalog_id!r}")
        with self._lock:
            store = self._stores.get(key)
        if store is None:
            raise NotFound(f"no catalog {catalog_id!r}")
        return store

    def delete_catalog(self, ctx: ClientContext, catalog_id):
        store = self.get(catalog_id)
        enforce_right(store.current.acls, "owner", ctx)
        with self._lock:
            # ids are never reused: _next_id only grows
            self._stores.pop(store.id, None)
            self._persist()
        if self._data_dir is not None:
            try:
                os.remove(self._wal_path(store.id))
            except FileNotFoundError:
                pass

    def catalog_ids(self) -> list[int]:
        with self._lock:
            return sorted(self._stores)
