"""The mutable catalog: mutations, atomicity, persistence, exports.

A :class:`CatalogStore` owns the six record collections. Every mutation is
atomic — either the post-state passes :func:`medal.model.validate` or the
store is left untouched and a typed error is raised. Writers are serialized
through one lock; :meth:`CatalogStore.snapshot` hands out immutable values
that readers may share freely.

Persistence is a single UTF-8 JSON document with deterministic key order,
written with an atomic file replace.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import model
from .errors import (
    CatalogFileError,
    DuplicateIdError,
    InvalidAttributeError,
    SameGroupingError,
    UnknownIdError,
    ValidationFailedError,
)
from .model import (
    CatalogSnapshot,
    DataEntity,
    EntityLink,
    Group,
    GroupLink,
    Grouping,
    Process,
    canonical_pair,
    normalize_attributes,
    validate,
)

FORMAT_VERSION = 1

COLLECTIONS = ("entities", "groupings", "groups", "entity_links", "group_links", "processes")

_ID_PREFIX = {
    "entities": "e",
    "groupings": "gr",
    "groups": "g",
    "entity_links": "l",
    "group_links": "l",
    "processes": "p",
}


@dataclass(frozen=True)
class MembershipChange:
    group: str
    entity: str
    changed: bool
    members: tuple[str, ...]


@dataclass(frozen=True)
class CascadeReport:
    """Everything a delete removed or edited, the target itself included."""

    removed: tuple[tuple[str, str], ...]  # (collection, id)
    edited: tuple[tuple[str, str, str], ...]  # (collection, id, field)


class CatalogStore:
    """Single-writer, multi-reader catalog of metadata records."""

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._entities: dict[str, DataEntity] = {}
        self._groupings: dict[str, Grouping] = {}
        self._groups: dict[str, Group] = {}
        self._entity_links: dict[str, EntityLink] = {}
        self._group_links: dict[str, GroupLink] = {}
        self._processes: dict[str, Process] = {}
        self._version = 0
        # Ids ever issued or accepted in this store's lifetime; ids are never
        # reused, not even after the record is deleted.
        self._ids_ever: set[str] = set()
        self._snapshot_cache: CatalogSnapshot | None = None

    # -- snapshots ---------------------------------------------------------

    def snapshot(self) -> CatalogSnapshot:
        """An immutable, validate-clean view of the current state."""
        with self._lock:
            if self._snapshot_cache is None or self._snapshot_cache.snapshot_version != self._version:
                self._snapshot_cache = CatalogSnapshot(
                    entities=dict(self._entities),
                    groupings=dict(self._groupings),
                    groups=dict(self._groups),
                    entity_links=dict(self._entity_links),
                    group_links=dict(self._group_links),
                    processes=dict(self._processes),
                    snapshot_version=self._version,
                )
            return self._snapshot_cache

    @property
    def snapshot_version(self) -> int:
        return self._version

    # -- id management -----------------------------------------------------

    def _claim_id(self, collection: str, explicit: str | None) -> str:
        if explicit is not None:
            if not isinstance(explicit, str) or not explicit:
                raise DuplicateIdError(str(explicit))
            if explicit in self._ids_ever:
                raise DuplicateIdError(explicit)
            self._ids_ever.add(explicit)
            return explicit
        fresh = f"{_ID_PREFIX[collection]}-{uuid.uuid4().hex[:12]}"
        while fresh in self._ids_ever:  # pragma: no cover - uuid collision
            fresh = f"{_ID_PREFIX[collection]}-{uuid.uuid4().hex[:12]}"
        self._ids_ever.add(fresh)
        return fresh

    def _release_ids(self, ids: Iterable[str]) -> None:
        # A failed mutation never happened; its ids may be claimed again.
        self._ids_ever.difference_update(ids)

    # -- commit machinery ----------------------------------------------------

    def _candidate(self, **changed: dict) -> CatalogSnapshot:
        parts = {name: changed.get(name, getattr(self, f"_{name}")) for name in COLLECTIONS}
        return CatalogSnapshot(snapshot_version=self._version + 1, **parts)

    def _commit(self, claimed: Sequence[str] = (), **changed: dict) -> None:
        """Swap in changed collections if the candidate state validates."""
        candidate = self._candidate(**changed)
        report = validate(candidate)
        if not report.ok:
            self._release_ids(claimed)
            first = report.violations[0]
            raise ValidationFailedError(
                f"mutation rejected: {first.rule} on {first.record_id} ({first.detail})", report
            )
        for name, collection in changed.items():
            setattr(self, f"_{name}", collection)
        self._version += 1

    @contextmanager
    def transaction(self):
        """Atomic batch of mutations: roll everything back on any exception."""
        with self._lock:
            backup = {name: dict(getattr(self, f"_{name}")) for name in COLLECTIONS}
            version = self._version
            ids_ever = set(self._ids_ever)
            try:
                yield self
            except BaseException:
                for name, collection in backup.items():
                    setattr(self, f"_{name}", collection)
                self._version = version
                self._ids_ever = ids_ever
                raise

    # -- lookups shared by callers ------------------------------------------

    def _require_entities(self, ids: Iterable[str]) -> None:
        missing = sorted(i for i in ids if i not in self._entities)
        if missing:
            raise UnknownIdError("entity", tuple(missing))

    def groupings_named(self, name: str) -> list[str]:
        with self._lock:
            return sorted(g.id for g in self._groupings.values() if g.name == name)

    def groups_named(self, name: str, grouping: str | None = None) -> list[str]:
        with self._lock:
            return sorted(
                g.id
                for g in self._groups.values()
                if g.name == name and (grouping is None or g.grouping == grouping)
            )

    # -- mutations -----------------------------------------------------------

    def put_entity(self, attributes: dict | None = None, *, id: str | None = None) -> str:
        with self._lock:
            attrs = normalize_attributes(attributes)
            entity_id = self._claim_id("entities", id)
            entities = dict(self._entities)
            entities[entity_id] = DataEntity(entity_id, attrs)
            self._commit((entity_id,), entities=entities)
            return entity_id

    def define_grouping(self, name: str, attributes: dict | None = None, *, id: str | None = None) -> str:
        with self._lock:
            attrs = normalize_attributes(attributes)
            grouping_id = self._claim_id("groupings", id)
            groupings = dict(self._groupings)
            groupings[grouping_id] = Grouping(grouping_id, name, frozenset(), attrs)
            self._commit((grouping_id,), groupings=groupings)
            return grouping_id

    def define_group(
        self,
        grouping: str,
        name: str,
        members: Iterable[str] = (),
        attributes: dict | None = None,
        *,
        id: str | None = None,
    ) -> str:
        with self._lock:
            if grouping not in self._groupings:
                raise UnknownIdError("grouping", grouping)
            member_set = frozenset(members)
            self._require_entities(member_set)
            attrs = normalize_attributes(attributes)
            group_id = self._claim_id("groups", id)
            groups = dict(self._groups)
            groups[group_id] = Group(group_id, grouping, name, member_set, attrs)
            groupings = dict(self._groupings)
            owner = groupings[grouping]
            groupings[grouping] = replace(owner, groups=owner.groups | {group_id})
            self._commit((group_id,), groups=groups, groupings=groupings)
            return group_id

    def assign_to_group(self, group: str, entity: str) -> MembershipChange:
        with self._lock:
            record = self._groups.get(group)
            if record is None:
                raise UnknownIdError("group", group)
            self._require_entities((entity,))
            if entity in record.members:
                return MembershipChange(group, entity, False, tuple(sorted(record.members)))
            groups = dict(self._groups)
            groups[group] = replace(record, members=record.members | {entity})
            self._commit((), groups=groups)
            return MembershipChange(group, entity, True, tuple(sorted(groups[group].members)))

    def unassign_from_group(self, group: str, entity: str) -> MembershipChange:
        with self._lock:
            record = self._groups.get(group)
            if record is None:
                raise UnknownIdError("group", group)
            self._require_entities((entity,))
            if entity not in record.members:
                return MembershipChange(group, entity, False, tuple(sorted(record.members)))
            groups = dict(self._groups)
            groups[group] = replace(record, members=record.members - {entity})
            self._commit((), groups=groups)
            return MembershipChange(group, entity, True, tuple(sorted(groups[group].members)))

    def link_entities(
        self,
        source: str,
        target: str,
        oriented: bool,
        kind: str,
        attributes: dict | None = None,
        *,
        id: str | None = None,
    ) -> str:
        with self._lock:
            self._require_entities((source, target))
            attrs = normalize_attributes(attributes)
            if not oriented:
                source, target = canonical_pair(source, target)
            link_id = self._claim_id("entity_links", id)
            links = dict(self._entity_links)
            links[link_id] = EntityLink(link_id, source, target, bool(oriented), kind, attrs)
            self._commit((link_id,), entity_links=links)
            return link_id

    def link_groups(
        self,
        name: str,
        source_group: str,
        target_group: str,
        attributes: dict | None = None,
        *,
        id: str | None = None,
    ) -> str:
        with self._lock:
            missing = sorted({g for g in (source_group, target_group) if g not in self._groups})
            if missing:
                raise UnknownIdError("group", tuple(missing))
            src = self._groups[source_group]
            dst = self._groups[target_group]
            if src.grouping == dst.grouping:
                raise SameGroupingError(source_group, target_group, src.grouping)
            attrs = normalize_attributes(attributes)
            link_id = self._claim_id("group_links", id)
            links = dict(self._group_links)
            links[link_id] = GroupLink(link_id, name, source_group, target_group, attrs)
            self._commit((link_id,), group_links=links)
            return link_id

    def record_process(
        self,
        name: str,
        inputs: Iterable[str],
        output_specs: Sequence[dict] = (),
        attributes: dict | None = None,
        *,
        id: str | None = None,
        output_ids: Sequence[str] | None = None,
    ) -> tuple[str, list[str]]:
        """Record a transformation, creating its output entities atomically.

        One new entity is created per output spec (an attribute map); the
        returned ids are the process outputs, members of the catalog in the
        same snapshot as the process record.
        """
        with self._lock:
            input_set = frozenset(inputs)
            self._require_entities(input_set)
            attrs = normalize_attributes(attributes)
            specs = [normalize_attributes(spec) for spec in output_specs]
            if output_ids is not None and len(output_ids) != len(specs):
                raise InvalidAttributeError("output_ids and output_specs must have the same length")
            claimed: list[str] = []
            try:
                created: list[str] = []
                entities = dict(self._entities)
                for index, spec in enumerate(specs):
                    explicit = output_ids[index] if output_ids is not None else None
                    entity_id = self._claim_id("entities", explicit)
                    claimed.append(entity_id)
                    entities[entity_id] = DataEntity(entity_id, spec)
                    created.append(entity_id)
                process_id = self._claim_id("processes", id)
                claimed.append(process_id)
                processes = dict(self._processes)
                processes[process_id] = Process(process_id, name, input_set, frozenset(created), attrs)
            except Exception:
                self._release_ids(claimed)
                raise
            self._commit(claimed, entities=entities, processes=processes)
            return process_id, created

    def set_attributes(self, target: str, patch: dict):
        """Merge a patch into a record's attributes; a None value removes the key."""
        with self._lock:
            collection_name, record = self._find(target)
            normalized = normalize_attributes(patch, allow_none=True)
            merged = dict(record.attributes)
            for key, value in normalized.items():
                if value is None:
                    merged.pop(key, None)
                else:
                    merged[key] = value
            if merged == record.attributes:
                return record
            collection = dict(getattr(self, f"_{collection_name}"))
            collection[target] = replace(record, attributes=merged)
            self._commit((), **{collection_name: collection})
            return collection[target]

    def delete(self, target: str) -> CascadeReport:
        """Remove a record and cascade so no dangling reference survives.

        Deleting an entity prunes it from groups, entity links, and process
        input/output sets (the process record itself is kept as history);
        deleting a group removes its group links; deleting a grouping removes
        its groups recursively.
        """
        with self._lock:
            collection_name, record = self._find(target)
            removed: list[tuple[str, str]] = []
            edited: list[tuple[str, str, str]] = []
            changes: dict[str, dict] = {name: dict(getattr(self, f"_{name}")) for name in COLLECTIONS}

            if collection_name == "entities":
                self._drop_entity(target, changes, removed, edited)
            elif collection_name == "groups":
                self._drop_group(target, changes, removed, edited)
            elif collection_name == "groupings":
                grouping = changes["groupings"][target]
                for group_id in sorted(grouping.groups):
                    if group_id in changes["groups"]:
                        self._drop_group(group_id, changes, removed, edited, skip_owner=target)
                del changes["groupings"][target]
                removed.append(("groupings", target))
            else:
                del changes[collection_name][target]
                removed.append((collection_name, target))

            self._commit((), **changes)
            return CascadeReport(tuple(removed), tuple(edited))

    def _drop_entity(self, entity_id, changes, removed, edited) -> None:
        for group_id, group in sorted(changes["groups"].items()):
            if entity_id in group.members:
                changes["groups"][group_id] = replace(group, members=group.members - {entity_id})
                edited.append(("groups", group_id, "members"))
        for link_id, link in sorted(changes["entity_links"].items()):
            if entity_id in (link.source, link.target):
                del changes["entity_links"][link_id]
                removed.append(("entity_links", link_id))
        for process_id, process in sorted(changes["processes"].items()):
            fields = []
            if entity_id in process.inputs:
                process = replace(process, inputs=process.inputs - {entity_id})
                fields.append("inputs")
            if entity_id in process.outputs:
                process = replace(process, outputs=process.outputs - {entity_id})
                fields.append("outputs")
            if fields:
                changes["processes"][process_id] = process
                edited.append(("processes", process_id, ",".join(fields)))
        del changes["entities"][entity_id]
        removed.append(("entities", entity_id))

    def _drop_group(self, group_id, changes, removed, edited, skip_owner: str | None = None) -> None:
        for link_id, link in sorted(changes["group_links"].items()):
            if group_id in (link.source_group, link.target_group):
                del changes["group_links"][link_id]
                removed.append(("group_links", link_id))
        group = changes["groups"][group_id]
        if group.grouping != skip_owner and group.grouping in changes["groupings"]:
            owner = changes["groupings"][group.grouping]
            changes["groupings"][group.grouping] = replace(owner, groups=owner.groups - {group_id})
            edited.append(("groupings", group.grouping, "groups"))
        del changes["groups"][group_id]
        removed.append(("groups", group_id))

    def _find(self, record_id: str):
        for name in COLLECTIONS:
            collection = getattr(self, f"_{name}")
            if record_id in collection:
                return name, collection[record_id]
        raise UnknownIdError("id", record_id)

    # -- persistence ---------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Write the catalog file atomically (temp file + rename)."""
        with self._lock:
            doc = snapshot_to_doc(self.snapshot())
        path = Path(path)
        text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str | Path) -> "CatalogStore":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise CatalogFileError("file_unreadable", f"cannot read {path}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CatalogFileError("parse_error", f"{path} is not valid JSON: {exc}") from exc
        snapshot = doc_to_snapshot(doc)
        report = validate(snapshot)
        if not report.ok:
            raise ValidationFailedError(
                f"{path} rejected: {len(report.violations)} validation violations", report
            )
        store = cls()
        store._entities = dict(snapshot.entities)
        store._groupings = dict(snapshot.groupings)
        store._groups = dict(snapshot.groups)
        store._entity_links = dict(snapshot.entity_links)
        store._group_links = dict(snapshot.group_links)
        store._processes = dict(snapshot.processes)
        store._version = snapshot.snapshot_version
        store._ids_ever = {
            record_id
            for name in COLLECTIONS
            for record_id in getattr(store, f"_{name}")
        }
        return store


# -- catalog file document form ---------------------------------------------


def record_json(record, include_id: bool = True) -> dict[str, Any]:
    """JSON-ready form of any record; set members are emitted sorted."""
    if isinstance(record, DataEntity):
        out: dict[str, Any] = {"attributes": record.attributes}
    elif isinstance(record, Grouping):
        out = {"name": record.name, "groups": sorted(record.groups), "attributes": record.attributes}
    elif isinstance(record, Group):
        out = {
            "grouping": record.grouping,
            "name": record.name,
            "members": sorted(record.members),
            "attributes": record.attributes,
        }
    elif isinstance(record, EntityLink):
        out = {
            "source": record.source,
            "target": record.target,
            "oriented": record.oriented,
            "kind": record.kind,
            "attributes": record.attributes,
        }
    elif isinstance(record, GroupLink):
        out = {
            "name": record.name,
            "source_group": record.source_group,
            "target_group": record.target_group,
            "attributes": record.attributes,
        }
    elif isinstance(record, Process):
        out = {
            "name": record.name,
            "inputs": sorted(record.inputs),
            "outputs": sorted(record.outputs),
            "attributes": record.attributes,
        }
    else:  # pragma: no cover - defensive
        raise TypeError(f"not a catalog record: {record!r}")
    if include_id:
        out = {"id": record.id, **out}
    return out


def snapshot_to_doc(snapshot: CatalogSnapshot) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "snapshot_version": snapshot.snapshot_version,
        "entities": {i: record_json(r, include_id=False) for i, r in snapshot.entities.items()},
        "groupings": {i: record_json(r, include_id=False) for i, r in snapshot.groupings.items()},
        "groups": {i: record_json(r, include_id=False) for i, r in snapshot.groups.items()},
        "entity_links": {i: record_json(r, include_id=False) for i, r in snapshot.entity_links.items()},
        "group_links": {i: record_json(r, include_id=False) for i, r in snapshot.group_links.items()},
        "processes": {i: record_json(r, include_id=False) for i, r in snapshot.processes.items()},
    }


def doc_to_snapshot(doc: Any) -> CatalogSnapshot:
    """Rebuild a snapshot from the catalog file document; structural errors
    raise :class:`CatalogFileError`, semantic problems are left to validate()."""
    if not isinstance(doc, dict):
        raise CatalogFileError("parse_error", "catalog document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise CatalogFileError(
            "format_version_mismatch", f"expected format_version {FORMAT_VERSION}, found {version!r}"
        )
    try:
        snapshot_version = int(doc.get("snapshot_version", 0))
        entities = {
            i: DataEntity(i, dict(r.get("attributes", {}))) for i, r in doc.get("entities", {}).items()
        }
        groupings = {
            i: Grouping(i, r["name"], frozenset(r.get("groups", ())), dict(r.get("attributes", {})))
            for i, r in doc.get("groupings", {}).items()
        }
        groups = {
            i: Group(
                i,
                r["grouping"],
                r["name"],
                frozenset(r.get("members", ())),
                dict(r.get("attributes", {})),
            )
            for i, r in doc.get("groups", {}).items()
        }
        entity_links = {
            i: EntityLink(
                i, r["source"], r["target"], bool(r["oriented"]), r["kind"], dict(r.get("attributes", {}))
            )
            for i, r in doc.get("entity_links", {}).items()
        }
        group_links = {
            i: GroupLink(
                i, r["name"], r["source_group"], r["target_group"], dict(r.get("attributes", {}))
            )
            for i, r in doc.get("group_links", {}).items()
        }
        processes = {
            i: Process(
                i,
                r["name"],
                frozenset(r.get("inputs", ())),
                frozenset(r.get("outputs", ())),
                dict(r.get("attributes", {})),
            )
            for i, r in doc.get("processes", {}).items()
        }
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise CatalogFileError("parse_error", f"malformed catalog document: {exc!r}") from exc
    return CatalogSnapshot(
        entities=entities,
        groupings=groupings,
        groups=groups,
        entity_links=entity_links,
        group_links=group_links,
        processes=processes,
        snapshot_version=snapshot_version,
    )


# -- property-graph export ----------------------------------------------------


def export_node_per_concept(snapshot: CatalogSnapshot) -> dict[str, Any]:
    """Reify the catalog for stores without hyperedges.

    Groupings, groups, and processes become labeled nodes next to the entity
    nodes; membership and process I/O become labeled edges: entity→group
    edges carry the grouping's name, group→grouping edges the label
    GROUPING, and process I/O the labels PROCESS_IN (entity→process) and
    PROCESS_OUT (process→entity). Entity links and group links are emitted
    as plain edges labeled by their kind or relation name.
    """
    nodes: list[dict[str, Any]] = []
    edges: list[dict[str, Any]] = []

    for entity in sorted(snapshot.entities.values(), key=lambda r: r.id):
        nodes.append({"id": entity.id, "labels": ["ENTITY"], "attributes": entity.attributes})
    for grouping in sorted(snapshot.groupings.values(), key=lambda r: r.id):
        nodes.append(
            {"id": grouping.id, "labels": ["GROUPING"], "attributes": {"name": grouping.name, **grouping.attributes}}
        )
    for group in sorted(snapshot.groups.values(), key=lambda r: r.id):
        grouping_name = snapshot.groupings[group.grouping].name
        nodes.append(
            {"id": group.id, "labels": ["GROUP", grouping_name], "attributes": {"name": group.name, **group.attributes}}
        )
        edges.append({"label": "GROUPING", "from": group.id, "to": group.grouping, "attributes": {}})
        for member in sorted(group.members):
            edges.append({"label": grouping_name, "from": member, "to": group.id, "attributes": {}})
    for process in sorted(snapshot.processes.values(), key=lambda r: r.id):
        nodes.append(
            {"id": process.id, "labels": ["PROCESS"], "attributes": {"name": process.name, **process.attributes}}
        )
        for entity_id in sorted(process.inputs):
            edges.append({"label": "PROCESS_IN", "from": entity_id, "to": process.id, "attributes": {}})
        for entity_id in sorted(process.outputs):
            edges.append({"label": "PROCESS_OUT", "from": process.id, "to": entity_id, "attributes": {}})
    for link in sorted(snapshot.entity_links.values(), key=lambda r: r.id):
        edges.append(
            {
                "label": link.kind,
                "from": link.source,
                "to": link.target,
                "attributes": {"oriented": link.oriented, **link.attributes},
            }
        )
    for glink in sorted(snapshot.group_links.values(), key=lambda r: r.id):
        edges.append(
            {
                "label": glink.name,
                "from": glink.source_group,
                "to": glink.target_group,
                "attributes": dict(glink.attributes),
            }
        )

    edges.sort(key=lambda e: (e["label"], e["from"], e["to"]))
    return {"nodes": nodes, "edges": edges}
