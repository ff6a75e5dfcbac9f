"""Domain records of the catalog and the invariant validator.

The catalog is a property hypergraph over four record families:

* data entities — the cataloged items, nodes with an attribute map;
* groupings of groups — a group is a named set of entity ids (an
  undirected hyperedge), a grouping is a named family of groups.
  Groups of one grouping deliberately need not partition the entity
  set: an entity may sit in zero, one, or several of them;
* links — attributed edges, either between two entities (oriented or
  not) or always-oriented between two groups of *distinct* groupings;
* processes — oriented hyperedges from an input entity set to an
  output entity set, the carriers of lineage.

Everything here is an immutable value. ``validate`` is a pure function
from a snapshot to the complete list of invariant violations; mutation
and persistence live in :mod:`medal.store`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Any, Mapping

from .errors import InvalidAttributeError

EntityId = str
GroupingId = str
GroupId = str
LinkId = str
ProcessId = str

#: Attribute values form a closed recursive sum type: text, integer, real,
#: boolean, timestamp (RFC-3339 text after normalization), lists and
#: text-keyed maps of the same.
AttributeValue = Any
Attributes = Mapping[str, AttributeValue]


def rfc3339(dt: datetime) -> str:
    """Render a datetime as RFC-3339 text; naive datetimes are taken as UTC."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.isoformat()


def normalize_attributes(attributes: Attributes | None, *, allow_none: bool = False) -> dict[str, Any]:
    """Deep-copy an attribute map into its canonical, JSON-native form.

    Datetimes become RFC-3339 text, tuples become lists. Rejects anything
    outside the closed attribute type. ``allow_none`` admits ``None`` at the
    top level only (the delete-key marker in attribute patches).
    """
    if attributes is None:
        return {}
    if not isinstance(attributes, Mapping):
        raise InvalidAttributeError(f"attributes must be a map, got {type(attributes).__name__}")
    out: dict[str, Any] = {}
    for key, value in attributes.items():
        if not isinstance(key, str):
            raise InvalidAttributeError(f"attribute keys must be text, got {key!r}")
        if value is None and allow_none:
            out[key] = None
        else:
            out[key] = _normalize_value(value, path=key)
    return out


def _normalize_value(value: Any, path: str) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise InvalidAttributeError(f"attribute {path!r} is not a finite number")
        return value
    if isinstance(value, str):
        return value
    if isinstance(value, datetime):
        return rfc3339(value)
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, (list, tuple)):
        return [_normalize_value(v, f"{path}[{i}]") for i, v in enumerate(value)]
    if isinstance(value, Mapping):
        out = {}
        for k, v in value.items():
            if not isinstance(k, str):
                raise InvalidAttributeError(f"attribute map {path!r} has non-text key {k!r}")
            out[k] = _normalize_value(v, f"{path}.{k}")
        return out
    raise InvalidAttributeError(f"attribute {path!r} has unsupported type {type(value).__name__}")


def attributes_valid(value: Any) -> bool:
    """True iff ``value`` already lies inside the closed attribute type."""
    if isinstance(value, (bool, str)):
        return True
    if isinstance(value, int):
        return True
    if isinstance(value, float):
        return value == value and value not in (float("inf"), float("-inf"))
    if isinstance(value, list):
        return all(attributes_valid(v) for v in value)
    if isinstance(value, dict):
        return all(isinstance(k, str) and attributes_valid(v) for k, v in value.items())
    return False


@dataclass(frozen=True)
class DataEntity:
    """A cataloged data item at any granularity (file, table, tuple, fragment)."""

    id: EntityId
    attributes: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Group:
    """A named set of entities inside one owning grouping."""

    id: GroupId
    grouping: GroupingId
    name: str
    members: frozenset[EntityId] = frozenset()
    attributes: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Grouping:
    """A named family of groups, e.g. zones, languages, formats."""

    id: GroupingId
    name: str
    groups: frozenset[GroupId] = frozenset()
    attributes: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class EntityLink:
    """An attributed edge between two entities; oriented or not.

    Undirected links are stored with ``source <= target`` (id order) so that
    the two writings of the same edge coincide.
    """

    id: LinkId
    source: EntityId
    target: EntityId
    oriented: bool
    kind: str
    attributes: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class GroupLink:
    """An oriented, named edge between groups of two distinct groupings.

    Several records may share one name; the named relation is the set of all
    its records. The inverse direction is computed, never stored.
    """

    id: LinkId
    name: str
    source_group: GroupId
    target_group: GroupId
    attributes: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Process:
    """A recorded transformation from an input entity set to an output set.

    Inputs may be empty (external ingestion), outputs may be empty (pure
    consumption), and the two may overlap (in-place refinement).
    """

    id: ProcessId
    name: str
    inputs: frozenset[EntityId] = frozenset()
    outputs: frozenset[EntityId] = frozenset()
    attributes: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class CatalogSnapshot:
    """An immutable, referentially closed view of the whole catalog."""

    entities: dict[EntityId, DataEntity] = field(default_factory=dict)
    groupings: dict[GroupingId, Grouping] = field(default_factory=dict)
    groups: dict[GroupId, Group] = field(default_factory=dict)
    entity_links: dict[LinkId, EntityLink] = field(default_factory=dict)
    group_links: dict[LinkId, GroupLink] = field(default_factory=dict)
    processes: dict[ProcessId, Process] = field(default_factory=dict)
    snapshot_version: int = 0

    def counts(self) -> dict[str, int]:
        return {
            "entities": len(self.entities),
            "groupings": len(self.groupings),
            "groups": len(self.groups),
            "entity_links": len(self.entity_links),
            "group_links": len(self.group_links),
            "processes": len(self.processes),
        }

    def record(self, record_id: str):
        """Look up a record of any kind by id, or None."""
        for collection in (
            self.entities,
            self.groupings,
            self.groups,
            self.entity_links,
            self.group_links,
            self.processes,
        ):
            if record_id in collection:
                return collection[record_id]
        return None


@dataclass(frozen=True)
class Violation:
    record_id: str
    rule: str
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def canonical_pair(a: str, b: str) -> tuple[str, str]:
    """Storage order for the endpoints of an undirected entity link."""
    return (a, b) if a <= b else (b, a)


def validate(snapshot: CatalogSnapshot) -> ValidationReport:
    """Check every invariant over the snapshot and enumerate all findings.

    Pure and idempotent: malformed content yields violations, never raises.
    Self-links between an entity and itself are legal but reported as
    warnings.
    """
    violations: list[Violation] = []
    warnings: list[Violation] = []

    collections = (
        ("entities", snapshot.entities),
        ("groupings", snapshot.groupings),
        ("groups", snapshot.groups),
        ("entity_links", snapshot.entity_links),
        ("group_links", snapshot.group_links),
        ("processes", snapshot.processes),
    )

    seen: dict[str, str] = {}
    for name, collection in collections:
        for key, record in collection.items():
            if key != record.id:
                violations.append(Violation(key, "id_mismatch", f"keyed {key} but record id is {record.id}"))
            if record.id in seen:
                violations.append(
                    Violation(record.id, "duplicate_id", f"id used by both {seen[record.id]} and {name}")
                )
            else:
                seen[record.id] = name
            for attr_key, attr_value in record.attributes.items():
                if not isinstance(attr_key, str) or not attributes_valid(attr_value):
                    violations.append(
                        Violation(record.id, "invalid_attributes", f"attribute {attr_key!r} outside the value type")
                    )

    entities = snapshot.entities
    groups = snapshot.groups
    groupings = snapshot.groupings

    for group in groups.values():
        for member in sorted(group.members):
            if member not in entities:
                violations.append(Violation(group.id, "unknown_entity_in_group", f"member {member}"))
        owner = groupings.get(group.grouping)
        if owner is None:
            violations.append(Violation(group.id, "unknown_grouping_for_group", f"grouping {group.grouping}"))
        elif group.id not in owner.groups:
            violations.append(
                Violation(group.id, "group_not_registered_in_grouping", f"grouping {group.grouping}")
            )

    for grouping in groupings.values():
        for group_id in sorted(grouping.groups):
            group = groups.get(group_id)
            if group is None:
                violations.append(Violation(grouping.id, "unknown_group_in_grouping", f"group {group_id}"))
            elif group.grouping != grouping.id:
                violations.append(
                    Violation(grouping.id, "group_owner_mismatch", f"group {group_id} claims {group.grouping}")
                )

    for link in snapshot.entity_links.values():
        for end in (link.source, link.target):
            if end not in entities:
                violations.append(Violation(link.id, "unknown_entity_in_link", f"entity {end}"))
        if not link.oriented and (link.source, link.target) != canonical_pair(link.source, link.target):
            violations.append(Violation(link.id, "entity_link_not_canonical", f"{link.source} > {link.target}"))
        if link.source == link.target:
            warnings.append(Violation(link.id, "self_link", f"entity {link.source}"))

    for glink in snapshot.group_links.values():
        endpoints = []
        for end in (glink.source_group, glink.target_group):
            group = groups.get(end)
            if group is None:
                violations.append(Violation(glink.id, "unknown_group_in_link", f"group {end}"))
            else:
                endpoints.append(group)
        if len(endpoints) == 2 and endpoints[0].grouping == endpoints[1].grouping:
            violations.append(
                Violation(glink.id, "group_link_same_grouping", f"both groups in grouping {endpoints[0].grouping}")
            )

    for process in snapshot.processes.values():
        for member in sorted(process.inputs | process.outputs):
            if member not in entities:
                violations.append(Violation(process.id, "unknown_entity_in_process", f"entity {member}"))

    return ValidationReport(tuple(violations), tuple(warnings))
