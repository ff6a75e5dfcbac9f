"""Interoperability with other data-lake metadata vocabularies.

Three foreign models are supported: MEDAL, Ravat & Zhao, and HANDLE. For
each one this module ships the static concept-mapping table, an importer
that rewrites a neutral interchange document into catalog records, and the
eight-feature coverage matrix comparing all published models.

Importers are atomic (a malformed document leaves the store untouched) and
deterministic: importing the same document twice into fresh stores yields
catalogs equal up to id renaming.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import FixtureMissingError, ForeignDocumentError
from .ingest import ensure_group, ensure_grouping
from .model import CatalogSnapshot
from .store import CatalogStore


class ForeignModelKind(Enum):
    MEDAL = "medal"
    RAVAT_ZHAO = "ravat-zhao"
    HANDLE = "handle"


GOLD_CONCEPTS = ("Data entity", "Grouping", "Link", "Process")

#: The eight genericity features, in comparison order.
FEATURES = (
    "Semantic enrichment",
    "Data polymorphism/multiple zones",
    "Data versioning",
    "Usage tracking",
    "Categorization",
    "Similarity links",
    "Metadata properties",
    "Multiple granularity levels",
)

MODELS = ("GEMMS", "Ground", "Diamantini et al.", "Ravat & Zhao", "MEDAL", "HANDLE", "goldMEDAL")

# Feature support per model, FEATURES order.
_SUPPORT: dict[str, tuple[bool, ...]] = {
    "GEMMS": (True, False, False, False, True, False, True, True),
    "Ground": (True, False, True, True, True, False, True, False),
    "Diamantini et al.": (True, True, False, False, False, True, False, True),
    "Ravat & Zhao": (True, True, True, True, True, True, True, False),
    "MEDAL": (True, True, True, True, True, True, True, False),
    "HANDLE": (True, True, False, True, True, True, True, True),
    "goldMEDAL": (True, True, True, True, True, True, True, True),
}

_MAPPING_ROWS: dict[ForeignModelKind, tuple[tuple[str, tuple[str, ...]], ...]] = {
    ForeignModelKind.MEDAL: (
        ("Data entity", ("Version", "Representation")),
        ("Grouping", ("Object", "Grouping")),
        ("Link", ("Similarity link",)),
        ("Process", ("Update", "Transformation", "Parenthood relationship")),
    ),
    ForeignModelKind.RAVAT_ZHAO: (
        ("Data entity", ("Dataset", "Subclass")),
        ("Grouping", ("Keyword",)),
        ("Link", ("Relationship",)),
        ("Process", ("Process",)),
    ),
    ForeignModelKind.HANDLE: (
        ("Data entity", ("Data", "Metadata")),
        ("Grouping", ("Categorization", "ZoneIndicator", "GranularityIndicator")),
        ("Link", ("Link",)),
        ("Process", ()),
    ),
}

_UNMAPPED_FOREIGN: dict[ForeignModelKind, tuple[str, ...]] = {
    ForeignModelKind.MEDAL: (),
    ForeignModelKind.RAVAT_ZHAO: ("User", "Access"),
    ForeignModelKind.HANDLE: (),
}


@dataclass(frozen=True)
class ConceptMapping:
    kind: ForeignModelKind
    rows: tuple[tuple[str, tuple[str, ...]], ...]
    unmapped_foreign: tuple[str, ...]

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "rows": [{"concept": gold, "foreign": list(foreign)} for gold, foreign in self.rows],
            "unmapped_foreign": list(self.unmapped_foreign),
        }


@dataclass(frozen=True)
class FeatureReport:
    features: tuple[str, ...]
    support: dict[str, tuple[bool, ...]]
    totals: dict[str, str]

    def to_json(self) -> dict[str, Any]:
        return {
            "features": list(self.features),
            "support": {model: list(flags) for model, flags in self.support.items()},
            "totals": dict(self.totals),
        }


def concept_mapping(kind: ForeignModelKind) -> ConceptMapping:
    return ConceptMapping(kind, _MAPPING_ROWS[kind], _UNMAPPED_FOREIGN[kind])


def feature_report() -> FeatureReport:
    totals = {model: f"{sum(flags)}/{len(FEATURES)}" for model, flags in _SUPPORT.items()}
    return FeatureReport(FEATURES, dict(_SUPPORT), totals)


# -- interchange documents -----------------------------------------------------


@dataclass(frozen=True)
class ForeignRecord:
    concept: str
    id: str
    payload: dict[str, Any] = field(default_factory=dict)
    references: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def ref(self, key: str) -> tuple[str, ...]:
        return self.references.get(key, ())


@dataclass(frozen=True)
class ForeignDocument:
    kind: ForeignModelKind
    records: tuple[ForeignRecord, ...]


def foreign_document_from_json(data: Any) -> ForeignDocument:
    if not isinstance(data, dict):
        raise ForeignDocumentError("parse_error", "foreign document must be a JSON object")
    try:
        kind = ForeignModelKind(data.get("kind"))
    except ValueError:
        raise ForeignDocumentError("unknown_model_kind", f"unknown model kind {data.get('kind')!r}") from None
    records = []
    raw_records = data.get("records", [])
    if not isinstance(raw_records, list):
        raise ForeignDocumentError("parse_error", "'records' must be a list")
    for index, raw in enumerate(raw_records):
        if not isinstance(raw, dict) or not isinstance(raw.get("concept"), str) or not isinstance(raw.get("id"), str):
            raise ForeignDocumentError("parse_error", f"record #{index} needs 'concept' and 'id' text fields")
        references = {}
        for key, ids in (raw.get("references") or {}).items():
            if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
                raise ForeignDocumentError("parse_error", f"record {raw['id']}: reference {key!r} must list ids")
            references[key] = tuple(ids)
        records.append(
            ForeignRecord(raw["concept"], raw["id"], dict(raw.get("payload") or {}), references)
        )
    return ForeignDocument(kind, tuple(records))


@dataclass
class ImportReport:
    created: dict[str, list[str]] = field(
        default_factory=lambda: {
            "entities": [],
            "groupings": [],
            "groups": [],
            "entity_links": [],
            "group_links": [],
            "processes": [],
        }
    )
    id_map: dict[str, str] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


# Per-model import semantics. ``entity``: concepts creating one entity per
# record; ``tag``: concepts creating one group per record inside a standard
# grouping; ``object``: like tag but the grouping collects one group per
# foreign object; ``link``: (default kind, oriented, payload may override);
# ``process``: concepts recorded as processes.
_SEMANTICS: dict[ForeignModelKind, dict[str, Any]] = {
    ForeignModelKind.MEDAL: {
        "entity": {"version", "representation"},
        "object": {"object": "medal_object"},
        "grouping": {"grouping"},
        "link": {"similarity_link": ("similarity", False, False)},
        "process": {"update", "transformation", "parenthood_relationship"},
        "skip": {"global_metadata": "global metadata (logs, indexes) has no catalog equivalent; skipped"},
    },
    ForeignModelKind.RAVAT_ZHAO: {
        "entity": {"dataset", "subclass"},
        "tag": {"keyword": "keyword"},
        "link": {"relationship": ("relationship", False, True)},
        "process": {"process"},
        "warn_entity": {
            "user": "user records have no direct catalog equivalent; imported as data entities"
        },
        "warn_process": {
            "access": "access records have no direct catalog equivalent; imported as processes"
        },
    },
    ForeignModelKind.HANDLE: {
        "entity": {"data"},
        "metadata": {"metadata"},
        "tag": {
            "categorization": "categorization",
            "zone_indicator": "zone",
            "granularity_indicator": "granularity",
        },
        "link": {"link": ("containment", True, True)},
        "process": {"action"},
    },
}


def _vocabulary(kind: ForeignModelKind) -> set[str]:
    semantics = _SEMANTICS[kind]
    vocab: set[str] = set()
    for key in ("entity", "grouping", "metadata", "process"):
        vocab |= set(semantics.get(key, ()))
    for key in ("object", "tag", "link", "skip", "warn_entity", "warn_process"):
        vocab |= set(semantics.get(key, {}))
    return vocab


def import_foreign(doc: ForeignDocument, store: CatalogStore) -> ImportReport:
    """Rewrite a foreign document into catalog records, atomically.

    Raises :class:`ForeignDocumentError` (and leaves the store untouched)
    on unknown concepts, dangling or ill-typed references, entities claimed
    as outputs by several processes, or cyclic process creation order.
    """
    semantics = _SEMANTICS[doc.kind]
    vocab = _vocabulary(doc.kind)
    by_id: dict[str, ForeignRecord] = {}
    for record in doc.records:
        if record.concept not in vocab:
            raise ForeignDocumentError(
                "unknown_concept", f"{doc.kind.value} has no concept {record.concept!r}", (record.id,)
            )
        if record.id in by_id:
            raise ForeignDocumentError("duplicate_record", f"record id {record.id} appears twice", (record.id,))
        by_id[record.id] = record

    for record in doc.records:
        for key, ids in record.references.items():
            missing = [i for i in ids if i not in by_id]
            if missing:
                raise ForeignDocumentError(
                    "dangling_reference",
                    f"record {record.id}: reference {key!r} points outside the document",
                    tuple(missing),
                )

    entity_concepts = set(semantics.get("entity", ())) | set(semantics.get("warn_entity", {}))
    metadata_concepts = set(semantics.get("metadata", ()))
    process_concepts = set(semantics.get("process", ())) | set(semantics.get("warn_process", {}))

    def is_entity_record(record: ForeignRecord) -> bool:
        if record.concept in entity_concepts:
            return True
        return record.concept in metadata_concepts and not record.ref("of")

    def resolve_entity(owner: ForeignRecord, key: str, foreign_id: str) -> ForeignRecord:
        record = by_id[foreign_id]
        if record.concept in metadata_concepts and record.ref("of"):
            target = by_id[record.ref("of")[0]]
            if is_entity_record(target):
                return target
        if not is_entity_record(record):
            raise ForeignDocumentError(
                "invalid_reference",
                f"record {owner.id}: {key!r} must reference entity records, got {record.concept!r} {foreign_id}",
                (foreign_id,),
            )
        return record

    # Attached metadata must point at one plain entity record.
    for record in doc.records:
        if record.concept in metadata_concepts and record.ref("of"):
            of = record.ref("of")
            target = by_id[of[0]]
            if len(of) != 1 or target.concept not in entity_concepts:
                raise ForeignDocumentError(
                    "invalid_reference", f"metadata record {record.id} must attach to one entity record", (record.id,)
                )

    # Who creates which entity: process outputs are created by their process.
    creator: dict[str, str] = {}
    for record in doc.records:
        if record.concept not in process_concepts:
            continue
        for foreign_id in record.ref("outputs"):
            output = by_id[foreign_id]
            if output.concept not in set(semantics.get("entity", ())):
                raise ForeignDocumentError(
                    "invalid_reference",
                    f"process {record.id} lists non-entity record {foreign_id} as output",
                    (foreign_id,),
                )
            if foreign_id in creator:
                raise ForeignDocumentError(
                    "conflicting_outputs",
                    f"entity record {foreign_id} is claimed as output by {creator[foreign_id]} and {record.id}",
                    (foreign_id,),
                )
            creator[foreign_id] = record.id

    processes = [r for r in doc.records if r.concept in process_concepts]
    order = _process_order(processes, creator, by_id)

    report = ImportReport()
    with store.transaction():
        _apply(doc, store, semantics, by_id, creator, order, resolve_entity, is_entity_record, report)
    return report


def _process_order(processes, creator, by_id) -> list[ForeignRecord]:
    """Topological order so every process input exists when it is recorded."""
    index = {record.id: position for position, record in enumerate(processes)}
    waiting: dict[str, set[str]] = {}
    dependents: dict[str, set[str]] = {}
    for record in processes:
        needs = {creator[i] for i in record.ref("inputs") if i in creator and creator[i] != record.id}
        waiting[record.id] = needs
        for need in needs:
            dependents.setdefault(need, set()).add(record.id)
    ready = sorted((pid for pid, needs in waiting.items() if not needs), key=index.__getitem__)
    ordered: list[ForeignRecord] = []
    while ready:
        pid = ready.pop(0)
        ordered.append(by_id[pid])
        for dependent in sorted(dependents.get(pid, ()), key=index.__getitem__):
            waiting[dependent].discard(pid)
            if not waiting[dependent]:
                ready.append(dependent)
        ready.sort(key=index.__getitem__)
    if len(ordered) != len(processes):
        stuck = sorted(pid for pid, needs in waiting.items() if needs)
        raise ForeignDocumentError(
            "process_cycle", "process outputs and inputs form a creation cycle", tuple(stuck)
        )
    return ordered


def _apply(doc, store, semantics, by_id, creator, process_order, resolve_entity, is_entity_record, report):
    id_map = report.id_map

    # 1. Entities that no process creates.
    for record in doc.records:
        if is_entity_record(record) and record.id not in creator:
            if record.concept in semantics.get("warn_entity", {}):
                report.warnings.append(f"{record.id}: {semantics['warn_entity'][record.concept]}")
            entity_id = store.put_entity(record.payload)
            id_map[record.id] = entity_id
            report.created["entities"].append(entity_id)

    # 2. Processes in creation order, outputs created with them.
    for record in process_order:
        if record.concept in semantics.get("warn_process", {}):
            report.warnings.append(f"{record.id}: {semantics['warn_process'][record.concept]}")
        inputs = sorted({id_map[resolve_entity(record, "inputs", i).id] for i in record.ref("inputs")})
        output_records = [by_id[i] for i in record.ref("outputs")]
        process_id, created = store.record_process(
            record.payload.get("name", record.concept),
            inputs,
            [output.payload for output in output_records],
            {k: v for k, v in record.payload.items() if k != "name"},
        )
        id_map[record.id] = process_id
        report.created["processes"].append(process_id)
        for output, entity_id in zip(output_records, created):
            id_map[output.id] = entity_id
            report.created["entities"].append(entity_id)

    # 3. Attached metadata merges into its entity's attributes.
    for record in doc.records:
        if record.concept in semantics.get("metadata", ()) and record.ref("of"):
            target_id = id_map[record.ref("of")[0]]
            if record.payload:
                store.set_attributes(target_id, record.payload)
            id_map[record.id] = target_id

    # 4. Skipped concepts.
    for record in doc.records:
        if record.concept in semantics.get("skip", {}):
            report.warnings.append(f"{record.id}: {semantics['skip'][record.concept]}")

    grouping_cache: dict[str, str] = {}

    def grouping_for(name: str) -> str:
        if name not in grouping_cache:
            existing = store.groupings_named(name)
            if existing:
                grouping_cache[name] = existing[0]
            else:
                grouping_cache[name] = store.define_grouping(name)
                report.created["groupings"].append(grouping_cache[name])
        return grouping_cache[name]

    # 5. Object-like records: one group per foreign object.
    for record in doc.records:
        grouping_name = semantics.get("object", {}).get(record.concept)
        if grouping_name is None:
            continue
        grouping_id = grouping_for(grouping_name)
        members = sorted({id_map[resolve_entity(record, "members", m).id] for m in record.ref("members")})
        group_id = store.define_group(grouping_id, record.payload.get("name", record.id), members)
        id_map[record.id] = group_id
        report.created["groups"].append(group_id)

    # 6. Tag records: one group per distinct value inside a standard grouping.
    for record in doc.records:
        grouping_name = semantics.get("tag", {}).get(record.concept)
        if grouping_name is None:
            continue
        grouping_id = grouping_for(grouping_name)
        name = record.payload.get("value") or record.payload.get("name") or record.id
        existing = store.groups_named(name, grouping_id)
        if existing:
            group_id = existing[0]
        else:
            group_id = store.define_group(grouping_id, name, ())
            report.created["groups"].append(group_id)
        for member in record.ref("members"):
            store.assign_to_group(group_id, id_map[resolve_entity(record, "members", member).id])
        id_map[record.id] = group_id

    # 7. Foreign groupings: reference keys name the groups.
    for record in doc.records:
        if record.concept not in semantics.get("grouping", ()):
            continue
        grouping_id = store.define_grouping(record.payload.get("name", record.id), record.payload)
        report.created["groupings"].append(grouping_id)
        id_map[record.id] = grouping_id
        for group_name in sorted(record.references):
            members = sorted(
                {id_map[resolve_entity(record, group_name, m).id] for m in record.ref(group_name)}
            )
            group_id = store.define_group(grouping_id, group_name, members)
            report.created["groups"].append(group_id)

    # 8. Links.
    for record in doc.records:
        link_spec = semantics.get("link", {}).get(record.concept)
        if link_spec is None:
            continue
        default_kind, oriented, overridable = link_spec
        source = record.ref("source")
        target = record.ref("target")
        if len(source) != 1 or len(target) != 1:
            raise ForeignDocumentError(
                "invalid_reference", f"link record {record.id} needs one source and one target", (record.id,)
            )
        kind = record.payload.get("kind", default_kind) if overridable else default_kind
        if overridable and "oriented" in record.payload:
            oriented = bool(record.payload["oriented"])
        attributes = {k: v for k, v in record.payload.items() if k not in ("kind", "oriented")}
        link_id = store.link_entities(
            id_map[resolve_entity(record, "source", source[0]).id],
            id_map[resolve_entity(record, "target", target[0]).id],
            oriented,
            kind,
            attributes,
        )
        id_map[record.id] = link_id
        report.created["entity_links"].append(link_id)


# -- feature demonstration ------------------------------------------------------


@dataclass(frozen=True)
class FeatureDemo:
    witnesses: dict[str, list[str]]

    def to_json(self) -> dict[str, Any]:
        return {"witnesses": dict(self.witnesses)}


def demonstrate_features(store: CatalogStore) -> FeatureDemo:
    """Point at catalog records witnessing each of the eight features.

    Requires the bundled demo fixture (or an equivalent catalog); raises
    :class:`FixtureMissingError` naming the first feature without a witness.
    """
    snapshot = store.snapshot()
    witnesses: dict[str, list[str]] = {}

    witnesses[FEATURES[0]] = sorted(
        l.id for l in snapshot.entity_links.values() if l.kind in ("term_relation", "described_by")
    )
    witnesses[FEATURES[1]] = _zone_witnesses(snapshot)
    witnesses[FEATURES[2]] = _version_witnesses(snapshot)
    witnesses[FEATURES[3]] = sorted(
        p.id
        for p in snapshot.processes.values()
        if "tool" in p.attributes and "executed_at" in p.attributes
    )
    witnesses[FEATURES[4]] = sorted(
        g.id
        for grouping in snapshot.groupings.values()
        if grouping.name == "keyword"
        for g in (snapshot.groups[i] for i in grouping.groups)
        if g.members
    )
    witnesses[FEATURES[5]] = sorted(
        l.id
        for l in snapshot.entity_links.values()
        if l.kind == "similarity" and isinstance(l.attributes.get("score"), (int, float))
    )
    witnesses[FEATURES[6]] = sorted(e.id for e in snapshot.entities.values() if e.attributes)[:3]
    witnesses[FEATURES[7]] = _granularity_witnesses(snapshot)

    for feature in FEATURES:
        if not witnesses[feature]:
            raise FixtureMissingError(f"fixture missing: no witness for feature {feature!r}")
    return FeatureDemo(witnesses)


def _zone_witnesses(snapshot: CatalogSnapshot) -> list[str]:
    for grouping in snapshot.groupings.values():
        if grouping.name != "zone" or len(grouping.groups) < 2:
            continue
        zone_of: dict[str, str] = {}
        for group_id in grouping.groups:
            for member in snapshot.groups[group_id].members:
                zone_of[member] = group_id
        for process in sorted(snapshot.processes.values(), key=lambda p: p.id):
            input_zones = {zone_of[e] for e in process.inputs if e in zone_of}
            output_zones = {zone_of[e] for e in process.outputs if e in zone_of}
            if input_zones and output_zones - input_zones:
                return sorted([grouping.id, process.id])
    return []


def _version_witnesses(snapshot: CatalogSnapshot) -> list[str]:
    for grouping in snapshot.groupings.values():
        if grouping.name != "version_of":
            continue
        for group_id in sorted(grouping.groups):
            members = snapshot.groups[group_id].members
            for process in sorted(snapshot.processes.values(), key=lambda p: p.id):
                if process.inputs & members and process.outputs & members:
                    return sorted([group_id, process.id])
    return []


def _granularity_witnesses(snapshot: CatalogSnapshot) -> list[str]:
    for grouping in snapshot.groupings.values():
        if grouping.name != "granularity":
            continue
        groups = {snapshot.groups[i].name: snapshot.groups[i] for i in grouping.groups}
        fragment = groups.get("fragment")
        if fragment and fragment.members:
            return sorted(fragment.members)
    return []
