"""JSON-ready payloads shared by the HTTP API and the CLI.

Both surfaces must render a given query result byte-for-byte identically,
so they build their payloads here and serialize with
:func:`medal.util.canonical_json`.
"""

from __future__ import annotations

from typing import Any

from . import interop, query
from .model import CatalogSnapshot, ValidationReport
from .store import export_node_per_concept, record_json, snapshot_to_doc


def intersect_payload(snapshot: CatalogSnapshot, groups: list[str]) -> list[str]:
    return query.intersect_groups(snapshot, groups)


def lineage_payload(
    snapshot: CatalogSnapshot, entity: str, direction: str, max_depth: int | None
) -> dict[str, Any]:
    return query.lineage(snapshot, entity, direction, max_depth).to_json()


def neighbors_payload(
    snapshot: CatalogSnapshot, entity: str, kind: str | None, min_score: float | None
) -> list[dict[str, Any]]:
    return [
        {"link": record_json(link), "other": other}
        for link, other in query.entity_neighbors(snapshot, entity, kind, min_score)
    ]


def rollup_payload(snapshot: CatalogSnapshot, relation: str, target_group: str) -> dict[str, Any]:
    return query.rollup_check(snapshot, relation, target_group).to_json()


def features_payload() -> dict[str, Any]:
    return interop.feature_report().to_json()


def mapping_payload(kind: interop.ForeignModelKind) -> dict[str, Any]:
    return interop.concept_mapping(kind).to_json()


def export_payload(snapshot: CatalogSnapshot, shape: str) -> dict[str, Any]:
    if shape == "native":
        return snapshot_to_doc(snapshot)
    if shape == "node-per-concept":
        return export_node_per_concept(snapshot)
    raise ValueError(f"unknown export shape {shape!r}")


def meta_payload(snapshot: CatalogSnapshot) -> dict[str, Any]:
    return {"snapshot_version": snapshot.snapshot_version, "counts": snapshot.counts()}


def validation_payload(report: ValidationReport) -> dict[str, Any]:
    return {
        "ok": report.ok,
        "violations": [
            {"record_id": v.record_id, "rule": v.rule, "detail": v.detail} for v in report.violations
        ],
        "warnings": [
            {"record_id": v.record_id, "rule": v.rule, "detail": v.detail} for v in report.warnings
        ],
    }
