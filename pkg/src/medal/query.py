"""Read-only navigation over a catalog snapshot.

All functions here are pure in the snapshot: no mutation, identical results
on repeated calls, safe under concurrent use. Returned collections follow a
total order (id-lexicographic unless stated otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import UnknownIdError
from .model import CatalogSnapshot, EntityLink

DOWNSTREAM = "downstream"
UPSTREAM = "upstream"


@dataclass(frozen=True)
class LineageEdge:
    """One entity-pair step of a process hyperedge, process id retained."""

    process: str
    source: str
    target: str


@dataclass(frozen=True)
class LineageGraph:
    root: str
    direction: str
    nodes: frozenset[str]
    edges: frozenset[LineageEdge]
    depth_of: Mapping[str, int]

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "direction": self.direction,
            "nodes": sorted(self.nodes),
            "edges": [
                {"process": e.process, "from": e.source, "to": e.target}
                for e in sorted(self.edges, key=lambda e: (e.process, e.source, e.target))
            ],
            "depth_of": dict(sorted(self.depth_of.items())),
        }


@dataclass(frozen=True)
class RollupResult:
    holds: bool
    missing: tuple[str, ...]
    extra: tuple[str, ...]

    def to_json(self) -> dict:
        return {"holds": self.holds, "missing": list(self.missing), "extra": list(self.extra)}


def group_members(snapshot: CatalogSnapshot, group: str) -> list[str]:
    if group not in snapshot.groups:
        raise UnknownIdError("group", group)
    return sorted(snapshot.groups[group].members)


def groups_of(snapshot: CatalogSnapshot, entity: str, within: str | None = None) -> list[str]:
    """Groups an entity belongs to, optionally restricted to one grouping."""
    if entity not in snapshot.entities:
        raise UnknownIdError("entity", entity)
    if within is not None and within not in snapshot.groupings:
        raise UnknownIdError("grouping", within)
    return sorted(
        g.id
        for g in snapshot.groups.values()
        if entity in g.members and (within is None or g.grouping == within)
    )


def intersect_groups(snapshot: CatalogSnapshot, groups: Iterable[str]) -> list[str]:
    """Set intersection of the member sets, id-sorted.

    Commutative, associative, and idempotent in its argument list; at least
    one group id is required.
    """
    group_ids = list(groups)
    if not group_ids:
        raise UnknownIdError("group", "(none given)")
    missing = sorted({g for g in group_ids if g not in snapshot.groups})
    if missing:
        raise UnknownIdError("group", tuple(missing))
    result = set(snapshot.groups[group_ids[0]].members)
    for group_id in group_ids[1:]:
        result &= snapshot.groups[group_id].members
    return sorted(result)


def lineage(
    snapshot: CatalogSnapshot,
    entity: str,
    direction: str = DOWNSTREAM,
    max_depth: int | None = None,
) -> LineageGraph:
    """BFS over process hyperedges from one entity.

    Downstream follows input→output, upstream the reverse. Edges are
    expanded to entity pairs with the process id retained. Cycles terminate
    through the visited set; each entity appears once, at its minimal depth.
    """
    if entity not in snapshot.entities:
        raise UnknownIdError("entity", entity)
    if direction not in (DOWNSTREAM, UPSTREAM):
        raise ValueError(f"direction must be {DOWNSTREAM!r} or {UPSTREAM!r}, got {direction!r}")
    if max_depth is not None and max_depth < 1:
        raise ValueError("max_depth must be >= 1 when given")

    # entity -> [(process id, entities one hop away)]
    hops: dict[str, list[tuple[str, frozenset[str]]]] = {}
    for process in snapshot.processes.values():
        near, far = (process.inputs, process.outputs) if direction == DOWNSTREAM else (
            process.outputs,
            process.inputs,
        )
        for entity_id in near:
            hops.setdefault(entity_id, []).append((process.id, far))

    depth_of: dict[str, int] = {entity: 0}
    edges: set[LineageEdge] = set()
    frontier = [entity]
    depth = 0
    while frontier and (max_depth is None or depth < max_depth):
        depth += 1
        next_frontier: list[str] = []
        for current in frontier:
            for process_id, far in hops.get(current, ()):
                for other in far:
                    edges.add(LineageEdge(process_id, current, other))
                    if other not in depth_of:
                        depth_of[other] = depth
                        next_frontier.append(other)
        frontier = next_frontier
    return LineageGraph(
        root=entity,
        direction=direction,
        nodes=frozenset(depth_of),
        edges=frozenset(edges),
        depth_of=depth_of,
    )


def entity_neighbors(
    snapshot: CatalogSnapshot,
    entity: str,
    kind: str | None = None,
    min_score: float | None = None,
) -> list[tuple[EntityLink, str]]:
    """Links incident to an entity with the entity at the other end.

    Undirected links match from either end, oriented links from the source
    only. When a minimum score is given, links without a numeric ``score``
    attribute are dropped. Sorted by descending score (missing scores last),
    then link id.
    """
    if entity not in snapshot.entities:
        raise UnknownIdError("entity", entity)
    matched: list[tuple[EntityLink, str]] = []
    for link in snapshot.entity_links.values():
        if link.source == entity:
            other = link.target
        elif not link.oriented and link.target == entity:
            other = link.source
        else:
            continue
        if kind is not None and link.kind != kind:
            continue
        score = link.attributes.get("score")
        if not isinstance(score, (int, float)) or isinstance(score, bool):
            score = None
        if min_score is not None and (score is None or score < min_score):
            continue
        matched.append((link, other))

    def sort_key(item: tuple[EntityLink, str]):
        link, _ = item
        score = link.attributes.get("score")
        if not isinstance(score, (int, float)) or isinstance(score, bool):
            return (1, 0.0, link.id)
        return (0, -float(score), link.id)

    return sorted(matched, key=sort_key)


def follow_group_link(snapshot: CatalogSnapshot, relation: str, group: str) -> list[str]:
    """All target groups of records named ``relation`` with this source."""
    if group not in snapshot.groups:
        raise UnknownIdError("group", group)
    return sorted(
        {l.target_group for l in snapshot.group_links.values() if l.name == relation and l.source_group == group}
    )


def inverse_group_link(snapshot: CatalogSnapshot, relation: str, group: str) -> list[str]:
    """All source groups targeting this group under ``relation`` (computed, never stored)."""
    if group not in snapshot.groups:
        raise UnknownIdError("group", group)
    return sorted(
        {l.source_group for l in snapshot.group_links.values() if l.name == relation and l.target_group == group}
    )


def rollup_check(snapshot: CatalogSnapshot, relation: str, target_group: str) -> RollupResult:
    """Does the target group equal the union of its inverse-linked sources?

    ``missing`` holds entities the sources cover but the target lacks,
    ``extra`` the target's entities not covered by any source.
    """
    if target_group not in snapshot.groups:
        raise UnknownIdError("group", target_group)
    target_members = snapshot.groups[target_group].members
    union: set[str] = set()
    for source in inverse_group_link(snapshot, relation, target_group):
        union |= snapshot.groups[source].members
    missing = tuple(sorted(union - target_members))
    extra = tuple(sorted(target_members - union))
    return RollupResult(holds=not missing and not extra, missing=missing, extra=extra)
