"""Populate a catalog from files on disk.

The pipeline reproduces the usual desk-scale lake patterns: scan a source
directory into entities with automatic groupings (zone, format, language),
refine text documents into bag-of-words entities, split documents into
fragments, link refined documents by token-set overlap, and load a
thesaurus of categories and terms.

File payloads stay on disk; the catalog stores paths. Every operation
funnels its created entities through exactly one recorded process, so
anything the pipeline creates has lineage.
"""

from __future__ import annotations

import logging
import mimetypes
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .errors import IngestError, ThesaurusError, UnknownIdError
from .model import rfc3339
from .store import CatalogStore

logger = logging.getLogger(__name__)

_WORD = re.compile(r"\w+", re.UNICODE)

# Minimal stop-word lists for the bundled two-language heuristic. A document
# joins a language group when it has at least MIN_HITS stop-word hits and is
# not dominated by the other language beyond the 2x margin; mixed documents
# therefore join both groups.
FRENCH_STOPWORDS = frozenset(
    "le la les un une des et est dans pour que qui ne pas ce cette sur avec son sa ses "
    "leur nous vous ils elles elle sont être il au aux du de mais ou donc car si plus".split()
)
ENGLISH_STOPWORDS = frozenset(
    "the a an and is in for that which not this on with his her their we you they she "
    "are be it at of to but or so if more was were has have had from by as".split()
)
MIN_LANGUAGE_HITS = 2


@dataclass(frozen=True)
class GroupingRule:
    """How scanned files map into groups of one grouping."""

    grouping: str
    rule: str  # extension | language | mime | constant
    value: str | None = None

    def __post_init__(self):
        if self.rule not in ("extension", "language", "mime", "constant"):
            raise ValueError(f"unknown grouping rule {self.rule!r}")
        if self.rule == "constant" and not self.value:
            raise ValueError("constant rule needs a group name")


@dataclass(frozen=True)
class IngestManifest:
    source_path: Path
    zone: str = "raw"
    grouping_rules: tuple[GroupingRule, ...] = ()
    similarity_threshold: float | None = None

    def __post_init__(self):
        if self.similarity_threshold is not None and not 0.0 <= self.similarity_threshold <= 1.0:
            raise ValueError("similarity threshold must lie in [0, 1]")


@dataclass
class IngestReport:
    process: str
    entities: list[str] = field(default_factory=list)
    groups: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


@dataclass
class ThesaurusReport:
    grouping: str
    categories: dict[str, str] = field(default_factory=dict)  # name -> group id
    terms: dict[str, str] = field(default_factory=dict)  # label -> entity id
    relation_links: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def tokenize(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def token_counts(text: str) -> dict[str, int]:
    return dict(Counter(tokenize(text)))


def detect_languages(text: str) -> list[str]:
    tokens = tokenize(text)
    hits = {
        "english": sum(1 for t in tokens if t in ENGLISH_STOPWORDS),
        "french": sum(1 for t in tokens if t in FRENCH_STOPWORDS),
    }
    best = max(hits.values(), default=0)
    return sorted(lang for lang, n in hits.items() if n >= MIN_LANGUAGE_HITS and n * 2 >= best)


def ensure_grouping(store: CatalogStore, name: str) -> str:
    existing = store.groupings_named(name)
    return existing[0] if existing else store.define_grouping(name)


def ensure_group(store: CatalogStore, grouping_id: str, name: str) -> str:
    existing = store.groups_named(name, grouping_id)
    return existing[0] if existing else store.define_group(grouping_id, name, ())


def _read_text(path: Path) -> str | None:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError):
        return None


def scan_source(manifest: IngestManifest, store: CatalogStore) -> IngestReport:
    """One entity per file, grouped per the manifest, behind one ingest process."""
    source = Path(manifest.source_path)
    if not source.is_dir():
        raise IngestError("source_unreadable", f"not a readable directory: {source}")

    wants_language = any(rule.rule == "language" for rule in manifest.grouping_rules)
    files: list[tuple[Path, dict[str, Any], str | None]] = []
    warnings: list[str] = []
    for path in sorted(p for p in source.rglob("*") if p.is_file()):
        try:
            stat = path.stat()
        except OSError as exc:
            warnings.append(f"skipped unreadable file {path}: {exc}")
            continue
        spec = {
            "path": str(path.resolve()),
            "size_bytes": stat.st_size,
            "created_at": rfc3339(_mtime(stat)),
            "extension": path.suffix.lstrip(".").lower(),
        }
        text = _read_text(path) if wants_language else None
        files.append((path, spec, text))

    process_id, entity_ids = store.record_process(
        "ingest", (), [spec for _, spec, _ in files], {"source": str(source)}
    )

    groups_touched: set[str] = set()
    zone_grouping = ensure_grouping(store, "zone")
    zone_group = ensure_group(store, zone_grouping, manifest.zone)
    for entity_id in entity_ids:
        store.assign_to_group(zone_group, entity_id)
    if entity_ids:
        groups_touched.add(zone_group)

    for rule in manifest.grouping_rules:
        grouping_id = ensure_grouping(store, rule.grouping)
        for (path, spec, text), entity_id in zip(files, entity_ids):
            for name in _group_names(rule, spec, text):
                group_id = ensure_group(store, grouping_id, name)
                store.assign_to_group(group_id, entity_id)
                groups_touched.add(group_id)

    if warnings:
        for message in warnings:
            logger.warning(message)
    return IngestReport(process_id, list(entity_ids), sorted(groups_touched), warnings)


def _mtime(stat):
    from datetime import datetime, timezone

    return datetime.fromtimestamp(stat.st_mtime, tz=timezone.utc)


def _group_names(rule: GroupingRule, spec: dict[str, Any], text: str | None) -> list[str]:
    if rule.rule == "extension":
        return [spec["extension"] or "none"]
    if rule.rule == "mime":
        guessed, _ = mimetypes.guess_type(spec["path"])
        return [guessed or "unknown"]
    if rule.rule == "constant":
        return [rule.value or ""]
    return detect_languages(text) if text is not None else []


def refine_documents(entities: Iterable[str], store: CatalogStore) -> str:
    """Derive a bag-of-words entity per readable text input.

    Unreadable inputs are skipped with a warning and excluded from the
    recorded process; refined entities land in the processed zone group.
    """
    snapshot = store.snapshot()
    requested = sorted(set(entities))
    missing = [e for e in requested if e not in snapshot.entities]
    if missing:
        raise UnknownIdError("entity", tuple(missing))

    refined_inputs: list[str] = []
    specs: list[dict[str, Any]] = []
    for entity_id in requested:
        path = snapshot.entities[entity_id].attributes.get("path")
        text = _read_text(Path(path)) if isinstance(path, str) else None
        if text is None:
            logger.warning("refine: skipped %s (no readable text payload)", entity_id)
            continue
        counts = token_counts(text)
        refined_inputs.append(entity_id)
        specs.append(
            {
                "kind": "bag_of_words",
                "vocabulary_size": len(counts),
                "token_counts": counts,
                "refined_from": entity_id,
            }
        )
    if not refined_inputs:
        logger.warning("refine: nothing to refine")

    process_id, outputs = store.record_process("refine", refined_inputs, specs, {"tool": "bag_of_words"})
    zone_grouping = ensure_grouping(store, "zone")
    processed = ensure_group(store, zone_grouping, "processed")
    for entity_id in outputs:
        store.assign_to_group(processed, entity_id)
    return process_id


def split_document(entity: str, delimiter: str, store: CatalogStore) -> tuple[str, list[str]]:
    """Split one document entity into fragment entities (empty pieces dropped)."""
    if not delimiter:
        raise ValueError("delimiter must be non-empty")
    snapshot = store.snapshot()
    if entity not in snapshot.entities:
        raise UnknownIdError("entity", entity)
    path = snapshot.entities[entity].attributes.get("path")
    text = _read_text(Path(path)) if isinstance(path, str) else None
    if text is None:
        raise IngestError("entity_unreadable", f"entity {entity} has no readable text payload", (entity,))

    pieces = [piece for piece in text.split(delimiter) if piece.strip()]
    specs = [{"index": index, "parent_path": path} for index in range(len(pieces))]
    process_id, fragments = store.record_process("split", {entity}, specs, {"delimiter": delimiter})

    grouping_id = ensure_grouping(store, "granularity")
    fragment_group = ensure_group(store, grouping_id, "fragment")
    for fragment in fragments:
        store.assign_to_group(fragment_group, fragment)
    return process_id, fragments


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """Token-set overlap; two empty sets count as identical."""
    set_a, set_b = set(a), set(b)
    union = set_a | set_b
    if not union:
        return 1.0
    return len(set_a & set_b) / len(union)


def compute_similarity_links(entities: Iterable[str], threshold: float, store: CatalogStore) -> list[str]:
    """Link every unordered pair of refined entities whose overlap reaches the threshold.

    The produced link set does not depend on enumeration order: pairs are
    taken over the id-sorted entity list and links are undirected.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    snapshot = store.snapshot()
    requested = sorted(set(entities))
    missing = [e for e in requested if e not in snapshot.entities]
    if missing:
        raise UnknownIdError("entity", tuple(missing))

    tokens: dict[str, set[str]] = {}
    for entity_id in requested:
        counts = snapshot.entities[entity_id].attributes.get("token_counts")
        if not isinstance(counts, dict):
            logger.warning("similarity: skipped %s (not refined)", entity_id)
            continue
        tokens[entity_id] = set(counts)

    created: list[str] = []
    ordered = sorted(tokens)
    for i, left in enumerate(ordered):
        for right in ordered[i + 1 :]:
            score = jaccard(tokens[left], tokens[right])
            if score >= threshold:
                created.append(store.link_entities(left, right, False, "similarity", {"score": score}))
    return created


# -- thesaurus ----------------------------------------------------------------


def load_thesaurus(path: str | Path, store: CatalogStore) -> ThesaurusReport:
    """Load a thesaurus JSON file; the whole file is rejected on any rule breach."""
    import json

    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ThesaurusError(f"cannot parse thesaurus file {path}: {exc}") from exc
    return load_thesaurus_data(data, store)


def load_thesaurus_data(data: Any, store: CatalogStore) -> ThesaurusReport:
    """Walk the category tree, then materialize it atomically.

    Categories become groups of the thesaurus_category grouping, terms
    become entities inside their parent category's group, and term-to-term
    relationships become undirected term_relation links.
    """
    categories, terms, relations = _parse_thesaurus(data)

    with store.transaction():
        grouping_id = ensure_grouping(store, "thesaurus_category")
        report = ThesaurusReport(grouping=grouping_id)
        for name, parent in categories:
            attributes = {"parent_category": parent} if parent is not None else {}
            group_id = ensure_group(store, grouping_id, name)
            if attributes:
                store.set_attributes(group_id, attributes)
            report.categories[name] = group_id
        for label, category, short, long_ in terms:
            entity_id = store.put_entity(
                {"label": label, "short_description": short, "long_description": long_}
            )
            store.assign_to_group(report.categories[category], entity_id)
            report.terms[label] = entity_id
        seen: set[tuple[str, str, str]] = set()
        for source_label, relation_type, target_label in relations:
            a, b = sorted((report.terms[source_label], report.terms[target_label]))
            if (a, b, relation_type) in seen:
                continue
            seen.add((a, b, relation_type))
            report.relation_links.append(
                store.link_entities(a, b, False, "term_relation", {"relation_type": relation_type})
            )
    return report


def _parse_thesaurus(data: Any):
    if not isinstance(data, dict) or not isinstance(data.get("categories"), list):
        raise ThesaurusError("thesaurus document must be an object with a 'categories' list")
    if data.get("terms"):
        raise ThesaurusError("A term must have a parent category")

    categories: list[tuple[str, str | None]] = []  # (name, parent name)
    terms: list[tuple[str, str, str, str]] = []  # (label, category, short, long)
    relations: list[tuple[str, str, str]] = []
    seen_categories: set[str] = set()
    seen_terms: set[str] = set()

    def walk(node: Any, parent: str | None) -> None:
        if not isinstance(node, dict) or not isinstance(node.get("name"), str) or not node["name"]:
            raise ThesaurusError(f"category missing a name under parent {parent!r}")
        name = node["name"]
        if name in seen_categories:
            raise ThesaurusError(f"a category may have only one parent: {name!r} appears twice")
        seen_categories.add(name)
        categories.append((name, parent))
        for child in node.get("children", ()):
            walk(child, name)
        for term in node.get("terms", ()):
            if not isinstance(term, dict) or not isinstance(term.get("label"), str) or not term["label"]:
                raise ThesaurusError(f"term without a label in category {name!r}")
            if "children" in term or "terms" in term:
                raise ThesaurusError("A term must have a parent category but no subcategory")
            label = term["label"]
            if label in seen_terms:
                raise ThesaurusError(f"duplicate term label {label!r}")
            seen_terms.add(label)
            terms.append((label, name, str(term.get("short", "")), str(term.get("long", ""))))
            for relation in term.get("relations", ()):
                if not isinstance(relation, dict) or not relation.get("type") or not relation.get("target_label"):
                    raise ThesaurusError(f"malformed relation on term {label!r}")
                relations.append((label, str(relation["type"]), str(relation["target_label"])))

    for root in data["categories"]:
        walk(root, None)

    for source_label, _, target_label in relations:
        if target_label not in seen_terms:
            raise ThesaurusError(f"term {source_label!r} relates to unknown term {target_label!r}")
    return categories, terms, relations


def assign_term(store: CatalogStore, entity: str, term_label: str) -> str:
    """Attach a thesaurus term to a data entity (described_by, data → term)."""
    snapshot = store.snapshot()
    if entity not in snapshot.entities:
        raise UnknownIdError("entity", entity)
    term_ids = sorted(
        e.id
        for grouping_id in store.groupings_named("thesaurus_category")
        for group in snapshot.groups.values()
        if group.grouping == grouping_id
        for e in (snapshot.entities[m] for m in group.members)
        if e.attributes.get("label") == term_label
    )
    if not term_ids:
        raise UnknownIdError("term", term_label)
    return store.link_entities(entity, term_ids[0], True, "described_by", {})
