"""Command line for the catalog engine.

Exit codes: 0 on success, 1 when the command surfaces validation findings
or a catalog error, 2 for usage errors. ``--format json`` renders the same
canonical JSON the HTTP API serves.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import fixtures, ingest, views
from .errors import CatalogError
from .interop import ForeignModelKind, foreign_document_from_json, import_foreign
from .model import CatalogSnapshot, validate
from .store import CatalogStore, doc_to_snapshot
from .util import canonical_json

KIND_CHOICES = [k.value for k in ForeignModelKind]


def _load_store(path: Path) -> CatalogStore:
    return CatalogStore.load(path) if path.exists() else CatalogStore()


def _resolve_group(store: CatalogStore, token: str) -> str:
    snapshot = store.snapshot()
    if token in snapshot.groups:
        return token
    named = store.groups_named(token)
    if len(named) == 1:
        return named[0]
    if len(named) > 1:
        raise click.UsageError(f"group name {token!r} is ambiguous: {', '.join(named)}")
    raise click.UsageError(f"no group with id or name {token!r}")


@click.group()
@click.option(
    "--catalog",
    type=click.Path(path_type=Path),
    default=Path("catalog.json"),
    envvar="MEDAL_CATALOG",
    show_default=True,
    help="Catalog file the command operates on.",
)
@click.pass_context
def cli(ctx: click.Context, catalog: Path):
    """Metadata catalog for data lakes: entities, groupings, links, processes."""
    ctx.obj = catalog


@cli.command()
@click.option("--fixture", type=click.Choice(["worked-example", "demo"]), default=None)
@click.option("--force", is_flag=True, help="Overwrite an existing catalog file.")
@click.pass_obj
def init(catalog: Path, fixture: str | None, force: bool):
    """Create a catalog file, optionally pre-filled with a bundled fixture."""
    if catalog.exists() and not force:
        raise click.UsageError(f"{catalog} already exists (use --force to overwrite)")
    store = CatalogStore()
    if fixture == "worked-example":
        fixtures.build_worked_example(store)
    elif fixture == "demo":
        fixtures.build_demo(store)
    store.save(catalog)
    counts = store.snapshot().counts()
    click.echo(f"wrote {catalog}: " + ", ".join(f"{v} {k}" for k, v in counts.items()))


@cli.command("validate")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.pass_obj
def validate_cmd(catalog: Path, fmt: str):
    """Check every invariant; exit 1 if violations are found."""
    # Parse without the load-time validation gate: this command exists to
    # report what is wrong with a catalog file, not to refuse it.
    if catalog.exists():
        snapshot = doc_to_snapshot(json.loads(catalog.read_text(encoding="utf-8")))
    else:
        snapshot = CatalogSnapshot()
    report = validate(snapshot)
    if fmt == "json":
        click.echo(canonical_json(views.validation_payload(report)))
    else:
        click.echo(f"{len(report.violations)} violations")
        for violation in report.violations:
            click.echo(f"  {violation.rule}: {violation.record_id} {violation.detail}")
        for warning in report.warnings:
            click.echo(f"  warning {warning.rule}: {warning.record_id} {warning.detail}")
    if report.violations:
        sys.exit(1)


@cli.command("ingest")
@click.argument("directory", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--zone", default="raw", show_default=True)
@click.option(
    "--group-by",
    "group_by",
    multiple=True,
    type=click.Choice(["extension", "language", "mime"]),
    help="Automatic grouping rules (repeatable).",
)
@click.option("--similarity-threshold", type=float, default=None)
@click.pass_obj
def ingest_cmd(catalog: Path, directory: Path, zone: str, group_by: tuple[str, ...], similarity_threshold):
    """Scan a directory into the catalog; optionally refine and link documents."""
    grouping_name = {"extension": "format", "language": "language", "mime": "mime"}
    rules = tuple(ingest.GroupingRule(grouping_name[rule], rule) for rule in group_by)
    manifest = ingest.IngestManifest(
        source_path=directory,
        zone=zone,
        grouping_rules=rules,
        similarity_threshold=similarity_threshold,
    )
    store = _load_store(catalog)
    report = ingest.scan_source(manifest, store)
    click.echo(f"ingested {len(report.entities)} entities (process {report.process})")
    if similarity_threshold is not None:
        refine_process = ingest.refine_documents(report.entities, store)
        refined = sorted(store.snapshot().processes[refine_process].outputs)
        links = ingest.compute_similarity_links(refined, similarity_threshold, store)
        click.echo(f"refined {len(refined)} documents, {len(links)} similarity links")
    for warning in report.warnings:
        click.echo(f"warning: {warning}", err=True)
    store.save(catalog)


@cli.group()
def thesaurus():
    """Thesaurus loading."""


@thesaurus.command("load")
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.pass_obj
def thesaurus_load(catalog: Path, file: Path):
    """Load a thesaurus JSON file of categories and terms."""
    store = _load_store(catalog)
    report = ingest.load_thesaurus(file, store)
    store.save(catalog)
    click.echo(f"loaded {len(report.categories)} categories, {len(report.terms)} terms")


@cli.command("import")
@click.option("--kind", type=click.Choice(KIND_CHOICES), required=True)
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.pass_obj
def import_cmd(catalog: Path, kind: str, file: Path):
    """Import metadata expressed in a foreign model vocabulary."""
    data = json.loads(file.read_text(encoding="utf-8"))
    doc = foreign_document_from_json({"kind": kind, **data} if "kind" not in data else data)
    if doc.kind != ForeignModelKind(kind):
        raise click.UsageError(f"document declares kind {doc.kind.value!r}, not {kind!r}")
    store = _load_store(catalog)
    report = import_foreign(doc, store)
    store.save(catalog)
    created = ", ".join(f"{len(v)} {k}" for k, v in report.created.items() if v) or "nothing"
    click.echo(f"imported: {created}")
    for warning in report.warnings:
        click.echo(f"warning: {warning}", err=True)


@cli.group()
def report():
    """Comparison reports."""


@report.command("features")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
def report_features(fmt: str):
    """The eight-feature coverage matrix over all compared models."""
    payload = views.features_payload()
    if fmt == "json":
        click.echo(canonical_json(payload))
        return
    features = payload["features"]
    models = list(payload["support"])
    width = max(len(f) for f in features + ["Features"])
    header = "Features".ljust(width) + "  " + "  ".join(m.center(len(m)) for m in models)
    click.echo(header)
    for index, feature in enumerate(features):
        marks = []
        for model in models:
            mark = "x" if payload["support"][model][index] else "-"
            marks.append(mark.center(len(model)))
        click.echo(feature.ljust(width) + "  " + "  ".join(marks))
    totals = ", ".join(f"{model} {payload['totals'][model]}" for model in models)
    click.echo("Total: " + totals)


@report.command("mapping")
@click.option("--kind", type=click.Choice(KIND_CHOICES), required=True)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
def report_mapping(kind: str, fmt: str):
    """Concept mapping between the catalog model and one foreign model."""
    payload = views.mapping_payload(ForeignModelKind(kind))
    if fmt == "json":
        click.echo(canonical_json(payload))
        return
    width = max(len(row["concept"]) for row in payload["rows"])
    for row in payload["rows"]:
        foreign = ", ".join(row["foreign"]) if row["foreign"] else "---"
        click.echo(f"{row['concept'].ljust(width)}  {foreign}")
    if payload["unmapped_foreign"]:
        click.echo(f"{'---'.ljust(width)}  " + ", ".join(payload["unmapped_foreign"]))


@cli.group()
def query():
    """Read-only navigation."""


@query.command("intersect")
@click.argument("groups", nargs=-1, required=True)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.pass_obj
def query_intersect(catalog: Path, groups: tuple[str, ...], fmt: str):
    """Entities common to all given groups (ids or unique group names)."""
    store = _load_store(catalog)
    ids = [_resolve_group(store, token) for token in groups]
    payload = views.intersect_payload(store.snapshot(), ids)
    if fmt == "json":
        click.echo(canonical_json(payload))
    else:
        for entity_id in payload:
            click.echo(entity_id)


@query.command("lineage")
@click.argument("entity")
@click.option("--direction", type=click.Choice(["downstream", "upstream"]), default="downstream")
@click.option("--max-depth", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.pass_obj
def query_lineage(catalog: Path, entity: str, direction: str, max_depth, fmt: str):
    """Chain of processes reachable from one entity."""
    store = _load_store(catalog)
    payload = views.lineage_payload(store.snapshot(), entity, direction, max_depth)
    if fmt == "json":
        click.echo(canonical_json(payload))
        return
    for node in payload["nodes"]:
        click.echo(f"{payload['depth_of'][node]}  {node}")
    for edge in payload["edges"]:
        click.echo(f"   {edge['from']} -> {edge['to']}  (process {edge['process']})")


@query.command("neighbors")
@click.argument("entity")
@click.option("--kind", default=None)
@click.option("--min-score", type=float, default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.pass_obj
def query_neighbors(catalog: Path, entity: str, kind, min_score, fmt: str):
    """Linked entities, best scores first."""
    store = _load_store(catalog)
    payload = views.neighbors_payload(store.snapshot(), entity, kind, min_score)
    if fmt == "json":
        click.echo(canonical_json(payload))
        return
    for item in payload:
        link = item["link"]
        score = link["attributes"].get("score", "-")
        click.echo(f"{item['other']}  kind={link['kind']}  score={score}  link={link['id']}")


@query.command("rollup")
@click.argument("relation")
@click.argument("target")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.pass_obj
def query_rollup(catalog: Path, relation: str, target: str, fmt: str):
    """Does the target group equal the union of its inverse-linked sources?"""
    store = _load_store(catalog)
    payload = views.rollup_payload(store.snapshot(), relation, _resolve_group(store, target))
    if fmt == "json":
        click.echo(canonical_json(payload))
        return
    click.echo(f"holds: {str(payload['holds']).lower()}")
    if payload["missing"]:
        click.echo("missing: " + ", ".join(payload["missing"]))
    if payload["extra"]:
        click.echo("extra: " + ", ".join(payload["extra"]))


@cli.command("export")
@click.option("--shape", type=click.Choice(["native", "node-per-concept"]), default="native")
@click.pass_obj
def export_cmd(catalog: Path, shape: str):
    """Write the catalog to stdout, natively or reified node-per-concept."""
    store = _load_store(catalog)
    click.echo(canonical_json(views.export_payload(store.snapshot(), shape)))


@cli.command("serve")
@click.option("--bind", default="127.0.0.1:8400", show_default=True)
@click.option("--read-only", is_flag=True)
@click.pass_obj
def serve_cmd(catalog: Path, bind: str, read_only: bool):
    """Run the HTTP API over this catalog."""
    from .service import serve

    serve(catalog, bind, read_only)


def main() -> None:
    # click's standalone mode already maps usage errors to exit code 2;
    # catalog failures surface as exit code 1 with a one-line message.
    try:
        cli.main()
    except CatalogError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(1)
    except json.JSONDecodeError as exc:
        click.echo(f"error: invalid JSON input: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
