"""HTTP/JSON API over one catalog.

One service process owns one catalog file. Mutations are serialized through
the store's writer lock and the file is rewritten atomically after each
successful mutation; reads are served from the immutable current snapshot
and never block each other. With ``read_only`` set, every mutation is
rejected with 403 before touching the store.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import views
from .errors import CatalogError, ReadOnlyError, UnknownIdError
from .interop import ForeignModelKind
from .store import CatalogStore, record_json
from .util import canonical_json

DEFAULT_LIMIT = 100


class EntityBody(BaseModel):
    attributes: dict[str, Any] = Field(default_factory=dict)


class GroupingBody(BaseModel):
    name: str
    attributes: dict[str, Any] = Field(default_factory=dict)


class GroupBody(BaseModel):
    name: str
    members: list[str] = Field(default_factory=list)
    attributes: dict[str, Any] = Field(default_factory=dict)


class EntityLinkBody(BaseModel):
    source: str
    target: str
    kind: str
    oriented: bool = False
    attributes: dict[str, Any] = Field(default_factory=dict)


class GroupLinkBody(BaseModel):
    name: str
    source_group: str
    target_group: str
    attributes: dict[str, Any] = Field(default_factory=dict)


class ProcessBody(BaseModel):
    name: str
    inputs: list[str] = Field(default_factory=list)
    output_specs: list[dict[str, Any]] = Field(default_factory=list)
    attributes: dict[str, Any] = Field(default_factory=dict)


def _json(payload: Any, status_code: int = 200) -> Response:
    return Response(content=canonical_json(payload), status_code=status_code, media_type="application/json")


def _error_response(exc: CatalogError, status: int | None = None) -> JSONResponse:
    status = status or exc.http_status
    return JSONResponse(
        status_code=status,
        content={
            "http_status": status,
            "code": exc.code,
            "message": exc.message,
            "offending_ids": list(exc.offending_ids),
        },
    )


def create_app(
    store: CatalogStore | None = None,
    *,
    catalog_path: str | Path | None = None,
    read_only: bool = False,
) -> FastAPI:
    if store is None:
        path = Path(catalog_path) if catalog_path else None
        store = CatalogStore.load(path) if path and path.exists() else CatalogStore()

    app = FastAPI(title="medal catalog service", version="1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store
    app.state.catalog_path = Path(catalog_path) if catalog_path else None
    app.state.read_only = read_only

    @app.exception_handler(CatalogError)
    async def catalog_error_handler(request: Request, exc: CatalogError):
        return _error_response(exc, getattr(exc, "http_status_override", None))

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        error = CatalogError(str(exc))
        error.code = "invalid_argument"
        return _error_response(error, 422)

    @app.exception_handler(RequestValidationError)
    async def body_error_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        error = CatalogError(f"invalid request: {where}: {first.get('msg', 'malformed')}")
        error.code = "invalid_body"
        return _error_response(error, 422)

    def mutate(fn):
        """Run one mutation: read-only guard, body-level unknown ids map to 422,
        and the catalog file is rewritten on success."""
        if read_only:
            raise ReadOnlyError()
        try:
            result = fn()
        except UnknownIdError as exc:
            exc.http_status_override = 422
            raise
        if app.state.catalog_path is not None:
            store.save(app.state.catalog_path)
        return result

    def paginate(records: dict, limit: int, offset: int) -> dict[str, Any]:
        ordered = [record_json(records[key]) for key in sorted(records)]
        return {
            "items": ordered[offset : offset + limit],
            "total": len(ordered),
            "limit": limit,
            "offset": offset,
        }

    # -- entities ---------------------------------------------------------

    @app.post("/api/v1/entities", status_code=201)
    def post_entity(body: EntityBody):
        entity_id = mutate(lambda: store.put_entity(body.attributes))
        return _json({"id": entity_id}, 201)

    @app.get("/api/v1/entities")
    def list_entities(limit: int = DEFAULT_LIMIT, offset: int = 0):
        return _json(paginate(store.snapshot().entities, limit, offset))

    @app.get("/api/v1/entities/{entity_id}")
    def get_entity(entity_id: str):
        snapshot = store.snapshot()
        if entity_id not in snapshot.entities:
            raise UnknownIdError("entity", entity_id)
        return _json(record_json(snapshot.entities[entity_id]))

    @app.patch("/api/v1/entities/{entity_id}/attributes")
    def patch_entity(entity_id: str, patch: dict[str, Any]):
        if entity_id not in store.snapshot().entities:
            raise UnknownIdError("entity", entity_id)
        record = mutate(lambda: store.set_attributes(entity_id, patch))
        return _json(record_json(record))

    @app.delete("/api/v1/entities/{entity_id}")
    def delete_entity(entity_id: str):
        if entity_id not in store.snapshot().entities:
            raise UnknownIdError("entity", entity_id)
        report = mutate(lambda: store.delete(entity_id))
        return _json(
            {
                "removed": [list(r) for r in report.removed],
                "edited": [list(e) for e in report.edited],
            }
        )

    # -- groupings and groups ----------------------------------------------

    @app.post("/api/v1/groupings", status_code=201)
    def post_grouping(body: GroupingBody):
        grouping_id = mutate(lambda: store.define_grouping(body.name, body.attributes))
        return _json({"id": grouping_id}, 201)

    @app.get("/api/v1/groupings")
    def list_groupings(limit: int = DEFAULT_LIMIT, offset: int = 0):
        return _json(paginate(store.snapshot().groupings, limit, offset))

    @app.post("/api/v1/groupings/{grouping_id}/groups", status_code=201)
    def post_group(grouping_id: str, body: GroupBody):
        if grouping_id not in store.snapshot().groupings:
            raise UnknownIdError("grouping", grouping_id)
        group_id = mutate(
            lambda: store.define_group(grouping_id, body.name, body.members, body.attributes)
        )
        return _json({"id": group_id}, 201)

    @app.get("/api/v1/groups")
    def list_groups(limit: int = DEFAULT_LIMIT, offset: int = 0):
        return _json(paginate(store.snapshot().groups, limit, offset))

    @app.get("/api/v1/groups/{group_id}")
    def get_group(group_id: str):
        snapshot = store.snapshot()
        if group_id not in snapshot.groups:
            raise UnknownIdError("group", group_id)
        return _json(record_json(snapshot.groups[group_id]))

    @app.put("/api/v1/groups/{group_id}/members/{entity_id}")
    def put_member(group_id: str, entity_id: str):
        snapshot = store.snapshot()
        if group_id not in snapshot.groups:
            raise UnknownIdError("group", group_id)
        if entity_id not in snapshot.entities:
            raise UnknownIdError("entity", entity_id)
        change = mutate(lambda: store.assign_to_group(group_id, entity_id))
        return _json({"group": group_id, "changed": change.changed, "members": list(change.members)})

    @app.delete("/api/v1/groups/{group_id}/members/{entity_id}")
    def delete_member(group_id: str, entity_id: str):
        snapshot = store.snapshot()
        if group_id not in snapshot.groups:
            raise UnknownIdError("group", group_id)
        if entity_id not in snapshot.entities:
            raise UnknownIdError("entity", entity_id)
        change = mutate(lambda: store.unassign_from_group(group_id, entity_id))
        return _json({"group": group_id, "changed": change.changed, "members": list(change.members)})

    # -- links and processes -------------------------------------------------

    @app.post("/api/v1/links/entities", status_code=201)
    def post_entity_link(body: EntityLinkBody):
        link_id = mutate(
            lambda: store.link_entities(body.source, body.target, body.oriented, body.kind, body.attributes)
        )
        return _json({"id": link_id}, 201)

    @app.get("/api/v1/links/entities")
    def list_entity_links(limit: int = DEFAULT_LIMIT, offset: int = 0):
        return _json(paginate(store.snapshot().entity_links, limit, offset))

    @app.post("/api/v1/links/groups", status_code=201)
    def post_group_link(body: GroupLinkBody):
        link_id = mutate(
            lambda: store.link_groups(body.name, body.source_group, body.target_group, body.attributes)
        )
        return _json({"id": link_id}, 201)

    @app.get("/api/v1/links/groups")
    def list_group_links(limit: int = DEFAULT_LIMIT, offset: int = 0):
        return _json(paginate(store.snapshot().group_links, limit, offset))

    @app.post("/api/v1/processes", status_code=201)
    def post_process(body: ProcessBody):
        process_id, outputs = mutate(
            lambda: store.record_process(body.name, body.inputs, body.output_specs, body.attributes)
        )
        return _json({"id": process_id, "outputs": outputs}, 201)

    @app.get("/api/v1/processes")
    def list_processes(limit: int = DEFAULT_LIMIT, offset: int = 0):
        return _json(paginate(store.snapshot().processes, limit, offset))

    # -- queries ---------------------------------------------------------------

    @app.get("/api/v1/query/intersect")
    def query_intersect(groups: str):
        ids = [g for g in groups.split(",") if g]
        return _json(views.intersect_payload(store.snapshot(), ids))

    @app.get("/api/v1/lineage/{entity_id}")
    def query_lineage(entity_id: str, direction: str = "downstream", max_depth: int | None = None):
        return _json(views.lineage_payload(store.snapshot(), entity_id, direction, max_depth))

    @app.get("/api/v1/query/neighbors/{entity_id}")
    def query_neighbors(entity_id: str, kind: str | None = None, min_score: float | None = None):
        return _json(views.neighbors_payload(store.snapshot(), entity_id, kind, min_score))

    @app.get("/api/v1/query/rollup")
    def query_rollup(relation: str, target: str):
        return _json(views.rollup_payload(store.snapshot(), relation, target))

    # -- reports, export, meta ---------------------------------------------------

    @app.get("/api/v1/reports/features")
    def report_features():
        return _json(views.features_payload())

    @app.get("/api/v1/reports/mapping/{kind}")
    def report_mapping(kind: str):
        try:
            model_kind = ForeignModelKind(kind)
        except ValueError:
            raise UnknownIdError("model_kind", kind) from None
        return _json(views.mapping_payload(model_kind))

    @app.get("/api/v1/export")
    def export(shape: str = "native"):
        return _json(views.export_payload(store.snapshot(), shape))

    @app.get("/api/v1/snapshot/meta")
    def snapshot_meta():
        return _json(views.meta_payload(store.snapshot()))

    return app


def serve(
    catalog_path: str | Path | None,
    bind_address: str = "127.0.0.1:8400",
    read_only: bool = False,
) -> None:
    """Run the service with uvicorn until interrupted."""
    import uvicorn

    host, _, port = bind_address.partition(":")
    app = create_app(catalog_path=catalog_path, read_only=read_only)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8400), log_level="info")
