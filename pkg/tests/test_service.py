"""HTTP API behavior: CRUD, queries, errors, persistence, read-only mode."""

import pytest
from fastapi.testclient import TestClient

from medal import fixtures
from medal.service import create_app
from medal.store import CatalogStore


@pytest.fixture
def client(worked_example):
    store, _ = worked_example
    return TestClient(create_app(store))


@pytest.fixture
def persisted(tmp_path):
    path = tmp_path / "catalog.json"
    store = CatalogStore()
    fixtures.build_worked_example(store)
    store.save(path)
    return path


def test_get_entity(client):
    response = client.get("/api/v1/entities/n1")
    assert response.status_code == 200
    assert response.json() == {"id": "n1", "attributes": {"name": "n1"}}


def test_get_entity_unknown_is_404(client):
    response = client.get("/api/v1/entities/ghost")
    assert response.status_code == 404
    body = response.json()
    assert body["code"] == "unknown_entity"
    assert body["offending_ids"] == ["ghost"]
    assert body["http_status"] == 404


def test_entity_crud_roundtrip(client):
    created = client.post("/api/v1/entities", json={"attributes": {"name": "fresh"}})
    assert created.status_code == 201
    entity_id = created.json()["id"]

    patched = client.patch(
        f"/api/v1/entities/{entity_id}/attributes", json={"description": "raw csv", "name": None}
    )
    assert patched.status_code == 200
    assert patched.json()["attributes"] == {"description": "raw csv"}

    deleted = client.delete(f"/api/v1/entities/{entity_id}")
    assert deleted.status_code == 200
    assert ["entities", entity_id] in deleted.json()["removed"]
    assert client.get(f"/api/v1/entities/{entity_id}").status_code == 404


def test_process_with_unknown_input_is_422_and_atomic(client):
    version = client.get("/api/v1/snapshot/meta").json()["snapshot_version"]
    response = client.post(
        "/api/v1/processes", json={"name": "x", "inputs": ["ghost"], "output_specs": [{}]}
    )
    assert response.status_code == 422
    assert response.json()["code"] == "unknown_entity"
    assert client.get("/api/v1/snapshot/meta").json()["snapshot_version"] == version


def test_group_link_same_grouping_is_422(client):
    response = client.post(
        "/api/v1/links/groups", json={"name": "x", "source_group": "raw", "target_group": "processed"}
    )
    assert response.status_code == 422
    assert response.json()["code"] == "group_link_same_grouping"


def test_lineage_endpoint(client):
    response = client.get("/api/v1/lineage/n5?direction=downstream")
    body = response.json()
    assert body["nodes"] == ["n5", "n6", "n7", "n8"]
    assert len(body["edges"]) == 3
    assert body["depth_of"]["n6"] == 1


def test_intersect_endpoint(client):
    response = client.get("/api/v1/query/intersect?groups=raw,french")
    assert response.content == b'["n1","n3"]'


def test_neighbors_and_rollup_endpoints(client):
    assert client.get("/api/v1/query/neighbors/n1").json() == []
    rollup = client.get("/api/v1/query/rollup?relation=l1&target=Q1").json()
    assert rollup == {"holds": True, "missing": [], "extra": []}


def test_invalid_direction_is_422(client):
    response = client.get("/api/v1/lineage/n5?direction=sideways")
    assert response.status_code == 422
    assert response.json()["code"] == "invalid_argument"


def test_group_membership_endpoints(client):
    put = client.put("/api/v1/groups/english/members/n1")
    assert put.status_code == 200
    assert put.json()["changed"] is True
    again = client.put("/api/v1/groups/english/members/n1")
    assert again.json()["changed"] is False
    off = client.delete("/api/v1/groups/english/members/n1")
    assert off.json()["changed"] is True
    assert client.put("/api/v1/groups/missing/members/n1").status_code == 404


def test_reports_endpoints(client):
    features = client.get("/api/v1/reports/features").json()
    assert features["totals"]["goldMEDAL"] == "8/8"
    mapping = client.get("/api/v1/reports/mapping/handle").json()
    assert mapping["rows"][3] == {"concept": "Process", "foreign": []}
    assert client.get("/api/v1/reports/mapping/unknown").status_code == 404


def test_export_endpoints(client):
    native = client.get("/api/v1/export?shape=native").json()
    assert native["format_version"] == 1
    reified = client.get("/api/v1/export?shape=node-per-concept").json()
    labels = [n["labels"][0] for n in reified["nodes"]]
    assert labels.count("PROCESS") == 1
    assert client.get("/api/v1/export?shape=bogus").status_code == 422


def test_snapshot_meta_counts(client):
    meta = client.get("/api/v1/snapshot/meta").json()
    assert meta["counts"] == {
        "entities": 8,
        "groupings": 4,
        "groups": 8,
        "entity_links": 0,
        "group_links": 3,
        "processes": 1,
    }


def test_pagination_defaults_and_bounds(client):
    page = client.get("/api/v1/entities").json()
    assert page["total"] == 8 and page["limit"] == 100 and page["offset"] == 0
    assert [item["id"] for item in page["items"]] == sorted(item["id"] for item in page["items"])
    window = client.get("/api/v1/entities?limit=3&offset=6").json()
    assert [item["id"] for item in window["items"]] == ["n7", "n8"]


def test_mutations_are_persisted_across_restart(persisted):
    client = TestClient(create_app(catalog_path=persisted))
    created = client.post("/api/v1/entities", json={"attributes": {"name": "survivor"}})
    entity_id = created.json()["id"]
    version = client.get("/api/v1/snapshot/meta").json()["snapshot_version"]

    # kill-and-restart: a fresh app over the same file sees an equal snapshot
    reopened = TestClient(create_app(catalog_path=persisted))
    assert reopened.get("/api/v1/snapshot/meta").json()["snapshot_version"] == version
    assert reopened.get(f"/api/v1/entities/{entity_id}").json()["attributes"] == {"name": "survivor"}


def test_read_only_rejects_mutations(persisted):
    client = TestClient(create_app(catalog_path=persisted, read_only=True))
    response = client.post("/api/v1/entities", json={"attributes": {}})
    assert response.status_code == 403
    assert response.json()["code"] == "read_only"
    assert client.get("/api/v1/entities/n1").status_code == 200
    assert client.patch("/api/v1/entities/n1/attributes", json={"x": 1}).status_code == 403
    assert client.delete("/api/v1/entities/n1").status_code == 403


def test_fresh_catalog_when_path_absent(tmp_path):
    client = TestClient(create_app(catalog_path=tmp_path / "new.json"))
    meta = client.get("/api/v1/snapshot/meta").json()
    assert meta["snapshot_version"] == 0
    client.post("/api/v1/entities", json={"attributes": {}})
    assert (tmp_path / "new.json").exists()
