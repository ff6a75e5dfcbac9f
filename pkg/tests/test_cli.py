"""Command line behavior, including byte parity with the HTTP API."""

import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from medal import fixtures
from medal.cli import cli
from medal.service import create_app
from medal.store import CatalogStore


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def catalog(tmp_path):
    path = tmp_path / "catalog.json"
    store = CatalogStore()
    fixtures.build_worked_example(store)
    store.save(path)
    return path


def invoke(runner, catalog, *args):
    return runner.invoke(cli, ["--catalog", str(catalog), *args])


def test_init_writes_fixture(runner, tmp_path):
    path = tmp_path / "new.json"
    result = invoke(runner, path, "init", "--fixture", "worked-example")
    assert result.exit_code == 0, result.output
    assert path.exists()
    assert "8 entities" in result.output


def test_init_refuses_overwrite(runner, catalog):
    result = invoke(runner, catalog, "init")
    assert result.exit_code == 2


def test_validate_clean_catalog(runner, catalog):
    result = invoke(runner, catalog, "validate")
    assert result.exit_code == 0
    assert "0 violations" in result.output


def test_validate_dirty_catalog_exits_1(runner, catalog):
    doc = json.loads(catalog.read_text())
    doc["groups"]["raw"]["members"].append("ghost")
    dirty = catalog.with_name("dirty.json")
    dirty.write_text(json.dumps(doc))
    result = invoke(runner, dirty, "validate")
    assert result.exit_code == 1
    assert "unknown_entity_in_group" in result.output


def test_query_intersect_json_bytes(runner, catalog):
    result = invoke(runner, catalog, "query", "intersect", "raw", "french", "--format", "json")
    assert result.exit_code == 0
    assert result.output == '["n1","n3"]\n'


def test_query_intersect_resolves_names_and_ids(runner, catalog):
    by_name = invoke(runner, catalog, "query", "intersect", "raw", "french", "--format", "json")
    by_id = invoke(runner, catalog, "query", "intersect", "raw", "french", "--format", "json")
    assert by_name.output == by_id.output


def test_query_lineage_table(runner, catalog):
    result = invoke(runner, catalog, "query", "lineage", "n5")
    assert result.exit_code == 0
    for node in ("n5", "n6", "n7", "n8"):
        assert node in result.output


def test_query_rollup(runner, catalog):
    result = invoke(runner, catalog, "query", "rollup", "l1", "Q1")
    assert result.exit_code == 0
    assert "holds: true" in result.output


def test_report_features_table_ends_with_total(runner, tmp_path):
    result = invoke(runner, tmp_path / "none.json", "report", "features")
    assert result.exit_code == 0
    assert result.output.strip().endswith("goldMEDAL 8/8")


def test_report_features_json(runner, tmp_path):
    result = invoke(runner, tmp_path / "none.json", "report", "features", "--format", "json")
    payload = json.loads(result.output)
    assert payload["totals"]["GEMMS"] == "4/8"
    assert len(payload["features"]) == 8


def test_report_mapping_tables(runner, tmp_path):
    result = invoke(runner, tmp_path / "none.json", "report", "mapping", "--kind", "ravat-zhao")
    assert result.exit_code == 0
    assert "Data entity" in result.output
    assert "User, Access" in result.output
    handle = invoke(runner, tmp_path / "none.json", "report", "mapping", "--kind", "handle")
    assert "---" in handle.output  # HANDLE has no process counterpart


def test_unknown_subcommand_exits_2(runner, tmp_path):
    result = invoke(runner, tmp_path / "none.json", "frobnicate")
    assert result.exit_code == 2


def test_unknown_entity_query_exits_nonzero(runner, catalog):
    result = invoke(runner, catalog, "query", "lineage", "ghost")
    assert result.exit_code != 0


def test_ingest_and_query(runner, tmp_path, corpus_dir):
    path = tmp_path / "catalog.json"
    result = invoke(runner, path, "ingest", str(corpus_dir), "--group-by", "extension")
    assert result.exit_code == 0, result.output
    assert "ingested 10 entities" in result.output
    result = invoke(runner, path, "query", "intersect", "csv", "--format", "json")
    assert len(json.loads(result.output)) == 3


def test_ingest_with_similarity_threshold(runner, tmp_path, corpus_dir):
    path = tmp_path / "catalog.json"
    result = invoke(runner, path, "ingest", str(corpus_dir), "--similarity-threshold", "0.5")
    assert result.exit_code == 0, result.output
    assert "similarity links" in result.output


def test_thesaurus_load(runner, tmp_path, data_dir):
    path = tmp_path / "catalog.json"
    result = invoke(runner, path, "thesaurus", "load", str(data_dir / "thesaurus_valid.json"))
    assert result.exit_code == 0, result.output
    assert "3 categories" in result.output or "categories" in result.output
    check = invoke(runner, path, "validate")
    assert check.exit_code == 0


def test_thesaurus_rejects_invalid(runner, tmp_path, data_dir):
    path = tmp_path / "catalog.json"
    result = invoke(runner, path, "thesaurus", "load", str(data_dir / "thesaurus_two_parent.json"))
    assert result.exit_code == 1


def test_import_foreign_document(runner, tmp_path, data_dir):
    path = tmp_path / "catalog.json"
    result = invoke(runner, path, "import", "--kind", "medal", str(data_dir / "foreign_medal.json"))
    assert result.exit_code == 0, result.output
    assert "imported:" in result.output
    check = invoke(runner, path, "validate")
    assert check.exit_code == 0


def test_export_shapes(runner, catalog):
    native = invoke(runner, catalog, "export")
    assert json.loads(native.output)["format_version"] == 1
    reified = invoke(runner, catalog, "export", "--shape", "node-per-concept")
    doc = json.loads(reified.output)
    assert {"id", "labels", "attributes"} <= set(doc["nodes"][0])


@pytest.mark.parametrize(
    "cli_args, url",
    [
        (("query", "intersect", "raw", "french"), "/api/v1/query/intersect?groups=raw,french"),
        (("query", "lineage", "n5", "--direction", "downstream"), "/api/v1/lineage/n5?direction=downstream"),
        (("query", "neighbors", "n6"), "/api/v1/query/neighbors/n6"),
        (("query", "rollup", "l1", "Q1"), "/api/v1/query/rollup?relation=l1&target=Q1"),
        (("export", "--shape", "node-per-concept"), "/api/v1/export?shape=node-per-concept"),
        (("report", "features"), "/api/v1/reports/features"),
    ],
)
def test_cli_api_parity_byte_for_byte(runner, catalog, cli_args, url):
    if cli_args[0] == "report":
        cli_result = invoke(runner, catalog, *cli_args, "--format", "json")
    elif cli_args[0] == "export":
        cli_result = invoke(runner, catalog, *cli_args)
    else:
        cli_result = invoke(runner, catalog, *cli_args, "--format", "json")
    assert cli_result.exit_code == 0, cli_result.output
    client = TestClient(create_app(catalog_path=catalog))
    response = client.get(url)
    assert response.status_code == 200
    assert response.content.decode("utf-8") + "\n" == cli_result.output
