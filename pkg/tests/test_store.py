"""Mutations, atomicity, cascades, and the catalog file round trip."""

import json

import pytest

from medal.errors import (
    CatalogFileError,
    DuplicateIdError,
    SameGroupingError,
    UnknownIdError,
    ValidationFailedError,
)
from medal.model import validate
from medal.store import CatalogStore, export_node_per_concept


def test_put_entity_counts_and_ids(store):
    a = store.put_entity({"name": "report.pdf"})
    b = store.put_entity({})
    assert a != b
    snapshot = store.snapshot()
    assert len(snapshot.entities) == 2
    assert snapshot.entities[a].attributes == {"name": "report.pdf"}
    assert snapshot.entities[b].attributes == {}


def test_eight_entities_eight_distinct_ids(store):
    ids = [store.put_entity({}) for _ in range(8)]
    assert len(set(ids)) == 8


def test_define_group_requires_known_members(store):
    grouping = store.define_grouping("zone")
    version = store.snapshot_version
    with pytest.raises(UnknownIdError) as exc:
        store.define_group(grouping, "raw", {"missing"})
    assert exc.value.code == "unknown_entity"
    assert store.snapshot_version == version
    assert store.snapshot().groups == {}


def test_define_group_unknown_grouping(store):
    with pytest.raises(UnknownIdError) as exc:
        store.define_group("nope", "raw")
    assert exc.value.code == "unknown_grouping"


def test_empty_group_is_legal(store):
    grouping = store.define_grouping("zone")
    group = store.define_group(grouping, "empty", ())
    assert store.snapshot().groups[group].members == frozenset()
    assert validate(store.snapshot()).ok


def test_assign_twice_is_noop(store):
    e = store.put_entity({})
    grouping = store.define_grouping("zone")
    group = store.define_group(grouping, "raw")
    first = store.assign_to_group(group, e)
    version = store.snapshot_version
    second = store.assign_to_group(group, e)
    assert first.changed and not second.changed
    assert second.members == (e,)
    assert store.snapshot_version == version  # identical state, version included


def test_unassign_non_member_flagged(store):
    e = store.put_entity({})
    grouping = store.define_grouping("zone")
    group = store.define_group(grouping, "raw")
    result = store.unassign_from_group(group, e)
    assert not result.changed
    assert result.members == ()


def test_undirected_link_canonical_order(store):
    b = store.put_entity({}, id="b")
    a = store.put_entity({}, id="a")
    link = store.link_entities(b, a, False, "similarity", {"score": 0.5})
    record = store.snapshot().entity_links[link]
    assert (record.source, record.target) == ("a", "b")


def test_oriented_link_keeps_direction(store):
    b = store.put_entity({}, id="b")
    a = store.put_entity({}, id="a")
    link = store.link_entities(b, a, True, "joinability")
    record = store.snapshot().entity_links[link]
    assert (record.source, record.target) == ("b", "a")


def test_link_groups_same_grouping_rejected(worked_example):
    store, _ = worked_example
    version = store.snapshot_version
    with pytest.raises(SameGroupingError):
        store.link_groups("x", "raw", "processed")
    assert store.snapshot_version == version


def test_named_relation_may_hold_many_records(worked_example):
    store, _ = worked_example
    records = [l for l in store.snapshot().group_links.values() if l.name == "l1"]
    assert len(records) == 3
    assert {l.target_group for l in records} == {"Q1"}


def test_record_process_creates_outputs_atomically(store):
    n5 = store.put_entity({"name": "n5"})
    process_id, outputs = store.record_process("split", {n5}, [{}, {}, {}])
    snapshot = store.snapshot()
    assert len(outputs) == 3
    assert snapshot.processes[process_id].inputs == frozenset({n5})
    assert snapshot.processes[process_id].outputs == frozenset(outputs)
    assert all(o in snapshot.entities for o in outputs)


def test_record_process_empty_inputs_and_outputs(store):
    pid, outs = store.record_process("ingest", (), [{}])
    assert len(outs) == 1
    pid2, outs2 = store.record_process("export", {outs[0]}, [])
    assert outs2 == []
    assert validate(store.snapshot()).ok


def test_record_process_unknown_input_creates_nothing(store):
    store.put_entity({})
    version = store.snapshot_version
    counts = store.snapshot().counts()
    with pytest.raises(UnknownIdError):
        store.record_process("x", {"missing"}, [{}, {}])
    assert store.snapshot_version == version
    assert store.snapshot().counts() == counts


def test_set_attributes_merge_and_null_delete(store):
    e = store.put_entity({"a": 1, "b": 2})
    store.set_attributes(e, {"b": None, "c": "three"})
    assert store.snapshot().entities[e].attributes == {"a": 1, "c": "three"}


def test_set_attributes_empty_patch_is_noop(store):
    e = store.put_entity({"a": 1})
    version = store.snapshot_version
    store.set_attributes(e, {})
    assert store.snapshot_version == version


def test_set_attributes_works_on_any_record_kind(store):
    grouping = store.define_grouping("zone")
    store.set_attributes(grouping, {"description": "refinement stages"})
    assert store.snapshot().groupings[grouping].attributes["description"] == "refinement stages"


def test_set_attributes_unknown_target(store):
    with pytest.raises(UnknownIdError):
        store.set_attributes("missing", {"a": 1})


def test_delete_entity_cascade_matches_reference_scan(store):
    # One entity in two groups, one link, one process input.
    e = store.put_entity({}, id="victim")
    other = store.put_entity({}, id="other")
    grouping = store.define_grouping("zone")
    g1 = store.define_group(grouping, "raw", {e})
    g2 = store.define_group(grouping, "keep", {e, other})
    link = store.link_entities(e, other, False, "similarity")
    pid, _ = store.record_process("consume", {e}, [])

    # Brute-force reference scan is the oracle for the cascade report.
    snapshot = store.snapshot()
    groups_hit = [g.id for g in snapshot.groups.values() if e in g.members]
    links_hit = [l.id for l in snapshot.entity_links.values() if e in (l.source, l.target)]
    procs_hit = [p.id for p in snapshot.processes.values() if e in (p.inputs | p.outputs)]
    assert (len(groups_hit), len(links_hit), len(procs_hit)) == (2, 1, 1)

    report = store.delete(e)
    edited_groups = [r for r in report.edited if r[0] == "groups"]
    removed_links = [r for r in report.removed if r[0] == "entity_links"]
    edited_procs = [r for r in report.edited if r[0] == "processes"]
    assert sorted(r[1] for r in edited_groups) == sorted(groups_hit)
    assert [r[1] for r in removed_links] == links_hit
    assert [r[1] for r in edited_procs] == procs_hit
    assert ("entities", e) in report.removed

    after = store.snapshot()
    assert validate(after).ok
    assert e not in after.entities
    assert pid in after.processes  # the process survives as history
    assert after.processes[pid].inputs == frozenset()


def test_delete_group_removes_its_group_links(worked_example):
    store, _ = worked_example
    report = store.delete("Jan")
    assert ("groups", "Jan") in report.removed
    assert any(kind == "group_links" for kind, _ in report.removed)
    after = store.snapshot()
    assert validate(after).ok
    assert all(l.source_group != "Jan" for l in after.group_links.values())


def test_delete_grouping_cascades_to_groups(worked_example):
    store, _ = worked_example
    report = store.delete("month")
    removed_kinds = {kind for kind, _ in report.removed}
    assert removed_kinds == {"groupings", "groups", "group_links"}
    after = store.snapshot()
    assert validate(after).ok
    assert "Jan" not in after.groups and "month" not in after.groupings


def test_delete_unknown_id(store):
    with pytest.raises(UnknownIdError):
        store.delete("missing")


def test_explicit_id_never_reused(store):
    e = store.put_entity({}, id="once")
    store.delete(e)
    with pytest.raises(DuplicateIdError):
        store.put_entity({}, id="once")


def test_duplicate_explicit_id_rejected(store):
    store.put_entity({}, id="x")
    with pytest.raises(DuplicateIdError):
        store.define_grouping("zone", id="x")


def test_snapshot_version_counts_effective_mutations(store):
    assert store.snapshot_version == 0
    store.put_entity({})
    grouping = store.define_grouping("zone")
    store.define_group(grouping, "raw")
    assert store.snapshot_version == 3


def test_snapshot_is_isolated_from_later_mutations(store):
    e = store.put_entity({})
    before = store.snapshot()
    store.put_entity({})
    assert len(before.entities) == 1
    assert e in before.entities


def test_save_load_round_trip(worked_example, tmp_path):
    store, _ = worked_example
    store.set_attributes("n1", {"score": 0.25, "flags": [True, None is None], "nested": {"k": "v"}})
    path = tmp_path / "catalog.json"
    store.save(path)
    loaded = CatalogStore.load(path)
    assert loaded.snapshot() == store.snapshot()


def test_load_rejects_dangling_member(worked_example, tmp_path):
    store, _ = worked_example
    path = tmp_path / "catalog.json"
    store.save(path)
    doc = json.loads(path.read_text())
    doc["groups"]["raw"]["members"].append("ghost")
    path.write_text(json.dumps(doc))
    with pytest.raises(ValidationFailedError) as exc:
        CatalogStore.load(path)
    assert any(v.rule == "unknown_entity_in_group" for v in exc.value.report.violations)


def test_load_rejects_parse_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(CatalogFileError) as exc:
        CatalogStore.load(path)
    assert exc.value.code == "parse_error"


def test_load_rejects_format_version_mismatch(worked_example, tmp_path):
    store, _ = worked_example
    path = tmp_path / "catalog.json"
    store.save(path)
    doc = json.loads(path.read_text())
    doc["format_version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(CatalogFileError) as exc:
        CatalogStore.load(path)
    assert exc.value.code == "format_version_mismatch"


def test_transaction_rolls_back_on_error(worked_example):
    store, _ = worked_example
    before = store.snapshot()
    with pytest.raises(RuntimeError):
        with store.transaction():
            store.put_entity({"name": "temp"})
            store.define_grouping("temp")
            raise RuntimeError("abort")
    assert store.snapshot() == before


def test_export_node_per_concept_shape(worked_example):
    store, _ = worked_example
    doc = export_node_per_concept(store.snapshot())
    by_label = {}
    for node in doc["nodes"]:
        by_label.setdefault(node["labels"][0], []).append(node)
    assert len(by_label["PROCESS"]) == 1
    assert len(by_label["ENTITY"]) == 8
    process_in = [e for e in doc["edges"] if e["label"] == "PROCESS_IN"]
    process_out = [e for e in doc["edges"] if e["label"] == "PROCESS_OUT"]
    assert len(process_in) == 1 and process_in[0]["from"] == "n5"
    assert len(process_out) == 3
    # every GROUP node has a GROUPING edge to its grouping node
    group_nodes = {n["id"] for n in by_label["GROUP"]}
    grouping_edges = {e["from"]: e["to"] for e in doc["edges"] if e["label"] == "GROUPING"}
    assert set(grouping_edges) == group_nodes
    grouping_nodes = {n["id"] for n in by_label["GROUPING"]}
    assert set(grouping_edges.values()) <= grouping_nodes
    # membership edges carry the grouping's name as their label
    assert {"label": "zone", "from": "n1", "to": "raw", "attributes": {}} in doc["edges"]


def test_group_node_carries_grouping_name_as_second_label(worked_example):
    store, _ = worked_example
    doc = export_node_per_concept(store.snapshot())
    raw = next(n for n in doc["nodes"] if n["id"] == "raw")
    assert raw["labels"] == ["GROUP", "zone"]
