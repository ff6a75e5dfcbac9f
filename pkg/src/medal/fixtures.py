"""Bundled example catalogs.

``build_worked_example`` populates a store with the small catalog used
throughout the docs and tests: eight entities n1..n8, zone and language
groupings over n1..n4, a month→quarter hierarchy carried by the group-level
relation ``l1``, and one document-splitting process turning n5 into the
fragments n6..n8.

``build_demo`` extends it with enough material to witness every comparison
feature: a loaded thesaurus, a version chain, a keyword grouping, a scored
similarity link, and a raw→processed refinement process.
"""

from __future__ import annotations

from .ingest import assign_term, load_thesaurus_data
from .store import CatalogStore

WORKED_EXAMPLE_ENTITIES = ("n1", "n2", "n3", "n4", "n5", "n6", "n7", "n8")

DEMO_THESAURUS = {
    "categories": [
        {
            "name": "military equipment",
            "children": [
                {
                    "name": "weaponry",
                    "terms": [
                        {
                            "label": "arme défensive",
                            "short": "defensive weapon",
                            "long": "Equipment carried to block blows or projectiles rather than deal them.",
                            "relations": [
                                {"type": "related", "target_label": "arme offensive"},
                                {"type": "related", "target_label": "bouclier"},
                            ],
                        },
                        {
                            "label": "arme offensive",
                            "short": "offensive weapon",
                            "long": "Equipment designed to strike an opponent.",
                        },
                        {
                            "label": "bouclier",
                            "short": "shield",
                            "long": "A hand-held plate of wood or metal covering the body.",
                        },
                    ],
                }
            ],
        }
    ]
}


def build_worked_example(store: CatalogStore) -> dict[str, str]:
    """Populate ``store`` with the worked-example catalog; returns name→id."""
    ids: dict[str, str] = {}
    for name in ("n1", "n2", "n3", "n4", "n5"):
        ids[name] = store.put_entity({"name": name}, id=name)

    ids["zone"] = store.define_grouping("zone", id="zone")
    ids["raw"] = store.define_group("zone", "raw", {"n1", "n3"}, id="raw")
    ids["processed"] = store.define_group("zone", "processed", {"n2", "n4"}, id="processed")

    ids["language"] = store.define_grouping("language", id="language")
    ids["french"] = store.define_group("language", "french", {"n1", "n2", "n3"}, id="french")
    ids["english"] = store.define_group("language", "english", {"n4"}, id="english")

    ids["month"] = store.define_grouping("month", id="month")
    ids["Jan"] = store.define_group("month", "Jan", {"n1", "n2"}, id="Jan")
    ids["Feb"] = store.define_group("month", "Feb", {"n3"}, id="Feb")
    ids["Mar"] = store.define_group("month", "Mar", {"n4"}, id="Mar")

    ids["quarter"] = store.define_grouping("quarter", id="quarter")
    ids["Q1"] = store.define_group("quarter", "Q1", {"n1", "n2", "n3", "n4"}, id="Q1")

    for month in ("Jan", "Feb", "Mar"):
        store.link_groups("l1", month, "Q1", id=f"l1-{month}")

    process_id, fragments = store.record_process(
        "split",
        {"n5"},
        [{"name": name, "index": index} for index, name in enumerate(("n6", "n7", "n8"))],
        {"tool": "splitter"},
        id="split-n5",
        output_ids=["n6", "n7", "n8"],
    )
    ids["split"] = process_id
    for name, entity_id in zip(("n6", "n7", "n8"), fragments):
        ids[name] = entity_id
    return ids


def build_demo(store: CatalogStore) -> dict[str, str]:
    """Worked example plus witnesses for all eight comparison features."""
    ids = build_worked_example(store)

    # Granularity: the split fragments next to their whole document.
    ids["granularity"] = store.define_grouping("granularity", id="granularity")
    ids["document"] = store.define_group("granularity", "document", {"n5"}, id="document")
    ids["fragment"] = store.define_group("granularity", "fragment", {"n6", "n7", "n8"}, id="fragment")

    # Zones with an actual refinement process between them.
    refine_id, refined = store.record_process(
        "refine",
        {"n1"},
        [{"name": "n1-refined", "kind": "bag_of_words"}],
        {"tool": "refiner", "executed_at": "2021-03-01T09:00:00+00:00"},
        id="refine-n1",
    )
    ids["refine"] = refine_id
    ids["n1_refined"] = refined[0]
    store.assign_to_group("processed", refined[0])

    # Versioning: an update process plus a version_of grouping over the chain.
    v1 = store.put_entity({"name": "report.csv", "revision": 1}, id="v1")
    update_id, updated = store.record_process(
        "update",
        {v1},
        [{"name": "report.csv", "revision": 2}],
        {"tool": "editor", "executed_at": "2021-04-01T10:30:00+00:00"},
        id="update-v1",
    )
    ids["v1"] = v1
    ids["v2"] = updated[0]
    ids["update"] = update_id
    ids["version_of"] = store.define_grouping("version_of", id="version_of")
    ids["report_versions"] = store.define_group(
        "version_of", "report.csv", {v1, updated[0]}, id="report-versions"
    )

    # Categorization by keyword.
    ids["keyword"] = store.define_grouping("keyword", id="keyword")
    ids["kw_finance"] = store.define_group("keyword", "finance", {"n1", v1}, id="kw-finance")

    # A scored similarity link.
    ids["sim_link"] = store.link_entities("n6", "n7", False, "similarity", {"score": 0.87}, id="sim-n6-n7")

    # Semantic enrichment: thesaurus terms plus a described_by assignment.
    report = load_thesaurus_data(DEMO_THESAURUS, store)
    ids.update({f"term:{label}": entity_id for label, entity_id in report.terms.items()})
    ids["described_by"] = assign_term(store, "n1", "arme défensive")
    return ids
