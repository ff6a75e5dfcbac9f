"""Independent oracles and random generators shared by the test suites.

The oracles deliberately use the dumbest correct algorithms (fixpoint
closure, exhaustive scans) so they stay independent of the query engine's
BFS and of the store's bookkeeping.
"""

import random

from medal.errors import CatalogError
from medal.model import CatalogSnapshot, DataEntity, Process


def closure_oracle(snapshot: CatalogSnapshot, root: str, direction: str) -> set[str]:
    """Transitive closure over the bipartite entity-process relation.

    Repeatedly sweeps every process until nothing changes: if any near-side
    entity is reached, all far-side entities become reached.
    """
    reached = {root}
    changed = True
    while changed:
        changed = False
        for process in snapshot.processes.values():
            near, far = (
                (process.inputs, process.outputs)
                if direction == "downstream"
                else (process.outputs, process.inputs)
            )
            if near & reached and not far <= reached:
                reached |= far
                changed = True
    return reached


def random_lineage_snapshot(rng: random.Random, max_entities: int = 50, max_processes: int = 20) -> CatalogSnapshot:
    """A raw snapshot with arbitrary process I/O sets, cycles included."""
    n = rng.randint(1, max_entities)
    entity_ids = [f"e{i}" for i in range(n)]
    entities = {i: DataEntity(i) for i in entity_ids}
    processes = {}
    for j in range(rng.randint(0, max_processes)):
        inputs = frozenset(rng.sample(entity_ids, k=rng.randint(0, min(4, n))))
        outputs = frozenset(rng.sample(entity_ids, k=rng.randint(0, min(4, n))))
        processes[f"p{j}"] = Process(f"p{j}", "step", inputs, outputs)
    return CatalogSnapshot(entities=entities, processes=processes)


def apply_random_mutation(store, rng: random.Random) -> bool:
    """One random mutation, valid or deliberately broken.

    Asserts the atomicity contract on failure (version and state unchanged)
    and returns whether the mutation succeeded.
    """
    snapshot = store.snapshot()
    entity_ids = sorted(snapshot.entities)
    grouping_ids = sorted(snapshot.groupings)
    group_ids = sorted(snapshot.groups)
    all_ids = entity_ids + grouping_ids + group_ids + sorted(snapshot.entity_links) + sorted(
        snapshot.group_links
    ) + sorted(snapshot.processes)

    def pick(pool, bogus="bogus-id"):
        # one in five references is dangling on purpose
        if pool and rng.random() > 0.2:
            return rng.choice(pool)
        return bogus

    operations = [
        lambda: store.put_entity({"n": rng.randint(0, 9)}),
        lambda: store.define_grouping(f"grouping-{rng.randint(0, 5)}"),
        lambda: store.define_group(
            pick(grouping_ids), f"group-{rng.randint(0, 9)}",
            {pick(entity_ids) for _ in range(rng.randint(0, 2))},
        ),
        lambda: store.assign_to_group(pick(group_ids), pick(entity_ids)),
        lambda: store.unassign_from_group(pick(group_ids), pick(entity_ids)),
        lambda: store.link_entities(
            pick(entity_ids), pick(entity_ids), rng.random() < 0.5, "similarity",
            {"score": rng.random()},
        ),
        lambda: store.link_groups(f"rel-{rng.randint(0, 2)}", pick(group_ids), pick(group_ids)),
        lambda: store.record_process(
            "step", {pick(entity_ids) for _ in range(rng.randint(0, 2))},
            [{"k": i} for i in range(rng.randint(0, 2))],
        ),
        lambda: store.set_attributes(pick(all_ids), {"touched": True, "n": rng.randint(0, 9)}),
        lambda: store.delete(pick(all_ids)),
    ]
    version_before = store.snapshot_version
    state_before = store.snapshot()
    try:
        rng.choice(operations)()
        return True
    except CatalogError:
        assert store.snapshot_version == version_before
        assert store.snapshot() == state_before
        return False
