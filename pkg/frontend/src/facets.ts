// Faceted navigation logic.
//
// Selecting several groups inside one grouping means "any of them" (union);
// constraining several groupings means "all of them" (intersection). The
// entity list is therefore the union, over one-group-per-grouping picks, of
// the service's intersect results — the client composes but never filters.

import type { CatalogClient } from './client.js';
import type { GroupRecord } from './types.js';

export interface FacetSelection {
  /** grouping id -> selected group ids (empty/missing set = unconstrained) */
  groups: Map<string, Set<string>>;
  /** also include entities that belong to no group at all */
  showUngrouped: boolean;
}

export function emptySelection(): FacetSelection {
  return { groups: new Map(), showUngrouped: false };
}

export function toggleGroup(selection: FacetSelection, groupingId: string, groupId: string): FacetSelection {
  const groups = new Map(selection.groups);
  const current = new Set(groups.get(groupingId) ?? []);
  if (current.has(groupId)) {
    current.delete(groupId);
  } else {
    current.add(groupId);
  }
  if (current.size === 0) {
    groups.delete(groupingId);
  } else {
    groups.set(groupingId, current);
  }
  return { ...selection, groups };
}

export function isSelected(selection: FacetSelection, groupingId: string, groupId: string): boolean {
  return selection.groups.get(groupingId)?.has(groupId) ?? false;
}

/** One group per constrained grouping, all combinations (cartesian product). */
export function selectionCombinations(selection: FacetSelection): string[][] {
  const constrained = [...selection.groups.entries()]
    .filter(([, picked]) => picked.size > 0)
    .sort(([a], [b]) => (a < b ? -1 : 1));
  let combinations: string[][] = [[]];
  for (const [, picked] of constrained) {
    const next: string[][] = [];
    for (const combination of combinations) {
      for (const groupId of [...picked].sort()) {
        next.push([...combination, groupId]);
      }
    }
    combinations = next;
  }
  return combinations[0]?.length === 0 ? [] : combinations;
}

/**
 * The entity list for a selection: union of intersect() calls per
 * combination; unconstrained selections list every entity.
 */
export async function facetEntities(client: CatalogClient, selection: FacetSelection): Promise<string[]> {
  const combinations = selectionCombinations(selection);
  const result = new Set<string>();
  if (combinations.length === 0) {
    if (!selection.showUngrouped) {
      const all = await client.listEntities();
      return all.map((entity) => entity.id).sort();
    }
  } else {
    for (const combination of combinations) {
      for (const entity of await client.intersect(combination)) {
        result.add(entity);
      }
    }
  }
  if (selection.showUngrouped) {
    for (const entity of await ungroupedEntities(client)) {
      result.add(entity);
    }
  }
  return [...result].sort();
}

async function ungroupedEntities(client: CatalogClient): Promise<string[]> {
  const [entities, groups] = await Promise.all([client.listEntities(), client.listGroups()]);
  const grouped = new Set(groups.flatMap((group: GroupRecord) => group.members));
  return entities.map((entity) => entity.id).filter((id) => !grouped.has(id));
}

/**
 * Badge counts: for every group of a grouping, the size of the entity list
 * if that group were toggled into the current selection.
 */
export async function previewCounts(
  client: CatalogClient,
  selection: FacetSelection,
  groupingId: string,
  groupIds: string[],
): Promise<Map<string, number>> {
  const counts = new Map<string, number>();
  for (const groupId of groupIds) {
    const probed = isSelected(selection, groupingId, groupId)
      ? selection
      : toggleGroup(selection, groupingId, groupId);
    counts.set(groupId, (await facetEntities(client, probed)).length);
  }
  return counts;
}
