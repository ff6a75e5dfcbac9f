// Lineage render model: entities and processes as distinct node kinds laid
// out in columns left-to-right by traversal depth. Entities sit in even
// columns (their BFS depth), each process in the odd column between its
// nearest source layer and its targets.

import type { LineageGraph } from './types.js';

export type NodeKind = 'entity' | 'process';

export interface LineageViewNode {
  id: string;
  kind: NodeKind;
  column: number;
}

export interface LineageViewLink {
  from: string;
  to: string;
}

export interface LineageView {
  root: string;
  direction: string;
  columns: LineageViewNode[][];
  links: LineageViewLink[];
  entityCount: number;
  processCount: number;
}

export function buildLineageView(graph: LineageGraph): LineageView {
  const nodes = new Map<string, LineageViewNode>();
  for (const entity of graph.nodes) {
    nodes.set(entity, { id: entity, kind: 'entity', column: 2 * graph.depth_of[entity] });
  }

  const processDepth = new Map<string, number>();
  for (const edge of graph.edges) {
    const depth = graph.depth_of[edge.from];
    const known = processDepth.get(edge.process);
    if (known === undefined || depth < known) {
      processDepth.set(edge.process, depth);
    }
  }
  for (const [process, depth] of processDepth) {
    nodes.set(process, { id: process, kind: 'process', column: 2 * depth + 1 });
  }

  const seen = new Set<string>();
  const links: LineageViewLink[] = [];
  for (const edge of graph.edges) {
    for (const [from, to] of [
      [edge.from, edge.process],
      [edge.process, edge.to],
    ] as const) {
      const key = `${from}->${to}`;
      if (!seen.has(key)) {
        seen.add(key);
        links.push({ from, to });
      }
    }
  }

  const width = Math.max(0, ...[...nodes.values()].map((node) => node.column + 1));
  const columns: LineageViewNode[][] = Array.from({ length: width }, () => []);
  for (const node of [...nodes.values()].sort((a, b) => (a.id < b.id ? -1 : 1))) {
    columns[node.column].push(node);
  }

  return {
    root: graph.root,
    direction: graph.direction,
    columns,
    links,
    entityCount: graph.nodes.length,
    processCount: processDepth.size,
  };
}
