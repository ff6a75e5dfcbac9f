// DTOs mirroring the catalog service's /api/v1 JSON shapes.

export type Attributes = Record<string, unknown>;

export interface EntityRecord {
  id: string;
  attributes: Attributes;
}

export interface GroupRecord {
  id: string;
  grouping: string;
  name: string;
  members: string[];
  attributes: Attributes;
}

export interface GroupingRecord {
  id: string;
  name: string;
  groups: string[];
  attributes: Attributes;
}

export interface EntityLinkRecord {
  id: string;
  source: string;
  target: string;
  oriented: boolean;
  kind: string;
  attributes: Attributes;
}

export type LineageDirection = 'downstream' | 'upstream';

export interface LineageEdge {
  process: string;
  from: string;
  to: string;
}

export interface LineageGraph {
  root: string;
  direction: LineageDirection;
  nodes: string[];
  edges: LineageEdge[];
  depth_of: Record<string, number>;
}

export interface NeighborItem {
  link: EntityLinkRecord;
  other: string;
}

export interface SnapshotMeta {
  snapshot_version: number;
  counts: Record<string, number>;
}

export interface ApiErrorBody {
  http_status: number;
  code: string;
  message: string;
  offending_ids: string[];
}

export interface Page<T> {
  items: T[];
  total: number;
  limit: number;
  offset: number;
}
