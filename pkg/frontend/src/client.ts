// Typed client for the catalog service. Consumes /api/v1 exactly as the
// service defines it; no other endpoints exist on the frontend's horizon.

import type {
  ApiErrorBody,
  Attributes,
  EntityRecord,
  GroupRecord,
  GroupingRecord,
  LineageDirection,
  LineageGraph,
  NeighborItem,
  Page,
  SnapshotMeta,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  readonly body: ApiErrorBody;

  constructor(body: ApiErrorBody) {
    super(body.message);
    this.body = body;
  }

  get status(): number {
    return this.body.http_status;
  }

  get code(): string {
    return this.body.code;
  }
}

const PAGE_LIMIT = 100;

export class CatalogClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { 'Content-Type': 'application/json' } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const text = await response.text();
    const payload = text ? JSON.parse(text) : null;
    if (!response.ok) {
      throw new ApiRequestError(payload as ApiErrorBody);
    }
    return payload as T;
  }

  private async listAll<T>(path: string): Promise<T[]> {
    const items: T[] = [];
    let offset = 0;
    for (;;) {
      const page = await this.request<Page<T>>('GET', `${path}?limit=${PAGE_LIMIT}&offset=${offset}`);
      items.push(...page.items);
      offset += page.items.length;
      if (offset >= page.total || page.items.length === 0) {
        return items;
      }
    }
  }

  listEntities(): Promise<EntityRecord[]> {
    return this.listAll<EntityRecord>('/entities');
  }

  listGroupings(): Promise<GroupingRecord[]> {
    return this.listAll<GroupingRecord>('/groupings');
  }

  listGroups(): Promise<GroupRecord[]> {
    return this.listAll<GroupRecord>('/groups');
  }

  getEntity(id: string): Promise<EntityRecord> {
    return this.request<EntityRecord>('GET', `/entities/${encodeURIComponent(id)}`);
  }

  getGroup(id: string): Promise<GroupRecord> {
    return this.request<GroupRecord>('GET', `/groups/${encodeURIComponent(id)}`);
  }

  intersect(groups: string[]): Promise<string[]> {
    const joined = groups.map(encodeURIComponent).join(',');
    return this.request<string[]>('GET', `/query/intersect?groups=${joined}`);
  }

  lineage(entity: string, direction: LineageDirection, maxDepth?: number): Promise<LineageGraph> {
    const depth = maxDepth === undefined ? '' : `&max_depth=${maxDepth}`;
    return this.request<LineageGraph>(
      'GET',
      `/lineage/${encodeURIComponent(entity)}?direction=${direction}${depth}`,
    );
  }

  neighbors(entity: string, kind?: string): Promise<NeighborItem[]> {
    const filter = kind === undefined ? '' : `?kind=${encodeURIComponent(kind)}`;
    return this.request<NeighborItem[]>('GET', `/query/neighbors/${encodeURIComponent(entity)}${filter}`);
  }

  patchEntityAttributes(id: string, patch: Attributes): Promise<EntityRecord> {
    return this.request<EntityRecord>('PATCH', `/entities/${encodeURIComponent(id)}/attributes`, patch);
  }

  snapshotMeta(): Promise<SnapshotMeta> {
    return this.request<SnapshotMeta>('GET', '/snapshot/meta');
  }
}
