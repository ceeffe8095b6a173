import type {
  DocumentPayload,
  DocumentsPayload,
  EntityContextPayload,
  EntityFactsPayload,
  EvidencePayload,
  ExtractPayload,
  FactSourcesPayload,
  LinkPayload,
  MetaPayload,
  PilePayload,
  PreviewPayload,
  SearchPayload,
  SuggestPayload,
  TaskParamsRecord,
  WorkspacePayload,
  WorkspaceRecord,
} from "./types.js";

/** The slice of the fetch Response surface the client relies on. */
export interface HttpResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<HttpResponse>;

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

export interface ListDocumentsQuery {
  filter?: string;
  groupBy?: string;
  sortBy?: string;
  direction?: "asc" | "desc";
}

/**
 * Thin typed wrapper over the server REST API. Every displayed artifact in
 * the UI comes back through one of these calls; nothing is computed locally.
 */
export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const payload: unknown = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, errorMessage(payload, response.status));
    }
    return payload as T;
  }

  meta(): Promise<MetaPayload> {
    return this.request("GET", "/api/meta");
  }

  listDocuments(query: ListDocumentsQuery = {}): Promise<DocumentsPayload> {
    const params = new URLSearchParams();
    if (query.filter) params.set("filter", query.filter);
    if (query.groupBy) params.set("groupBy", query.groupBy);
    if (query.sortBy) params.set("sortBy", query.sortBy);
    if (query.direction) params.set("direction", query.direction);
    const suffix = params.toString();
    return this.request("GET", suffix ? `/api/documents?${suffix}` : "/api/documents");
  }

  getDocument(docId: string): Promise<DocumentPayload> {
    return this.request("GET", `/api/documents/${encodeURIComponent(docId)}`);
  }

  searchSemantic(query: string, k?: number, candidateIds?: string[]): Promise<SearchPayload> {
    const body: Record<string, unknown> = { query };
    if (k !== undefined) body.k = k;
    if (candidateIds !== undefined) body.candidateIds = candidateIds;
    return this.request("POST", "/api/search/semantic", body);
  }

  entityFacts(name: string, options: { context?: string; k?: number } = {}): Promise<EntityFactsPayload> {
    const params = new URLSearchParams();
    if (options.context !== undefined) params.set("context", options.context);
    if (options.k !== undefined) params.set("k", String(options.k));
    const suffix = params.toString();
    const path = `/api/kg/entities/${encodeURIComponent(name)}/facts`;
    return this.request("GET", suffix ? `${path}?${suffix}` : path);
  }

  entityContext(name: string, capConnected?: number, capSimilar?: number): Promise<EntityContextPayload> {
    const params = new URLSearchParams();
    if (capConnected !== undefined) params.set("capConnected", String(capConnected));
    if (capSimilar !== undefined) params.set("capSimilar", String(capSimilar));
    const suffix = params.toString();
    const path = `/api/kg/entities/${encodeURIComponent(name)}/context`;
    return this.request("GET", suffix ? `${path}?${suffix}` : path);
  }

  factSources(factId: string): Promise<FactSourcesPayload> {
    return this.request("GET", `/api/kg/facts/${encodeURIComponent(factId)}/sources`);
  }

  createPile(name?: string): Promise<PilePayload> {
    return this.request("POST", "/api/piles", name === undefined ? {} : { name });
  }

  duplicatePile(pileId: string): Promise<PilePayload> {
    return this.request("POST", "/api/piles", { duplicateOf: pileId });
  }

  renamePile(pileId: string, name: string): Promise<PilePayload> {
    return this.request("PATCH", `/api/piles/${encodeURIComponent(pileId)}`, { name });
  }

  addDocs(pileId: string, docIds: string[]): Promise<PilePayload> {
    return this.request("POST", `/api/piles/${encodeURIComponent(pileId)}/docs`, { docIds });
  }

  removeDocs(pileId: string, docIds: string[]): Promise<PilePayload> {
    return this.request("DELETE", `/api/piles/${encodeURIComponent(pileId)}/docs`, { docIds });
  }

  previewTask(pileId: string, kind: string, params: TaskParamsRecord): Promise<PreviewPayload> {
    return this.request("POST", `/api/piles/${encodeURIComponent(pileId)}/tasks/preview`, {
      kind,
      params,
    });
  }

  runTask(pileId: string, kind: string, params: TaskParamsRecord): Promise<EvidencePayload> {
    return this.request("POST", `/api/piles/${encodeURIComponent(pileId)}/tasks`, { kind, params });
  }

  extract(pileId: string, evidenceId: string): Promise<ExtractPayload> {
    return this.request(
      "POST",
      `/api/piles/${encodeURIComponent(pileId)}/evidence/${encodeURIComponent(evidenceId)}/extract`,
    );
  }

  link(pileId: string, evidenceId: string, floor?: number): Promise<LinkPayload> {
    return this.request(
      "POST",
      `/api/piles/${encodeURIComponent(pileId)}/evidence/${encodeURIComponent(evidenceId)}/link`,
      floor === undefined ? {} : { floor },
    );
  }

  suggest(pileId: string, evidenceId: string, k?: number): Promise<SuggestPayload> {
    return this.request(
      "POST",
      `/api/piles/${encodeURIComponent(pileId)}/evidence/${encodeURIComponent(evidenceId)}/suggest`,
      k === undefined ? {} : { k },
    );
  }

  getWorkspace(): Promise<WorkspacePayload> {
    return this.request("GET", "/api/workspace");
  }

  putWorkspace(workspace: WorkspaceRecord): Promise<WorkspacePayload> {
    return this.request("PUT", "/api/workspace", { workspace });
  }

  reorderPiles(ordering: string[]): Promise<WorkspacePayload> {
    return this.request("POST", "/api/workspace/reorder", { ordering });
  }
}

function errorMessage(payload: unknown, status: number): string {
  if (typeof payload === "object" && payload !== null && "error" in payload) {
    const error = (payload as { error: unknown }).error;
    if (typeof error === "string") return error;
  }
  return `HTTP ${status}`;
}
