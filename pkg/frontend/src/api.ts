import type {
  AnchorCreateRequest,
  AnchorCreateResponse,
  AnchorSummary,
  ArithmeticRequest,
  ArithmeticResponse,
  ErrorEnvelope,
  ModelSummary,
  SampleRequest,
  SampleResponse,
  TraverseRequest,
  TraverseResponse,
} from './types.js';

/** The slice of fetch the client uses; an in-memory stub satisfies it too. */
export type FetchLike = (
  path: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

/** Typed failure carrying the server's error envelope. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly envelope: ErrorEnvelope,
  ) {
    super(envelope.message);
    this.name = 'ApiError';
  }
}

function postJson(body: unknown): { method: string; headers: Record<string, string>; body: string } {
  return {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(body),
  };
}

export function createClient(fetchFn: FetchLike) {
  async function request<T>(path: string, init?: Parameters<FetchLike>[1]): Promise<T> {
    const res = await fetchFn(path, init);
    if (!res.ok) {
      const fallback: ErrorEnvelope = { code: 'http', message: `HTTP ${res.status}`, detail: null };
      const body = (await res.json().catch(() => fallback)) as Partial<ErrorEnvelope>;
      const envelope: ErrorEnvelope =
        typeof body.code === 'string' && typeof body.message === 'string'
          ? { code: body.code, message: body.message, detail: body.detail ?? null }
          : fallback;
      throw new ApiError(res.status, envelope);
    }
    return (await res.json()) as T;
  }

  return {
    health: () => request<{ status: string; version: string }>('/api/health'),
    listModels: () => request<{ models: ModelSummary[] }>('/api/models'),
    sample: (body: SampleRequest) => request<SampleResponse>('/api/sample', postJson(body)),
    traverse: (body: TraverseRequest) => request<TraverseResponse>('/api/traverse', postJson(body)),
    arithmetic: (body: ArithmeticRequest) =>
      request<ArithmeticResponse>('/api/arithmetic', postJson(body)),
    listAnchors: (tags: string[] = []) => {
      const query = tags.map((t) => `tag=${encodeURIComponent(t)}`).join('&');
      return request<{ anchor_sets: AnchorSummary[] }>(
        query ? `/api/anchors?${query}` : '/api/anchors',
      );
    },
    createAnchor: (body: AnchorCreateRequest) =>
      request<AnchorCreateResponse>('/api/anchors', postJson(body)),
    deleteAnchor: (name: string) =>
      request<{ deleted: string }>(`/api/anchors/${encodeURIComponent(name)}`, {
        method: 'DELETE',
      }),
  };
}

export type ApiClient = ReturnType<typeof createClient>;

/**
 * Monotonic request ids for panels with overlapping in-flight requests:
 * a response is applied only if no newer request was issued since.
 */
export function createTracker() {
  let latest = 0;
  return {
    issue(): number {
      latest += 1;
      return latest;
    },
    isCurrent(id: number): boolean {
      return id === latest;
    },
  };
}

export type RequestTracker = ReturnType<typeof createTracker>;

/** In-flight bookkeeping so callers (and tests) can await quiescence. */
export function createTasks() {
  const inflight = new Set<Promise<unknown>>();
  return {
    track<T>(promise: Promise<T>): Promise<T> {
      inflight.add(promise);
      void promise.finally(() => inflight.delete(promise));
      return promise;
    },
    async idle(): Promise<void> {
      while (inflight.size > 0) {
        await Promise.all([...inflight]);
      }
    },
  };
}

export type TaskTracker = ReturnType<typeof createTasks>;
