import type {
  CertDetail,
  ReferencesResponse,
  SearchResponse,
  SubscriptionResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

/** Minimal transport: GET/POST a JSON body, throw ApiError on failure.
 * Injectable so tests replay captured payloads without a network. */
export interface Transport {
  get(path: string): Promise<unknown>;
  post(path: string, body: unknown): Promise<unknown>;
}

export function fetchTransport(baseUrl: string, fetchFn: typeof fetch = fetch): Transport {
  async function request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await fetchFn(baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, `${init?.method ?? "GET"} ${path} -> ${response.status}`);
    }
    return response.json();
  }
  return {
    get: (path) => request(path),
    post: (path, body) =>
      request(path, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
  };
}

function query(params: Record<string, string | number | undefined>): string {
  const pairs = Object.entries(params)
    .filter(([, value]) => value !== undefined && value !== "")
    .map(([key, value]) => `${encodeURIComponent(key)}=${encodeURIComponent(String(value))}`);
  return pairs.length ? `?${pairs.join("&")}` : "";
}

/** Typed client over the query API. Concurrent GETs of the same
 * endpoint+params share one in-flight request. */
export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(private transport: Transport) {}

  private dedupedGet(path: string): Promise<unknown> {
    const pending = this.inflight.get(path);
    if (pending) return pending;
    const request = this.transport.get(path).finally(() => this.inflight.delete(path));
    this.inflight.set(path, request);
    return request;
  }

  searchTitles(q: string, filters: Record<string, string> = {}): Promise<SearchResponse> {
    return this.dedupedGet(`/certs${query({ q, ...filters })}`) as Promise<SearchResponse>;
  }

  searchFulltext(q: string): Promise<SearchResponse> {
    return this.dedupedGet(`/search/fulltext${query({ q })}`) as Promise<SearchResponse>;
  }

  certDetail(recordKey: string): Promise<CertDetail> {
    return this.dedupedGet(`/certs/${encodeURIComponent(recordKey)}`) as Promise<CertDetail>;
  }

  references(recordKey: string, direction: string, depth: number): Promise<ReferencesResponse> {
    return this.dedupedGet(
      `/certs/${encodeURIComponent(recordKey)}/references${query({ direction, depth })}`,
    ) as Promise<ReferencesResponse>;
  }

  subscribe(selector: string, sink = "log"): Promise<SubscriptionResponse> {
    return this.transport.post("/subscriptions", { selector, sink }) as Promise<SubscriptionResponse>;
  }
}
