// Typed client for the cardex extraction REST API. No framework; every call
// goes through the injected fetch so tests can mock the transport.

export interface FieldValue {
  raw_text: string;
  corrected_text: string;
  confidence: number;
  correction_applied: boolean;
}

export interface SideResult {
  side: "front" | "back";
  fields: Record<string, FieldValue>;
  warnings: string[];
}

export interface ExtractResponse {
  id: string;
  front: SideResult;
  back: SideResult;
  warnings: string[];
}

export interface HistorySummary {
  id: string;
  created_at: string;
  status: "extracted" | "edited" | "saved";
}

export interface HistoryEntry {
  id: string;
  created_at: string;
  front: SideResult;
  back: SideResult;
  edited_fields: Record<string, string>;
  status: string;
}

export interface ApiError {
  code: string;
  [detail: string]: unknown;
}

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly error: ApiError,
  ) {
    super(`${error.code} (HTTP ${status})`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(resp: Response): Promise<never> {
  let error: ApiError = { code: "unknown_error" };
  try {
    const body = await resp.json();
    if (body && typeof body === "object" && body.error) {
      error = body.error as ApiError;
    }
  } catch {
    // non-JSON error body; keep the fallback code
  }
  throw new ApiRequestError(resp.status, error);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (!resp.ok) {
      await parseError(resp);
    }
    return (await resp.json()) as T;
  }

  async extract(frontBase64: string, backBase64: string): Promise<ExtractResponse> {
    return this.json<ExtractResponse>("/api/v1/extract", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ front_image: frontBase64, back_image: backBase64 }),
    });
  }

  async editEntry(id: string, fields: Record<string, string>): Promise<HistoryEntry> {
    return this.json<HistoryEntry>(`/api/v1/history/${encodeURIComponent(id)}`, {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(fields),
    });
  }

  /** Marks the entry saved and returns the downloadable text record. */
  async saveEntry(id: string): Promise<string> {
    const resp = await this.fetchImpl(
      `${this.baseUrl}/api/v1/history/${encodeURIComponent(id)}/save`,
      { method: "POST" },
    );
    if (!resp.ok) {
      await parseError(resp);
    }
    return resp.text();
  }

  async history(limit = 50): Promise<HistorySummary[]> {
    return this.json<HistorySummary[]>(`/api/v1/history?limit=${limit}`);
  }

  async entry(id: string): Promise<HistoryEntry> {
    return this.json<HistoryEntry>(`/api/v1/history/${encodeURIComponent(id)}`);
  }
}

/** Strips the data-URL prefix a FileReader produces, leaving raw base64. */
export function dataUrlToBase64(dataUrl: string): string {
  const comma = dataUrl.indexOf(",");
  return comma >= 0 ? dataUrl.slice(comma + 1) : dataUrl;
}
