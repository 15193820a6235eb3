/** Thin typed client over the annotation service HTTP API. */

import type {
  DraftPair,
  ExportedDataset,
  PairRecord,
  PassageDetail,
  PassageScore,
  ValidateResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly body: unknown,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseBody(response: Response): Promise<unknown> {
  const text = await response.text();
  try {
    return text ? JSON.parse(text) : null;
  } catch {
    return text;
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.url(path));
    const body = await parseBody(response);
    if (!response.ok) {
      throw new ApiError(`GET ${path} -> ${response.status}`, response.status, body);
    }
    return body as T;
  }

  async listPassages(sort: "score" | "id" = "score"): Promise<PassageScore[]> {
    return this.get(`/passages?sort=${sort}`);
  }

  async getPassage(passageId: string): Promise<PassageDetail> {
    return this.get(`/passages/${encodeURIComponent(passageId)}`);
  }

  async validate(draft: DraftPair): Promise<ValidateResponse> {
    const response = await fetch(this.url("/validate"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(draft),
    });
    const body = await parseBody(response);
    if (!response.ok) {
      throw new ApiError(`POST /validate -> ${response.status}`, response.status, body);
    }
    return body as ValidateResponse;
  }

  /**
   * Submit a draft for acceptance. A 422 means the server rejected the pair;
   * the validation report is surfaced in the error body (the UI should never
   * reach this if it pre-validates, but the server stays authoritative).
   */
  async acceptPair(draft: DraftPair): Promise<PairRecord> {
    const response = await fetch(this.url("/pairs"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(draft),
    });
    const body = await parseBody(response);
    if (response.status !== 201) {
      throw new ApiError(`POST /pairs -> ${response.status}`, response.status, body);
    }
    return body as PairRecord;
  }

  async listPairs(): Promise<PairRecord[]> {
    return this.get("/pairs");
  }

  async exportDataset(): Promise<ExportedDataset> {
    return this.get("/export");
  }
}
