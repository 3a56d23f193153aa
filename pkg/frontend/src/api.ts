// Client for the engine HTTP API. The engine is the single source of truth:
// no vector math happens here, and only one mutation may be in flight.

import type {
  AlignmentSetDto,
  DiffDto,
  EditionsDto,
  FeedbackResultDto,
  HeatmapDto,
  HistoryDto,
  LineRef,
  NeighborsDto,
  RealignResultDto,
  WordChangeDto,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string
  ) {
    super(detail);
  }
}

const asQuery = (params: Record<string, string | number>): string =>
  "?" +
  Object.entries(params)
    .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
    .join("&");

export class ApiClient {
  private mutationInFlight = false;

  constructor(private readonly base: string) {}

  get busy(): boolean {
    return this.mutationInFlight;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (body.detail !== undefined) detail = JSON.stringify(body.detail);
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private async mutate<T>(path: string, body: unknown): Promise<T> {
    if (this.mutationInFlight) {
      throw new ApiError(409, "a mutation is already in flight");
    }
    this.mutationInFlight = true;
    try {
      return await this.request<T>(path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      });
    } finally {
      this.mutationInFlight = false;
    }
  }

  getEditions(): Promise<EditionsDto> {
    return this.request("/editions");
  }

  getAlignment(iteration: number, a?: string, b?: string): Promise<AlignmentSetDto> {
    const params = a !== undefined && b !== undefined ? asQuery({ a, b }) : "";
    return this.request(`/alignments/${iteration}${params}`);
  }

  getDiff(fromIter: number, toIter: number): Promise<DiffDto> {
    return this.request(`/alignments/diff${asQuery({ from: fromIter, to: toIter })}`);
  }

  getHeatmap(a: LineRef, b: LineRef): Promise<HeatmapDto> {
    return this.request(
      `/heatmap${asQuery({ a: `${a[0]}:${a[1]}`, b: `${b[0]}:${b[1]}` })}`
    );
  }

  getWordChange(
    line: LineRef,
    fromIter: number,
    toIter: number,
    mode: "displacement" | "churn",
    k = 10
  ): Promise<WordChangeDto> {
    return this.request(
      `/wordchange${asQuery({
        line: `${line[0]}:${line[1]}`,
        from: fromIter,
        to: toIter,
        mode,
        k,
      })}`
    );
  }

  getNeighbors(token: string, k = 10): Promise<NeighborsDto> {
    return this.request(`/neighbors${asQuery({ token, k })}`);
  }

  getHistory(): Promise<HistoryDto> {
    return this.request("/history");
  }

  postRating(a: LineRef, b: LineRef, rating: number): Promise<FeedbackResultDto> {
    return this.mutate("/feedback/rating", { a, b, rating });
  }

  postDrag(i: number, j: number, target: number): Promise<FeedbackResultDto> {
    return this.mutate("/feedback/drag", { i, j, target });
  }

  postRealign(a: string, b: string, config?: unknown): Promise<RealignResultDto> {
    return this.mutate("/realign", config ? { a, b, config } : { a, b });
  }
}
