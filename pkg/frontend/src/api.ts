// Thin client over the review API. The fetch implementation is injected so
// tests can run without a browser or a live server.

import type {
  AnnotationRecord,
  DocumentComponents,
  DocumentSummary,
  GroundTruthRecord,
  MetricsPayload,
} from './types.js'

export interface ResponseLike {
  status: number
  json(): Promise<unknown>
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<ResponseLike>

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message)
  }
}

async function unwrap<T>(response: ResponseLike): Promise<T> {
  const body = (await response.json()) as T & { error?: string }
  if (response.status >= 400) {
    throw new ApiError(response.status, body.error ?? `request failed (${response.status})`)
  }
  return body
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  private get(path: string) {
    return this.fetchImpl(this.base + path)
  }

  private post(path: string, payload: unknown) {
    return this.fetchImpl(this.base + path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    })
  }

  async documents(): Promise<DocumentSummary[]> {
    return unwrap(await this.get('/api/documents'))
  }

  async components(documentId: string): Promise<DocumentComponents> {
    return unwrap(await this.get(`/api/documents/${encodeURIComponent(documentId)}/components`))
  }

  async metrics(): Promise<MetricsPayload> {
    return unwrap(await this.get('/api/metrics'))
  }

  async submitAnnotation(record: AnnotationRecord): Promise<void> {
    await unwrap(await this.post('/api/annotations', record))
  }

  async submitGroundTruth(record: GroundTruthRecord): Promise<void> {
    await unwrap(await this.post('/api/ground-truth', record))
  }
}
