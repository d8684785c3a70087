// Typed client for the workbench service. All traffic goes through the
// service origin; the UI never talks to an LLM vendor directly.

export interface DiagnosticRange {
  line: number
  col: number
  length: number
}

export interface Diagnostic {
  severity: 'error' | 'warning' | 'info'
  code: string
  message: string
  range: DiagnosticRange
}

export interface DiagramRefs {
  svg: string
  json: string
}

export interface TurnRecord {
  index: number
  kind: 'speech' | 'text' | 'edit'
  prompt: string
  transcript: string | null
  model_text_after: string
  model_updated: boolean
  diagnostics: Diagnostic[]
  diagram: DiagramRefs | null
  timings: Record<string, number>
  error: string | null
}

export interface SessionState {
  id: string
  config: Record<string, unknown>
  current_model_text: string
  turns: TurnRecord[]
}

export interface AudioResult {
  transcript: string
  pending: boolean
  turn?: TurnRecord
}

export interface Progress {
  turn: number | null
  stage: string
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message)
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = 'unknown'
  let message = `request failed (${response.status})`
  try {
    const body = await response.json()
    if (body && typeof body === 'object') {
      code = body.code ?? code
      message = body.message ?? message
    }
  } catch {
    // non-JSON error body; keep defaults
  }
  return new ApiError(response.status, code, message)
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.url(path), init)
    if (!response.ok) {
      throw await parseError(response)
    }
    return (await response.json()) as T
  }

  async health(): Promise<boolean> {
    try {
      const body = await this.request<{ ok: boolean }>('/api/health')
      return body.ok === true
    } catch {
      return false
    }
  }

  async createSession(config?: Record<string, unknown>): Promise<string> {
    const body = await this.request<{ id: string }>('/api/sessions', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ config: config ?? null }),
    })
    return body.id
  }

  getSession(id: string): Promise<SessionState> {
    return this.request(`/api/sessions/${id}`)
  }

  sendPrompt(id: string, text: string): Promise<TurnRecord> {
    return this.request(`/api/sessions/${id}/prompt`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ text }),
    })
  }

  putModel(id: string, text: string): Promise<TurnRecord> {
    return this.request(`/api/sessions/${id}/model`, {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ text }),
    })
  }

  async uploadAudio(
    id: string,
    audio: Blob | Uint8Array<ArrayBuffer>,
    mimeType: string,
  ): Promise<AudioResult> {
    // multipart body built by hand: FormData/Blob instances do not survive
    // the jsdom/node realm boundary in tests, and raw bytes work everywhere
    const bytes = audio instanceof Uint8Array ? audio : await blobBytes(audio)
    const { body, contentType } = encodeMultipart(
      'file',
      'clip' + extensionFor(mimeType),
      mimeType,
      bytes,
    )
    return this.request(`/api/sessions/${id}/audio`, {
      method: 'POST',
      headers: { 'content-type': contentType },
      body,
    })
  }

  getProgress(id: string): Promise<Progress> {
    return this.request(`/api/sessions/${id}/progress`)
  }

  getTools(): Promise<unknown[]> {
    return this.request('/api/tools')
  }

  diagramUrl(id: string, turn: number, format: 'svg' | 'json' = 'svg'): string {
    return this.url(`/api/sessions/${id}/diagram?turn=${turn}&format=${format}`)
  }

  async fetchDiagramSvg(id: string, turn: number): Promise<string> {
    const response = await fetch(this.diagramUrl(id, turn, 'svg'))
    if (!response.ok) {
      throw await parseError(response)
    }
    return response.text()
  }
}

function extensionFor(mimeType: string): string {
  if (mimeType.includes('webm')) return '.webm'
  if (mimeType.includes('ogg')) return '.ogg'
  return '.wav'
}

async function blobBytes(blob: Blob): Promise<Uint8Array<ArrayBuffer>> {
  if (typeof blob.arrayBuffer === 'function') {
    return new Uint8Array(await blob.arrayBuffer())
  }
  // older DOM implementations only expose Blob contents via FileReader
  return new Promise((resolve, reject) => {
    const reader = new FileReader()
    reader.onload = () => resolve(new Uint8Array(reader.result as ArrayBuffer))
    reader.onerror = () => reject(reader.error ?? new Error('blob read failed'))
    reader.readAsArrayBuffer(blob)
  })
}

function encodeMultipart(
  field: string,
  filename: string,
  mimeType: string,
  data: Uint8Array,
): { body: Uint8Array<ArrayBuffer>; contentType: string } {
  const boundary = '----lfforge' + Math.random().toString(36).slice(2)
  const encoder = new TextEncoder()
  const head = encoder.encode(
    `--${boundary}\r\n` +
      `Content-Disposition: form-data; name="${field}"; filename="${filename}"\r\n` +
      `Content-Type: ${mimeType}\r\n\r\n`,
  )
  const tail = encoder.encode(`\r\n--${boundary}--\r\n`)
  const body = new Uint8Array(head.length + data.length + tail.length)
  body.set(head, 0)
  body.set(data, head.length)
  body.set(tail, head.length + data.length)
  return { body, contentType: `multipart/form-data; boundary=${boundary}` }
}
