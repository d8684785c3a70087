import { afterEach, describe, expect, it, vi } from 'vitest'

import { ApiClient, ApiError } from '../src/api'

const BASE = 'http://service.test'

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  })
}

afterEach(() => {
  vi.restoreAllMocks()
})

describe('ApiClient', () => {
  it('creates sessions', async () => {
    const fetchSpy = vi
      .spyOn(globalThis, 'fetch')
      .mockResolvedValue(jsonResponse({ id: 'abc123' }))
    const id = await new ApiClient(BASE).createSession({ auto_send: true })
    expect(id).toBe('abc123')
    const [url, init] = fetchSpy.mock.calls[0]
    expect(String(url)).toBe(`${BASE}/api/sessions`)
    expect(JSON.parse(String(init?.body))).toEqual({ config: { auto_send: true } })
  })

  it('sends prompts to the session endpoint', async () => {
    const fetchSpy = vi
      .spyOn(globalThis, 'fetch')
      .mockResolvedValue(jsonResponse({ index: 0, diagnostics: [] }))
    await new ApiClient(BASE).sendPrompt('s1', 'add a timer')
    const [url, init] = fetchSpy.mock.calls[0]
    expect(String(url)).toBe(`${BASE}/api/sessions/s1/prompt`)
    expect(init?.method).toBe('POST')
  })

  it('turns ApiError bodies into typed errors', async () => {
    vi.spyOn(globalThis, 'fetch').mockResolvedValue(
      jsonResponse({ status: 404, code: 'session_not_found', message: 'nope' }, 404),
    )
    const error = await new ApiClient(BASE)
      .getSession('missing')
      .then(() => null, (e) => e)
    expect(error).toBeInstanceOf(ApiError)
    expect(error.status).toBe(404)
    expect(error.code).toBe('session_not_found')
  })

  it('uploads audio as a multipart request', async () => {
    const fetchSpy = vi
      .spyOn(globalThis, 'fetch')
      .mockResolvedValue(jsonResponse({ transcript: 'hi', pending: true }))
    const bytes = new Uint8Array([1, 2, 3])
    const result = await new ApiClient(BASE).uploadAudio('s1', bytes, 'audio/webm')
    expect(result.transcript).toBe('hi')
    const [, init] = fetchSpy.mock.calls[0]
    const headers = init?.headers as Record<string, string>
    expect(headers['content-type']).toMatch(/^multipart\/form-data; boundary=/)
    const body = new TextDecoder().decode(init?.body as Uint8Array)
    expect(body).toContain('name="file"; filename="clip.webm"')
    expect(body).toContain('Content-Type: audio/webm')
  })

  it('builds diagram urls with turn and format', () => {
    const client = new ApiClient(BASE)
    expect(client.diagramUrl('s1', 3, 'json')).toBe(
      `${BASE}/api/sessions/s1/diagram?turn=3&format=json`,
    )
  })

  it('health returns false on unreachable service', async () => {
    vi.spyOn(globalThis, 'fetch').mockRejectedValue(new TypeError('fetch failed'))
    expect(await new ApiClient(BASE).health()).toBe(false)
  })
})
