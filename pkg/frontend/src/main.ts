import { ApiClient } from './api'
import { createApp } from './app'

async function boot(): Promise<void> {
  const root = document.getElementById('app')
  if (!root) throw new Error('missing #app container')
  const api = new ApiClient(window.location.origin)
  const params = new URLSearchParams(window.location.search)
  let sessionId = params.get('session')
  if (!sessionId) {
    sessionId = await api.createSession()
    params.set('session', sessionId)
    history.replaceState(null, '', `${window.location.pathname}?${params}`)
  }
  const app = createApp(root, api, sessionId)
  await app.init()
}

boot().catch((error) => {
  const root = document.getElementById('app')
  if (root) {
    root.textContent = `failed to start: ${error instanceof Error ? error.message : error}`
  }
})
