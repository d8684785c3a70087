// DOM composition and event wiring for the session view. Three observation
// points (transcript, model text, diagram) render side by side and refresh
// together after every turn; the three interaction points are the record
// button, the editable prompt frame, and the model editor's apply button.

import { ApiClient, ApiError, TurnRecord } from './api'
import { gutterCells } from './markers'
import { recordingSupported, startRecording, ActiveRecording } from './recorder'
import {
  UiSessionView,
  canSend,
  fromSessionState,
  initialView,
  withBusy,
  withDiagramSvg,
  withNotice,
  withStage,
  withTranscript,
  withTurn,
} from './state'

const PROGRESS_POLL_MS = 250

export interface App {
  view: UiSessionView
  init(): Promise<void>
  sendPrompt(): Promise<void>
  applyModel(): Promise<void>
  submitAudioBlob(blob: Blob, mimeType: string): Promise<void>
  toggleRecording(): Promise<void>
  dispose(): void
}

export function createApp(root: HTMLElement, api: ApiClient, sessionId: string): App {
  root.innerHTML = `
    <header class="topbar">
      <strong>lfforge</strong>
      <span class="session-label">session ${sessionId}</span>
      <span class="stage" data-testid="stage-indicator">idle</span>
    </header>
    <main class="columns">
      <section class="panel prompt-panel">
        <h2>Prompt</h2>
        <div class="row">
          <button type="button" data-testid="record-button">&#9679; record</button>
          <label class="toggle">
            <input type="checkbox" data-testid="auto-send-toggle"> send immediately
          </label>
        </div>
        <textarea data-testid="prompt-frame" rows="6"
                  placeholder="Describe the change, or record it"></textarea>
        <button type="button" data-testid="send-button" disabled>send</button>
        <div class="transcript" data-testid="transcript-view" hidden></div>
        <div class="notice" data-testid="notice" hidden></div>
      </section>
      <section class="panel editor-panel">
        <h2>Model</h2>
        <div class="editor-wrap">
          <pre class="gutter" data-testid="editor-gutter"></pre>
          <textarea data-testid="model-editor" rows="18" spellcheck="false"></textarea>
        </div>
        <button type="button" data-testid="apply-button">apply edit</button>
        <h3>Diagnostics</h3>
        <ul class="diagnostics" data-testid="diagnostics-panel"></ul>
      </section>
      <section class="panel diagram-panel">
        <h2>Diagram</h2>
        <div class="diagram" data-testid="diagram-pane"><em>no diagram yet</em></div>
        <h3>History</h3>
        <ol class="history" data-testid="turn-history"></ol>
      </section>
    </main>
  `

  const el = {
    stage: query(root, 'stage-indicator'),
    record: query(root, 'record-button') as HTMLButtonElement,
    autoSend: query(root, 'auto-send-toggle') as HTMLInputElement,
    prompt: query(root, 'prompt-frame') as HTMLTextAreaElement,
    send: query(root, 'send-button') as HTMLButtonElement,
    transcript: query(root, 'transcript-view'),
    notice: query(root, 'notice'),
    gutter: query(root, 'editor-gutter'),
    editor: query(root, 'model-editor') as HTMLTextAreaElement,
    apply: query(root, 'apply-button') as HTMLButtonElement,
    diagnostics: query(root, 'diagnostics-panel'),
    diagram: query(root, 'diagram-pane'),
    history: query(root, 'turn-history'),
  }

  let view = initialView(sessionId)
  let poller: ReturnType<typeof setInterval> | null = null
  let recording: ActiveRecording | null = null

  function update(next: UiSessionView): void {
    view = next
    app.view = next
    render()
  }

  function render(): void {
    el.stage.textContent = view.stage
    if (el.prompt.value !== view.promptText) {
      el.prompt.value = view.promptText
    }
    if (el.editor.value !== view.modelText) {
      el.editor.value = view.modelText
    }
    el.send.disabled = !canSend(view)
    el.apply.disabled = view.busy
    el.record.disabled = view.busy
    el.transcript.hidden = view.lastTranscript === null
    el.transcript.textContent =
      view.lastTranscript === null ? '' : `transcript: ${view.lastTranscript}`
    el.notice.hidden = view.notice === null
    el.notice.textContent = view.notice ?? ''
    el.gutter.textContent = gutterCells(el.editor.value, view.diagnostics)
      .map((cell, i) => (cell ? `${i + 1} ⚠` : `${i + 1}`))
      .join('\n')
    renderDiagnostics()
    renderHistory()
    if (view.diagramSvg !== null) {
      el.diagram.innerHTML = view.diagramSvg
    }
  }

  function renderDiagnostics(): void {
    el.diagnostics.innerHTML = ''
    if (view.diagnostics.length === 0) {
      const item = document.createElement('li')
      item.className = 'clean'
      item.textContent = 'no diagnostics'
      el.diagnostics.appendChild(item)
      return
    }
    for (const diagnostic of view.diagnostics) {
      const item = document.createElement('li')
      item.className = `diag diag-${diagnostic.severity}`
      item.dataset.code = diagnostic.code
      item.dataset.line = String(diagnostic.range.line)
      item.textContent =
        `${diagnostic.severity} ${diagnostic.code} ` +
        `[${diagnostic.range.line + 1}:${diagnostic.range.col + 1}] ${diagnostic.message}`
      el.diagnostics.appendChild(item)
    }
  }

  function renderHistory(): void {
    el.history.innerHTML = ''
    for (const turn of view.turns) {
      const item = document.createElement('li')
      item.dataset.index = String(turn.index)
      const label = turn.kind === 'edit' ? '(direct edit)' : turn.prompt
      const errors = turn.diagnostics.filter((d) => d.severity === 'error').length
      item.textContent = turn.error
        ? `#${turn.index} ${label} — failed: ${turn.error}`
        : `#${turn.index} [${turn.kind}] ${label} — ${errors} error(s)`
      el.history.appendChild(item)
    }
  }

  function startPolling(): void {
    stopPolling()
    poller = setInterval(async () => {
      try {
        const progress = await api.getProgress(sessionId)
        update(withStage(view, progress.stage))
      } catch {
        // transient polling errors are invisible; the POST outcome decides
      }
    }, PROGRESS_POLL_MS)
  }

  function stopPolling(): void {
    if (poller !== null) {
      clearInterval(poller)
      poller = null
    }
  }

  async function foldTurn(turn: TurnRecord): Promise<void> {
    let next = withTurn(view, turn)
    if (turn.diagram !== null) {
      try {
        const svg = await api.fetchDiagramSvg(sessionId, turn.index)
        next = withDiagramSvg(next, svg)
      } catch {
        // keep the previous diagram if the artifact fetch fails
      }
    }
    update(next)
  }

  const app: App = {
    view,

    async init(): Promise<void> {
      const state = await api.getSession(sessionId)
      let next = fromSessionState(state)
      if (next.diagramTurn !== null) {
        try {
          next = withDiagramSvg(next, await api.fetchDiagramSvg(sessionId, next.diagramTurn))
        } catch {
          // session exists but artifact is gone; pane stays empty
        }
      }
      update(next)
      if (!recordingSupported()) {
        el.record.title = 'voice input is not available in this browser'
        el.record.classList.add('unsupported')
      }
    },

    async sendPrompt(): Promise<void> {
      if (!canSend(view)) return
      const text = view.promptText
      update(withBusy(view, true))
      startPolling()
      try {
        const turn = await api.sendPrompt(sessionId, text)
        await foldTurn(turn)
      } catch (error) {
        update(withNotice(view, describe(error)))
      } finally {
        stopPolling()
      }
    },

    async applyModel(): Promise<void> {
      if (view.busy) return
      update(withBusy({ ...view, modelText: el.editor.value }, true))
      try {
        const turn = await api.putModel(sessionId, el.editor.value)
        await foldTurn(turn)
      } catch (error) {
        update(withNotice(view, describe(error)))
      }
    },

    async submitAudioBlob(blob: Blob, mimeType: string): Promise<void> {
      update(withStage(view, 'transcribing'))
      try {
        const result = await api.uploadAudio(sessionId, blob, mimeType)
        update(withTranscript(withStage(view, 'idle'), result.transcript))
        if (result.turn) {
          await foldTurn(result.turn)
        } else if (el.autoSend.checked) {
          await app.sendPrompt()
        }
      } catch (error) {
        update(withNotice(view, `${describe(error)} — you can retry the recording`))
      }
    },

    async toggleRecording(): Promise<void> {
      if (recording) {
        recording.stop()
        recording = null
        el.record.innerHTML = '&#9679; record'
        return
      }
      recording = await startRecording(
        (blob, mimeType) => void app.submitAudioBlob(blob, mimeType),
        (message) => update(withNotice(view, message)),
      )
      if (recording) {
        el.record.textContent = '■ stop'
      }
    },

    dispose(): void {
      stopPolling()
      recording?.stop()
    },
  }

  el.prompt.addEventListener('input', () => {
    view = { ...view, promptText: el.prompt.value }
    app.view = view
    el.send.disabled = !canSend(view)
  })
  el.send.addEventListener('click', () => void app.sendPrompt())
  el.apply.addEventListener('click', () => void app.applyModel())
  el.record.addEventListener('click', () => void app.toggleRecording())

  return app
}

function query(root: HTMLElement, testId: string): HTMLElement {
  const element = root.querySelector(`[data-testid="${testId}"]`)
  if (!element) throw new Error(`missing element: ${testId}`)
  return element as HTMLElement
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return `${error.code}: ${error.message}`
  }
  return error instanceof Error ? error.message : String(error)
}
