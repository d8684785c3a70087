// View state for one modeling session. Pure functions only: the DOM layer
// applies these and re-renders. The view always derives from the last
// service response; the model editor field is the only client-side mutable
// text.

import type { Diagnostic, SessionState, TurnRecord } from './api'

export interface UiSessionView {
  sessionId: string
  promptText: string
  modelText: string
  diagramSvg: string | null
  diagramTurn: number | null
  diagnostics: Diagnostic[]
  turns: TurnRecord[]
  stage: string
  busy: boolean
  notice: string | null
  lastTranscript: string | null
}

export function initialView(sessionId: string): UiSessionView {
  return {
    sessionId,
    promptText: '',
    modelText: '',
    diagramSvg: null,
    diagramTurn: null,
    diagnostics: [],
    turns: [],
    stage: 'idle',
    busy: false,
    notice: null,
    lastTranscript: null,
  }
}

export function fromSessionState(state: SessionState): UiSessionView {
  let view = initialView(state.id)
  view = { ...view, modelText: state.current_model_text, turns: [...state.turns] }
  const last = state.turns[state.turns.length - 1]
  if (last) {
    view = { ...view, diagnostics: last.diagnostics }
  }
  const reversed = [...state.turns].reverse()
  const lastDiagram = reversed.find((t) => t.diagram !== null)
  if (lastDiagram) {
    view = { ...view, diagramTurn: lastDiagram.index }
  }
  const lastSpeech = reversed.find((t) => t.transcript !== null)
  if (lastSpeech) {
    view = { ...view, lastTranscript: lastSpeech.transcript }
  }
  return view
}

/** Fold a completed turn into the view: history appends, the model text,
 * diagnostics, and diagram pointer refresh together (the three observation
 * points stay in lockstep). */
export function withTurn(view: UiSessionView, turn: TurnRecord): UiSessionView {
  const next: UiSessionView = {
    ...view,
    turns: [...view.turns, turn],
    diagnostics: turn.diagnostics,
    stage: turn.error ? 'failed' : 'done',
    busy: false,
    notice: turn.error,
  }
  if (turn.error) {
    return next
  }
  if (turn.kind === 'edit') {
    next.modelText = turn.model_text_after
  } else if (turn.model_updated) {
    next.modelText = turn.model_text_after
    next.promptText = ''
  }
  if (turn.diagram !== null) {
    next.diagramTurn = turn.index
  }
  return next
}

export function withTranscript(view: UiSessionView, transcript: string): UiSessionView {
  // a retried recording replaces the prior transcript in the prompt frame
  return { ...view, promptText: transcript, lastTranscript: transcript, notice: null }
}

export function withDiagramSvg(view: UiSessionView, svg: string): UiSessionView {
  return { ...view, diagramSvg: svg }
}

export function withStage(view: UiSessionView, stage: string): UiSessionView {
  return { ...view, stage }
}

export function withBusy(view: UiSessionView, busy: boolean): UiSessionView {
  return { ...view, busy, stage: busy ? 'sending' : view.stage }
}

export function withNotice(view: UiSessionView, notice: string | null): UiSessionView {
  return { ...view, notice, busy: false }
}

export function canSend(view: UiSessionView): boolean {
  return !view.busy && view.promptText.trim().length > 0
}

export function errorCount(view: UiSessionView): number {
  return view.diagnostics.filter((d) => d.severity === 'error').length
}
