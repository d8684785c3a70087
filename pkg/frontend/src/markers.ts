// Span-based inline markers for the model editor: diagnostics group by
// 0-based line and render as per-line gutter badges next to the textarea.

import type { Diagnostic } from './api'

export interface LineMarker {
  line: number // 0-based
  severity: 'error' | 'warning' | 'info'
  codes: string[]
  title: string
}

const RANK = { error: 2, warning: 1, info: 0 } as const

export function lineMarkers(diagnostics: Diagnostic[]): LineMarker[] {
  const byLine = new Map<number, Diagnostic[]>()
  for (const diagnostic of diagnostics) {
    const line = diagnostic.range.line
    const entry = byLine.get(line)
    if (entry) {
      entry.push(diagnostic)
    } else {
      byLine.set(line, [diagnostic])
    }
  }
  const markers: LineMarker[] = []
  for (const [line, group] of byLine) {
    const severity = group.reduce<LineMarker['severity']>(
      (worst, d) => (RANK[d.severity] > RANK[worst] ? d.severity : worst),
      'info',
    )
    markers.push({
      line,
      severity,
      codes: group.map((d) => d.code),
      title: group.map((d) => `${d.code}: ${d.message}`).join('\n'),
    })
  }
  markers.sort((a, b) => a.line - b.line)
  return markers
}

/** One gutter cell per editor line; cells with no marker are empty strings. */
export function gutterCells(modelText: string, diagnostics: Diagnostic[]): string[] {
  const lineCount = Math.max(1, modelText.split('\n').length)
  const cells = new Array<string>(lineCount).fill('')
  for (const marker of lineMarkers(diagnostics)) {
    if (marker.line < lineCount) {
      cells[marker.line] = marker.codes.join(',')
    }
  }
  return cells
}
