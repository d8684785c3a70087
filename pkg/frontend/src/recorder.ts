// Microphone capture via MediaRecorder: webm/opus where available, wav
// fallback. The stop function resolves the recording into a single Blob.

export function recordingSupported(): boolean {
  return (
    typeof navigator !== 'undefined' &&
    !!navigator.mediaDevices?.getUserMedia &&
    typeof MediaRecorder !== 'undefined'
  )
}

export function pickMimeType(): string {
  if (typeof MediaRecorder === 'undefined') return 'audio/wav'
  if (MediaRecorder.isTypeSupported?.('audio/webm;codecs=opus')) return 'audio/webm'
  if (MediaRecorder.isTypeSupported?.('audio/webm')) return 'audio/webm'
  if (MediaRecorder.isTypeSupported?.('audio/ogg')) return 'audio/ogg'
  return 'audio/wav'
}

export interface ActiveRecording {
  stop: () => void
  mimeType: string
}

export async function startRecording(
  onComplete: (blob: Blob, mimeType: string) => void,
  onError: (message: string) => void,
): Promise<ActiveRecording | null> {
  if (!recordingSupported()) {
    onError('voice input is not available in this browser')
    return null
  }
  let stream: MediaStream
  try {
    stream = await navigator.mediaDevices.getUserMedia({ audio: true })
  } catch {
    onError('microphone permission denied; type your prompt instead')
    return null
  }
  const mimeType = pickMimeType()
  const recorder = new MediaRecorder(stream, { mimeType })
  const chunks: BlobPart[] = []
  recorder.ondataavailable = (event: BlobEvent) => {
    if (event.data.size > 0) chunks.push(event.data)
  }
  recorder.onstop = () => {
    stream.getTracks().forEach((track) => track.stop())
    onComplete(new Blob(chunks, { type: mimeType }), mimeType)
  }
  recorder.start()
  return {
    stop: () => {
      if (recorder.state !== 'inactive') recorder.stop()
    },
    mimeType,
  }
}
