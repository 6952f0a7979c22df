/**
 * Wire protocol shared with the summarization pipeline's remote client.
 *
 * POST /v1/generate with a JSON body; the response carries the generated
 * text and the identity of whatever produced it. Status codes: 200 on
 * success, 400 on a malformed request, 503 while no model is loaded.
 */

export type TaskKind = 'template' | 'slot';

export interface GenerateRequest {
  task: TaskKind;
  entity_name: string;
  documents: string[];
  slot_key: string | null;
  input: string;
}

export interface GenerateResponse {
  output: string;
  backend_id: string;
  /** Present in model mode; true when the input hit the length cap. */
  truncated?: boolean;
}

export type ParseResult =
  | { ok: true; request: GenerateRequest }
  | { ok: false; error: string };

function isStringArray(value: unknown): value is string[] {
  return Array.isArray(value) && value.every((item) => typeof item === 'string');
}

/** Validate an already-JSON-parsed body against the request schema. */
export function parseGenerateRequest(body: unknown): ParseResult {
  if (typeof body !== 'object' || body === null || Array.isArray(body)) {
    return { ok: false, error: 'body must be a JSON object' };
  }
  const record = body as Record<string, unknown>;

  const task = record['task'];
  if (task !== 'template' && task !== 'slot') {
    return { ok: false, error: `task must be "template" or "slot", got ${JSON.stringify(task)}` };
  }
  if (typeof record['entity_name'] !== 'string') {
    return { ok: false, error: 'entity_name must be a string' };
  }
  if (!isStringArray(record['documents'])) {
    return { ok: false, error: 'documents must be an array of strings' };
  }
  if (typeof record['input'] !== 'string') {
    return { ok: false, error: 'input must be a string' };
  }

  const slotKey = record['slot_key'];
  if (task === 'slot') {
    if (typeof slotKey !== 'string' || slotKey === '') {
      return { ok: false, error: 'slot task requires a non-empty slot_key' };
    }
    return {
      ok: true,
      request: {
        task,
        entity_name: record['entity_name'],
        documents: record['documents'],
        slot_key: slotKey,
        input: record['input'],
      },
    };
  }
  // Template task: slot_key must be absent, null, or empty.
  if (slotKey !== undefined && slotKey !== null && slotKey !== '') {
    return { ok: false, error: 'template task must not carry a slot_key' };
  }
  return {
    ok: true,
    request: {
      task,
      entity_name: record['entity_name'],
      documents: record['documents'],
      slot_key: null,
      input: record['input'],
    },
  };
}
