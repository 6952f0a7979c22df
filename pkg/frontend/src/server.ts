/**
 * The /v1/generate HTTP service.
 *
 * Two modes: "stub" answers from a canned-response table, "model" decodes
 * with trained artifacts. Requests are validated before dispatch; a
 * malformed request is a 400, asking a model that is not loaded is a 503.
 *
 * Node's event loop serializes request handling, so decoding never runs
 * concurrently with itself; there is no shared mutable state to guard.
 */

import { createServer, type IncomingMessage, type Server, type ServerResponse } from 'node:http';
import { readFileSync } from 'node:fs';
import { Seq2SeqModel } from './model.js';
import { StubTable } from './stub.js';
import { parseGenerateRequest, type GenerateRequest, type GenerateResponse } from './wire.js';

export interface ServerConfig {
  mode: 'stub' | 'model';
  /** Canned-response JSONL; required in stub mode. */
  tablePath?: string;
  templateModelPath?: string;
  slotModelPath?: string;
  /** Overrides the model artifacts' own caps when set. */
  maxInputTokens?: number;
  maxOutputTokens?: number;
  beamSize: number;
  backendId: string;
}

export const DEFAULT_SERVER_CONFIG: Pick<ServerConfig, 'beamSize' | 'backendId'> = {
  beamSize: 1,
  backendId: 'model-server',
};

export function validateConfig(config: ServerConfig): void {
  if (config.mode !== 'stub' && config.mode !== 'model') {
    throw new Error(`mode must be "stub" or "model", got ${JSON.stringify(config.mode)}`);
  }
  if (config.mode === 'stub' && !config.tablePath) {
    throw new Error('stub mode requires a canned-response table path');
  }
  if (config.beamSize < 1) {
    throw new Error(`beamSize must be >= 1, got ${config.beamSize}`);
  }
}

function loadModel(path: string, config: ServerConfig): Seq2SeqModel {
  const model = Seq2SeqModel.fromJSON(JSON.parse(readFileSync(path, 'utf-8')));
  if (config.maxInputTokens !== undefined) {
    model.config.maxInputTokens = config.maxInputTokens;
  }
  if (config.maxOutputTokens !== undefined) {
    model.config.maxOutputTokens = config.maxOutputTokens;
  }
  return model;
}

export class ModelServer {
  private readonly config: ServerConfig;
  private readonly table: StubTable | null;
  private readonly templateModel: Seq2SeqModel | null;
  private readonly slotModel: Seq2SeqModel | null;
  private server: Server | null = null;

  constructor(config: ServerConfig) {
    validateConfig(config);
    this.config = config;
    this.table = config.mode === 'stub' ? StubTable.fromFile(config.tablePath!) : null;
    this.templateModel =
      config.mode === 'model' && config.templateModelPath
        ? loadModel(config.templateModelPath, config)
        : null;
    this.slotModel =
      config.mode === 'model' && config.slotModelPath
        ? loadModel(config.slotModelPath, config)
        : null;
  }

  /** Resolves to the bound port (useful with port 0). */
  start(port: number, host = '127.0.0.1'): Promise<number> {
    return new Promise((resolve, reject) => {
      const server = createServer((req, res) => this.handle(req, res));
      server.once('error', reject);
      server.listen(port, host, () => {
        this.server = server;
        const address = server.address();
        if (address === null || typeof address === 'string') {
          reject(new Error('could not determine bound port'));
          return;
        }
        resolve(address.port);
      });
    });
  }

  stop(): Promise<void> {
    return new Promise((resolve, reject) => {
      if (this.server === null) {
        resolve();
        return;
      }
      this.server.close((err) => (err ? reject(err) : resolve()));
      this.server = null;
    });
  }

  private handle(req: IncomingMessage, res: ServerResponse): void {
    if (req.method !== 'POST' || req.url !== '/v1/generate') {
      sendJson(res, 400, { error: 'expected POST /v1/generate' });
      return;
    }
    const chunks: Buffer[] = [];
    req.on('data', (chunk: Buffer) => chunks.push(chunk));
    req.on('end', () => {
      let body: unknown;
      try {
        body = JSON.parse(Buffer.concat(chunks).toString('utf-8'));
      } catch {
        sendJson(res, 400, { error: 'body is not valid JSON' });
        return;
      }
      const parsed = parseGenerateRequest(body);
      if (!parsed.ok) {
        sendJson(res, 400, { error: parsed.error });
        return;
      }
      this.answer(parsed.request, res);
    });
  }

  private answer(request: GenerateRequest, res: ServerResponse): void {
    if (this.config.mode === 'stub') {
      const output = this.table!.lookup(request.task, request.entity_name, request.slot_key);
      const response: GenerateResponse = { output, backend_id: this.config.backendId };
      sendJson(res, 200, response);
      return;
    }
    const model = request.task === 'template' ? this.templateModel : this.slotModel;
    if (model === null) {
      sendJson(res, 503, { error: `no ${request.task} model loaded` });
      return;
    }
    const result =
      this.config.beamSize > 1
        ? model.beamDecode(request.input, this.config.beamSize)
        : model.greedyDecode(request.input);
    const response: GenerateResponse = {
      output: result.output,
      backend_id: this.config.backendId,
      truncated: result.truncated,
    };
    sendJson(res, 200, response);
  }
}

function sendJson(res: ServerResponse, status: number, payload: object): void {
  const body = JSON.stringify(payload);
  res.writeHead(status, {
    'Content-Type': 'application/json; charset=utf-8',
    'Content-Length': Buffer.byteLength(body),
  });
  res.end(body);
}
