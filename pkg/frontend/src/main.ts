/**
 * CLI entry: start the generate service.
 *
 *   node dist/main.js --mode stub --table table.jsonl --port 0
 *   node dist/main.js --mode model --slot-model slot.json \
 *       --template-model template.json --beam-size 3 --port 8700
 *
 * With --port 0 the OS picks a free port; the bound address is printed
 * either way so callers can parse it.
 */

import { DEFAULT_SERVER_CONFIG, ModelServer, type ServerConfig } from './server.js';

export function parseArgs(argv: string[]): { config: ServerConfig; port: number } {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i]!;
    const value = argv[i + 1];
    if (!flag.startsWith('--') || value === undefined) {
      throw new Error(`expected "--flag value" pairs, got ${JSON.stringify(argv)}`);
    }
    flags.set(flag.slice(2), value);
  }
  const mode = flags.get('mode') ?? 'stub';
  if (mode !== 'stub' && mode !== 'model') {
    throw new Error(`--mode must be stub or model, got ${mode}`);
  }
  const config: ServerConfig = {
    ...DEFAULT_SERVER_CONFIG,
    mode,
    tablePath: flags.get('table'),
    templateModelPath: flags.get('template-model'),
    slotModelPath: flags.get('slot-model'),
    backendId: flags.get('backend-id') ?? DEFAULT_SERVER_CONFIG.backendId,
  };
  if (flags.has('beam-size')) config.beamSize = Number(flags.get('beam-size'));
  if (flags.has('max-input-tokens')) config.maxInputTokens = Number(flags.get('max-input-tokens'));
  if (flags.has('max-output-tokens')) {
    config.maxOutputTokens = Number(flags.get('max-output-tokens'));
  }
  const port = flags.has('port') ? Number(flags.get('port')) : 8700;
  if (!Number.isInteger(port) || port < 0 || port > 65535) {
    throw new Error(`--port must be an integer in [0, 65535]`);
  }
  return { config, port };
}

async function main(): Promise<void> {
  const { config, port } = parseArgs(process.argv.slice(2));
  const server = new ModelServer(config);
  const bound = await server.start(port);
  console.log(`model-server listening on http://127.0.0.1:${bound}`);
  const shutdown = () => {
    void server.stop().then(() => process.exit(0));
  };
  process.on('SIGINT', shutdown);
  process.on('SIGTERM', shutdown);
}

const isDirectRun =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split('/').pop()!);
if (isDirectRun) {
  main().catch((err) => {
    console.error(`model-server: ${err instanceof Error ? err.message : String(err)}`);
    process.exit(1);
  });
}
