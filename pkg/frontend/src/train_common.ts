/** Shared argument handling for the two training scripts. */

import { writeFileSync } from 'node:fs';
import { DEFAULT_CONFIG, Seq2SeqModel, Vocab, type ModelConfig, type TrainingPair } from './model.js';

export interface TrainArgs {
  corpusPath: string;
  outPath: string;
  epochs: number;
  config: Partial<ModelConfig>;
}

export function parseTrainArgs(argv: string[]): TrainArgs {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i]!;
    const value = argv[i + 1];
    if (!flag.startsWith('--') || value === undefined) {
      throw new Error(`expected "--flag value" pairs, got ${JSON.stringify(argv)}`);
    }
    flags.set(flag.slice(2), value);
  }
  const corpusPath = flags.get('corpus');
  const outPath = flags.get('out');
  if (!corpusPath || !outPath) throw new Error('--corpus and --out are required');

  const config: Partial<ModelConfig> = {};
  if (flags.has('seed')) config.seed = Number(flags.get('seed'));
  if (flags.has('lr')) config.learningRate = Number(flags.get('lr'));
  if (flags.has('embed-dim')) config.embedDim = Number(flags.get('embed-dim'));
  if (flags.has('hidden-dim')) config.hiddenDim = Number(flags.get('hidden-dim'));
  if (flags.has('label-smoothing')) config.labelSmoothing = Number(flags.get('label-smoothing'));
  if (flags.has('max-input-tokens')) config.maxInputTokens = Number(flags.get('max-input-tokens'));
  if (flags.has('max-output-tokens')) {
    config.maxOutputTokens = Number(flags.get('max-output-tokens'));
  }
  const smoothing = config.labelSmoothing ?? DEFAULT_CONFIG.labelSmoothing;
  if (smoothing < 0 || smoothing >= 1) {
    throw new Error(`--label-smoothing must be in [0, 1), got ${smoothing}`);
  }
  const epochs = flags.has('epochs') ? Number(flags.get('epochs')) : 1;
  if (!Number.isInteger(epochs) || epochs < 1) {
    throw new Error(`--epochs must be a positive integer`);
  }
  return { corpusPath, outPath, epochs, config };
}

export function trainAndSave(pairs: TrainingPair[], args: TrainArgs, label: string): void {
  if (pairs.length === 0) throw new Error(`no ${label} training pairs in ${args.corpusPath}`);
  const vocab = Vocab.fromTexts(pairs.flatMap((p) => [p.source, p.target]));
  const model = new Seq2SeqModel(vocab, args.config);
  for (let epoch = 1; epoch <= args.epochs; epoch++) {
    const loss = model.trainEpoch(pairs);
    console.log(`epoch ${epoch}/${args.epochs}: ${pairs.length} ${label} pairs, loss ${loss.toFixed(4)}`);
  }
  writeFileSync(args.outPath, JSON.stringify(model.toJSON()) + '\n', 'utf-8');
  console.log(`wrote ${label} model to ${args.outPath}`);
}
