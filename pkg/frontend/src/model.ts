/**
 * Word-level sequence-to-sequence model, small enough to train on a CPU
 * in milliseconds and simple enough to have no dependencies.
 *
 * The encoder is the average of the source token embeddings; the decoder
 * is a single recurrent layer conditioned on that context vector:
 *
 *     h_t = tanh(Wh h_{t-1} + We emb(y_{t-1}) + Wc c + bh)
 *     p_t = softmax(Wo h_t + bo)
 *
 * Training is per-example SGD on label-smoothed cross-entropy with full
 * backpropagation through time. Inference offers greedy and beam decoding.
 * Everything is deterministic under a fixed seed.
 */

import { mulberry32 } from './rng.js';

export const PAD = 0;
export const BOS = 1;
export const EOS = 2;
export const UNK = 3;
const SPECIALS = ['<pad>', '<bos>', '<eos>', '<unk>'];

export function tokenize(text: string): string[] {
  return text.split(/\s+/).filter((t) => t.length > 0);
}

export class Vocab {
  readonly tokens: string[];
  private readonly index: Map<string, number>;

  constructor(tokens: string[]) {
    this.tokens = tokens;
    this.index = new Map(tokens.map((t, i) => [t, i]));
  }

  /** Specials first, then corpus words by frequency, ties alphabetical. */
  static fromTexts(texts: string[], maxSize = 5000): Vocab {
    const counts = new Map<string, number>();
    for (const text of texts) {
      for (const token of tokenize(text)) {
        counts.set(token, (counts.get(token) ?? 0) + 1);
      }
    }
    const words = [...counts.entries()]
      .sort((a, b) => b[1] - a[1] || (a[0] < b[0] ? -1 : 1))
      .slice(0, Math.max(0, maxSize - SPECIALS.length))
      .map(([word]) => word);
    return new Vocab([...SPECIALS, ...words]);
  }

  get size(): number {
    return this.tokens.length;
  }

  encode(text: string): number[] {
    return tokenize(text).map((t) => this.index.get(t) ?? UNK);
  }

  decode(ids: number[]): string {
    return ids
      .filter((id) => id !== PAD && id !== BOS && id !== EOS)
      .map((id) => this.tokens[id] ?? '<unk>')
      .join(' ');
  }
}

export interface ModelConfig {
  embedDim: number;
  hiddenDim: number;
  learningRate: number;
  /** Weight moved from the gold label to the uniform distribution. */
  labelSmoothing: number;
  maxInputTokens: number;
  maxOutputTokens: number;
  seed: number;
}

export const DEFAULT_CONFIG: ModelConfig = {
  embedDim: 24,
  hiddenDim: 32,
  learningRate: 0.1,
  labelSmoothing: 0.1,
  maxInputTokens: 128,
  maxOutputTokens: 24,
  seed: 0,
};

export interface TrainingPair {
  source: string;
  target: string;
}

export interface DecodeResult {
  output: string;
  /** True when the source exceeded maxInputTokens and was cut. */
  truncated: boolean;
}

type Matrix = number[][];

function zeros(rows: number, cols: number): Matrix {
  return Array.from({ length: rows }, () => new Array<number>(cols).fill(0));
}

function randomMatrix(rows: number, cols: number, rng: () => number): Matrix {
  const scale = 1 / Math.sqrt(cols);
  return Array.from({ length: rows }, () =>
    Array.from({ length: cols }, () => (rng() * 2 - 1) * scale),
  );
}

function matVec(m: Matrix, v: number[], out: number[]): void {
  for (let r = 0; r < m.length; r++) {
    const row = m[r]!;
    let sum = 0;
    for (let c = 0; c < row.length; c++) sum += row[c]! * v[c]!;
    out[r] = sum;
  }
}

/** out += mᵀ·v, used to push gradients back through a matVec. */
function matVecTransposeAdd(m: Matrix, v: number[], out: number[]): void {
  for (let r = 0; r < m.length; r++) {
    const row = m[r]!;
    const scale = v[r]!;
    for (let c = 0; c < row.length; c++) out[c]! += row[c]! * scale;
  }
}

function softmax(logits: number[]): number[] {
  let max = -Infinity;
  for (const x of logits) if (x > max) max = x;
  const exps = logits.map((x) => Math.exp(x - max));
  const total = exps.reduce((a, b) => a + b, 0);
  return exps.map((x) => x / total);
}

interface StepCache {
  prevToken: number;
  hPrev: number[];
  h: number[];
  probs: number[];
  target: number;
}

export class Seq2SeqModel {
  readonly config: ModelConfig;
  readonly vocab: Vocab;
  private embed: Matrix; // V x e
  private Wh: Matrix; // h x h
  private We: Matrix; // h x e
  private Wc: Matrix; // h x e
  private bh: number[];
  private Wo: Matrix; // V x h
  private bo: number[];

  constructor(vocab: Vocab, config: Partial<ModelConfig> = {}) {
    this.config = { ...DEFAULT_CONFIG, ...config };
    this.vocab = vocab;
    const { embedDim: e, hiddenDim: h } = this.config;
    const rng = mulberry32(this.config.seed);
    this.embed = randomMatrix(vocab.size, e, rng);
    this.Wh = randomMatrix(h, h, rng);
    this.We = randomMatrix(h, e, rng);
    this.Wc = randomMatrix(h, e, rng);
    this.bh = new Array<number>(h).fill(0);
    this.Wo = randomMatrix(vocab.size, h, rng);
    this.bo = new Array<number>(vocab.size).fill(0);
  }

  /** Average source embedding; cut to maxInputTokens first. */
  private encode(sourceIds: number[]): { context: number[]; used: number[]; truncated: boolean } {
    const truncated = sourceIds.length > this.config.maxInputTokens;
    const used = truncated ? sourceIds.slice(0, this.config.maxInputTokens) : sourceIds;
    const context = new Array<number>(this.config.embedDim).fill(0);
    for (const id of used) {
      const row = this.embed[id]!;
      for (let i = 0; i < context.length; i++) context[i]! += row[i]!;
    }
    if (used.length > 0) {
      for (let i = 0; i < context.length; i++) context[i]! /= used.length;
    }
    return { context, used, truncated };
  }

  private step(hPrev: number[], prevToken: number, context: number[]): { h: number[]; logits: number[] } {
    const h = this.config.hiddenDim;
    const pre = new Array<number>(h).fill(0);
    const tmp = new Array<number>(h).fill(0);
    matVec(this.Wh, hPrev, tmp);
    for (let i = 0; i < h; i++) pre[i]! += tmp[i]!;
    matVec(this.We, this.embed[prevToken]!, tmp);
    for (let i = 0; i < h; i++) pre[i]! += tmp[i]!;
    matVec(this.Wc, context, tmp);
    for (let i = 0; i < h; i++) pre[i]! += tmp[i]! + this.bh[i]!;
    const hidden = pre.map(Math.tanh);
    const logits = new Array<number>(this.vocab.size).fill(0);
    matVec(this.Wo, hidden, logits);
    for (let i = 0; i < logits.length; i++) logits[i]! += this.bo[i]!;
    return { h: hidden, logits };
  }

  /** One SGD update on a single pair; returns its mean token loss. */
  trainPair(pair: TrainingPair): number {
    const sourceIds = this.vocab.encode(pair.source);
    const targetIds = [...this.vocab.encode(pair.target), EOS];
    const { context, used } = this.encode(sourceIds);
    const V = this.vocab.size;
    const { labelSmoothing: eps, learningRate: lr, hiddenDim } = this.config;

    // Forward with teacher forcing.
    const steps: StepCache[] = [];
    let hPrev = new Array<number>(hiddenDim).fill(0);
    let prevToken = BOS;
    let loss = 0;
    for (const target of targetIds) {
      const { h, logits } = this.step(hPrev, prevToken, context);
      const probs = softmax(logits);
      // Label-smoothed CE: -(1-eps)·log p(gold) - eps/V·Σ log p(k)
      let smoothedSum = 0;
      for (let k = 0; k < V; k++) smoothedSum += Math.log(probs[k]! + 1e-12);
      loss += -(1 - eps) * Math.log(probs[target]! + 1e-12) - (eps / V) * smoothedSum;
      steps.push({ prevToken, hPrev, h, probs, target });
      hPrev = h;
      prevToken = target;
    }

    // Backward through time.
    const dEmbed = new Map<number, number[]>();
    const addEmbedGrad = (token: number, grad: number[]) => {
      let acc = dEmbed.get(token);
      if (!acc) {
        acc = new Array<number>(this.config.embedDim).fill(0);
        dEmbed.set(token, acc);
      }
      for (let i = 0; i < grad.length; i++) acc[i]! += grad[i]!;
    };
    const dWh = zeros(hiddenDim, hiddenDim);
    const dWe = zeros(hiddenDim, this.config.embedDim);
    const dWc = zeros(hiddenDim, this.config.embedDim);
    const dbh = new Array<number>(hiddenDim).fill(0);
    const dWo = zeros(V, hiddenDim);
    const dbo = new Array<number>(V).fill(0);
    const dContext = new Array<number>(this.config.embedDim).fill(0);
    const scale = 1 / targetIds.length;

    let carry = new Array<number>(hiddenDim).fill(0);
    for (let t = steps.length - 1; t >= 0; t--) {
      const { prevToken: prev, hPrev: hp, h, probs, target } = steps[t]!;
      // d logits of smoothed CE: p - q, with q = (1-eps)·onehot + eps/V.
      const dLogits = new Array<number>(V);
      for (let k = 0; k < V; k++) {
        dLogits[k] = (probs[k]! - eps / V - (k === target ? 1 - eps : 0)) * scale;
      }
      const dh = [...carry];
      for (let k = 0; k < V; k++) {
        const g = dLogits[k]!;
        if (g === 0) continue;
        dbo[k]! += g;
        const woRow = this.Wo[k]!;
        const dwoRow = dWo[k]!;
        for (let i = 0; i < hiddenDim; i++) {
          dwoRow[i]! += g * h[i]!;
          dh[i]! += woRow[i]! * g;
        }
      }
      const dPre = new Array<number>(hiddenDim);
      for (let i = 0; i < hiddenDim; i++) dPre[i] = dh[i]! * (1 - h[i]! * h[i]!);

      const prevEmb = this.embed[prev]!;
      for (let i = 0; i < hiddenDim; i++) {
        const g = dPre[i]!;
        dbh[i]! += g;
        const dwhRow = dWh[i]!;
        for (let j = 0; j < hiddenDim; j++) dwhRow[j]! += g * hp[j]!;
        const dweRow = dWe[i]!;
        const dwcRow = dWc[i]!;
        for (let j = 0; j < this.config.embedDim; j++) {
          dweRow[j]! += g * prevEmb[j]!;
          dwcRow[j]! += g * context[j]!;
        }
      }
      const dPrevEmb = new Array<number>(this.config.embedDim).fill(0);
      matVecTransposeAdd(this.We, dPre, dPrevEmb);
      addEmbedGrad(prev, dPrevEmb);
      matVecTransposeAdd(this.Wc, dPre, dContext);
      carry = new Array<number>(hiddenDim).fill(0);
      matVecTransposeAdd(this.Wh, dPre, carry);
    }

    // Context was an average, so each source embedding gets 1/n of it.
    if (used.length > 0) {
      const perToken = dContext.map((g) => g / used.length);
      for (const id of used) addEmbedGrad(id, perToken);
    }

    // SGD step.
    const apply = (m: Matrix, g: Matrix) => {
      for (let r = 0; r < m.length; r++) {
        const row = m[r]!;
        const gRow = g[r]!;
        for (let c = 0; c < row.length; c++) row[c]! -= lr * gRow[c]!;
      }
    };
    apply(this.Wh, dWh);
    apply(this.We, dWe);
    apply(this.Wc, dWc);
    apply(this.Wo, dWo);
    for (let i = 0; i < hiddenDim; i++) this.bh[i]! -= lr * dbh[i]!;
    for (let k = 0; k < V; k++) this.bo[k]! -= lr * dbo[k]!;
    for (const [token, grad] of dEmbed) {
      const row = this.embed[token]!;
      for (let i = 0; i < row.length; i++) row[i]! -= lr * grad[i]!;
    }

    return loss / targetIds.length;
  }

  /** Mean per-pair loss over one pass, in the given order. */
  trainEpoch(pairs: TrainingPair[]): number {
    if (pairs.length === 0) throw new Error('no training pairs');
    let total = 0;
    for (const pair of pairs) total += this.trainPair(pair);
    return total / pairs.length;
  }

  greedyDecode(source: string): DecodeResult {
    const { context, truncated } = this.encode(this.vocab.encode(source));
    let hPrev = new Array<number>(this.config.hiddenDim).fill(0);
    let prevToken = BOS;
    const out: number[] = [];
    for (let t = 0; t < this.config.maxOutputTokens; t++) {
      const { h, logits } = this.step(hPrev, prevToken, context);
      let best = 0;
      for (let k = 1; k < logits.length; k++) {
        if (logits[k]! > logits[best]!) best = k;
      }
      if (best === EOS) break;
      out.push(best);
      hPrev = h;
      prevToken = best;
    }
    return { output: this.vocab.decode(out), truncated };
  }

  /** Length-normalized beam search; beamSize 1 equals greedy. */
  beamDecode(source: string, beamSize: number): DecodeResult {
    if (beamSize < 1) throw new Error(`beamSize must be >= 1, got ${beamSize}`);
    const { context, truncated } = this.encode(this.vocab.encode(source));
    interface Beam {
      tokens: number[];
      logProb: number;
      h: number[];
      prevToken: number;
      done: boolean;
    }
    let beams: Beam[] = [
      {
        tokens: [],
        logProb: 0,
        h: new Array<number>(this.config.hiddenDim).fill(0),
        prevToken: BOS,
        done: false,
      },
    ];
    for (let t = 0; t < this.config.maxOutputTokens; t++) {
      const next: Beam[] = [];
      for (const beam of beams) {
        if (beam.done) {
          next.push(beam);
          continue;
        }
        const { h, logits } = this.step(beam.h, beam.prevToken, context);
        const probs = softmax(logits);
        const ranked = probs
          .map((p, k) => [k, p] as const)
          .sort((a, b) => b[1] - a[1])
          .slice(0, beamSize);
        for (const [k, p] of ranked) {
          const logProb = beam.logProb + Math.log(p + 1e-12);
          if (k === EOS) {
            next.push({ ...beam, logProb, done: true });
          } else {
            next.push({ tokens: [...beam.tokens, k], logProb, h, prevToken: k, done: false });
          }
        }
      }
      const norm = (b: Beam) => b.logProb / (b.tokens.length + 1);
      next.sort((a, b) => norm(b) - norm(a));
      beams = next.slice(0, beamSize);
      if (beams.every((b) => b.done)) break;
    }
    const norm = (b: Beam) => b.logProb / (b.tokens.length + 1);
    const best = beams.reduce((a, b) => (norm(b) > norm(a) ? b : a));
    return { output: this.vocab.decode(best.tokens), truncated };
  }

  toJSON(): object {
    return {
      format: 'seq2seq-v1',
      config: this.config,
      vocab: this.vocab.tokens,
      params: {
        embed: this.embed,
        Wh: this.Wh,
        We: this.We,
        Wc: this.Wc,
        bh: this.bh,
        Wo: this.Wo,
        bo: this.bo,
      },
    };
  }

  static fromJSON(data: unknown): Seq2SeqModel {
    const record = data as {
      format?: string;
      config: ModelConfig;
      vocab: string[];
      params: {
        embed: Matrix;
        Wh: Matrix;
        We: Matrix;
        Wc: Matrix;
        bh: number[];
        Wo: Matrix;
        bo: number[];
      };
    };
    if (record.format !== 'seq2seq-v1') {
      throw new Error(`unsupported model format: ${String(record.format)}`);
    }
    const model = new Seq2SeqModel(new Vocab(record.vocab), record.config);
    model.embed = record.params.embed;
    model.Wh = record.params.Wh;
    model.We = record.params.We;
    model.Wc = record.params.Wc;
    model.bh = record.params.bh;
    model.Wo = record.params.Wo;
    model.bo = record.params.bo;
    return model;
  }
}
