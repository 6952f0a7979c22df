/**
 * Reads the pipeline's corpus JSONL and derives training pairs.
 *
 * Slot pairs go from the query serialization
 * "[CLS] entity key [SEP] documents [SEP]" to the fact value; template
 * pairs go from the newline-joined documents to the template markup.
 * Both match the inputs the server will later receive on /v1/generate.
 */

import { readFileSync } from 'node:fs';
import type { TrainingPair } from './model.js';

export interface CorpusRecord {
  id: string;
  entity_name: string;
  documents: string[];
  summary: string;
  facts: { key: string; value: string }[];
  template: string | null;
  split?: string;
}

export function readCorpus(path: string): CorpusRecord[] {
  const records: CorpusRecord[] = [];
  const lines = readFileSync(path, 'utf-8').split('\n');
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i]!.trim();
    if (line === '') continue;
    let data: unknown;
    try {
      data = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path} line ${i + 1}: invalid JSON: ${String(err)}`);
    }
    const row = data as Record<string, unknown>;
    if (
      typeof row['id'] !== 'string' ||
      typeof row['entity_name'] !== 'string' ||
      !Array.isArray(row['documents']) ||
      typeof row['summary'] !== 'string' ||
      !Array.isArray(row['facts'])
    ) {
      throw new Error(`${path} line ${i + 1}: bad corpus record`);
    }
    records.push(row as unknown as CorpusRecord);
  }
  return records;
}

const SLOT_PATTERN = /\[SLT\]\s+(.+?)\s+\[\/SLT\]/g;

export function slotKeysOf(template: string): string[] {
  const keys: string[] = [];
  for (const match of template.matchAll(SLOT_PATTERN)) {
    const key = match[1]!;
    if (!keys.includes(key)) keys.push(key);
  }
  return keys;
}

export function slotQueryInput(entityName: string, key: string, documents: string[]): string {
  return `[CLS] ${entityName} ${key} [SEP] ${documents.join('\n')} [SEP]`;
}

export function slotPairs(records: CorpusRecord[]): TrainingPair[] {
  const pairs: TrainingPair[] = [];
  for (const record of records) {
    if (record.template === null) continue;
    const values = new Map(record.facts.map((f) => [f.key, f.value]));
    for (const key of slotKeysOf(record.template)) {
      const value = values.get(key);
      if (value === undefined || value === '') continue;
      pairs.push({
        source: slotQueryInput(record.entity_name, key, record.documents),
        target: value,
      });
    }
  }
  return pairs;
}

export function templatePairs(records: CorpusRecord[]): TrainingPair[] {
  const pairs: TrainingPair[] = [];
  for (const record of records) {
    if (record.template === null) continue;
    pairs.push({ source: record.documents.join('\n'), target: record.template });
  }
  return pairs;
}
