/**
 * Fine-tune the slot-value predictor on a corpus of templated records.
 *
 *   node dist/train_slot.js --corpus corpus.jsonl --out slot.json --epochs 1
 */

import { readCorpus, slotPairs } from './corpus.js';
import { parseTrainArgs, trainAndSave } from './train_common.js';

try {
  const args = parseTrainArgs(process.argv.slice(2));
  trainAndSave(slotPairs(readCorpus(args.corpusPath)), args, 'slot');
} catch (err) {
  console.error(`train_slot: ${err instanceof Error ? err.message : String(err)}`);
  process.exit(1);
}
