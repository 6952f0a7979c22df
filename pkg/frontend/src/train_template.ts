/**
 * Fine-tune the template generator on (documents, template markup) pairs.
 *
 *   node dist/train_template.js --corpus corpus.jsonl --out template.json --epochs 1
 */

import { readCorpus, templatePairs } from './corpus.js';
import { parseTrainArgs, trainAndSave } from './train_common.js';

try {
  const args = parseTrainArgs(process.argv.slice(2));
  trainAndSave(templatePairs(readCorpus(args.corpusPath)), args, 'template');
} catch (err) {
  console.error(`train_template: ${err instanceof Error ? err.message : String(err)}`);
  process.exit(1);
}
