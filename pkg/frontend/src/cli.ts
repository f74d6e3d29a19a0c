#!/usr/bin/env node
/**
 * embed-sidecar: export per-sentence embeddings for a cleaned corpus.
 *
 *   embed-sidecar --corpus corpus.jsonl --output store.jsonl \
 *       [--model hash:0 | xenova:<model-id>] [--batch-size 64] \
 *       [--window 512] [--dump-tokens tokens.jsonl]
 */

import { parseArgs } from "node:util";

import { makeEncoder } from "./encoder.js";
import { exportEmbeddings, ExportJob } from "./export.js";

export async function main(argv: string[]): Promise<number> {
  let values;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        corpus: { type: "string" },
        output: { type: "string" },
        model: { type: "string", default: "hash:0" },
        "batch-size": { type: "string", default: "64" },
        window: { type: "string", default: "512" },
        "dump-tokens": { type: "string" },
      },
    }));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  if (!values.corpus || !values.output) {
    console.error("error: --corpus and --output are required");
    return 2;
  }
  const job: ExportJob = {
    corpusPath: values.corpus,
    model: values.model!,
    outputPath: values.output,
    batchSize: Number(values["batch-size"]),
    pooling: "token-mean",
    dumpTokensPath: values["dump-tokens"],
  };
  try {
    const encoder = makeEncoder(job.model, Number(values.window));
    const stats = await exportEmbeddings(job, encoder);
    console.error(
      `exported ${stats.sentences} sentences (dim ${stats.dim}, ` +
        `${stats.truncated} truncated) -> ${job.outputPath}`,
    );
    return 0;
  } catch (err) {
    console.error(`fatal: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
