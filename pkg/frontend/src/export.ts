/**
 * Export job: corpus file -> embedding store file.
 *
 * One store line per sentence key, vectors mean-pooled over token vectors
 * (pooling is fixed to token-mean). Sentences longer than the encoder
 * window are truncated with a warning. The optional token dump writes the
 * per-token vectors of the first sentences so pooling can be re-verified
 * independently.
 */

import { createWriteStream } from "node:fs";
import { once } from "node:events";

import { readCorpusSentences } from "./corpus.js";
import { Encoder } from "./encoder.js";

export interface ExportJob {
  corpusPath: string;
  model: string;
  outputPath: string;
  batchSize: number;
  /** pooling is always token-mean; kept explicit for the manifest line */
  pooling: "token-mean";
  dumpTokensPath?: string;
  dumpTokensLimit?: number;
}

export interface ExportStats {
  sentences: number;
  truncated: number;
  dim: number;
}

export function meanPool(vectors: Float64Array[], dim: number): Float64Array {
  const out = new Float64Array(dim);
  if (vectors.length === 0) return out; // token-free sentence -> zero vector
  for (const vec of vectors) {
    for (let i = 0; i < dim; i++) out[i] += vec[i];
  }
  for (let i = 0; i < dim; i++) out[i] /= vectors.length;
  return out;
}

async function writeLine(stream: NodeJS.WritableStream, line: string): Promise<void> {
  if (!stream.write(line)) {
    await once(stream, "drain");
  }
}

export async function exportEmbeddings(
  job: ExportJob,
  encoder: Encoder,
  log: (msg: string) => void = console.error,
): Promise<ExportStats> {
  const sentences = readCorpusSentences(job.corpusPath);
  const out = createWriteStream(job.outputPath, { encoding: "utf-8" });
  const dump = job.dumpTokensPath
    ? createWriteStream(job.dumpTokensPath, { encoding: "utf-8" })
    : null;
  const dumpLimit = job.dumpTokensLimit ?? 16;

  let truncated = 0;
  let dumped = 0;
  for (let start = 0; start < sentences.length; start += job.batchSize) {
    const batch = sentences.slice(start, start + job.batchSize);
    for (const sentence of batch) {
      const enc = await encoder.encodeTokens(sentence.text);
      if (enc.truncated) {
        truncated++;
        log(`warning: sentence ${sentence.key} exceeds the encoder window; truncated`);
      }
      const pooled = meanPool(enc.vectors, encoder.dim);
      await writeLine(
        out,
        JSON.stringify({ key: sentence.key, dim: encoder.dim, vec: Array.from(pooled) }) +
          "\n",
      );
      if (dump && dumped < dumpLimit) {
        await writeLine(
          dump,
          JSON.stringify({
            key: sentence.key,
            tokens: enc.tokens,
            vectors: enc.vectors.map((v) => Array.from(v)),
          }) + "\n",
        );
        dumped++;
      }
    }
  }
  out.end();
  await once(out, "finish");
  if (dump) {
    dump.end();
    await once(dump, "finish");
  }
  return { sentences: sentences.length, truncated, dim: encoder.dim };
}
