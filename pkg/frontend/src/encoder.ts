/**
 * Token-level encoders. The exporter always pools token vectors by
 * arithmetic mean, so every encoder exposes per-token vectors.
 *
 * Model identifiers:
 *   hash[:seed]        deterministic 768-dim feature-hash encoder (tests,
 *                      offline runs)
 *   xenova:<model-id>  transformer encoder via @xenova/transformers
 *                      (install separately; any checkpoint path works, so a
 *                      forum-domain fine-tune can be dropped in)
 */

import { createHash } from "node:crypto";

export const STORE_DIM = 768;

export interface TokenEncoding {
  tokens: string[];
  vectors: Float64Array[];
  truncated: boolean;
}

export interface Encoder {
  readonly dim: number;
  readonly window: number;
  encodeTokens(text: string): Promise<TokenEncoding>;
}

const TOKEN_RE = /\[(?:external-link|code-snippet|figure|table)\]|\w+(?:[.'-]\w+)*|\?/g;

export class HashEncoder implements Encoder {
  readonly dim = STORE_DIM;
  readonly window: number;
  private readonly seed: number;

  constructor(seed = 0, window = 512) {
    this.seed = seed;
    this.window = window;
  }

  private tokenVector(token: string): Float64Array {
    const digest = createHash("sha256")
      .update(`${this.seed}:${token.toLowerCase()}`)
      .digest();
    const bucket = Number(digest.readBigUInt64BE(0) % BigInt(this.dim));
    const sign = digest[8] & 1 ? 1.0 : -1.0;
    const vec = new Float64Array(this.dim);
    vec[bucket] = sign;
    return vec;
  }

  async encodeTokens(text: string): Promise<TokenEncoding> {
    const all = text.match(TOKEN_RE) ?? [];
    const truncated = all.length > this.window;
    const tokens = all.slice(0, this.window);
    return {
      tokens,
      vectors: tokens.map((t) => this.tokenVector(t)),
      truncated,
    };
  }
}

/** Transformer-backed encoder; constructing it requires the optional dependency. */
export class XenovaEncoder implements Encoder {
  readonly dim = STORE_DIM;
  readonly window: number;
  private extractor: ((text: string, opts: object) => Promise<unknown>) | null = null;
  private readonly model: string;

  constructor(model: string, window = 512) {
    this.model = model;
    this.window = window;
  }

  private async load(): Promise<void> {
    if (this.extractor) return;
    let mod: { pipeline: Function };
    try {
      mod = (await import("@xenova/transformers" as string)) as never;
    } catch (err) {
      throw new Error(
        `model load failure: @xenova/transformers is not installed ` +
          `(npm install @xenova/transformers): ${(err as Error).message}`,
      );
    }
    try {
      this.extractor = (await mod.pipeline("feature-extraction", this.model)) as never;
    } catch (err) {
      throw new Error(
        `model load failure for ${this.model}: ${(err as Error).message}`,
      );
    }
  }

  async encodeTokens(text: string): Promise<TokenEncoding> {
    await this.load();
    // pooling "none" keeps per-token vectors; the exporter does the mean
    const output = (await this.extractor!(text, { pooling: "none" })) as {
      dims: number[];
      data: Float32Array;
    };
    const [, seqLen, dim] = output.dims.length === 3 ? output.dims : [1, ...output.dims];
    if (dim !== this.dim) {
      throw new Error(`model emits dim ${dim}, expected ${this.dim}`);
    }
    const truncated = seqLen > this.window;
    const keep = Math.min(seqLen, this.window);
    const vectors: Float64Array[] = [];
    for (let t = 0; t < keep; t++) {
      vectors.push(Float64Array.from(output.data.subarray(t * dim, (t + 1) * dim)));
    }
    return { tokens: Array.from({ length: keep }, (_, i) => `#${i}`), vectors, truncated };
  }
}

export function makeEncoder(model: string, window = 512): Encoder {
  if (model === "hash" || model.startsWith("hash:")) {
    const seed = model.includes(":") ? Number(model.split(":")[1]) : 0;
    if (!Number.isFinite(seed)) {
      throw new Error(`bad hash encoder seed in ${model}`);
    }
    return new HashEncoder(seed, window);
  }
  if (model.startsWith("xenova:")) {
    return new XenovaEncoder(model.slice("xenova:".length), window);
  }
  throw new Error(`unknown model identifier ${model} (use hash[:seed] or xenova:<id>)`);
}
