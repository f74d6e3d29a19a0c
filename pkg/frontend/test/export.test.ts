import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { readCorpusSentences, sentenceKey } from "../src/corpus.js";
import { HashEncoder, makeEncoder, STORE_DIM } from "../src/encoder.js";
import { exportEmbeddings, meanPool } from "../src/export.js";

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "sidecar-"));
}

const RAW_POSTS = [
  {
    post_id: 1,
    post_type: "question",
    parent_id: null,
    title: "How to scale the gateway?",
    body:
      "<p>I am building a payment gateway. How should I shard it? " +
      'See <a href="https://example.com">the docs</a>.</p>',
    tags: ["architecture"],
    score: 4,
  },
  {
    post_id: 2,
    post_type: "answer",
    parent_id: 1,
    title: null,
    body: "<p>I would recommend sharding by tenant. Use a queue for spikes.</p>",
    tags: [],
    score: 2,
  },
];

/** Run the primary pipeline's ingest to get a canonical corpus file. */
function ingestWithPrimary(dir: string): string {
  const raw = join(dir, "raw.jsonl");
  const corpus = join(dir, "corpus.jsonl");
  writeFileSync(raw, RAW_POSTS.map((p) => JSON.stringify(p)).join("\n") + "\n");
  execFileSync("python3", [
    "-m", "archpairs", "ingest",
    "--input", raw,
    "--format", "jsonl",
    "--output", corpus,
    "--no-score-filter",
  ]);
  return corpus;
}

/** Ask the primary pipeline to enumerate its sentence keys for a corpus. */
function primaryKeys(corpus: string): string[] {
  const script = [
    "import sys",
    "from archpairs.corpus import load_corpus, sentence_key",
    "corpus = load_corpus(sys.argv[1])",
    "for arp in corpus.arps:",
    "    for s in arp.all_sentences():",
    "        print(sentence_key(s))",
  ].join("\n");
  const out = execFileSync("python3", ["-c", script, corpus], { encoding: "utf-8" });
  return out.trim().split("\n");
}

function readStore(path: string): Map<string, number[]> {
  const store = new Map<string, number[]>();
  for (const line of readFileSync(path, "utf-8").trim().split("\n")) {
    const obj = JSON.parse(line) as { key: string; dim: number; vec: number[] };
    expect(obj.dim).toBe(STORE_DIM);
    expect(obj.vec).toHaveLength(STORE_DIM);
    store.set(obj.key, obj.vec);
  }
  return store;
}

describe("corpus reader", () => {
  it("keys answers under their question post id", () => {
    const dir = tmp();
    const corpus = join(dir, "c.jsonl");
    writeFileSync(
      corpus,
      JSON.stringify({ post_id: 9, post_type: "question", parent_id: null,
                       title: "T", body: "One.\nTwo." }) + "\n" +
      JSON.stringify({ post_id: 12, post_type: "answer", parent_id: 9,
                       title: null, body: "Reply." }) + "\n",
    );
    const keys = readCorpusSentences(corpus).map((s) => s.key);
    expect(keys).toEqual(["9:q:-:0", "9:q:-:1", "9:a:12:0"]);
  });

  it("rejects corrupt corpora fatally, naming the path", () => {
    const dir = tmp();
    const corpus = join(dir, "broken.jsonl");
    writeFileSync(corpus, "{not json\n");
    expect(() => readCorpusSentences(corpus)).toThrowError(/broken\.jsonl/);
  });

  it("rejects missing files with the path", () => {
    expect(() => readCorpusSentences("/nope/missing.jsonl")).toThrowError(
      /missing\.jsonl/,
    );
  });
});

describe("export conformance", () => {
  it("writes dim-768 vectors for exactly the primary pipeline's key set", async () => {
    const dir = tmp();
    const corpus = ingestWithPrimary(dir);
    const storePath = join(dir, "store.jsonl");
    const stats = await exportEmbeddings(
      { corpusPath: corpus, model: "hash:0", outputPath: storePath,
        batchSize: 64, pooling: "token-mean" },
      new HashEncoder(0),
      () => {},
    );
    expect(stats.dim).toBe(768);
    expect(stats.sentences).toBe(5); // 3 question + 2 answer sentences

    const store = readStore(storePath);
    const expected = primaryKeys(corpus);
    expect(expected).toHaveLength(5);
    expect([...store.keys()].sort()).toEqual([...expected].sort());
  });

  it("pools by token mean within 1e-6 (token dump cross-check)", async () => {
    const dir = tmp();
    const corpus = ingestWithPrimary(dir);
    const storePath = join(dir, "store.jsonl");
    const dumpPath = join(dir, "tokens.jsonl");
    await exportEmbeddings(
      { corpusPath: corpus, model: "hash:0", outputPath: storePath,
        batchSize: 2, pooling: "token-mean", dumpTokensPath: dumpPath,
        dumpTokensLimit: 5 },
      new HashEncoder(0),
      () => {},
    );
    const store = readStore(storePath);
    const dumpLines = readFileSync(dumpPath, "utf-8").trim().split("\n");
    expect(dumpLines).toHaveLength(5);
    for (const line of dumpLines) {
      const dump = JSON.parse(line) as { key: string; vectors: number[][] };
      const pooled = meanPool(dump.vectors.map((v) => Float64Array.from(v)), 768);
      const stored = store.get(dump.key)!;
      for (let i = 0; i < 768; i++) {
        expect(Math.abs(pooled[i] - stored[i])).toBeLessThanOrEqual(1e-6);
      }
    }
  });

  it("is reproducible across runs", async () => {
    const dir = tmp();
    const corpus = ingestWithPrimary(dir);
    const runs: Map<string, number[]>[] = [];
    for (const name of ["a.jsonl", "b.jsonl"]) {
      const out = join(dir, name);
      await exportEmbeddings(
        { corpusPath: corpus, model: "hash:7", outputPath: out,
          batchSize: 3, pooling: "token-mean" },
        new HashEncoder(7),
        () => {},
      );
      runs.push(readStore(out));
    }
    for (const [key, vec] of runs[0]) {
      const other = runs[1].get(key)!;
      vec.forEach((x, i) => expect(Math.abs(x - other[i])).toBeLessThanOrEqual(1e-6));
    }
  });

  it("warns and truncates sentences beyond the encoder window", async () => {
    const dir = tmp();
    const corpus = join(dir, "c.jsonl");
    const longBody = Array.from({ length: 40 }, (_, i) => `tok${i}`).join(" ") + ".";
    writeFileSync(
      corpus,
      JSON.stringify({ post_id: 1, post_type: "question", parent_id: null,
                       title: "T", body: longBody }) + "\n",
    );
    const warnings: string[] = [];
    const stats = await exportEmbeddings(
      { corpusPath: corpus, model: "hash:0", outputPath: join(dir, "s.jsonl"),
        batchSize: 8, pooling: "token-mean" },
      new HashEncoder(0, 10),
      (msg) => warnings.push(msg),
    );
    expect(stats.truncated).toBe(1);
    expect(warnings[0]).toMatch(/1:q:-:0/);
  });
});

describe("encoders", () => {
  it("hash encoder keys off (text, seed) deterministically", async () => {
    const a = await new HashEncoder(1).encodeTokens("shard the gateway");
    const b = await new HashEncoder(1).encodeTokens("shard the gateway");
    const c = await new HashEncoder(2).encodeTokens("shard the gateway");
    expect(a.vectors).toStrictEqual(b.vectors);
    expect(a.vectors).not.toStrictEqual(c.vectors);
  });

  it("keeps placeholders whole", async () => {
    const enc = await new HashEncoder(0).encodeTokens("See [external-link].");
    expect(enc.tokens).toEqual(["See", "[external-link]"]);
  });

  it("rejects unknown model identifiers", () => {
    expect(() => makeEncoder("bert-large")).toThrowError(/unknown model/);
  });

  it("transformer encoder fails fatally when the package is absent", async () => {
    const enc = makeEncoder("xenova:some/model");
    await expect(enc.encodeTokens("text")).rejects.toThrowError(/model load failure/);
  });

  it("sentence key helper matches the wire scheme", () => {
    expect(sentenceKey(5, "q", null, 2)).toBe("5:q:-:2");
    expect(sentenceKey(5, "a", 11, 0)).toBe("5:a:11:0");
  });
});
