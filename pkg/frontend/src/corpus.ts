/**
 * Reader for the canonical corpus format: one json object per post, bodies
 * already cleaned with one sentence per line. Sentence keys follow the
 * pipeline's scheme "<post_id>:<q|a>:<answer_id|->:<index>"; answer
 * sentences are keyed under their question's post id.
 */

import { readFileSync } from "node:fs";

export interface CorpusSentence {
  key: string;
  text: string;
}

interface PostRow {
  post_id: number;
  post_type: "question" | "answer";
  parent_id: number | null;
  title: string | null;
  body: string;
}

export function sentenceKey(
  postId: number,
  side: "q" | "a",
  answerId: number | null,
  index: number,
): string {
  return `${postId}:${side}:${answerId ?? "-"}:${index}`;
}

function bodySentences(body: string): string[] {
  return body
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
}

/** Enumerate every sentence of a corpus file in document order. */
export function readCorpusSentences(path: string): CorpusSentence[] {
  let raw: string;
  try {
    raw = readFileSync(path, "utf-8");
  } catch (err) {
    throw new Error(`cannot read corpus ${path}: ${(err as Error).message}`);
  }
  const sentences: CorpusSentence[] = [];
  const lines = raw.split("\n");
  for (let lineno = 0; lineno < lines.length; lineno++) {
    const line = lines[lineno].trim();
    if (!line) continue;
    let row: PostRow;
    try {
      row = JSON.parse(line) as PostRow;
    } catch (err) {
      throw new Error(
        `corrupt corpus ${path} at line ${lineno + 1}: ${(err as Error).message}`,
      );
    }
    if (
      typeof row.post_id !== "number" ||
      (row.post_type !== "question" && row.post_type !== "answer")
    ) {
      throw new Error(`corrupt corpus ${path} at line ${lineno + 1}: bad post row`);
    }
    const texts = bodySentences(row.body ?? "");
    if (row.post_type === "question") {
      texts.forEach((text, i) =>
        sentences.push({ key: sentenceKey(row.post_id, "q", null, i), text }),
      );
    } else {
      if (typeof row.parent_id !== "number") {
        throw new Error(
          `corrupt corpus ${path} at line ${lineno + 1}: answer without parent_id`,
        );
      }
      texts.forEach((text, i) =>
        sentences.push({
          key: sentenceKey(row.parent_id as number, "a", row.post_id, i),
          text,
        }),
      );
    }
  }
  return sentences;
}
