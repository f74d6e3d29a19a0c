"""Assemble cleaned question threads (title + question/answer sentences).

The canonical on-disk corpus is the jsonl post format with *cleaned* bodies:
placeholder-substituted text, one sentence per line. Re-parsing such a file
reproduces the same thread structures exactly, which is what downstream
embedding exporters rely on for key agreement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from ..errors import LinkageError
from .markup import strip_markup, substitute_placeholders
from .posts import ANSWER_POST, QUESTION_POST, RawPost, parse_posts, post_to_obj
from .sentences import ANSWER, QUESTION, Sentence, segment_sentences


@dataclass(frozen=True)
class ARP:
    """A question thread: title, question sentences, per-answer sentences."""

    post_id: int
    title: str
    question_sentences: tuple[Sentence, ...]
    answers: tuple[tuple[int, tuple[Sentence, ...]], ...]

    def __post_init__(self):
        if not self.question_sentences:
            raise LinkageError(f"post {self.post_id}: no question sentences")
        for s in self.question_sentences:
            if s.post_id != self.post_id or s.origin != QUESTION or s.answer_id is not None:
                raise LinkageError(f"post {self.post_id}: stray question sentence {s}")
        for answer_id, sents in self.answers:
            for s in sents:
                if s.post_id != self.post_id or s.origin != ANSWER or s.answer_id != answer_id:
                    raise LinkageError(f"post {self.post_id}: stray answer sentence {s}")

    def all_sentences(self) -> list[Sentence]:
        out = list(self.question_sentences)
        for _, sents in self.answers:
            out.extend(sents)
        return out


@dataclass
class Corpus:
    arps: list[ARP]
    source: str = ""
    skipped: int = 0  # threads dropped during ingest (filtered/empty/orphaned)

    def __post_init__(self):
        ids = [a.post_id for a in self.arps]
        if len(ids) != len(set(ids)):
            raise LinkageError("duplicate post_ids in corpus")


def clean_body(body_markup: str) -> str:
    plain, spans = strip_markup(body_markup)
    return substitute_placeholders(plain, spans)


def build_arp(question: RawPost, answers: list[RawPost], *,
              already_clean: bool = False) -> ARP:
    """Clean and segment one question and its answers into an ARP.

    Answers keep their input order. ``already_clean`` skips markup stripping
    for bodies that are cleaned text already (the canonical corpus format);
    segmentation of cleaned text is idempotent, so re-loading reproduces the
    same sentences. Raises when an answer's parent_id does not match or the
    question has no sentences left after cleaning.
    """
    if question.post_type != QUESTION_POST:
        raise LinkageError(f"post {question.post_id} is not a question")
    for a in answers:
        if a.parent_id != question.post_id:
            raise LinkageError(
                f"answer {a.post_id} has parent_id {a.parent_id}, "
                f"expected {question.post_id}")
    prep = (lambda b: b) if already_clean else clean_body
    q_sentences = segment_sentences(
        prep(question.body_markup), post_id=question.post_id, origin=QUESTION)
    if not q_sentences:
        raise LinkageError(f"post {question.post_id}: no question sentences")
    answer_entries = []
    for a in answers:
        sents = segment_sentences(
            prep(a.body_markup), post_id=question.post_id, origin=ANSWER,
            answer_id=a.post_id)
        if sents:
            answer_entries.append((a.post_id, tuple(sents)))
    return ARP(post_id=question.post_id, title=question.title or "",
               question_sentences=tuple(q_sentences), answers=tuple(answer_entries))


def corpus_from_posts(posts: Iterable[RawPost], *, min_score: int | None = None,
                      source: str = "", strict: bool = False,
                      already_clean: bool = False) -> Corpus:
    """Group posts into threads and build a corpus.

    ``min_score`` drops posts scored below it (questions drop their whole
    thread). Orphaned answers and questions left empty after cleaning are
    skipped unless ``strict``.
    """
    questions: list[RawPost] = []
    answers_by_parent: dict[int, list[RawPost]] = {}
    skipped = 0
    for p in posts:
        if min_score is not None and p.score < min_score:
            skipped += 1
            continue
        if p.post_type == QUESTION_POST:
            questions.append(p)
        else:
            answers_by_parent.setdefault(p.parent_id, []).append(p)

    arps: list[ARP] = []
    matched_parents: set[int] = set()
    for q in questions:
        matched_parents.add(q.post_id)
        try:
            arps.append(build_arp(q, answers_by_parent.get(q.post_id, []),
                                  already_clean=already_clean))
        except LinkageError:
            if strict:
                raise
            skipped += 1
    orphans = set(answers_by_parent) - matched_parents
    if orphans:
        if strict:
            raise LinkageError(f"answers with no question: {sorted(orphans)}")
        skipped += len(orphans)
    return Corpus(arps=arps, source=source, skipped=skipped)


def corpus_to_posts(corpus: Corpus) -> list[RawPost]:
    """Flatten a corpus back to posts; bodies carry one sentence per line."""
    posts: list[RawPost] = []
    for arp in corpus.arps:
        posts.append(RawPost(
            post_id=arp.post_id, post_type=QUESTION_POST, title=arp.title,
            body_markup="\n".join(s.raw_text for s in arp.question_sentences),
            score=1))
        for answer_id, sents in arp.answers:
            posts.append(RawPost(
                post_id=answer_id, post_type=ANSWER_POST, parent_id=arp.post_id,
                body_markup="\n".join(s.raw_text for s in sents), score=1))
    return posts


def save_corpus(corpus: Corpus, fh: IO[str]) -> None:
    for post in corpus_to_posts(corpus):
        fh.write(json.dumps(post_to_obj(post), ensure_ascii=False) + "\n")


def load_corpus(path: str | Path, *, min_score: int | None = None) -> Corpus:
    """Load a canonical (already cleaned) corpus file."""
    p = Path(path)
    with p.open("rb") as fh:
        posts = parse_posts(fh, "jsonl")
    return corpus_from_posts(posts, min_score=min_score, source=str(p),
                             already_clean=True)
