"""Benchmark loading, sentence-level evaluation, ablations, and baselines.

The benchmark file holds gold per-sentence importance labels per thread
(one json object per line). Extractors are evaluated at the sentence level:
precision = |gold ∩ extracted| / |extracted| and recall = |gold ∩ extracted|
/ |gold|, micro-averaged over threads (macro also reported, labeled as
such). Classical extractive baselines (graph centrality with and without a
similarity threshold, and significant-word density scoring) share the same
key-set protocol as the full pipeline.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .corpus.assemble import ARP
from .corpus.sentences import ANSWER, QUESTION, Sentence, make_key, sentence_key
from .embeddings.vectors import DenseVector, cosine
from .errors import ConfigError, FormatError
from .extract import (
    HeuristicConfig,
    PatternSet,
    WeightConfig,
    extract_pair,
    pair_keys,
)
from .textprep import DEFAULT_STOP_LIST, tokenize

log = logging.getLogger(__name__)

MAX_GOLD_PER_BODY = 6


# --------------------------------------------------------------------------
# benchmark model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LabeledSentence:
    index: int
    text: str
    label: int


@dataclass(frozen=True)
class BenchmarkEntry:
    post_id: int
    title: str
    question: tuple[LabeledSentence, ...]
    answers: tuple[tuple[int, tuple[LabeledSentence, ...]], ...]


@dataclass
class Benchmark:
    entries: list[BenchmarkEntry]

    @property
    def gold_question(self) -> int:
        return sum(sum(s.label for s in e.question) for e in self.entries)

    @property
    def gold_answer(self) -> int:
        return sum(sum(s.label for s in sents)
                   for e in self.entries for _, sents in e.answers)

    @property
    def gold_total(self) -> int:
        return self.gold_question + self.gold_answer


def _check_body(sents: Sequence[LabeledSentence], key_of: Callable[[int], str]) -> None:
    indices = sorted(s.index for s in sents)
    if indices != list(range(len(sents))):
        bad = next((i for i in indices
                    if i < 0 or i >= len(sents) or indices.count(i) > 1),
                   indices[0] if indices else 0)
        raise FormatError(f"benchmark sentence reference {key_of(bad)!r} is dangling")
    gold = sum(s.label for s in sents)
    if gold > MAX_GOLD_PER_BODY:
        raise FormatError(
            f"{key_of(indices[0])!r}: {gold} gold sentences exceed {MAX_GOLD_PER_BODY}")


def load_benchmark(path: str | Path) -> Benchmark:
    """Load and integrity-check a benchmark file."""
    entries: list[BenchmarkEntry] = []
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            post_id = int(obj["post_id"])
            question = tuple(
                LabeledSentence(int(s["idx"]), s["text"], int(s["label"]))
                for s in obj["question_sentences"])
            answers = tuple(
                (int(a["answer_id"]), tuple(
                    LabeledSentence(int(s["idx"]), s["text"], int(s["label"]))
                    for s in a["sentences"]))
                for a in obj.get("answers", ()))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"benchmark line {lineno}: {exc}") from exc
        _check_body(question, lambda i: make_key(post_id, QUESTION, None, i))
        for answer_id, sents in answers:
            _check_body(sents, lambda i, a=answer_id: make_key(post_id, ANSWER, a, i))
        entries.append(BenchmarkEntry(post_id=post_id, title=obj.get("title", ""),
                                      question=question, answers=answers))
    return Benchmark(entries=entries)


def save_benchmark(benchmark: Benchmark, fh) -> None:
    for e in benchmark.entries:
        obj = {
            "post_id": e.post_id,
            "title": e.title,
            "question_sentences": [
                {"idx": s.index, "text": s.text, "label": s.label} for s in e.question],
            "answers": [
                {"answer_id": aid,
                 "sentences": [{"idx": s.index, "text": s.text, "label": s.label}
                               for s in sents]}
                for aid, sents in e.answers],
        }
        fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def entry_to_arp(entry: BenchmarkEntry) -> ARP:
    """Rebuild the thread structure so extractors can run on benchmark text."""
    q = tuple(
        Sentence(post_id=entry.post_id, origin=QUESTION, answer_id=None,
                 index=s.index, raw_text=s.text, token_count=len(tokenize(s.text)))
        for s in sorted(entry.question, key=lambda s: s.index))
    answers = tuple(
        (aid, tuple(
            Sentence(post_id=entry.post_id, origin=ANSWER, answer_id=aid,
                     index=s.index, raw_text=s.text, token_count=len(tokenize(s.text)))
            for s in sorted(sents, key=lambda s: s.index)))
        for aid, sents in entry.answers)
    return ARP(post_id=entry.post_id, title=entry.title,
               question_sentences=q, answers=answers)


def gold_keys(entry: BenchmarkEntry) -> tuple[set[str], set[str]]:
    issue = {make_key(entry.post_id, QUESTION, None, s.index)
             for s in entry.question if s.label == 1}
    solution = {make_key(entry.post_id, ANSWER, aid, s.index)
                for aid, sents in entry.answers for s in sents if s.label == 1}
    return issue, solution


# --------------------------------------------------------------------------
# sentence-level metrics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PrfResult:
    precision: float
    recall: float
    f1: float
    intersection: int
    extracted: int
    gold: int


def sentence_prf(extracted: set[str], gold: set[str]) -> PrfResult:
    """Precision/recall/F1 from shared sentence keys; empty sides score 0."""
    inter = len(extracted & gold)
    precision = inter / len(extracted) if extracted else 0.0
    recall = inter / len(gold) if gold else 0.0
    f1 = (2 * precision * recall / (precision + recall)) if precision + recall else 0.0
    return PrfResult(precision=precision, recall=recall, f1=f1,
                     intersection=inter, extracted=len(extracted), gold=len(gold))


def _micro(parts: list[PrfResult]) -> PrfResult:
    inter = sum(p.intersection for p in parts)
    extracted = sum(p.extracted for p in parts)
    gold = sum(p.gold for p in parts)
    precision = inter / extracted if extracted else 0.0
    recall = inter / gold if gold else 0.0
    f1 = (2 * precision * recall / (precision + recall)) if precision + recall else 0.0
    return PrfResult(precision=precision, recall=recall, f1=f1,
                     intersection=inter, extracted=extracted, gold=gold)


def _macro(parts: list[PrfResult]) -> tuple[float, float, float]:
    if not parts:
        return 0.0, 0.0, 0.0
    return (float(np.mean([p.precision for p in parts])),
            float(np.mean([p.recall for p in parts])),
            float(np.mean([p.f1 for p in parts])))


@dataclass(frozen=True)
class ExtractorEval:
    """Micro-averaged issue/solution results plus labeled macro averages."""

    issue: PrfResult
    solution: PrfResult
    issue_macro: tuple[float, float, float]
    solution_macro: tuple[float, float, float]
    failures: int


def aggregate_parts(issue_parts: list[PrfResult], solution_parts: list[PrfResult],
                    failures: int = 0) -> ExtractorEval:
    """Combine per-thread results into micro and macro averages."""
    return ExtractorEval(issue=_micro(issue_parts), solution=_micro(solution_parts),
                         issue_macro=_macro(issue_parts),
                         solution_macro=_macro(solution_parts), failures=failures)


KeyExtractor = Callable[[ARP], "tuple[set[str], set[str]]"]


def evaluate_extractor(extractor: KeyExtractor, benchmark: Benchmark) -> ExtractorEval:
    """Run a key-set extractor over every benchmark thread.

    Failing threads are logged, skipped, and counted; metrics cover the
    remainder.
    """
    issue_parts: list[PrfResult] = []
    solution_parts: list[PrfResult] = []
    failures = 0
    for entry in benchmark.entries:
        try:
            extracted_issue, extracted_solution = extractor(entry_to_arp(entry))
        except Exception:  # noqa: BLE001 - extractor faults must not kill the run
            log.exception("extractor failed on post %d; skipped", entry.post_id)
            failures += 1
            continue
        g_issue, g_solution = gold_keys(entry)
        issue_parts.append(sentence_prf(set(extracted_issue), g_issue))
        solution_parts.append(sentence_prf(set(extracted_solution), g_solution))
    return aggregate_parts(issue_parts, solution_parts, failures)


# --------------------------------------------------------------------------
# full-pipeline extractor and ablations
# --------------------------------------------------------------------------

CONTEXTUAL = "contextual"
TEXTCNN = "textcnn"
LINGUISTIC_HEURISTIC = "linguistic+heuristic"
COMPONENTS = (CONTEXTUAL, TEXTCNN, LINGUISTIC_HEURISTIC)


@dataclass(frozen=True)
class AblationVariant:
    name: str
    disabled: frozenset[str] = frozenset()

    def __post_init__(self):
        unknown = self.disabled - set(COMPONENTS)
        if unknown:
            raise ConfigError(f"unknown components {sorted(unknown)}")


STANDARD_VARIANTS = (
    AblationVariant("full"),
    AblationVariant("no-contextual", frozenset({CONTEXTUAL})),
    AblationVariant("no-textcnn", frozenset({TEXTCNN})),
    AblationVariant("no-linguistic-heuristic", frozenset({LINGUISTIC_HEURISTIC})),
)


def redistribute_weights(base: WeightConfig, disabled: frozenset[str]) -> WeightConfig:
    """Zero the disabled components and rescale the rest to sum to one."""
    w = {
        "w_similarity": 0.0 if CONTEXTUAL in disabled else base.w_similarity,
        "w_textcnn": 0.0 if TEXTCNN in disabled else base.w_textcnn,
        "w_linguistic": 0.0 if LINGUISTIC_HEURISTIC in disabled else base.w_linguistic,
        "w_heuristic": 0.0 if LINGUISTIC_HEURISTIC in disabled else base.w_heuristic,
    }
    total = sum(w.values())
    if total <= 0.0:
        raise ConfigError("all scoring components disabled")
    return WeightConfig(**{k: v / total for k, v in w.items()})


@dataclass
class PipelineSettings:
    """Everything the full extractor needs besides the thread itself."""

    provider: object
    patterns: PatternSet = field(default_factory=PatternSet.default)
    weights: WeightConfig = WeightConfig()
    cnn: object | None = None
    top_k: int = 6
    pooled_answers: bool = False
    heuristics: HeuristicConfig = HeuristicConfig()


def full_pipeline_extractor(settings: PipelineSettings,
                            weights: WeightConfig | None = None) -> KeyExtractor:
    """Key-set adapter around the multi-feature extraction pipeline."""
    from .embeddings.providers import sentence_embeddings, token_matrices

    w = weights if weights is not None else settings.weights

    def run(arp: ARP) -> tuple[set[str], set[str]]:
        embs = sentence_embeddings(arp, settings.provider)
        mats = token_matrices(arp, settings.provider) if settings.cnn is not None else None
        pair = extract_pair(arp, embs, settings.patterns, w,
                            cnn=settings.cnn, token_matrices=mats,
                            top_k=settings.top_k,
                            pooled_answers=settings.pooled_answers,
                            heuristics=settings.heuristics)
        return pair_keys(pair)

    return run


def run_ablation(variants: Sequence[AblationVariant], benchmark: Benchmark,
                 settings: PipelineSettings) -> dict[str, ExtractorEval]:
    """Evaluate each variant with its disabled weights redistributed."""
    results: dict[str, ExtractorEval] = {}
    for variant in variants:
        w = redistribute_weights(settings.weights, variant.disabled)
        extractor = full_pipeline_extractor(settings, weights=w)
        results[variant.name] = evaluate_extractor(extractor, benchmark)
    return results


# --------------------------------------------------------------------------
# NLP baselines
# --------------------------------------------------------------------------

def power_iteration_pagerank(weights: np.ndarray, damping: float = 0.85,
                             tol: float = 1e-6, max_iter: int = 100) -> np.ndarray:
    """PageRank over a non-negative weight matrix; scores sum to one.

    Rows are out-link weights; zero rows (dangling nodes) spread uniformly.
    """
    n = weights.shape[0]
    if n == 0:
        return np.zeros(0)
    out = weights.sum(axis=1)
    transition = np.zeros_like(weights)
    nz = out > 0
    transition[nz] = weights[nz] / out[nz, None]
    scores = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        dangling = scores[~nz].sum()
        new = (1.0 - damping) / n + damping * (transition.T @ scores + dangling / n)
        if np.abs(new - scores).sum() < tol:
            scores = new
            break
        scores = new
    return scores


def _embedding_rows(embeddings: Sequence[DenseVector | np.ndarray]) -> list[np.ndarray]:
    return [e.values if isinstance(e, DenseVector) else np.asarray(e) for e in embeddings]


def _top_keys(sentences: Sequence[Sentence], scores: Sequence[float], k: int) -> list[str]:
    order = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))[:k]
    return [sentence_key(sentences[i]) for i in sorted(order)]


def textrank_scores(embeddings: Sequence[DenseVector | np.ndarray],
                    damping: float = 0.85) -> np.ndarray:
    """Centrality over the cosine-similarity graph (negative edges clipped)."""
    rows = _embedding_rows(embeddings)
    n = len(rows)
    sim = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            w = max(0.0, cosine(rows[i], rows[j]))
            sim[i, j] = sim[j, i] = w
    return power_iteration_pagerank(sim, damping=damping)


def textrank_extract(sentences: Sequence[Sentence],
                     embeddings: Sequence[DenseVector | np.ndarray],
                     k: int) -> list[str]:
    """Top-k sentence keys by similarity-graph centrality, document order."""
    if not sentences:
        raise ConfigError("textrank needs at least one sentence")
    return _top_keys(sentences, textrank_scores(embeddings), k)


def lexrank_scores(embeddings: Sequence[DenseVector | np.ndarray],
                   threshold: float = 0.1, damping: float = 0.85) -> np.ndarray:
    """Degree-normalized centrality on the thresholded similarity graph."""
    if not 0.0 <= threshold < 1.0:
        raise ConfigError(f"lexrank threshold must be in [0,1), got {threshold}")
    rows = _embedding_rows(embeddings)
    n = len(rows)
    adj = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if cosine(rows[i], rows[j]) >= threshold:
                adj[i, j] = adj[j, i] = 1.0
    return power_iteration_pagerank(adj, damping=damping)


def lexrank_extract(sentences: Sequence[Sentence],
                    embeddings: Sequence[DenseVector | np.ndarray],
                    k: int, threshold: float = 0.1) -> list[str]:
    """Top-k sentence keys by thresholded-graph centrality, document order."""
    return _top_keys(sentences, lexrank_scores(embeddings, threshold), k)


def luhn_scores(token_lists: Sequence[Sequence[str]],
                stop_list: frozenset[str] = DEFAULT_STOP_LIST,
                min_frequency: int = 2, max_gap: int = 4) -> list[float]:
    """Significant-word density: (count in densest window)^2 / window length.

    Significant words are non-stopword tokens occurring at least
    ``min_frequency`` times across the input sentences; windows are runs of
    significant positions separated by at most ``max_gap`` insignificant
    tokens.
    """
    freq = Counter(
        tok for tokens in token_lists for tok in tokens if tok not in stop_list)
    significant = {t for t, c in freq.items() if c >= min_frequency}
    scores = []
    for tokens in token_lists:
        positions = [i for i, t in enumerate(tokens) if t in significant]
        best = 0.0
        cluster: list[int] = []
        for pos in positions:
            if cluster and pos - cluster[-1] - 1 > max_gap:
                best = max(best, len(cluster) ** 2 / (cluster[-1] - cluster[0] + 1))
                cluster = []
            cluster.append(pos)
        if cluster:
            best = max(best, len(cluster) ** 2 / (cluster[-1] - cluster[0] + 1))
        scores.append(best)
    return scores


def luhn_extract(sentences: Sequence[Sentence], k: int,
                 stop_list: frozenset[str] = DEFAULT_STOP_LIST,
                 min_frequency: int = 2, max_gap: int = 4) -> list[str]:
    """Top-k sentence keys by significant-word density, document order."""
    if not sentences:
        raise ConfigError("luhn needs at least one sentence")
    token_lists = [[t.lower() for t in tokenize(s.raw_text).tokens] for s in sentences]
    scores = luhn_scores(token_lists, stop_list, min_frequency, max_gap)
    return _top_keys(sentences, scores, k)


# --------------------------------------------------------------------------
# baseline adapters (per-side protocol shared with the full pipeline)
# --------------------------------------------------------------------------

def baseline_extractor(name: str, provider, k: int = 6,
                       threshold: float = 0.1) -> KeyExtractor:
    """Wrap a baseline into the same per-side key protocol as the pipeline."""
    from .embeddings.providers import sentence_embeddings

    def side_keys(sentences: Sequence[Sentence],
                  embs: Mapping[str, DenseVector]) -> set[str]:
        vecs = [embs[sentence_key(s)] for s in sentences]
        if name == "textrank":
            return set(textrank_extract(sentences, vecs, k))
        if name == "lexrank":
            return set(lexrank_extract(sentences, vecs, k, threshold))
        if name == "luhn":
            return set(luhn_extract(sentences, k))
        raise ConfigError(f"unknown baseline {name!r}")

    def run(arp: ARP) -> tuple[set[str], set[str]]:
        embs = sentence_embeddings(arp, provider)
        issue = side_keys(arp.question_sentences, embs)
        solution: set[str] = set()
        for _, sents in arp.answers:
            solution |= side_keys(sents, embs)
        return issue, solution

    return run


# --------------------------------------------------------------------------
# distant supervision for the sentence CNN
# --------------------------------------------------------------------------

def relevance_examples(benchmark: Benchmark, provider,
                       min_rows: int = 2) -> list[tuple[np.ndarray, int]]:
    """(token matrix, gold label) pairs for training the relevance head.

    Sentences appearing in gold summaries are positives, all others
    negatives; matrices shorter than ``min_rows`` are zero-padded.
    """
    examples: list[tuple[np.ndarray, int]] = []
    for entry in benchmark.entries:
        arp = entry_to_arp(entry)
        labels: dict[str, int] = {}
        for s in entry.question:
            labels[make_key(entry.post_id, QUESTION, None, s.index)] = s.label
        for aid, sents in entry.answers:
            for s in sents:
                labels[make_key(entry.post_id, ANSWER, aid, s.index)] = s.label
        for s in arp.all_sentences():
            key = sentence_key(s)
            mat = provider.token_matrix(key, s)
            if mat is None:
                raise ConfigError("provider cannot supply token matrices")
            if mat.shape[0] < min_rows:
                pad = np.zeros((min_rows - mat.shape[0], provider.dim))
                mat = np.vstack([mat, pad]) if mat.size else pad
            examples.append((mat, labels[key]))
    return examples
