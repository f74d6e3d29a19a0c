"""Sentence scoring and issue-solution pair extraction from question threads.

Every sentence gets four component scores:

  similarity   cosine between its embedding and the mean question embedding
               (question sentences against their own mean; answer sentences
               against the question mean)
  textcnn      logistic head of the sentence CNN over the token matrix
               (neutral 0.5 when no trained weights are supplied)
  linguistic   saturating count of matched pattern rules (phrases plus
               comparative/superlative/imperative detectors), capped at 3
  heuristic    question-cue flag (what/why/when/who/which/how or "?") mixed
               with a length term saturating at 30 tokens

Components are min-max normalized per extraction side (a constant component
becomes 0.5 everywhere), combined as a weighted sum whose weights total one,
and the top-k sentences (ties to the earlier position) are emitted back in
document order, per answer, paired with the question title.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus.assemble import ARP
from .corpus.sentences import ANSWER, QUESTION, Sentence, sentence_key
from .embeddings.vectors import DenseVector, cosine
from .errors import ConfigError, CoverageError, FormatError
from .textcnn.model import CnnWeights, cnn_forward
from .textprep import tokenize

log = logging.getLogger(__name__)

PHRASE = "phrase"
TASK = "task"
COMPARATIVE = "comparative"
SUPERLATIVE = "superlative"
IMPERATIVE = "imperative"
RULE_KINDS = (PHRASE, TASK, COMPARATIVE, SUPERLATIVE, IMPERATIVE)

COMPARATIVE_LEXICON = frozenset({"better", "worse", "more"})
SUPERLATIVE_LEXICON = frozenset({"best", "worst", "most"})
IMPERATIVE_SINGLE = frozenset({"use", "consider", "avoid"})
QUESTION_CUES = frozenset({"what", "why", "when", "who", "which", "how"})

LINGUISTIC_SATURATION = 3


@dataclass(frozen=True)
class PatternRule:
    id: int
    kind: str
    matcher: str

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ConfigError(f"rule {self.id}: unknown kind {self.kind!r}")
        if not self.matcher:
            raise ConfigError(f"rule {self.id}: empty matcher")


class PatternSet:
    """Pattern rules with pre-tokenized phrase matchers."""

    def __init__(self, rules: Sequence[PatternRule]):
        ids = [r.id for r in rules]
        if len(ids) != len(set(ids)):
            raise ConfigError("duplicate pattern rule ids")
        self.rules = tuple(rules)
        self._phrases = [
            (r.id, tuple(t.lower() for t in tokenize(r.matcher).tokens))
            for r in rules if r.kind in (PHRASE, TASK)
        ]
        self._detectors = [r for r in rules if r.kind not in (PHRASE, TASK)]

    @classmethod
    def from_file(cls, path: str | Path) -> "PatternSet":
        return cls(_parse_rules(Path(path).read_text("utf-8"), str(path)))

    @classmethod
    def default(cls) -> "PatternSet":
        text = resources.files("archpairs.data").joinpath("patterns.tsv").read_text("utf-8")
        return cls(_parse_rules(text, "patterns.tsv"))


def _parse_rules(text: str, origin: str) -> list[PatternRule]:
    rules = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(f"{origin} line {lineno}: expected id<TAB>kind<TAB>matcher")
        try:
            rules.append(PatternRule(id=int(parts[0]), kind=parts[1].strip(),
                                     matcher=parts[2].strip()))
        except ValueError as exc:
            raise FormatError(f"{origin} line {lineno}: {exc}") from exc
    return rules


def _contains_subsequence(tokens: tuple[str, ...], phrase: tuple[str, ...]) -> bool:
    n, m = len(tokens), len(phrase)
    return any(tokens[i:i + m] == phrase for i in range(n - m + 1))


def linguistic_score(text: str, patterns: PatternSet) -> tuple[float, frozenset[int]]:
    """Score = min(1, matches / 3) over phrase rules and the three detectors."""
    tokens = tuple(t.lower() for t in tokenize(text).tokens)
    matched: set[int] = set()
    for rule_id, phrase in patterns._phrases:
        if _contains_subsequence(tokens, phrase):
            matched.add(rule_id)
    for rule in patterns._detectors:
        if rule.kind == COMPARATIVE:
            hit = any(t in COMPARATIVE_LEXICON or (len(t) >= 4 and t.endswith("er"))
                      for t in tokens)
        elif rule.kind == SUPERLATIVE:
            hit = any(t in SUPERLATIVE_LEXICON or (len(t) >= 5 and t.endswith("est"))
                      for t in tokens)
        else:  # imperative: second-person directive opening
            hit = bool(tokens) and (tokens[0] in IMPERATIVE_SINGLE
                                    or tokens[:2] == ("you", "should"))
        if hit:
            matched.add(rule.id)
    return min(1.0, len(matched) / LINGUISTIC_SATURATION), frozenset(matched)


@dataclass(frozen=True)
class HeuristicConfig:
    cue_weight: float = 0.5
    length_weight: float = 0.5
    length_reference: int = 30
    cue_sides: frozenset[str] = frozenset({QUESTION, ANSWER})


def heuristic_score(text: str, side: str, cfg: HeuristicConfig = HeuristicConfig()) -> float:
    """cue_weight * 5W1H-or-"?" flag + length_weight * min(1, tokens/30)."""
    tokens = tokenize(text).tokens
    flag = 0.0
    if side in cfg.cue_sides:
        if any(t.lower() in QUESTION_CUES for t in tokens) or text.rstrip().endswith("?"):
            flag = 1.0
    length_term = min(1.0, len(tokens) / cfg.length_reference)
    return cfg.cue_weight * flag + cfg.length_weight * length_term


def question_similarity(q_embeddings: Sequence[DenseVector | np.ndarray]) -> list[float]:
    """Cosine of each question sentence against the mean question embedding."""
    if not q_embeddings:
        raise ConfigError("no question embeddings")
    mean = mean_embedding(q_embeddings)
    return [cosine(e, mean) for e in q_embeddings]


def answer_similarity(a_embeddings: Sequence[DenseVector | np.ndarray],
                      q_mean: DenseVector | np.ndarray) -> list[float]:
    """Cosine of each answer sentence against the mean question embedding."""
    return [cosine(e, q_mean) for e in a_embeddings]


def mean_embedding(embeddings: Sequence[DenseVector | np.ndarray]) -> np.ndarray:
    rows = [e.values if isinstance(e, DenseVector) else np.asarray(e) for e in embeddings]
    return np.mean(np.stack(rows), axis=0)


@dataclass(frozen=True)
class WeightConfig:
    """Non-negative component weights constrained to sum to one."""

    w_similarity: float = 0.35
    w_textcnn: float = 0.15
    w_linguistic: float = 0.30
    w_heuristic: float = 0.20

    def __post_init__(self):
        vals = self.as_tuple()
        if any(v < 0 for v in vals):
            raise ConfigError(f"weights must be non-negative: {vals}")
        if abs(sum(vals) - 1.0) > 1e-9:
            raise ConfigError(f"weights must sum to 1, got {sum(vals)}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w_similarity, self.w_textcnn, self.w_linguistic, self.w_heuristic)


@dataclass(frozen=True)
class ComponentScores:
    similarity: float
    textcnn: float
    linguistic: float
    heuristic: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.similarity, self.textcnn, self.linguistic, self.heuristic)


@dataclass(frozen=True)
class ScoredSentence:
    sentence: Sentence
    components: ComponentScores
    final: float
    matched_pattern_ids: frozenset[int]


@dataclass(frozen=True)
class IssueSolutionPair:
    post_id: int
    title: str
    issue: tuple[Sentence, ...]
    solutions: tuple[tuple[int, tuple[Sentence, ...]], ...]


def final_score(components: ComponentScores, weights: WeightConfig) -> float:
    """Weighted sum of the four component scores."""
    w = weights.as_tuple()
    c = components.as_tuple()
    return sum(wi * ci for wi, ci in zip(w, c))


def minmax_normalize(values: Sequence[float]) -> list[float]:
    """Per-side min-max scaling; a constant column maps to 0.5 everywhere."""
    lo, hi = min(values), max(values)
    if hi - lo <= 1e-12:
        return [0.5] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def rank_order(finals: Sequence[float]) -> list[int]:
    """Indices by descending score; ties broken by earlier document position."""
    return sorted(range(len(finals)), key=lambda i: (-finals[i], i))


def select_top(finals: Sequence[float], top_k: int) -> list[int]:
    """Top-k indices re-sorted into document order."""
    return sorted(rank_order(finals)[:top_k])


def _cnn_component(sentences: Sequence[Sentence],
                   token_matrices: Mapping[str, np.ndarray] | None,
                   cnn: CnnWeights | None) -> list[float]:
    if cnn is None or token_matrices is None:
        return [0.5] * len(sentences)  # untrained fallback: rank-neutral
    scores = []
    for s in sentences:
        key = sentence_key(s)
        if key not in token_matrices:
            raise CoverageError(f"no token matrix for sentence {key!r}")
        mat = np.asarray(token_matrices[key], dtype=np.float64)
        if mat.shape[0] < cnn.config.max_kernel:  # short sentences get zero rows
            pad = np.zeros((cnn.config.max_kernel - mat.shape[0], cnn.config.embed_dim))
            mat = np.vstack([mat, pad]) if mat.size else pad
        _, score = cnn_forward(mat, cnn)
        scores.append(score)
    return scores


def score_side(sentences: Sequence[Sentence],
               embeddings: Mapping[str, DenseVector],
               q_mean: np.ndarray | None,
               patterns: PatternSet,
               weights: WeightConfig,
               *,
               cnn: CnnWeights | None = None,
               token_matrices: Mapping[str, np.ndarray] | None = None,
               heuristics: HeuristicConfig = HeuristicConfig()) -> list[ScoredSentence]:
    """Score one extraction side (the question, or one answer).

    ``q_mean`` of None means this side is the question: similarity runs
    against the mean of the side's own embeddings.
    """
    if not sentences:
        return []
    embs = []
    for s in sentences:
        key = sentence_key(s)
        if key not in embeddings:
            raise CoverageError(f"no embedding for sentence {key!r}")
        embs.append(embeddings[key])

    if q_mean is None:
        sim_raw = question_similarity(embs)
    else:
        sim_raw = answer_similarity(embs, q_mean)
    cnn_raw = _cnn_component(sentences, token_matrices, cnn)
    ling = [linguistic_score(s.raw_text, patterns) for s in sentences]
    ling_raw = [score for score, _ in ling]
    heur_raw = [heuristic_score(s.raw_text, s.origin, heuristics) for s in sentences]

    sim_n = minmax_normalize(sim_raw)
    cnn_n = minmax_normalize(cnn_raw)
    ling_n = minmax_normalize(ling_raw)
    heur_n = minmax_normalize(heur_raw)

    scored = []
    for i, s in enumerate(sentences):
        comp = ComponentScores(similarity=sim_n[i], textcnn=cnn_n[i],
                               linguistic=ling_n[i], heuristic=heur_n[i])
        scored.append(ScoredSentence(sentence=s, components=comp,
                                     final=final_score(comp, weights),
                                     matched_pattern_ids=ling[i][1]))
    return scored


def extract_pair(arp: ARP,
                 embeddings: Mapping[str, DenseVector],
                 patterns: PatternSet,
                 weights: WeightConfig = WeightConfig(),
                 *,
                 cnn: CnnWeights | None = None,
                 token_matrices: Mapping[str, np.ndarray] | None = None,
                 top_k: int = 6,
                 pooled_answers: bool = False,
                 heuristics: HeuristicConfig = HeuristicConfig()) -> IssueSolutionPair:
    """Extract up to ``top_k`` issue sentences and solution sentences per answer.

    ``pooled_answers`` ranks all answer sentences in one pool (one top-k
    budget across answers) instead of per answer; selected sentences are
    still grouped back under their own answer.
    """
    if top_k < 1:
        raise ConfigError("top_k must be >= 1")
    kw = dict(cnn=cnn, token_matrices=token_matrices, heuristics=heuristics)

    q_scored = score_side(arp.question_sentences, embeddings, None,
                          patterns, weights, **kw)
    issue_idx = select_top([s.final for s in q_scored], top_k)
    issue = tuple(arp.question_sentences[i] for i in issue_idx)

    q_embs = [embeddings[sentence_key(s)] for s in arp.question_sentences]
    q_mean = mean_embedding(q_embs)

    solutions: list[tuple[int, tuple[Sentence, ...]]] = []
    if pooled_answers:
        pool: list[Sentence] = []
        for answer_id, sents in arp.answers:
            pool.extend(sents)
        if pool:
            scored = score_side(pool, embeddings, q_mean, patterns, weights, **kw)
            chosen = {sentence_key(pool[i]) for i in select_top([s.final for s in scored], top_k)}
            for answer_id, sents in arp.answers:
                kept = tuple(s for s in sents if sentence_key(s) in chosen)
                if kept:
                    solutions.append((answer_id, kept))
    else:
        for answer_id, sents in arp.answers:
            scored = score_side(sents, embeddings, q_mean, patterns, weights, **kw)
            idx = select_top([s.final for s in scored], top_k)
            solutions.append((answer_id, tuple(sents[i] for i in idx)))

    return IssueSolutionPair(post_id=arp.post_id, title=arp.title,
                             issue=issue, solutions=tuple(solutions))


# --------------------------------------------------------------------------
# pair serialization
# --------------------------------------------------------------------------

def pair_to_obj(pair: IssueSolutionPair) -> dict:
    return {
        "post_id": pair.post_id,
        "title": pair.title,
        "issue": [s.raw_text for s in pair.issue],
        "solutions": [
            {"answer_id": answer_id, "sentences": [s.raw_text for s in sents]}
            for answer_id, sents in pair.solutions
        ],
    }


def write_pairs(pairs: Iterable[IssueSolutionPair], fh) -> None:
    for pair in pairs:
        fh.write(json.dumps(pair_to_obj(pair), ensure_ascii=False) + "\n")


def render_pair(pair: IssueSolutionPair) -> str:
    """Human-readable rendering of one extracted pair."""
    lines = [f"# {pair.title} (post {pair.post_id})", "", "Issue:"]
    lines.extend(f"  - {s.raw_text}" for s in pair.issue)
    for answer_id, sents in pair.solutions:
        lines.append(f"Solution (answer {answer_id}):")
        lines.extend(f"  - {s.raw_text}" for s in sents)
    return "\n".join(lines)


def pair_keys(pair: IssueSolutionPair) -> tuple[set[str], set[str]]:
    """(issue keys, solution keys) for benchmark comparison."""
    issue = {sentence_key(s) for s in pair.issue}
    solution = {sentence_key(s) for _, sents in pair.solutions for s in sents}
    return issue, solution
