"""Command-line pipeline: ingest, train, classify, extract, evaluate, ablate.

Every command writes a run manifest next to its output (input hashes,
resolved configuration, seed, versions; no timestamps) so identical inputs
and flags reproduce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .benchkit import (
    STANDARD_VARIANTS,
    Benchmark,
    PipelineSettings,
    aggregate_parts,
    baseline_extractor,
    evaluate_extractor,
    full_pipeline_extractor,
    gold_keys,
    load_benchmark,
    relevance_examples,
    run_ablation,
    sentence_prf,
)
from .classify import (
    LabeledDoc,
    TrainParams,
    evaluate as evaluate_model,
    model_from_obj,
    model_to_obj,
    predict,
    split_dataset,
    train_classifier,
)
from .corpus import (
    ANSWER,
    QUESTION,
    Corpus,
    corpus_from_posts,
    load_corpus,
    parse_posts,
    save_corpus,
)
from .corpus.sentences import make_key
from .embeddings import (
    HashEmbedder,
    StoreEmbedder,
    WordVectorEmbedder,
    fit_tfidf,
    load_store,
    load_word_vectors,
    sentence_embeddings,
    tfidf_vector,
    token_matrices,
)
from .embeddings.tfidf import TfidfModel
from .errors import ArchpairsError, ConfigError
from .extract import (
    HeuristicConfig,
    PatternSet,
    WeightConfig,
    extract_pair,
    render_pair,
    write_pairs,
)
from .textcnn import CnnConfig, cnn_train, load_weights, save_weights
from .textprep import NormalizeConfig, load_stop_list, normalize, tokenize

import numpy as np


# --------------------------------------------------------------------------
# manifest
# --------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(output: Path, command: str, inputs: dict[str, Path],
                    config: dict, seed: int | None) -> None:
    manifest = {
        "command": command,
        "inputs": {name: {"path": str(p), "sha256": _sha256(p)}
                   for name, p in sorted(inputs.items())},
        "config": config,
        "seed": seed,
        "versions": {"archpairs": __version__,
                     "python": ".".join(map(str, sys.version_info[:3]))},
    }
    manifest["config_hash"] = hashlib.sha256(
        json.dumps(config, sort_keys=True).encode()).hexdigest()
    Path(str(output) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# shared argument helpers
# --------------------------------------------------------------------------

def _add_provider_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--provider", choices=["hash", "word-vectors", "embedding-store"],
                   default="hash")
    p.add_argument("--hash-dim", type=int, default=256)
    p.add_argument("--word-vectors", type=Path, help="word-vector text file")
    p.add_argument("--embedding-store", type=Path, help="embedding store jsonl file")


def _make_provider(args) -> tuple[object, dict[str, Path]]:
    extra_inputs: dict[str, Path] = {}
    if args.provider == "hash":
        return HashEmbedder(dim=args.hash_dim, seed=getattr(args, "seed", 0) or 0), extra_inputs
    if args.provider == "word-vectors":
        if not args.word_vectors:
            raise ConfigError("--provider word-vectors requires --word-vectors FILE")
        extra_inputs["word_vectors"] = args.word_vectors
        return WordVectorEmbedder(load_word_vectors(args.word_vectors)), extra_inputs
    if not args.embedding_store:
        raise ConfigError("--provider embedding-store requires --embedding-store FILE")
    extra_inputs["embedding_store"] = args.embedding_store
    return StoreEmbedder(load_store(args.embedding_store)), extra_inputs


def _parse_weights(raw: str | None) -> WeightConfig:
    if raw is None:
        return WeightConfig()
    parts = [float(x) for x in raw.split(",")]
    if len(parts) != 4:
        raise ConfigError("--weights expects 4 comma-separated values "
                          "(similarity,textcnn,linguistic,heuristic)")
    return WeightConfig(*parts)


def _patterns(args) -> tuple[PatternSet, dict[str, Path]]:
    if getattr(args, "pattern_file", None):
        return PatternSet.from_file(args.pattern_file), {"patterns": args.pattern_file}
    return PatternSet.default(), {}


def _normalize_cfg(args) -> NormalizeConfig:
    if getattr(args, "stop_list", None):
        return NormalizeConfig(stop_list=load_stop_list(args.stop_list))
    return NormalizeConfig()


def _post_tokens(arp, cfg: NormalizeConfig):
    """Classification features come from the title plus the question body."""
    text = " ".join([arp.title] + [s.raw_text for s in arp.question_sentences])
    return normalize(tokenize(text), cfg)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    raw = Path(args.input).read_bytes()
    posts = parse_posts(raw, args.format)
    min_score = None if args.no_score_filter else args.min_score
    corpus = corpus_from_posts(posts, min_score=min_score, source=str(args.input))
    with open(args.output, "w", encoding="utf-8") as fh:
        save_corpus(corpus, fh)
    _write_manifest(args.output, "ingest", {"input": Path(args.input)},
                    {"format": args.format, "min_score": min_score}, None)
    print(f"ingested {len(corpus.arps)} threads "
          f"({corpus.skipped} posts/threads skipped) -> {args.output}")
    return 0


def _load_labels(path: Path) -> dict[int, int]:
    labels: dict[int, int] = {}
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            labels[int(obj["post_id"])] = int(obj["label"])
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"labels line {lineno}: {exc}") from exc
    return labels


def _tfidf_to_obj(model: TfidfModel) -> dict:
    return {"vocabulary": model.vocabulary, "idf": model.idf.tolist(),
            "n_min": model.n_min, "n_max": model.n_max, "doc_count": model.doc_count}


def _tfidf_from_obj(obj: dict) -> TfidfModel:
    return TfidfModel(vocabulary=obj["vocabulary"], idf=np.array(obj["idf"]),
                      n_min=obj["n_min"], n_max=obj["n_max"],
                      doc_count=obj["doc_count"])


def cmd_train(args) -> int:
    corpus = load_corpus(args.input)
    labels = _load_labels(args.labels)
    norm_cfg = _normalize_cfg(args)
    token_docs, doc_labels, post_ids = [], [], []
    for arp in corpus.arps:
        if arp.post_id not in labels:
            continue
        token_docs.append(_post_tokens(arp, norm_cfg))
        doc_labels.append(labels[arp.post_id])
        post_ids.append(arp.post_id)
    if not token_docs:
        raise ConfigError("no labeled posts found in the corpus")

    tfidf = fit_tfidf(token_docs, args.ngram_min, args.ngram_max)
    docs = [LabeledDoc(features=tfidf_vector(tfidf, toks), label=lab, post_id=pid)
            for toks, lab, pid in zip(token_docs, doc_labels, post_ids)]
    train, test = split_dataset(docs, args.train_fraction, args.seed)
    params = TrainParams(seed=args.seed, k=args.knn_k)
    model = train_classifier(args.kind, train, params)
    report = evaluate_model(model, test) if test else None

    bundle = {"tfidf": _tfidf_to_obj(tfidf), "classifier": model_to_obj(model),
              "normalize": {"stop_list": str(args.stop_list) if args.stop_list else None}}
    Path(args.output).write_text(json.dumps(bundle, sort_keys=True), encoding="utf-8")
    inputs = {"corpus": Path(args.input), "labels": Path(args.labels)}
    _write_manifest(args.output, "train", inputs,
                    {"kind": args.kind, "train_fraction": args.train_fraction,
                     "ngram_min": args.ngram_min, "ngram_max": args.ngram_max,
                     "knn_k": args.knn_k},
                    args.seed)
    if report:
        print(f"{args.kind}: precision={report.precision:.3f} recall={report.recall:.3f} "
              f"f1={report.f1:.3f} accuracy={report.accuracy:.3f} "
              f"(test n={report.tp + report.fp + report.fn + report.tn})")
    print(f"model -> {args.output}")
    return 0


def cmd_classify(args) -> int:
    corpus = load_corpus(args.input)
    bundle = json.loads(Path(args.model).read_text("utf-8"))
    tfidf = _tfidf_from_obj(bundle["tfidf"])
    model = model_from_obj(bundle["classifier"])
    norm_cfg = _normalize_cfg(args)
    kept = []
    for arp in corpus.arps:
        label, _ = predict(model, tfidf_vector(tfidf, _post_tokens(arp, norm_cfg)))
        if label == 1:
            kept.append(arp)
    subset = Corpus(arps=kept, source=corpus.source)
    with open(args.output, "w", encoding="utf-8") as fh:
        save_corpus(subset, fh)
    _write_manifest(args.output, "classify",
                    {"corpus": Path(args.input), "model": Path(args.model)},
                    {"positives": len(kept), "total": len(corpus.arps)}, None)
    print(f"classified {len(corpus.arps)} threads; kept {len(kept)} -> {args.output}")
    return 0


def cmd_extract(args) -> int:
    corpus = load_corpus(args.input)
    provider, extra_inputs = _make_provider(args)
    patterns, pattern_inputs = _patterns(args)
    weights = _parse_weights(args.weights)
    heur = HeuristicConfig(cue_sides=frozenset({QUESTION, ANSWER})
                           if not args.cues_question_only else frozenset({QUESTION}))
    cnn = None
    if args.cnn_weights:
        cnn = load_weights(args.cnn_weights)
        extra_inputs["cnn_weights"] = args.cnn_weights

    pairs = []
    for arp in corpus.arps:
        embs = sentence_embeddings(arp, provider)
        mats = token_matrices(arp, provider) if cnn is not None else None
        pairs.append(extract_pair(arp, embs, patterns, weights, cnn=cnn,
                                  token_matrices=mats, top_k=args.top_k,
                                  pooled_answers=args.pooled_answers,
                                  heuristics=heur))
    with open(args.output, "w", encoding="utf-8") as fh:
        write_pairs(pairs, fh)
    if args.render:
        Path(args.render).write_text(
            "\n\n".join(render_pair(p) for p in pairs) + "\n", encoding="utf-8")
    inputs = {"corpus": Path(args.input), **extra_inputs, **pattern_inputs}
    _write_manifest(args.output, "extract", inputs,
                    {"provider": args.provider, "hash_dim": args.hash_dim,
                     "weights": list(weights.as_tuple()), "top_k": args.top_k,
                     "pooled_answers": args.pooled_answers,
                     "cues_question_only": args.cues_question_only},
                    args.seed)
    print(f"extracted {len(pairs)} pairs -> {args.output}")
    return 0


def _pairs_to_keysets(pairs_path: Path, benchmark: Benchmark):
    """Resolve pair texts back to benchmark sentence keys (first unused match)."""
    by_post = {e.post_id: e for e in benchmark.entries}
    results = []
    for line in pairs_path.read_text("utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        entry = by_post.get(obj["post_id"])
        if entry is None:
            continue
        issue: set[str] = set()
        pool = {s.text: [] for s in entry.question}
        for s in entry.question:
            pool[s.text].append(s.index)
        for i, text in enumerate(obj.get("issue", ())):
            idxs = pool.get(text)
            if idxs:
                issue.add(make_key(entry.post_id, QUESTION, None, idxs.pop(0)))
            else:
                issue.add(f"{entry.post_id}:q:-:unmatched:{i}")
        solution: set[str] = set()
        answers = {aid: sents for aid, sents in entry.answers}
        for sol in obj.get("solutions", ()):
            sents = answers.get(sol["answer_id"], ())
            apool: dict[str, list[int]] = {}
            for s in sents:
                apool.setdefault(s.text, []).append(s.index)
            for i, text in enumerate(sol.get("sentences", ())):
                idxs = apool.get(text)
                if idxs:
                    solution.add(make_key(entry.post_id, ANSWER, sol["answer_id"],
                                          idxs.pop(0)))
                else:
                    solution.add(f"{entry.post_id}:a:{sol['answer_id']}:unmatched:{i}")
        results.append((entry, issue, solution))
    return results


def _print_eval(name: str, ev) -> None:
    print(f"[{name}] issue:    micro P={ev.issue.precision:.3f} "
          f"R={ev.issue.recall:.3f} F1={ev.issue.f1:.3f} | "
          f"macro P={ev.issue_macro[0]:.3f} R={ev.issue_macro[1]:.3f} "
          f"F1={ev.issue_macro[2]:.3f}")
    print(f"[{name}] solution: micro P={ev.solution.precision:.3f} "
          f"R={ev.solution.recall:.3f} F1={ev.solution.f1:.3f} | "
          f"macro P={ev.solution_macro[0]:.3f} R={ev.solution_macro[1]:.3f} "
          f"F1={ev.solution_macro[2]:.3f}")
    if ev.failures:
        print(f"[{name}] skipped threads: {ev.failures}")


def _eval_to_obj(ev) -> dict:
    def prf(p):
        return {"precision": p.precision, "recall": p.recall, "f1": p.f1,
                "intersection": p.intersection, "extracted": p.extracted,
                "gold": p.gold}
    return {"issue": prf(ev.issue), "solution": prf(ev.solution),
            "issue_macro": list(ev.issue_macro),
            "solution_macro": list(ev.solution_macro),
            "failures": ev.failures}


def cmd_evaluate(args) -> int:
    benchmark = load_benchmark(args.benchmark)
    inputs = {"benchmark": Path(args.benchmark)}
    if args.pairs:
        resolved = _pairs_to_keysets(Path(args.pairs), benchmark)
        issue_parts, solution_parts = [], []
        for entry, issue, solution in resolved:
            g_issue, g_solution = gold_keys(entry)
            issue_parts.append(sentence_prf(issue, g_issue))
            solution_parts.append(sentence_prf(solution, g_solution))
        ev = aggregate_parts(issue_parts, solution_parts)
        name = "pairs"
        inputs["pairs"] = Path(args.pairs)
        config = {"mode": "pairs"}
    else:
        provider, extra_inputs = _make_provider(args)
        inputs.update(extra_inputs)
        if args.extractor == "full":
            patterns, pattern_inputs = _patterns(args)
            inputs.update(pattern_inputs)
            cnn = load_weights(args.cnn_weights) if args.cnn_weights else None
            settings = PipelineSettings(provider=provider, patterns=patterns,
                                        weights=_parse_weights(args.weights),
                                        cnn=cnn, top_k=args.top_k)
            extractor = full_pipeline_extractor(settings)
        else:
            extractor = baseline_extractor(args.extractor, provider, k=args.top_k,
                                           threshold=args.lexrank_threshold)
        ev = evaluate_extractor(extractor, benchmark)
        name = args.extractor
        config = {"mode": "extractor", "extractor": args.extractor,
                  "top_k": args.top_k, "provider": args.provider}
    _print_eval(name, ev)
    if args.output:
        Path(args.output).write_text(
            json.dumps(_eval_to_obj(ev), indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        _write_manifest(args.output, "evaluate", inputs, config,
                        getattr(args, "seed", None))
        print(f"report -> {args.output}")
    return 0


def cmd_ablate(args) -> int:
    benchmark = load_benchmark(args.benchmark)
    provider, extra_inputs = _make_provider(args)
    patterns, pattern_inputs = _patterns(args)
    cnn = load_weights(args.cnn_weights) if args.cnn_weights else None
    settings = PipelineSettings(provider=provider, patterns=patterns,
                                weights=_parse_weights(args.weights), cnn=cnn,
                                top_k=args.top_k)
    wanted = args.variants.split(",") if args.variants else [v.name for v in STANDARD_VARIANTS]
    by_name = {v.name: v for v in STANDARD_VARIANTS}
    try:
        variants = [by_name[name] for name in wanted]
    except KeyError as exc:
        raise ConfigError(f"unknown variant {exc.args[0]!r}; "
                          f"choose from {sorted(by_name)}") from exc
    results = run_ablation(variants, benchmark, settings)
    for name, ev in results.items():
        _print_eval(name, ev)
    if args.output:
        obj = {name: _eval_to_obj(ev) for name, ev in results.items()}
        Path(args.output).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
        inputs = {"benchmark": Path(args.benchmark), **extra_inputs, **pattern_inputs}
        _write_manifest(args.output, "ablate", inputs,
                        {"variants": wanted, "top_k": args.top_k,
                         "provider": args.provider}, args.seed)
        print(f"table -> {args.output}")
    return 0


def cmd_train_cnn(args) -> int:
    benchmark = load_benchmark(args.benchmark)
    provider, extra_inputs = _make_provider(args)
    config = CnnConfig.sentence_relevance(
        embed_dim=provider.dim, seed=args.seed, epochs=args.epochs,
        learning_rate=args.learning_rate, filters_per_branch=args.filters,
        dropout_rate=args.dropout, batch_size=args.batch_size)
    examples = relevance_examples(benchmark, provider,
                                  min_rows=config.max_kernel)
    weights = cnn_train(examples, config)
    save_weights(weights, args.output)
    inputs = {"benchmark": Path(args.benchmark), **extra_inputs}
    _write_manifest(args.output, "train-cnn", inputs,
                    {"epochs": args.epochs, "learning_rate": args.learning_rate,
                     "filters": args.filters, "dropout": args.dropout,
                     "batch_size": args.batch_size, "provider": args.provider},
                    args.seed)
    print(f"trained relevance model on {len(examples)} sentences -> {args.output}")
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="archpairs",
        description="Mine architecture-related Q&A threads and extract "
                    "issue-solution sentence pairs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="raw dump -> cleaned corpus file")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--format", choices=["xml-dump", "jsonl"], required=True)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--min-score", type=int, default=1,
                   help="drop posts scoring below this (default 1)")
    p.add_argument("--no-score-filter", action="store_true",
                   help="keep all posts regardless of score")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="corpus + labels -> classifier model")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--labels", required=True, type=Path)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--kind", choices=["logistic", "linear-svm", "bernoulli-nb",
                                      "knn", "cart"], default="logistic")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--ngram-min", type=int, default=1)
    p.add_argument("--ngram-max", type=int, default=3)
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--stop-list", type=Path)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="corpus + model -> positive subset corpus")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--stop-list", type=Path)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("extract", help="corpus -> issue/solution pairs file")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--seed", type=int, required=True)
    _add_provider_args(p)
    p.add_argument("--weights", help="similarity,textcnn,linguistic,heuristic")
    p.add_argument("--top-k", type=int, default=6)
    p.add_argument("--pattern-file", type=Path)
    p.add_argument("--cnn-weights", type=Path)
    p.add_argument("--pooled-answers", action="store_true",
                   help="one top-k budget across all answers")
    p.add_argument("--cues-question-only", action="store_true",
                   help="apply 5W1H cues to question sentences only")
    p.add_argument("--render", type=Path, help="also write a human-readable file")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="pairs or extractor vs benchmark")
    p.add_argument("--benchmark", required=True, type=Path)
    p.add_argument("--pairs", type=Path, help="evaluate a pairs file")
    p.add_argument("--extractor", choices=["full", "textrank", "lexrank", "luhn"],
                   default="full")
    p.add_argument("--output", type=Path)
    p.add_argument("--seed", type=int, default=0)
    _add_provider_args(p)
    p.add_argument("--weights")
    p.add_argument("--top-k", type=int, default=6)
    p.add_argument("--pattern-file", type=Path)
    p.add_argument("--cnn-weights", type=Path)
    p.add_argument("--lexrank-threshold", type=float, default=0.1)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="feature-contribution table on a benchmark")
    p.add_argument("--benchmark", required=True, type=Path)
    p.add_argument("--output", type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", "--variants", dest="variants",
                   help="comma list: full,no-contextual,no-textcnn,"
                        "no-linguistic-heuristic")
    _add_provider_args(p)
    p.add_argument("--weights")
    p.add_argument("--top-k", type=int, default=6)
    p.add_argument("--pattern-file", type=Path)
    p.add_argument("--cnn-weights", type=Path)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("train-cnn", help="benchmark -> relevance model weights")
    p.add_argument("--benchmark", required=True, type=Path)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--seed", type=int, required=True)
    _add_provider_args(p)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--filters", type=int, default=32)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--batch-size", type=int, default=32)
    p.set_defaults(func=cmd_train_cnn)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ArchpairsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
