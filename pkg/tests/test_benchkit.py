import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from archpairs.benchkit import (
    STANDARD_VARIANTS,
    AblationVariant,
    Benchmark,
    BenchmarkEntry,
    LabeledSentence,
    PipelineSettings,
    PrfResult,
    baseline_extractor,
    entry_to_arp,
    evaluate_extractor,
    full_pipeline_extractor,
    gold_keys,
    lexrank_extract,
    load_benchmark,
    luhn_extract,
    luhn_scores,
    power_iteration_pagerank,
    redistribute_weights,
    run_ablation,
    save_benchmark,
    sentence_prf,
    textrank_extract,
    textrank_scores,
)
from archpairs.corpus.sentences import QUESTION, Sentence
from archpairs.embeddings import DenseVector, HashEmbedder
from archpairs.errors import ConfigError, FormatError
from archpairs.extract import WeightConfig


def entry(post_id=1, q_labels=(1, 0), a_labels=((7, (1, 0)),)):
    question = tuple(LabeledSentence(i, f"question sentence {i} of {post_id}", lab)
                     for i, lab in enumerate(q_labels))
    answers = tuple(
        (aid, tuple(LabeledSentence(i, f"answer {aid} sentence {i}", lab)
                    for i, lab in enumerate(labs)))
        for aid, labs in a_labels)
    return BenchmarkEntry(post_id=post_id, title=f"T{post_id}",
                          question=question, answers=answers)


def sentences(texts, origin=QUESTION, answer_id=None):
    return [Sentence(post_id=1, origin=origin, answer_id=answer_id, index=i,
                     raw_text=t, token_count=len(t.split()))
            for i, t in enumerate(texts)]


class TestBenchmarkIO:
    def test_round_trip_and_counts(self, tmp_path):
        bench = Benchmark(entries=[entry(1), entry(2, q_labels=(1, 1, 0))])
        path = tmp_path / "bench.jsonl"
        with path.open("w") as fh:
            save_benchmark(bench, fh)
        again = load_benchmark(path)
        assert again.entries == bench.entries
        assert again.gold_question == 3
        assert again.gold_answer == 2
        assert again.gold_total == 5

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        bench = load_benchmark(path)
        assert bench.entries == [] and bench.gold_total == 0

    def test_dangling_index_rejected(self, tmp_path):
        obj = {"post_id": 1, "title": "T",
               "question_sentences": [{"idx": 0, "text": "a", "label": 1},
                                      {"idx": 2, "text": "b", "label": 0}],
               "answers": []}
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(obj) + "\n")
        with pytest.raises(FormatError, match="dangling"):
            load_benchmark(path)

    def test_gold_budget_enforced(self, tmp_path):
        obj = {"post_id": 1, "title": "T",
               "question_sentences": [{"idx": i, "text": f"s{i}", "label": 1}
                                      for i in range(7)],
               "answers": []}
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(obj) + "\n")
        with pytest.raises(FormatError, match="exceed"):
            load_benchmark(path)


class TestSentencePrf:
    def test_partial_overlap(self):
        got = sentence_prf({"b", "c", "d"}, {"a", "b", "c"})
        assert (got.precision, got.recall, got.f1) == \
            (pytest.approx(2 / 3), pytest.approx(2 / 3), pytest.approx(2 / 3))

    def test_exact_match(self):
        got = sentence_prf({"a", "b"}, {"a", "b"})
        assert (got.precision, got.recall, got.f1) == (1.0, 1.0, 1.0)

    def test_disjoint(self):
        got = sentence_prf({"a"}, {"b"})
        assert (got.precision, got.recall, got.f1) == (0.0, 0.0, 0.0)

    @given(st.sets(st.integers(0, 12), max_size=10),
           st.sets(st.integers(0, 12), max_size=10))
    def test_matches_brute_force(self, extracted, gold):
        ex = {f"k{i}" for i in extracted}
        gd = {f"k{i}" for i in gold}
        got = sentence_prf(ex, gd)
        inter = sum(1 for k in ex if k in gd)
        assert got.intersection == inter
        assert got.precision == (inter / len(ex) if ex else 0.0)
        assert got.recall == (inter / len(gd) if gd else 0.0)


class TestEvaluateExtractor:
    def test_perfect_extractor(self):
        bench = Benchmark(entries=[entry(1), entry(2)])
        ev = evaluate_extractor(lambda arp: gold_keys(
            next(e for e in bench.entries if e.post_id == arp.post_id)), bench)
        assert ev.issue.f1 == 1.0 and ev.solution.f1 == 1.0
        assert ev.issue_macro[2] == 1.0

    def test_empty_extractor(self):
        bench = Benchmark(entries=[entry(1)])
        ev = evaluate_extractor(lambda arp: (set(), set()), bench)
        assert ev.issue.f1 == 0.0 and ev.solution.f1 == 0.0

    def test_failures_counted_and_skipped(self):
        bench = Benchmark(entries=[entry(1), entry(2)])

        def flaky(arp):
            if arp.post_id == 1:
                raise RuntimeError("boom")
            return gold_keys(bench.entries[1])

        ev = evaluate_extractor(flaky, bench)
        assert ev.failures == 1 and ev.issue.f1 == 1.0

    def test_micro_equals_per_arp_when_identical(self):
        bench = Benchmark(entries=[entry(1), entry(2)])
        ev = evaluate_extractor(
            lambda arp: ({f"{arp.post_id}:q:-:0"}, {f"{arp.post_id}:a:7:0"}), bench)
        assert ev.issue.f1 == pytest.approx(ev.issue_macro[2])


class TestAblation:
    def test_redistribution_arithmetic(self):
        base = WeightConfig(0.35, 0.15, 0.30, 0.20)
        got = redistribute_weights(base, frozenset({"textcnn"}))
        assert got.w_similarity == pytest.approx(0.35 / 0.85, abs=1e-4)
        assert got.w_textcnn == 0.0
        assert got.w_linguistic == pytest.approx(0.30 / 0.85, abs=1e-4)
        assert got.w_heuristic == pytest.approx(0.20 / 0.85, abs=1e-4)
        assert got.w_similarity == pytest.approx(0.4118, abs=5e-5)
        assert got.w_linguistic == pytest.approx(0.3529, abs=5e-5)
        assert got.w_heuristic == pytest.approx(0.2353, abs=5e-5)

    def test_all_disabled_rejected(self):
        with pytest.raises(ConfigError):
            redistribute_weights(WeightConfig(), frozenset(
                {"contextual", "textcnn", "linguistic+heuristic"}))

    def test_full_variant_equals_plain_evaluation(self):
        bench = Benchmark(entries=[entry(1), entry(2)])
        settings = PipelineSettings(provider=HashEmbedder(dim=32, seed=1), top_k=1)
        results = run_ablation([AblationVariant("full")], bench, settings)
        direct = evaluate_extractor(full_pipeline_extractor(settings), bench)
        assert results["full"].issue == direct.issue
        assert results["full"].solution == direct.solution

    def test_lp_heu_variant_uses_remaining_components(self):
        got = redistribute_weights(WeightConfig(), frozenset({"linguistic+heuristic"}))
        assert got.w_linguistic == 0.0 and got.w_heuristic == 0.0
        assert got.w_similarity + got.w_textcnn == pytest.approx(1.0)

    def test_unknown_component_rejected(self):
        with pytest.raises(ConfigError):
            AblationVariant("bad", frozenset({"nonsense"}))


class TestPageRank:
    def test_uniform_on_symmetric_complete_graph(self):
        w = np.ones((3, 3)) - np.eye(3)
        scores = power_iteration_pagerank(w)
        assert np.allclose(scores, 1 / 3, atol=1e-9)

    def test_sums_to_one(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            w = rng.random((6, 6))
            np.fill_diagonal(w, 0.0)
            assert power_iteration_pagerank(w).sum() == pytest.approx(1.0, abs=1e-9)

    def test_matches_independent_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            w = rng.random((5, 5))
            np.fill_diagonal(w, 0.0)
            got = power_iteration_pagerank(w)
            # independent dense-matrix oracle
            out = w.sum(axis=1)
            p = np.divide(w, out[:, None], out=np.zeros_like(w), where=out[:, None] > 0)
            s = np.full(5, 0.2)
            for _ in range(200):
                dangling = s[out == 0].sum()
                s = 0.15 / 5 + 0.85 * (p.T @ s + dangling / 5)
            assert np.allclose(got, s, atol=1e-6)

    def test_node_order_independent(self):
        rng = np.random.default_rng(17)
        w = rng.random((6, 6))
        np.fill_diagonal(w, 0.0)
        scores = power_iteration_pagerank(w)
        perm = rng.permutation(6)
        permuted = power_iteration_pagerank(w[np.ix_(perm, perm)])
        assert np.allclose(permuted, scores[perm], atol=1e-9)


class TestTextRank:
    def test_identical_sentences_uniform_first_k(self):
        sents = sentences(["same one", "same one", "same one"])
        embs = [DenseVector.of([1.0, 0.0])] * 3
        keys = textrank_extract(sents, embs, 2)
        assert keys == ["1:q:-:0", "1:q:-:1"]

    def test_k_saturates(self):
        sents = sentences(["a b", "c d"])
        embs = [DenseVector.of([1.0, 0.0]), DenseVector.of([0.5, 0.5])]
        assert len(textrank_extract(sents, embs, 9)) == 2

    def test_scores_match_oracle_on_random_graphs(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            embs = [rng.normal(size=8) for _ in range(5)]
            got = textrank_scores(embs)
            sim = np.zeros((5, 5))
            for i in range(5):
                for j in range(5):
                    if i != j:
                        u, v = embs[i], embs[j]
                        c = float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))
                        sim[i, j] = max(0.0, c)
            oracle = power_iteration_pagerank(sim)
            assert np.allclose(got, oracle, atol=1e-6)


class TestLexRank:
    def test_zero_threshold_keeps_nonnegative_edges(self):
        sents = sentences(["a", "b", "c"])
        rng = np.random.default_rng(0)
        embs = [rng.normal(size=6) for _ in range(3)]
        assert len(lexrank_extract(sents, embs, 2, threshold=0.0)) == 2

    def test_threshold_above_everything_gives_document_order(self):
        sents = sentences(["a", "b", "c", "d"])
        rng = np.random.default_rng(1)
        embs = [rng.normal(size=6) for _ in range(4)]
        keys = lexrank_extract(sents, embs, 2, threshold=0.999999)
        assert keys == ["1:q:-:0", "1:q:-:1"]

    def test_invalid_threshold(self):
        with pytest.raises(ConfigError):
            lexrank_extract(sentences(["a"]), [DenseVector.of([1.0])], 1, threshold=1.0)

    def test_scores_match_oracle_on_small_instances(self):
        from archpairs.benchkit import lexrank_scores
        rng = np.random.default_rng(23)
        for _ in range(5):
            embs = [rng.normal(size=7) for _ in range(5)]
            threshold = 0.05
            got = lexrank_scores(embs, threshold)
            adj = np.zeros((5, 5))
            for i in range(5):
                for j in range(5):
                    if i != j:
                        u, v = embs[i], embs[j]
                        c = float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))
                        if c >= threshold:
                            adj[i, j] = 1.0
            out = adj.sum(axis=1)
            p = np.divide(adj, out[:, None], out=np.zeros_like(adj),
                          where=out[:, None] > 0)
            s = np.full(5, 0.2)
            for _ in range(500):
                dangling = s[out == 0].sum()
                s = 0.15 / 5 + 0.85 * (p.T @ s + dangling / 5)
            assert np.allclose(got, s, atol=1e-6)


class TestLuhn:
    def test_single_sentence_selected(self):
        sents = sentences(["queue queue broker"])
        assert luhn_extract(sents, 3) == ["1:q:-:0"]

    def test_zero_significant_words_scores_zero(self):
        scores = luhn_scores([["unique", "tokens", "only"]], frozenset(), 2, 4)
        assert scores == [0.0]

    def test_hand_computed_instance(self):
        # significant (freq >= 2, no stop list): big, data
        token_lists = [
            ["big", "data", "system", "x", "big", "data"],  # window 0..5 -> 16/6
            ["big", "f1", "f2", "f3", "f4", "f5", "data"],  # gap 5 > 4: two singletons
            ["nothing", "else"],
        ]
        got = luhn_scores(token_lists, frozenset(), 2, 4)
        assert got[0] == pytest.approx(16 / 6)
        assert got[1] == pytest.approx(1.0)  # two singleton clusters, each 1/1
        assert got[2] == 0.0

    def test_stopwords_not_significant(self):
        scores = luhn_scores([["the", "the", "the", "queue", "queue"]],
                             frozenset({"the"}), 2, 4)
        assert scores == [pytest.approx(4 / 2)]


class TestBaselineAdapter:
    def test_extractors_return_known_keys(self):
        bench = Benchmark(entries=[entry(1)])
        provider = HashEmbedder(dim=32, seed=0)
        for name in ("textrank", "lexrank", "luhn"):
            extractor = baseline_extractor(name, provider, k=1)
            issue, solution = extractor(entry_to_arp(bench.entries[0]))
            arp = entry_to_arp(bench.entries[0])
            from archpairs.corpus.sentences import sentence_key
            valid = {sentence_key(s) for s in arp.all_sentences()}
            assert issue <= valid and solution <= valid
            assert len(issue) == 1
