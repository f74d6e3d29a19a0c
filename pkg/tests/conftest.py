"""Shared planted fixtures.

The mini benchmark plants three sentence populations per thread side:

  gold    carry a recommendation/task phrase, a question cue or length, and
          the thread's topic tokens (so their hash embeddings sit close to
          the question mean)
  decoys  dense runs of the topic tokens only: maximal graph centrality and
          significant-word density, but no linguistic/heuristic signal
  junk    short one-off tokens

The full multi-feature pipeline should prefer gold; pure-centrality and
word-frequency baselines should prefer the decoys.
"""

import json

import pytest

from archpairs.benchkit import Benchmark, BenchmarkEntry, LabeledSentence

TOPICS = ["gateway", "shard", "latency", "replica", "broker", "cache",
          "tenant", "cluster", "queue", "nginx"]

GOLD_Q_TEMPLATES = [
    "I am building a {t0} {t1} platform where the {t2} {t3} path feeds the "
    "{t0} {t1} store, how should the {t2} {t3} budget grow?",
    "How to structure the {t0} {t1} layer so the {t2} {t3} pool keeps the "
    "{t0} {t1} read path and the {t2} {t3} writes stable?",
    "I want to design a {t0} {t1} strategy because the {t2} {t3} tier and "
    "the {t0} {t1} writer block the {t2} {t3} during peaks, what helps?",
    "Why does the {t0} {t1} time out when the {t2} {t3} worker drains the "
    "{t0} {t1} backlog and the {t2} {t3} fills up under load?",
]

GOLD_A_TEMPLATES = [
    "I would recommend splitting the {t0} {t1} by {t2} {t3} so each {t0} "
    "{t1} stays small and the {t2} {t3} can rebalance without downtime.",
    "You should move the {t0} {t1} behind the {t2} {t3} tier and let the "
    "{t0} {t1} absorb bursts before the {t2} {t3} sees them.",
    "It is recommended to keep one {t0} {t1} per {t2} {t3} because the best "
    "{t0} {t1} numbers come from isolating the {t2} {t3} early.",
    "A good approach is to cache the {t0} {t1} lookups near the {t2} {t3} "
    "so the {t0} {t1} only sees misses and the {t2} {t3} stays calm.",
]


def _decoy(topics, salt):
    ring = topics + topics
    return " ".join(ring[salt % 4:salt % 4 + 7]) + "."


def _junk(i, post_id):
    return f"misc{post_id}x{i} note."


def planted_entry(post_id, n_gold=4, n_decoy=4, n_junk=2):
    topics = [TOPICS[(post_id + k) % len(TOPICS)] for k in range(4)]
    t = dict(t0=topics[0], t1=topics[1], t2=topics[2], t3=topics[3])

    def body(templates, aid=None):
        sents = []
        for g in range(n_gold):
            sents.append((templates[g % len(templates)].format(**t), 1))
        for d in range(n_decoy):
            sents.append((_decoy(topics, d + post_id), 0))
        for j in range(n_junk):
            sents.append((_junk(j, post_id if aid is None else aid), 0))
        return tuple(LabeledSentence(i, text, lab) for i, (text, lab) in enumerate(sents))

    return BenchmarkEntry(
        post_id=post_id,
        title=f"How should the {topics[0]} scale?",
        question=body(GOLD_Q_TEMPLATES),
        answers=((post_id * 100 + 1, body(GOLD_A_TEMPLATES, aid=post_id * 100 + 1)),),
    )


@pytest.fixture(scope="session")
def mini_benchmark() -> Benchmark:
    return Benchmark(entries=[planted_entry(pid) for pid in range(1, 11)])


ARCH_WORDS = ["architecture", "microservice", "scaling", "pattern", "gateway",
              "eventual", "consistency", "topology"]
PROG_WORDS = ["array", "loop", "string", "nullpointer", "syntax", "compile",
              "regex", "index"]


def planted_raw_posts(n_threads=16):
    """Raw (markup) posts + labels: keyword-determined architecture labels."""
    posts = []
    labels = []
    for i in range(n_threads):
        label = i % 2
        words = ARCH_WORDS if label else PROG_WORDS
        w = [words[(i + k) % len(words)] for k in range(4)]
        pid = 1000 + i
        body = (f"<p>I keep hitting a problem with my {w[0]} {w[1]} setup. "
                f"How should the {w[2]} interact with the {w[3]}? "
                f"See <a href='https://example.com/{i}'>the docs</a>.</p>"
                f"<pre><code>snippet {i}</code></pre>")
        posts.append({"post_id": pid, "post_type": "question", "parent_id": None,
                      "title": f"{w[0]} {w[1]} question {i}", "body": body,
                      "tags": [w[0]], "score": 3})
        posts.append({"post_id": pid + 500, "post_type": "answer", "parent_id": pid,
                      "title": None,
                      "body": f"<p>I would recommend tuning the {w[0]} first. "
                              f"Use a {w[2]} probe to confirm.</p>",
                      "tags": [], "score": 2})
        labels.append({"post_id": pid, "label": label})
    posts_text = "\n".join(json.dumps(p) for p in posts) + "\n"
    labels_text = "\n".join(json.dumps(l) for l in labels) + "\n"
    return posts_text, labels_text


@pytest.fixture()
def raw_posts_and_labels(tmp_path):
    posts_text, labels_text = planted_raw_posts()
    posts = tmp_path / "raw_posts.jsonl"
    labels = tmp_path / "labels.jsonl"
    posts.write_text(posts_text)
    labels.write_text(labels_text)
    return posts, labels
