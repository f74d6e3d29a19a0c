"""Post classification: architecture-related vs programming-related.

Five classical model kinds over sparse or dense feature vectors (logistic
regression and linear SVM trained by seeded SGD, Bernoulli naive Bayes with
Laplace smoothing, k-nearest-neighbour voting, and a Gini-split decision
tree), evaluation with the usual confusion-matrix metrics, and a pluggable
wire protocol for delegating classification to an external model endpoint.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .embeddings.vectors import DenseVector, SparseVector, cosine
from .errors import ConfigError, ProtocolError, TransportError

log = logging.getLogger(__name__)

LOGISTIC = "logistic"
LINEAR_SVM = "linear-svm"
BERNOULLI_NB = "bernoulli-nb"
KNN = "knn"
CART = "cart"
KINDS = (LOGISTIC, LINEAR_SVM, BERNOULLI_NB, KNN, CART)

Features = SparseVector | DenseVector


@dataclass(frozen=True)
class LabeledDoc:
    features: Features
    label: int  # 1 = architecture-related, 0 = programming
    post_id: int = 0

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ConfigError(f"label must be 0/1, got {self.label}")


@dataclass(frozen=True)
class TrainParams:
    """Pinned defaults standing in for library-default hyperparameters."""

    seed: int = 0
    learning_rate: float = 0.01
    epochs: int = 100
    l2: float = 1e-4
    nb_alpha: float = 1.0
    k: int = 5
    min_split: int = 2
    max_depth: int | None = None


@dataclass
class ClassifierModel:
    kind: str
    dim: int
    params: dict
    majority_label: int | None = None  # set for degenerate training data
    majority_score: float = 0.5


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    accuracy: float


# --------------------------------------------------------------------------
# feature helpers
# --------------------------------------------------------------------------

def _dim(f: Features) -> int:
    return f.dim


def _dense(f: Features) -> np.ndarray:
    return f.values if isinstance(f, DenseVector) else f.to_dense()


def _dot(w: np.ndarray, f: Features) -> float:
    if isinstance(f, DenseVector):
        return float(w @ f.values)
    return float(sum(w[i] * v for i, v in f.entries))


def _axpy(alpha: float, f: Features, out: np.ndarray) -> None:
    if isinstance(f, DenseVector):
        out += alpha * f.values
    else:
        for i, v in f.entries:
            out[i] += alpha * v


def _present(f: Features) -> set[int]:
    if isinstance(f, DenseVector):
        return {int(i) for i in np.nonzero(f.values)[0]}
    return {i for i, v in f.entries if v != 0.0}


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


# --------------------------------------------------------------------------
# dataset split
# --------------------------------------------------------------------------

def split_dataset(docs: Sequence[LabeledDoc], train_fraction: float,
                  seed: int) -> tuple[list[LabeledDoc], list[LabeledDoc]]:
    """Deterministic stratified split; per-class counts off by at most one."""
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0,1), got {train_fraction}")
    by_class: dict[int, list[int]] = {0: [], 1: []}
    for i, d in enumerate(docs):
        by_class[d.label].append(i)
    if not by_class[0] or not by_class[1]:
        raise ConfigError("both classes must be present to split")
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in (0, 1):
        idx = np.array(by_class[label])
        rng.shuffle(idx)
        n_train = int(round(train_fraction * len(idx)))
        n_train = min(max(n_train, 1), len(idx) - 1)  # keep both sides non-empty
        train_idx.extend(idx[:n_train])
        test_idx.extend(idx[n_train:])
    return [docs[i] for i in sorted(train_idx)], [docs[i] for i in sorted(test_idx)]


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

def _degenerate(train: Sequence[LabeledDoc]) -> bool:
    first = _dense(train[0].features)
    return all(np.array_equal(_dense(d.features), first) for d in train[1:])


def train_classifier(kind: str, train: Sequence[LabeledDoc],
                     params: TrainParams = TrainParams()) -> ClassifierModel:
    """Fit one model kind; deterministic given params.seed."""
    if kind not in KINDS:
        raise ConfigError(f"unknown classifier kind {kind!r}")
    if not train:
        raise ConfigError("empty training set")
    labels = {d.label for d in train}
    if len(labels) < 2:
        raise ConfigError("training requires both classes")
    dim = _dim(train[0].features)
    if any(_dim(d.features) != dim for d in train):
        raise ConfigError("inconsistent feature dimensions")

    if _degenerate(train):
        counts = [sum(1 for d in train if d.label == lab) for lab in (0, 1)]
        majority = 1 if counts[1] > counts[0] else 0
        log.warning("degenerate features (all identical); falling back to "
                    "majority class %d", majority)
        return ClassifierModel(kind=kind, dim=dim, params={},
                               majority_label=majority,
                               majority_score=counts[1] / len(train))

    if kind == LOGISTIC:
        return _train_sgd(train, dim, params, hinge=False)
    if kind == LINEAR_SVM:
        return _train_sgd(train, dim, params, hinge=True)
    if kind == BERNOULLI_NB:
        return _train_nb(train, dim, params)
    if kind == KNN:
        return _train_knn(train, dim, params)
    return _train_cart(train, dim, params)


def _train_sgd(train: Sequence[LabeledDoc], dim: int, params: TrainParams,
               *, hinge: bool) -> ClassifierModel:
    rng = np.random.default_rng(params.seed)
    w = np.zeros(dim)
    b = 0.0
    lr, l2 = params.learning_rate, params.l2
    for _ in range(params.epochs):
        for i in rng.permutation(len(train)):
            doc = train[i]
            z = _dot(w, doc.features) + b
            if hinge:
                y_pm = 2 * doc.label - 1
                w *= (1.0 - lr * l2)
                if y_pm * z < 1.0:
                    _axpy(lr * y_pm, doc.features, w)
                    b += lr * y_pm
            else:
                g = _sigmoid(z) - doc.label
                w *= (1.0 - lr * l2)
                _axpy(-lr * g, doc.features, w)
                b -= lr * g
    kind = LINEAR_SVM if hinge else LOGISTIC
    return ClassifierModel(kind=kind, dim=dim,
                           params={"w": w, "b": b})


def _train_nb(train: Sequence[LabeledDoc], dim: int, params: TrainParams) -> ClassifierModel:
    alpha = params.nb_alpha
    counts = np.zeros((2, dim))
    n = np.zeros(2)
    for d in train:
        n[d.label] += 1
        for j in _present(d.features):
            counts[d.label, j] += 1
    theta = (counts + alpha) / (n[:, None] + 2 * alpha)
    return ClassifierModel(kind=BERNOULLI_NB, dim=dim, params={
        "log_theta": np.log(theta),
        "log_one_minus_theta": np.log1p(-theta),
        "log_prior": np.log(n / n.sum()),
    })


def _train_knn(train: Sequence[LabeledDoc], dim: int, params: TrainParams) -> ClassifierModel:
    if params.k < 1:
        raise ConfigError("knn requires k >= 1")
    return ClassifierModel(kind=KNN, dim=dim, params={
        "k": params.k,
        "features": [d.features for d in train],
        "labels": [d.label for d in train],
    })


@dataclass
class _TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "_TreeNode | None" = None
    right: "_TreeNode | None" = None
    positive_fraction: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _gini(labels: np.ndarray) -> float:
    if labels.size == 0:
        return 0.0
    p = labels.mean()
    return 2.0 * p * (1.0 - p)


def _grow_tree(x: np.ndarray, y: np.ndarray, depth: int, params: TrainParams) -> _TreeNode:
    node = _TreeNode(positive_fraction=float(y.mean()))
    if (y.size < params.min_split or len(set(y.tolist())) == 1
            or (params.max_depth is not None and depth >= params.max_depth)):
        return node
    best = (0.0, -1, 0.0)  # (gain, feature, threshold)
    parent = _gini(y)
    for j in range(x.shape[1]):
        col = x[:, j]
        values = np.unique(col)
        if values.size < 2:
            continue
        for t in (values[:-1] + values[1:]) / 2.0:
            left = y[col < t]
            right = y[col >= t]
            gain = parent - (left.size * _gini(left) + right.size * _gini(right)) / y.size
            if gain > best[0] + 1e-12:
                best = (gain, j, float(t))
    if best[1] < 0:
        return node
    _, j, t = best
    mask = x[:, j] < t
    node.feature, node.threshold = j, t
    node.left = _grow_tree(x[mask], y[mask], depth + 1, params)
    node.right = _grow_tree(x[~mask], y[~mask], depth + 1, params)
    return node


def _train_cart(train: Sequence[LabeledDoc], dim: int, params: TrainParams) -> ClassifierModel:
    x = np.stack([_dense(d.features) for d in train])
    y = np.array([d.label for d in train], dtype=np.float64)
    return ClassifierModel(kind=CART, dim=dim, params={"root": _grow_tree(x, y, 0, params)})


# --------------------------------------------------------------------------
# prediction & evaluation
# --------------------------------------------------------------------------

def predict(model: ClassifierModel, features: Features) -> tuple[int, float]:
    """(label, score in [0,1]); label is 1 iff score >= 0.5."""
    if _dim(features) != model.dim:
        raise ConfigError(f"feature dim {_dim(features)} != model dim {model.dim}")
    if model.majority_label is not None:
        return model.majority_label, model.majority_score
    if model.kind in (LOGISTIC, LINEAR_SVM):
        z = _dot(model.params["w"], features) + model.params["b"]
        score = _sigmoid(z)
    elif model.kind == BERNOULLI_NB:
        present = _present(features)
        log_post = model.params["log_prior"] + model.params["log_one_minus_theta"].sum(axis=1)
        for j in present:
            log_post = log_post + (model.params["log_theta"][:, j]
                                   - model.params["log_one_minus_theta"][:, j])
        m = log_post.max()
        exp = np.exp(log_post - m)
        score = float(exp[1] / exp.sum())
    elif model.kind == KNN:
        score = _knn_score(model, features)
    else:
        node = model.params["root"]
        dense = _dense(features)
        while not node.is_leaf:
            node = node.left if dense[node.feature] < node.threshold else node.right
        score = node.positive_fraction
    return (1 if score >= 0.5 else 0), float(score)


def _knn_score(model: ClassifierModel, features: Features) -> float:
    stored: list[Features] = model.params["features"]
    labels: list[int] = model.params["labels"]
    k = min(model.params["k"], len(stored))
    if isinstance(features, DenseVector):
        dists = [1.0 - cosine(features, f) for f in stored]
    else:
        qn = features.norm() ** 2
        dists = []
        for f in stored:
            dot = _sparse_dot(features, f)
            dists.append(math.sqrt(max(qn + f.norm() ** 2 - 2.0 * dot, 0.0)))
    order = sorted(range(len(stored)), key=lambda i: (dists[i], i))[:k]
    return sum(labels[i] for i in order) / k


def _sparse_dot(a: SparseVector, b: Features) -> float:
    if isinstance(b, DenseVector):
        return float(sum(v * b.values[i] for i, v in a.entries))
    bmap = dict(b.entries)
    return float(sum(v * bmap[i] for i, v in a.entries if i in bmap))


def report_from_counts(tp: int, fp: int, fn: int, tn: int) -> EvalReport:
    """Confusion counts -> metrics; zero denominators yield 0."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 0.0
    return EvalReport(tp=tp, fp=fp, fn=fn, tn=tn, precision=precision,
                      recall=recall, f1=f1, accuracy=accuracy)


def evaluate(model: ClassifierModel, test: Sequence[LabeledDoc]) -> EvalReport:
    """Confusion-matrix metrics with class 1 as positive."""
    if not test:
        raise ConfigError("empty test set")
    tp = fp = fn = tn = 0
    for d in test:
        label, _ = predict(model, d.features)
        if label == 1 and d.label == 1:
            tp += 1
        elif label == 1 and d.label == 0:
            fp += 1
        elif label == 0 and d.label == 1:
            fn += 1
        else:
            tn += 1
    return report_from_counts(tp, fp, fn, tn)


# --------------------------------------------------------------------------
# model persistence (self-describing, kind-tagged)
# --------------------------------------------------------------------------

def _features_to_obj(f: Features) -> dict:
    if isinstance(f, DenseVector):
        return {"dim": f.dim, "values": [float(x) for x in f.values]}
    return {"dim": f.dim, "entries": [[i, float(v)] for i, v in f.entries]}


def _features_from_obj(obj: dict) -> Features:
    if "values" in obj:
        return DenseVector(dim=obj["dim"], values=np.array(obj["values"]))
    return SparseVector(dim=obj["dim"],
                        entries=tuple((int(i), float(v)) for i, v in obj["entries"]))


def _tree_to_obj(node: _TreeNode) -> dict:
    if node.is_leaf:
        return {"leaf": node.positive_fraction}
    return {"feature": node.feature, "threshold": node.threshold,
            "positive_fraction": node.positive_fraction,
            "left": _tree_to_obj(node.left), "right": _tree_to_obj(node.right)}


def _tree_from_obj(obj: dict) -> _TreeNode:
    if "leaf" in obj:
        return _TreeNode(positive_fraction=obj["leaf"])
    return _TreeNode(feature=obj["feature"], threshold=obj["threshold"],
                     positive_fraction=obj["positive_fraction"],
                     left=_tree_from_obj(obj["left"]),
                     right=_tree_from_obj(obj["right"]))


def model_to_obj(model: ClassifierModel) -> dict:
    obj: dict = {"kind": model.kind, "dim": model.dim,
                 "majority_label": model.majority_label,
                 "majority_score": model.majority_score}
    p = model.params
    if model.majority_label is not None:
        obj["params"] = {}
    elif model.kind in (LOGISTIC, LINEAR_SVM):
        obj["params"] = {"w": [float(x) for x in p["w"]], "b": float(p["b"])}
    elif model.kind == BERNOULLI_NB:
        obj["params"] = {k: p[k].tolist() for k in
                         ("log_theta", "log_one_minus_theta", "log_prior")}
    elif model.kind == KNN:
        obj["params"] = {"k": p["k"],
                         "features": [_features_to_obj(f) for f in p["features"]],
                         "labels": list(p["labels"])}
    else:
        obj["params"] = {"root": _tree_to_obj(p["root"])}
    return obj


def model_from_obj(obj: dict) -> ClassifierModel:
    kind, dim = obj["kind"], obj["dim"]
    if kind not in KINDS:
        raise ConfigError(f"unknown classifier kind {kind!r} in model file")
    raw = obj["params"]
    params: dict = {}
    if obj.get("majority_label") is None:
        if kind in (LOGISTIC, LINEAR_SVM):
            params = {"w": np.array(raw["w"]), "b": float(raw["b"])}
        elif kind == BERNOULLI_NB:
            params = {k: np.array(raw[k]) for k in
                      ("log_theta", "log_one_minus_theta", "log_prior")}
        elif kind == KNN:
            params = {"k": raw["k"],
                      "features": [_features_from_obj(f) for f in raw["features"]],
                      "labels": list(raw["labels"])}
        else:
            params = {"root": _tree_from_obj(raw["root"])}
    return ClassifierModel(kind=kind, dim=dim, params=params,
                           majority_label=obj.get("majority_label"),
                           majority_score=obj.get("majority_score", 0.5))


# --------------------------------------------------------------------------
# external classifier protocol
# --------------------------------------------------------------------------

CLASSIFY_PROMPT = (
    "Tell me if the following text is related to a software architecture "
    "discussion or a software programming discussion. Just say 1 for the "
    "software architecture discussion or 0 for the software programming "
    "discussion."
)

ENDPOINT_ENV_VAR = "ARCHPAIRS_CLASSIFIER_ENDPOINT"


@dataclass(frozen=True)
class ClassifyRequest:
    prompt: str
    text: str
    temperature: float = 0.0
    max_tokens: int = 5

    def payload(self) -> str:
        return f"{self.prompt}\n\n{self.text}"


class MockTransport:
    """Scripted transport for tests: replies in order, or via a function."""

    def __init__(self, replies: list[str] | Callable[[ClassifyRequest], str]):
        self._replies = replies
        self._cursor = 0
        self.requests: list[ClassifyRequest] = []

    def send(self, request: ClassifyRequest) -> str:
        self.requests.append(request)
        if callable(self._replies):
            return self._replies(request)
        if self._cursor >= len(self._replies):
            raise TransportError("mock transport exhausted")
        reply = self._replies[self._cursor]
        self._cursor += 1
        return reply


class HttpTransport:
    """POSTs the request payload to the endpoint named by the environment."""

    def __init__(self, endpoint: str | None = None, timeout: float = 30.0):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV_VAR)
        self.timeout = timeout
        if not self.endpoint:
            raise ConfigError(f"no endpoint; set {ENDPOINT_ENV_VAR}")

    def send(self, request: ClassifyRequest) -> str:
        import urllib.request
        body = json.dumps({
            "prompt": request.prompt, "text": request.text,
            "temperature": request.temperature, "max_tokens": request.max_tokens,
        }).encode()
        req = urllib.request.Request(self.endpoint, data=body,
                                     headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return resp.read().decode()
        except OSError as exc:
            raise TransportError(str(exc)) from exc


def external_classify(post_text: str, transport, retries: int = 2) -> int:
    """Ask the external model; parse the single-token 0/1 reply.

    Transport failures are retried up to ``retries`` times, then surfaced
    with the attempt count. A reply that does not start with 0 or 1 is a
    protocol error.
    """
    request = ClassifyRequest(prompt=CLASSIFY_PROMPT, text=post_text)
    attempts = 0
    while True:
        attempts += 1
        try:
            reply = transport.send(request)
            break
        except TransportError as exc:
            if attempts > retries:
                raise TransportError(f"transport failed: {exc}", attempts=attempts) from exc
    first = reply.strip().split()[0] if reply.strip() else ""
    if first == "1":
        return 1
    if first == "0":
        return 0
    raise ProtocolError(f"expected reply starting with 0 or 1, got {reply!r}")
