"""Candidate ranking model with an abstention slot.

A small feed-forward scorer, implemented directly on numpy with hand-written
gradients. Each candidate is scored from six cosine similarities (country and
feature-class embeddings against projected mention / other-mentions / document
vectors) concatenated with eight numeric features. Per-candidate scores pass
through a sigmoid, a constant-bias abstention slot is appended, and a softmax
over the resulting vector yields the distribution the cross-entropy loss is
trained on. A config switch can feed the softmax raw logits instead, which
removes the sigmoid's loss floor.

Training is plain SGD with inverted dropout on the feature layer, optional
gradient accumulation across batches, and an optional auxiliary head that
predicts the gold country from the projected document vector (sharing the
country embedding table as its output matrix).
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from placelink.features import CandidateFeatures, ContextVectors

MODEL_MAGIC = b"PLRANKER"
MODEL_FORMAT_VERSION = 1

OOV_TOKEN = "<OOV>"

NUM_SIMILARITY_FEATURES = 6
NUMERIC_FEATURE_NAMES = (
    "min_edit_distance",
    "avg_edit_distance",
    "exact_match_flag",
    "alt_name_count_log",
    "population_log",
    "is_adm1_of_other_toponym",
    "has_adm1_parent_in_doc",
    "shared_country_fraction",
)
FEATURE_WIDTH = NUM_SIMILARITY_FEATURES + len(NUMERIC_FEATURE_NAMES)

# log10(population + 1) spans [0, ~10]; the other features live in [0, ~2].
# Scaling the population column keeps one input from dominating the first
# hidden layer at the shared learning rate.
_POP_LOG_SCALE = 0.1

_PARAM_ORDER = (
    "country_emb",
    "fclass_emb",
    "context_proj",
    "hidden_w",
    "hidden_b",
    "out_w",
    "out_b",
    "null_bias",
)

# (feature column, embedding table, projected context vector)
_SIMILARITY_COLUMNS = (
    (0, "c", "pm"),
    (1, "c", "po"),
    (2, "c", "pd"),
    (3, "f", "pm"),
    (4, "f", "po"),
    (5, "f", "pd"),
)


class ModelFileError(Exception):
    """Model file cannot be used."""


class ModelVersionError(ModelFileError):
    """Model file has an unsupported format version."""


class ModelCorruptError(ModelFileError):
    """Model file is structurally invalid."""


class ModelDimensionError(ValueError):
    """Inputs do not match the dimensions the model was built with."""


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during training."""


@dataclass(frozen=True)
class RankerConfig:
    epochs: int = 15
    batch_size: int = 60
    dropout: float = 0.3
    learning_rate: float = 0.4
    embedding_dim: int = 32
    hidden_dim: int = 64
    gradient_accumulation_steps: int = 1
    multitask_country_weight: float = 0.0
    seed: int = 0
    score_mode: str = "sigmoid"
    use_population_feature: bool = True

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        # zero is allowed so a no-op training run can serve as a control
        if self.learning_rate < 0.0:
            raise ValueError("learning_rate must be >= 0")
        if self.embedding_dim < 1 or self.hidden_dim < 1:
            raise ValueError("embedding_dim and hidden_dim must be >= 1")
        if self.gradient_accumulation_steps < 1:
            raise ValueError("gradient_accumulation_steps must be >= 1")
        if self.multitask_country_weight < 0.0:
            raise ValueError("multitask_country_weight must be >= 0")
        if self.score_mode not in ("sigmoid", "logit"):
            raise ValueError(f"score_mode must be 'sigmoid' or 'logit', got {self.score_mode!r}")


@dataclass
class RankerModel:
    config: RankerConfig
    provider_dim: int
    countries: list[str]
    feature_classes: list[str]
    params: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)
    _country_rows: dict[str, int] = field(init=False, repr=False, compare=False)
    _fclass_rows: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.countries[:1] != [OOV_TOKEN] or self.feature_classes[:1] != [OOV_TOKEN]:
            raise ValueError("vocabulary row 0 must be the OOV token")
        self._country_rows = {c: i for i, c in enumerate(self.countries)}
        self._fclass_rows = {c: i for i, c in enumerate(self.feature_classes)}
        missing = [name for name in _PARAM_ORDER if name not in self.params]
        if missing:
            raise ValueError(f"missing parameter arrays: {missing}")

    @classmethod
    def initialize(
        cls,
        countries: Sequence[str],
        feature_classes: Sequence[str],
        provider_dim: int,
        config: RankerConfig,
        metadata: dict | None = None,
    ) -> "RankerModel":
        """Build a fresh model. Unknown values at inference time map to the
        OOV row, which is row 0 of each embedding table."""
        if provider_dim < 1:
            raise ValueError("provider_dim must be >= 1")
        rng = np.random.default_rng(config.seed)
        country_vocab = [OOV_TOKEN] + sorted(set(countries) - {"", OOV_TOKEN})
        fclass_vocab = [OOV_TOKEN] + sorted(set(feature_classes) - {"", OOV_TOKEN})
        e, h, d = config.embedding_dim, config.hidden_dim, provider_dim

        def uniform(shape: tuple[int, ...], fan_in: int) -> np.ndarray:
            limit = 1.0 / np.sqrt(fan_in)
            return rng.uniform(-limit, limit, size=shape)

        params = {
            "country_emb": uniform((len(country_vocab), e), e),
            "fclass_emb": uniform((len(fclass_vocab), e), e),
            "context_proj": uniform((e, d), d),
            "hidden_w": uniform((h, FEATURE_WIDTH), FEATURE_WIDTH),
            "hidden_b": uniform((h,), FEATURE_WIDTH),
            "out_w": uniform((h,), h),
            "out_b": uniform((1,), h),
            "null_bias": np.zeros(1, dtype=np.float64),
        }
        return cls(
            config=config,
            provider_dim=provider_dim,
            countries=country_vocab,
            feature_classes=fclass_vocab,
            params=params,
            metadata=dict(metadata or {}),
        )

    def country_row(self, code: str) -> int:
        return self._country_rows.get(code, 0)

    def fclass_row(self, code: str) -> int:
        return self._fclass_rows.get(code, 0)

    def parameter_count(self) -> int:
        return sum(int(p.size) for p in self.params.values())


@dataclass
class ScoredCandidateSet:
    """Output of scoring one toponym: a distribution over the candidates plus
    the final abstention slot."""

    probabilities: np.ndarray
    raw_scores: np.ndarray
    predicted_slot: int

    @property
    def null_slot(self) -> int:
        return len(self.raw_scores)

    @property
    def abstained(self) -> bool:
        return self.predicted_slot == self.null_slot


@dataclass
class RankingExample:
    """One training/evaluation item: the features and context for a single
    toponym. gold_slot == len(features) marks the abstention slot as gold."""

    features: list[CandidateFeatures]
    context: ContextVectors
    gold_slot: int
    gold_country: str = ""
    doc_id: str = ""

    def __post_init__(self) -> None:
        if not self.features:
            raise ValueError("an example needs at least one candidate")
        if not 0 <= self.gold_slot <= len(self.features):
            raise ValueError(
                f"gold_slot {self.gold_slot} out of range for {len(self.features)} candidates"
            )


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    eval_accuracy: float | None = None


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _log_softmax(q: np.ndarray) -> tuple[np.ndarray, float]:
    top = float(np.max(q))
    lse = top + float(np.log(np.sum(np.exp(q - top))))
    return q - lse, lse


def _numeric_matrix(features: Sequence[CandidateFeatures], use_population: bool) -> np.ndarray:
    rows = np.array(
        [
            (
                f.min_edit_distance,
                f.avg_edit_distance,
                float(f.exact_match_flag),
                f.alt_name_count_log,
                f.population_log * _POP_LOG_SCALE if use_population else 0.0,
                float(f.is_adm1_of_other_toponym),
                float(f.has_adm1_parent_in_doc),
                f.shared_country_fraction,
            )
            for f in features
        ],
        dtype=np.float64,
    )
    if not np.all(np.isfinite(rows)):
        raise ValueError("candidate features must be finite")
    return rows


def _cosine(rows: np.ndarray, row_norms: np.ndarray, v: np.ndarray, v_norm: float) -> np.ndarray:
    denom = row_norms * v_norm
    out = np.zeros(rows.shape[0], dtype=np.float64)
    np.divide(rows @ v, denom, out=out, where=denom > 0.0)
    return out


def _cosine_backward(
    g: np.ndarray,
    rows: np.ndarray,
    row_norms: np.ndarray,
    v: np.ndarray,
    v_norm: float,
    cos: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of sum(g * cos(rows, v)) with respect to rows and v.

    Zero-norm inputs contributed a constant 0 similarity, so their gradient
    is zero on both sides.
    """
    valid = (row_norms > 0.0) & (v_norm > 0.0)
    gi = np.where(valid, g, 0.0)
    safe_norms = np.where(valid, row_norms, 1.0)
    denom = np.where(valid, safe_norms * v_norm, 1.0)
    d_rows = gi[:, None] * (v[None, :] / denom[:, None] - (cos / safe_norms**2)[:, None] * rows)
    if v_norm > 0.0:
        d_v = (gi / denom) @ rows - float(np.dot(gi, cos)) * v / v_norm**2
    else:
        d_v = np.zeros_like(v)
    return d_rows, d_v


def _forward(
    model: RankerModel,
    features: Sequence[CandidateFeatures],
    context: ContextVectors,
    *,
    training: bool,
    rng: np.random.Generator | None,
) -> dict:
    if not features:
        raise ValueError("cannot score an empty candidate list")
    if context.dimension != model.provider_dim:
        raise ModelDimensionError(
            f"context dimension {context.dimension} != model provider_dim {model.provider_dim}"
        )
    p = model.params
    cfg = model.config

    ci = np.array([model.country_row(f.candidate_country) for f in features], dtype=np.intp)
    fi = np.array([model.fclass_row(f.candidate_feature_class) for f in features], dtype=np.intp)
    u = _numeric_matrix(features, cfg.use_population_feature)

    proj = p["context_proj"]
    pm = proj @ context.mention_vector
    po = proj @ context.other_mentions_vector
    pd = proj @ context.document_vector

    ec = p["country_emb"][ci]
    ef = p["fclass_emb"][fi]
    norm_c = np.linalg.norm(ec, axis=1)
    norm_f = np.linalg.norm(ef, axis=1)
    proj_vecs = {"pm": pm, "po": po, "pd": pd}
    proj_norms = {k: float(np.linalg.norm(v)) for k, v in proj_vecs.items()}

    n = len(features)
    sims = np.zeros((n, NUM_SIMILARITY_FEATURES), dtype=np.float64)
    for col, table, vec_key in _SIMILARITY_COLUMNS:
        rows, norms = (ec, norm_c) if table == "c" else (ef, norm_f)
        sims[:, col] = _cosine(rows, norms, proj_vecs[vec_key], proj_norms[vec_key])

    x = np.hstack([sims, u])
    if training and cfg.dropout > 0.0:
        if rng is None:
            raise ValueError("training-mode forward needs a random generator for dropout")
        keep = rng.random(x.shape) >= cfg.dropout
        mask = keep.astype(np.float64) / (1.0 - cfg.dropout)
    else:
        mask = np.ones_like(x)
    xd = x * mask

    act = xd @ p["hidden_w"].T + p["hidden_b"]
    hidden = np.tanh(act)
    z = hidden @ p["out_w"] + p["out_b"][0]
    scores = _sigmoid(z)
    null_score = float(_sigmoid(p["null_bias"])[0])

    if cfg.score_mode == "sigmoid":
        q = np.concatenate([scores, [null_score]])
    else:
        q = np.concatenate([z, p["null_bias"]])
    log_probs, _ = _log_softmax(q)
    probs = np.exp(log_probs)

    return {
        "ci": ci,
        "fi": fi,
        "ec": ec,
        "ef": ef,
        "norm_c": norm_c,
        "norm_f": norm_f,
        "proj_vecs": proj_vecs,
        "proj_norms": proj_norms,
        "context": context,
        "sims": sims,
        "mask": mask,
        "xd": xd,
        "hidden": hidden,
        "z": z,
        "scores": scores,
        "null_score": null_score,
        "q": q,
        "log_probs": log_probs,
        "probs": probs,
    }


def _loss_from_cache(model: RankerModel, cache: dict, gold_slot: int, gold_country: str) -> float:
    loss = -float(cache["log_probs"][gold_slot])
    weight = model.config.multitask_country_weight
    if weight > 0.0 and gold_country:
        t = model.params["country_emb"] @ cache["proj_vecs"]["pd"]
        log_pt, _ = _log_softmax(t)
        loss += weight * -float(log_pt[model.country_row(gold_country)])
    return loss


def _backward(
    model: RankerModel, cache: dict, gold_slot: int, gold_country: str
) -> tuple[float, dict[str, np.ndarray]]:
    p = model.params
    cfg = model.config
    n = len(cache["scores"])
    grads = {name: np.zeros_like(arr) for name, arr in p.items()}

    loss = -float(cache["log_probs"][gold_slot])

    dq = cache["probs"].copy()
    dq[gold_slot] -= 1.0
    if cfg.score_mode == "sigmoid":
        s = cache["scores"]
        dz = dq[:n] * s * (1.0 - s)
        s_null = cache["null_score"]
        grads["null_bias"][0] = dq[n] * s_null * (1.0 - s_null)
    else:
        dz = dq[:n].copy()
        grads["null_bias"][0] = dq[n]

    hidden = cache["hidden"]
    grads["out_w"] += hidden.T @ dz
    grads["out_b"][0] = float(np.sum(dz))
    d_hidden = dz[:, None] * p["out_w"][None, :]
    d_act = d_hidden * (1.0 - hidden**2)
    grads["hidden_w"] += d_act.T @ cache["xd"]
    grads["hidden_b"] += d_act.sum(axis=0)
    dx = (d_act @ p["hidden_w"]) * cache["mask"]
    d_sims = dx[:, :NUM_SIMILARITY_FEATURES]

    d_proj_vecs = {k: np.zeros_like(v) for k, v in cache["proj_vecs"].items()}
    d_ec = np.zeros_like(cache["ec"])
    d_ef = np.zeros_like(cache["ef"])
    for col, table, vec_key in _SIMILARITY_COLUMNS:
        rows, norms, acc = (
            (cache["ec"], cache["norm_c"], d_ec)
            if table == "c"
            else (cache["ef"], cache["norm_f"], d_ef)
        )
        d_rows, d_v = _cosine_backward(
            d_sims[:, col],
            rows,
            norms,
            cache["proj_vecs"][vec_key],
            cache["proj_norms"][vec_key],
            cache["sims"][:, col],
        )
        acc += d_rows
        d_proj_vecs[vec_key] += d_v

    np.add.at(grads["country_emb"], cache["ci"], d_ec)
    np.add.at(grads["fclass_emb"], cache["fi"], d_ef)

    weight = cfg.multitask_country_weight
    if weight > 0.0 and gold_country:
        pd_vec = cache["proj_vecs"]["pd"]
        t = p["country_emb"] @ pd_vec
        log_pt, _ = _log_softmax(t)
        gc = model.country_row(gold_country)
        loss += weight * -float(log_pt[gc])
        dt = np.exp(log_pt)
        dt[gc] -= 1.0
        dt *= weight
        grads["country_emb"] += np.outer(dt, pd_vec)
        d_proj_vecs["pd"] += p["country_emb"].T @ dt

    ctx = cache["context"]
    grads["context_proj"] += np.outer(d_proj_vecs["pm"], ctx.mention_vector)
    grads["context_proj"] += np.outer(d_proj_vecs["po"], ctx.other_mentions_vector)
    grads["context_proj"] += np.outer(d_proj_vecs["pd"], ctx.document_vector)

    return loss, grads


def score_candidates(
    model: RankerModel,
    features: Sequence[CandidateFeatures],
    context: ContextVectors,
    training_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> ScoredCandidateSet:
    """Score one toponym's candidates. The returned probabilities have one
    extra slot at the end for abstention; raw_scores are the per-candidate
    sigmoid outputs. Ties in the argmax go to the lowest slot."""
    if training_mode and rng is None:
        rng = np.random.default_rng(model.config.seed)
    cache = _forward(model, features, context, training=training_mode, rng=rng)
    probs = cache["probs"]
    return ScoredCandidateSet(
        probabilities=probs,
        raw_scores=cache["scores"],
        predicted_slot=int(np.argmax(probs)),
    )


def _dataset_accuracy(model: RankerModel, dataset: Sequence[RankingExample]) -> float:
    if not dataset:
        return 0.0
    hits = 0
    for ex in dataset:
        cache = _forward(model, ex.features, ex.context, training=False, rng=None)
        if int(np.argmax(cache["probs"])) == ex.gold_slot:
            hits += 1
    return hits / len(dataset)


def _apply_update(model: RankerModel, grads: dict[str, np.ndarray], lr: float, count: int) -> None:
    scale = lr / count
    for name in _PARAM_ORDER:
        model.params[name] -= scale * grads[name]


def train(
    model: RankerModel,
    dataset: Sequence[RankingExample],
    config: RankerConfig | None = None,
    eval_dataset: Sequence[RankingExample] | None = None,
) -> tuple[RankerModel, list[EpochStats]]:
    """SGD over shuffled examples. Updates are applied every
    gradient_accumulation_steps batches using the mean gradient of the
    accumulated examples; a trailing partial accumulation at the end of an
    epoch still triggers an update. The model is modified in place."""
    cfg = config if config is not None else model.config
    if not dataset:
        raise ValueError("training dataset is empty")
    for ex in dataset:
        if ex.context.dimension != model.provider_dim:
            raise ModelDimensionError(
                f"example dimension {ex.context.dimension} != model provider_dim {model.provider_dim}"
            )

    rng = np.random.default_rng(cfg.seed)
    history: list[EpochStats] = []
    n = len(dataset)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        grads = {name: np.zeros_like(arr) for name, arr in model.params.items()}
        pending = 0
        batches_since_step = 0
        for start in range(0, n, cfg.batch_size):
            for idx in order[start : start + cfg.batch_size]:
                ex = dataset[idx]
                cache = _forward(model, ex.features, ex.context, training=True, rng=rng)
                loss, g = _backward(model, cache, ex.gold_slot, ex.gold_country)
                if not np.isfinite(loss):
                    raise TrainingDivergedError(
                        f"non-finite loss at epoch {epoch}, example {ex.doc_id or int(idx)}"
                    )
                epoch_loss += loss
                for name in _PARAM_ORDER:
                    grads[name] += g[name]
                pending += 1
            batches_since_step += 1
            if batches_since_step >= cfg.gradient_accumulation_steps:
                _apply_update(model, grads, cfg.learning_rate, pending)
                grads = {name: np.zeros_like(arr) for name, arr in model.params.items()}
                pending = 0
                batches_since_step = 0
        if pending:
            _apply_update(model, grads, cfg.learning_rate, pending)
        stats = EpochStats(
            epoch=epoch,
            train_loss=epoch_loss / n,
            train_accuracy=_dataset_accuracy(model, dataset),
            eval_accuracy=_dataset_accuracy(model, eval_dataset) if eval_dataset else None,
        )
        history.append(stats)
    return model, history


def gradient_check(
    model: RankerModel, example: RankingExample, epsilon: float = 1e-5
) -> float:
    """Max relative error between analytic and central finite-difference
    gradients over every parameter, with dropout disabled.

    Relative error is |ga - gn| / max(1e-3, |ga| + |gn|).
    """
    if not 1e-6 <= epsilon <= 1e-3:
        raise ValueError("epsilon must be in [1e-6, 1e-3]")

    cache = _forward(model, example.features, example.context, training=False, rng=None)
    _, analytic = _backward(model, cache, example.gold_slot, example.gold_country)

    def loss_now() -> float:
        c = _forward(model, example.features, example.context, training=False, rng=None)
        return _loss_from_cache(model, c, example.gold_slot, example.gold_country)

    worst = 0.0
    for name in _PARAM_ORDER:
        arr = model.params[name]
        for idx in np.ndindex(arr.shape):
            original = arr[idx]
            arr[idx] = original + epsilon
            loss_plus = loss_now()
            arr[idx] = original - epsilon
            loss_minus = loss_now()
            arr[idx] = original
            numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
            ga = float(analytic[name][idx])
            rel = abs(ga - numeric) / max(1e-3, abs(ga) + abs(numeric))
            if rel > worst:
                worst = rel
    return worst


def save_model(model: RankerModel, path: str) -> None:
    """Binary format: magic, version, length-prefixed JSON header, then the
    parameter arrays as little-endian float64 in a fixed order."""
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "config": asdict(model.config),
        "provider_dim": model.provider_dim,
        "countries": model.countries,
        "feature_classes": model.feature_classes,
        "metadata": model.metadata,
        "params": [[name, list(model.params[name].shape)] for name in _PARAM_ORDER],
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", MODEL_FORMAT_VERSION))
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        for name in _PARAM_ORDER:
            fh.write(np.ascontiguousarray(model.params[name], dtype="<f8").tobytes())


def load_model(path: str) -> RankerModel:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc}") from exc
    prefix = len(MODEL_MAGIC) + 8
    if len(blob) < prefix or blob[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise ModelCorruptError(f"{path} is not a model file")
    (version,) = struct.unpack_from("<I", blob, len(MODEL_MAGIC))
    if version != MODEL_FORMAT_VERSION:
        raise ModelVersionError(
            f"{path} has format version {version}, expected {MODEL_FORMAT_VERSION}"
        )
    (header_len,) = struct.unpack_from("<I", blob, len(MODEL_MAGIC) + 4)
    if len(blob) < prefix + header_len:
        raise ModelCorruptError(f"{path} is truncated")
    try:
        header = json.loads(blob[prefix : prefix + header_len].decode("utf-8"))
        config = RankerConfig(**header["config"])
        manifest = [(str(name), tuple(int(s) for s in shape)) for name, shape in header["params"]]
        countries = [str(c) for c in header["countries"]]
        feature_classes = [str(c) for c in header["feature_classes"]]
        provider_dim = int(header["provider_dim"])
        metadata = dict(header["metadata"])
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ModelCorruptError(f"{path} has an invalid header: {exc}") from exc
    if [name for name, _ in manifest] != list(_PARAM_ORDER):
        raise ModelCorruptError(f"{path} has an unexpected parameter manifest")
    expected = sum(int(np.prod(shape)) for _, shape in manifest) * 8
    payload = blob[prefix + header_len :]
    if len(payload) != expected:
        raise ModelCorruptError(
            f"{path} payload is {len(payload)} bytes, expected {expected}"
        )
    params = {}
    offset = 0
    for name, shape in manifest:
        size = int(np.prod(shape)) * 8
        flat = np.frombuffer(payload[offset : offset + size], dtype="<f8")
        params[name] = flat.reshape(shape).astype(np.float64)
        offset += size
    return RankerModel(
        config=config,
        provider_dim=provider_dim,
        countries=countries,
        feature_classes=feature_classes,
        params=params,
        metadata=metadata,
    )
