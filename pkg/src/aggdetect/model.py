"""One-vs-rest L2-regularized logistic regression.

Each class gets its own binary classifier trained by full-batch gradient
descent with Armijo backtracking from zero initialization, which makes
training fully deterministic.  The objective per binary problem is

    J(w, b) = (1/m) * sum_i xent(sigmoid(w.x_i + b), y_i)
              + (lambda / 2m) * ||w||^2

with the bias unregularized.  Prediction takes the class with the highest
sigmoid score; exact ties resolve to the earlier label in NAG < CAG < OAG
order.

Model files are versioned, sectioned UTF-8 text.  Vocabularies and all
weights are embedded; embeddings and lexicons are referenced by absolute
path plus SHA-256 and re-verified on load, so a loaded model reproduces
bit-identical predictions or fails loudly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels, lexfeatures
from .corpus_io import LABELS, Label, escape_field, unescape_field
from .errors import DataError, ResourceError
from .featurize import (
    DENSE_KINDS,
    FeatureBlockSpec,
    FeaturePipeline,
    LEXICAL_KINDS,
    SparseVector,
    Vocabulary,
)
from .preprocess import (
    CleanConfig,
    PreprocessSettings,
    file_sha256,
    load_spell_dictionary,
)

MODEL_FORMAT = "aggdetect-model 1"

_ARMIJO_C1 = 1e-4
_MAX_BACKTRACKS = 60


@dataclass
class TrainConfig:
    reg_lambda: float = 1.0
    learning_rate: float = 0.5
    max_iters: int = 1000
    grad_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.reg_lambda < 0:
            raise ValueError("reg_lambda must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be > 0")


@dataclass
class BinaryLogReg:
    weights: np.ndarray
    bias: float
    reg_lambda: float
    iterations: int = 0
    final_grad_norm: float = 0.0

    def decision(self, x: SparseVector) -> float:
        if x.dimension != self.weights.shape[0]:
            raise DataError(
                f"feature dimension {x.dimension} does not match model "
                f"dimension {self.weights.shape[0]}"
            )
        return float(sum(self.weights[i] * w for i, w in x.entries.items()) + self.bias)


def _sigmoid_scalar(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return float(e / (1.0 + e))


def objective_value(
    X: Sequence[SparseVector], y: Sequence[float], w: np.ndarray, b: float, reg_lambda: float
) -> float:
    """Regularized logistic loss at (w, b); shared with the trainer."""
    indptr, indices, data, _dim = kernels.stack_csr(X)
    y_arr = np.asarray(y, dtype=np.float64)
    z = kernels.csr_matvec(indptr, indices, data, w) + b
    m = len(y_arr)
    return kernels.logistic_loss_sum(z, y_arr) / m + 0.5 * reg_lambda * float(w @ w) / m


def loss_gradient(
    X: Sequence[SparseVector], y: Sequence[float], w: np.ndarray, b: float, reg_lambda: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient of the objective at (w, b)."""
    indptr, indices, data, dim = kernels.stack_csr(X)
    y_arr = np.asarray(y, dtype=np.float64)
    m = len(y_arr)
    z = kernels.csr_matvec(indptr, indices, data, w) + b
    r = kernels.sigmoid(z) - y_arr
    gw = kernels.csr_rmatvec(indptr, indices, data, r, dim) / m + (reg_lambda / m) * w
    return gw, float(r.mean())


def train_binary(
    X: Sequence[SparseVector], y: Sequence[int], config: TrainConfig | None = None
) -> BinaryLogReg:
    """Train one binary classifier by gradient descent with backtracking.

    Deterministic: zero initialization, full-batch gradients, and a fixed
    halving line search. Stops when the sup-norm of the gradient drops
    under ``grad_tol``, a step cannot achieve Armijo decrease, or
    ``max_iters`` accepted steps have been taken.
    """
    config = config or TrainConfig()
    if len(X) != len(y):
        raise DataError(f"got {len(X)} vectors but {len(y)} targets")
    if len(X) == 0:
        raise DataError("cannot train on an empty example set")
    indptr, indices, data, dim = kernels.stack_csr(X)
    if data.size and not np.isfinite(data).all():
        raise DataError("non-finite feature values in training data")
    y_arr = np.asarray(y, dtype=np.float64)
    m = len(y_arr)
    lam = config.reg_lambda

    def evaluate(w: np.ndarray, b: float) -> tuple[float, np.ndarray]:
        z = kernels.csr_matvec(indptr, indices, data, w) + b
        loss = kernels.logistic_loss_sum(z, y_arr) / m + 0.5 * lam * float(w @ w) / m
        return loss, z

    w = np.zeros(dim)
    b = 0.0
    loss, z = evaluate(w, b)
    iterations = 0
    while True:
        r = kernels.sigmoid(z) - y_arr
        gw = kernels.csr_rmatvec(indptr, indices, data, r, dim) / m + (lam / m) * w
        gb = float(r.mean())
        grad_norm = max(float(np.abs(gw).max()) if dim else 0.0, abs(gb))
        if grad_norm <= config.grad_tol or iterations >= config.max_iters:
            break
        g_sq = float(gw @ gw) + gb * gb
        step = config.learning_rate
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            new_loss, new_z = evaluate(w - step * gw, b - step * gb)
            if new_loss <= loss - _ARMIJO_C1 * step * g_sq:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        assert new_loss <= loss, "line search accepted an increasing step"
        w = w - step * gw
        b = b - step * gb
        loss, z = new_loss, new_z
        iterations += 1

    return BinaryLogReg(
        weights=w,
        bias=b,
        reg_lambda=lam,
        iterations=iterations,
        final_grad_norm=grad_norm,
    )


@dataclass
class OvRModel:
    """Three binary classifiers over a shared feature space."""

    classifiers: list[BinaryLogReg]  # in NAG, CAG, OAG order
    pipeline: FeaturePipeline | None = None
    preprocess: PreprocessSettings | None = None
    language: str = "english"
    n_train_documents: int = 0
    merged_validation: bool = False
    single_class_warning: bool = False

    @property
    def dimension(self) -> int:
        return self.classifiers[0].weights.shape[0]


def train_ovr(
    X: Sequence[SparseVector],
    labels: Sequence[Label],
    config: TrainConfig | None = None,
    pipeline: FeaturePipeline | None = None,
    preprocess: PreprocessSettings | None = None,
    language: str = "english",
) -> OvRModel:
    """Train one classifier per label (class versus rest).

    A class with no positive examples still gets a classifier (trained on
    all-negative targets); a corpus containing a single distinct class is
    accepted but flagged via ``single_class_warning``.
    """
    if len(X) != len(labels):
        raise DataError(f"got {len(X)} vectors but {len(labels)} labels")
    if len(X) == 0:
        raise DataError("cannot train on an empty corpus")
    classifiers = [
        train_binary(X, [1 if lab == target else 0 for lab in labels], config)
        for target in LABELS
    ]
    return OvRModel(
        classifiers=classifiers,
        pipeline=pipeline,
        preprocess=preprocess,
        language=language,
        n_train_documents=len(X),
        single_class_warning=len(set(labels)) < 2,
    )


def predict_proba(model: OvRModel, x: SparseVector) -> np.ndarray:
    """Per-class sigmoid scores; not normalized across classes."""
    return np.array([_sigmoid_scalar(clf.decision(x)) for clf in model.classifiers])


def predict(model: OvRModel, x: SparseVector) -> Label:
    """Class with the highest score; ties go to the earlier label."""
    scores = predict_proba(model, x)
    return LABELS[int(np.argmax(scores))]


def predict_many(model: OvRModel, X: Sequence[SparseVector]) -> list[Label]:
    """Batched prediction through the CSR kernels."""
    if not X:
        return []
    indptr, indices, data, dim = kernels.stack_csr(X)
    if dim != model.dimension:
        raise DataError(f"feature dimension {dim} does not match model {model.dimension}")
    scores = np.column_stack(
        [
            kernels.csr_matvec(indptr, indices, data, clf.weights) + clf.bias
            for clf in model.classifiers
        ]
    )
    return [LABELS[int(i)] for i in np.argmax(scores, axis=1)]


def top_features(model: OvRModel, label: Label, k: int) -> list[tuple[str, float]]:
    """The k largest-weight nonzero features of one class, descending."""
    if model.pipeline is None:
        raise DataError("model has no feature pipeline attached")
    weights = model.classifiers[int(label)].weights
    nonzero = [(int(i), float(weights[i])) for i in np.nonzero(weights)[0]]
    nonzero.sort(key=lambda item: (-item[1], item[0]))
    return [(model.pipeline.feature_name(i), w) for i, w in nonzero[: max(k, 0)]]


# ----------------------------------------------------------------------
# Persistence
# ----------------------------------------------------------------------


def _fmt(value: float) -> str:
    return repr(float(value))


def _bool(value: bool) -> str:
    return "true" if value else "false"


def _parse_bool(value: str, context: str) -> bool:
    if value not in ("true", "false"):
        raise ResourceError(f"model file: bad boolean {value!r} in {context}")
    return value == "true"


def _resource_ref(resources: lexfeatures.Resources, key: str) -> tuple[str, str]:
    ref = resources.provenance.get(key)
    if ref is None:
        raise ResourceError(
            f"cannot serialize pipeline: resource {key!r} has no file provenance"
        )
    return ref


def save_model(model: OvRModel, path: str | Path) -> None:
    """Write the sectioned text serialization. Fully deterministic."""
    if model.pipeline is None or not model.pipeline.fitted:
        raise DataError("cannot save a model without a fitted pipeline")
    if model.preprocess is None:
        raise DataError("cannot save a model without preprocessing settings")
    pipe = model.pipeline
    prep = model.preprocess
    out: list[str] = [MODEL_FORMAT]

    out.append("[meta]")
    out.append(f"language = {model.language}")
    out.append("labels = " + ",".join(label.name for label in LABELS))
    out.append(f"n_train_documents = {model.n_train_documents}")
    out.append(f"merged_validation = {_bool(model.merged_validation)}")
    out.append(f"single_class_warning = {_bool(model.single_class_warning)}")
    out.append(f"total_dimension = {pipe.total_dimension}")

    out.append("[preprocess]")
    clean = prep.clean
    out.append(f"lowercase = {_bool(clean.lowercase)}")
    out.append(f"strip_urls = {_bool(clean.strip_urls)}")
    out.append(f"strip_emails = {_bool(clean.strip_emails)}")
    out.append(f"strip_numbers = {_bool(clean.strip_numbers)}")
    out.append(f"minor_stemming = {_bool(clean.minor_stemming)}")
    out.append("expansions = " + json.dumps(clean.expansions, sort_keys=True, ensure_ascii=False))
    out.append(f"transliterate = {_bool(prep.transliterate)}")
    out.append(f"translit_table_version = {prep.translit_table_version}")
    out.append(f"spell_correct = {_bool(prep.spell_dictionary is not None)}")
    if prep.spell_dictionary is not None:
        ref = _resource_ref(pipe.resources, "spell_dict")
        out.append(f"spell_dict_path = {ref[0]}")
        out.append(f"spell_dict_sha256 = {ref[1]}")

    out.append("[pipeline]")
    out.append("blocks = " + ",".join(spec.name for spec in pipe.blocks))

    for spec in pipe.blocks:
        out.append(f"[block:{spec.name}]")
        out.append(f"kind = {spec.kind}")
        for key in ("n", "k", "min_df"):
            if key in spec.params:
                out.append(f"{key} = {spec.params[key]}")
        out.append(f"offset = {pipe.offsets[spec.name]}")
        out.append(f"dimension = {pipe.dimensions[spec.name]}")
        if spec.kind in LEXICAL_KINDS:
            vocab = pipe.vocabularies[spec.name]
            out.append(f"n_documents = {vocab.n_documents}")
        elif spec.kind == "embedding":
            ref = _resource_ref(pipe.resources, "embedding")
            out.append(f"path = {ref[0]}")
            out.append(f"sha256 = {ref[1]}")
        elif spec.kind == "sentiment":
            provider = pipe.resources.sentiment_provider
            out.append(f"provider = {provider.kind}")
            if provider.kind == "builtin":
                out.append(f"intensity_split = {_fmt(provider.intensity_split)}")
                for side in ("pos", "neg"):
                    ref = _resource_ref(pipe.resources, f"sentiment_{side}")
                    out.append(f"{side}_path = {ref[0]}")
                    out.append(f"{side}_sha256 = {ref[1]}")
        elif spec.kind == "liwc":
            ref = _resource_ref(pipe.resources, "liwc")
            out.append(f"path = {ref[0]}")
            out.append(f"sha256 = {ref[1]}")
        elif spec.kind == "gender":
            ref = _resource_ref(pipe.resources, "gender")
            out.append(f"path = {ref[0]}")
            out.append(f"sha256 = {ref[1]}")
        if spec.kind in LEXICAL_KINDS:
            out.append(f"[vocab:{spec.name}]")
            vocab = pipe.vocabularies[spec.name]
            for term in vocab.terms:
                out.append(f"{escape_field(term)}\t{vocab.document_frequency[term]}")

    for label, clf in zip(LABELS, model.classifiers):
        out.append(f"[weights:{label.name}]")
        out.append(f"bias = {_fmt(clf.bias)}")
        out.append(f"reg_lambda = {_fmt(clf.reg_lambda)}")
        out.append(f"iterations = {clf.iterations}")
        out.append(f"final_grad_norm = {_fmt(clf.final_grad_norm)}")
        nonzero = np.nonzero(clf.weights)[0]
        out.append(f"nnz = {nonzero.shape[0]}")
        for i in nonzero:
            out.append(f"{int(i)}\t{_fmt(clf.weights[i])}")

    Path(path).write_text("".join(line + "\n" for line in out), encoding="utf-8")


class _SidecarRequired(lexfeatures.SentimentProvider):
    """Placeholder installed when a model was trained with sidecar
    sentiment; prediction must attach a sidecar for the new corpus."""

    kind = "sidecar"

    def document_features(self, doc) -> np.ndarray:
        raise ResourceError(
            "this model uses sidecar sentiment; supply a sidecar file for the corpus"
        )


def _split_sections(raw: str, path: Path) -> list[tuple[str, list[str]]]:
    lines = raw.split("\n")
    if not lines or lines[0] != MODEL_FORMAT:
        raise ResourceError(
            f"{path}: not a recognized model file (expected header {MODEL_FORMAT!r})"
        )
    sections: list[tuple[str, list[str]]] = []
    current: list[str] | None = None
    for line in lines[1:]:
        if line.startswith("[") and line.endswith("]"):
            current = []
            sections.append((line[1:-1], current))
        elif line:
            if current is None:
                raise ResourceError(f"{path}: content before first section")
            current.append(line)
    return sections


def _kv(lines: list[str], section: str, path: Path) -> dict[str, str]:
    result = {}
    for line in lines:
        if " = " not in line:
            raise ResourceError(f"{path}: malformed line in [{section}]: {line!r}")
        key, value = line.split(" = ", 1)
        result[key] = value
    return result


def _need(kv: dict[str, str], key: str, section: str, path: Path) -> str:
    if key not in kv:
        raise ResourceError(f"{path}: missing key {key!r} in section [{section}]")
    return kv[key]


def _verify_checksum(file_path: str, expected: str, what: str) -> None:
    p = Path(file_path)
    if not p.is_file():
        raise ResourceError(f"referenced {what} not found: {file_path}")
    actual = file_sha256(p)
    if actual != expected:
        raise ResourceError(
            f"checksum mismatch for {what} {file_path}: expected {expected}, got {actual}"
        )


def load_model(path: str | Path) -> OvRModel:
    """Load a model file, re-reading referenced resources and verifying
    their checksums. Predictions after a round trip are bit-identical."""
    path = Path(path)
    if not path.is_file():
        raise ResourceError(f"model file not found: {path}")
    sections = _split_sections(path.read_text(encoding="utf-8"), path)
    by_name = dict(sections)
    for required in ("meta", "preprocess", "pipeline"):
        if required not in by_name:
            raise ResourceError(f"{path}: missing section [{required}]")

    meta = _kv(by_name["meta"], "meta", path)
    labels_str = _need(meta, "labels", "meta", path)
    if labels_str != ",".join(label.name for label in LABELS):
        raise ResourceError(f"{path}: unsupported label order {labels_str!r}")
    total_dimension = int(_need(meta, "total_dimension", "meta", path))

    prep_kv = _kv(by_name["preprocess"], "preprocess", path)
    clean = CleanConfig(
        lowercase=_parse_bool(_need(prep_kv, "lowercase", "preprocess", path), "lowercase"),
        strip_urls=_parse_bool(_need(prep_kv, "strip_urls", "preprocess", path), "strip_urls"),
        strip_emails=_parse_bool(
            _need(prep_kv, "strip_emails", "preprocess", path), "strip_emails"
        ),
        strip_numbers=_parse_bool(
            _need(prep_kv, "strip_numbers", "preprocess", path), "strip_numbers"
        ),
        minor_stemming=_parse_bool(
            _need(prep_kv, "minor_stemming", "preprocess", path), "minor_stemming"
        ),
        expansions=json.loads(_need(prep_kv, "expansions", "preprocess", path)),
    )
    resources = lexfeatures.Resources()
    spell_dictionary = None
    if _parse_bool(_need(prep_kv, "spell_correct", "preprocess", path), "spell_correct"):
        dict_path = _need(prep_kv, "spell_dict_path", "preprocess", path)
        dict_sha = _need(prep_kv, "spell_dict_sha256", "preprocess", path)
        _verify_checksum(dict_path, dict_sha, "spell dictionary")
        spell_dictionary = load_spell_dictionary(dict_path)
        resources.provenance["spell_dict"] = (dict_path, dict_sha)
    preprocess = PreprocessSettings(
        clean=clean,
        transliterate=_parse_bool(
            _need(prep_kv, "transliterate", "preprocess", path), "transliterate"
        ),
        spell_dictionary=spell_dictionary,
        translit_table_version=int(_need(prep_kv, "translit_table_version", "preprocess", path)),
    )

    pipe_kv = _kv(by_name["pipeline"], "pipeline", path)
    block_names = [n for n in _need(pipe_kv, "blocks", "pipeline", path).split(",") if n]

    blocks: list[FeatureBlockSpec] = []
    vocabularies: dict[str, Vocabulary] = {}
    for name in block_names:
        section = f"block:{name}"
        if section not in by_name:
            raise ResourceError(f"{path}: missing section [{section}]")
        # Key/value entries describe the block; a vocab section follows for
        # lexical blocks.
        kv = _kv(by_name[section], section, path)
        kind = _need(kv, "kind", section, path)
        params = {}
        for key in ("n", "k", "min_df"):
            if key in kv:
                params[key] = int(kv[key])
        blocks.append(FeatureBlockSpec(name=name, kind=kind, params=params))
        if kind in LEXICAL_KINDS:
            vocab_section = f"vocab:{name}"
            if vocab_section not in by_name:
                raise ResourceError(f"{path}: missing section [{vocab_section}]")
            terms: list[str] = []
            df: dict[str, int] = {}
            for line in by_name[vocab_section]:
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ResourceError(f"{path}: malformed row in [{vocab_section}]: {line!r}")
                term = unescape_field(parts[0])
                terms.append(term)
                df[term] = int(parts[1])
            if terms != sorted(terms):
                raise ResourceError(f"{path}: [{vocab_section}] terms are not sorted")
            vocabularies[name] = Vocabulary(
                terms=terms,
                index={t: i for i, t in enumerate(terms)},
                document_frequency=df,
                n_documents=int(_need(kv, "n_documents", section, path)),
            )
        elif kind == "embedding":
            ref = (_need(kv, "path", section, path), _need(kv, "sha256", section, path))
            _verify_checksum(ref[0], ref[1], "embedding table")
            resources.embeddings = lexfeatures.load_embeddings(ref[0])
            resources.provenance["embedding"] = ref
        elif kind == "sentiment":
            provider_kind = _need(kv, "provider", section, path)
            if provider_kind == "builtin":
                refs = {}
                for side in ("pos", "neg"):
                    refs[side] = (
                        _need(kv, f"{side}_path", section, path),
                        _need(kv, f"{side}_sha256", section, path),
                    )
                    _verify_checksum(refs[side][0], refs[side][1], f"{side} sentiment lexicon")
                    resources.provenance[f"sentiment_{side}"] = refs[side]
                resources.sentiment_provider = lexfeatures.BuiltinSentimentProvider(
                    pos_lexicon=lexfeatures.load_word_set(refs["pos"][0]),
                    neg_lexicon=lexfeatures.load_word_set(refs["neg"][0]),
                    intensity_split=float(_need(kv, "intensity_split", section, path)),
                )
            elif provider_kind == "sidecar":
                resources.sentiment_provider = _SidecarRequired()
            else:
                raise ResourceError(f"{path}: unknown sentiment provider {provider_kind!r}")
        elif kind == "liwc":
            ref = (_need(kv, "path", section, path), _need(kv, "sha256", section, path))
            _verify_checksum(ref[0], ref[1], "category lexicon")
            resources.category_lexicon = lexfeatures.load_category_lexicon(ref[0])
            resources.provenance["liwc"] = ref
        elif kind == "gender":
            ref = (_need(kv, "path", section, path), _need(kv, "sha256", section, path))
            _verify_checksum(ref[0], ref[1], "gender lexicon")
            resources.gender_lexicon = lexfeatures.load_weighted_lexicon(ref[0])
            resources.provenance["gender"] = ref

    pipeline = FeaturePipeline(blocks, resources).restore(vocabularies)
    if pipeline.total_dimension != total_dimension:
        raise ResourceError(
            f"{path}: restored dimension {pipeline.total_dimension} does not match "
            f"recorded total_dimension {total_dimension}"
        )

    classifiers = []
    for label in LABELS:
        section = f"weights:{label.name}"
        if section not in by_name:
            raise ResourceError(f"{path}: missing section [{section}]")
        lines = by_name[section]
        kv_lines = [ln for ln in lines if " = " in ln]
        weight_lines = [ln for ln in lines if " = " not in ln]
        kv = _kv(kv_lines, section, path)
        weights = np.zeros(total_dimension)
        declared_nnz = int(_need(kv, "nnz", section, path))
        if declared_nnz != len(weight_lines):
            raise ResourceError(
                f"{path}: [{section}] declares {declared_nnz} weights but has "
                f"{len(weight_lines)}"
            )
        for line in weight_lines:
            parts = line.split("\t")
            if len(parts) != 2:
                raise ResourceError(f"{path}: malformed row in [{section}]: {line!r}")
            index = int(parts[0])
            if not 0 <= index < total_dimension:
                raise ResourceError(
                    f"{path}: weight index {index} out of range in [{section}]"
                )
            weights[index] = float(parts[1])
        classifiers.append(
            BinaryLogReg(
                weights=weights,
                bias=float(_need(kv, "bias", section, path)),
                reg_lambda=float(_need(kv, "reg_lambda", section, path)),
                iterations=int(_need(kv, "iterations", section, path)),
                final_grad_norm=float(_need(kv, "final_grad_norm", section, path)),
            )
        )

    return OvRModel(
        classifiers=classifiers,
        pipeline=pipeline,
        preprocess=preprocess,
        language=_need(meta, "language", "meta", path),
        n_train_documents=int(_need(meta, "n_train_documents", "meta", path)),
        merged_validation=_parse_bool(
            _need(meta, "merged_validation", "meta", path), "merged_validation"
        ),
        single_class_warning=_parse_bool(
            _need(meta, "single_class_warning", "meta", path), "single_class_warning"
        ),
    )
