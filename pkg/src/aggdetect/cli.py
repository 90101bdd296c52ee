"""Command-line driver.

Subcommands: ``build-dict``, ``train``, ``predict``, ``evaluate``,
``inspect``, ``dump-translit-table``.  Run configs are flat key/value
files; a minimal one is two lines::

    language = hindi
    blocks = U+C3+C4+C5

Exit codes: 0 success, 1 usage error, 2 data error, 3 resource error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import translit
from .corpus_io import Corpus, Document, load_corpus, load_predictions, write_predictions
from .errors import DataError, ResourceError, UsageError
from .evaluate import build_report, random_baseline, render_report
from .featurize import BLOCK_DEFS, FeatureBlockSpec, FeaturePipeline
from .lexfeatures import (
    BuiltinSentimentProvider,
    Resources,
    SidecarSentimentProvider,
    load_category_lexicon,
    load_embeddings,
    load_sentiment_sidecar,
    load_weighted_lexicon,
    load_word_set,
)
from .model import (
    OvRModel,
    TrainConfig,
    load_model,
    predict_many,
    save_model,
    top_features,
    train_ovr,
)
from .preprocess import (
    CleanConfig,
    PreprocessSettings,
    file_sha256,
    load_spell_dictionary,
    save_spell_dictionary,
    SpellDictionary,
)

log = logging.getLogger("aggdetect")

LANGUAGES = ("english", "hindi")

# Feature blocks that need English-only resources.
ENGLISH_ONLY_BLOCKS = ("W2V", "S", "LIWC", "GP")

# Ready-made configs for the usual system variants. File keys override
# preset values; the system-1/system-2 split differs between languages
# (English system 1 merged the validation data, Hindi system 2 did).
PRESETS: dict[str, dict[str, str]] = {
    "english-system-1": {
        "language": "english",
        "blocks": "BU+U+C4+C5+W2V",
        "merge_validation": "true",
    },
    "english-system-2": {"language": "english", "blocks": "BU+U+C4+C5+W2V"},
    "english-system-3": {
        "language": "english",
        "blocks": "BU+U+C4+C5+W2V",
        "spell_correct": "true",
    },
    "hindi-system-1": {"language": "hindi", "blocks": "U+C3+C4+C5"},
    "hindi-system-2": {
        "language": "hindi",
        "blocks": "U+C3+C4+C5",
        "merge_validation": "true",
    },
    "english-best": {"language": "english", "blocks": "BU+U+C4+C5+W2V"},
    "hindi-best": {"language": "hindi", "blocks": "U+C3+C4+C5"},
}


@dataclass
class RunConfig:
    """Everything a training run needs, resolved from a config file."""

    language: str = "english"
    blocks: list[str] = field(default_factory=lambda: ["U"])
    min_df: int = 2
    spell_correct: bool = False
    transliterate: bool | None = None  # None: on for hindi, off for english
    merge_validation: bool = False
    # Clean-config overrides; None means the per-language default.
    lowercase: bool | None = None
    strip_urls: bool | None = None
    strip_emails: bool | None = None
    strip_numbers: bool | None = None
    minor_stemming: bool | None = None
    expansions: dict[str, str] | None = None
    # Resource paths (resolved relative to the config file).
    embeddings: str | None = None
    sentiment_provider: str = "builtin"
    positive_words: str | None = None
    negative_words: str | None = None
    sentiment_sidecar: str | None = None
    liwc_lexicon: str | None = None
    gender_lexicon: str | None = None
    spell_dict: str | None = None
    intensity_split: float = 0.7
    train: TrainConfig = field(default_factory=TrainConfig)

    def clean_config(self) -> CleanConfig:
        base = CleanConfig.for_language(self.language)
        overrides = {
            name: value
            for name, value in (
                ("lowercase", self.lowercase),
                ("strip_urls", self.strip_urls),
                ("strip_emails", self.strip_emails),
                ("strip_numbers", self.strip_numbers),
                ("minor_stemming", self.minor_stemming),
                ("expansions", self.expansions),
            )
            if value is not None
        }
        return replace(base, **overrides)

    def wants_transliteration(self) -> bool:
        return self.language == "hindi" if self.transliterate is None else self.transliterate


_BOOL_VALUES = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _parse_config_bool(key: str, value: str) -> bool:
    if value.lower() not in _BOOL_VALUES:
        raise UsageError(f"config key {key!r}: expected a boolean, got {value!r}")
    return _BOOL_VALUES[value.lower()]


def parse_blocks(value: str) -> list[str]:
    names = [n.strip() for chunk in value.split(",") for n in chunk.split("+") if n.strip()]
    if not names:
        raise UsageError("config key 'blocks' must name at least one feature block")
    for name in names:
        if name not in BLOCK_DEFS:
            raise UsageError(
                f"unknown feature block {name!r} (known: {', '.join(sorted(BLOCK_DEFS))})"
            )
    if len(set(names)) != len(names):
        raise UsageError(f"duplicate feature block in {names}")
    return names


_PATH_KEYS = (
    "embeddings",
    "positive_words",
    "negative_words",
    "sentiment_sidecar",
    "liwc_lexicon",
    "gender_lexicon",
    "spell_dict",
)


def load_run_config(path: str | Path) -> RunConfig:
    """Parse a key/value config file into a validated RunConfig."""
    path = Path(path)
    if not path.is_file():
        raise ResourceError(f"config file not found: {path}")
    raw: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise UsageError(f"{path}: line {lineno} is not 'key = value': {line!r}")
        raw[key.strip()] = value.strip()

    if "preset" in raw:
        preset_name = raw.pop("preset")
        preset = PRESETS.get(preset_name)
        if preset is None:
            raise UsageError(
                f"unknown preset {preset_name!r} (known: {', '.join(sorted(PRESETS))})"
            )
        raw = {**preset, **raw}

    config = RunConfig()
    train_kwargs: dict[str, object] = {}
    for key, value in raw.items():
        if key == "language":
            if value not in LANGUAGES:
                raise UsageError(f"language must be one of {LANGUAGES}, got {value!r}")
            config.language = value
        elif key == "blocks":
            config.blocks = parse_blocks(value)
        elif key == "min_df":
            config.min_df = int(value)
        elif key in ("spell_correct", "merge_validation"):
            setattr(config, key, _parse_config_bool(key, value))
        elif key in ("transliterate", "lowercase", "strip_urls", "strip_emails",
                     "strip_numbers", "minor_stemming"):
            setattr(config, key, _parse_config_bool(key, value))
        elif key == "expansions":
            try:
                config.expansions = json.loads(value)
            except json.JSONDecodeError as exc:
                raise UsageError(f"config key 'expansions': bad JSON ({exc})") from None
        elif key in _PATH_KEYS:
            setattr(config, key, str((path.parent / value).resolve()))
        elif key == "sentiment_provider":
            if value not in ("builtin", "sidecar"):
                raise UsageError(f"sentiment_provider must be builtin or sidecar, got {value!r}")
            config.sentiment_provider = value
        elif key == "intensity_split":
            config.intensity_split = float(value)
        elif key in ("reg_lambda", "learning_rate", "grad_tol"):
            train_kwargs[key] = float(value)
        elif key in ("max_iters", "seed"):
            train_kwargs[key] = int(value)
        else:
            raise UsageError(f"{path}: unknown config key {key!r}")
    config.train = TrainConfig(**train_kwargs)  # type: ignore[arg-type]

    _validate_run_config(config)
    return config


def _validate_run_config(config: RunConfig) -> None:
    if config.language == "hindi":
        bad = [b for b in config.blocks if b in ENGLISH_ONLY_BLOCKS]
        if bad:
            raise UsageError(
                f"blocks {', '.join(bad)} are not available for hindi configs"
            )
    if "W2V" in config.blocks and not config.embeddings:
        raise UsageError("block W2V requires an 'embeddings' path")
    if "S" in config.blocks:
        if config.sentiment_provider == "builtin":
            if not (config.positive_words and config.negative_words):
                raise UsageError(
                    "block S with the builtin provider requires 'positive_words' "
                    "and 'negative_words' paths"
                )
        elif not config.sentiment_sidecar:
            raise UsageError("block S with the sidecar provider requires 'sentiment_sidecar'")
    if "LIWC" in config.blocks and not config.liwc_lexicon:
        raise UsageError("block LIWC requires a 'liwc_lexicon' path")
    if "GP" in config.blocks and not config.gender_lexicon:
        raise UsageError("block GP requires a 'gender_lexicon' path")
    if config.spell_correct and not config.spell_dict:
        raise UsageError("spell_correct = true requires a 'spell_dict' path")
    if config.min_df < 1:
        raise UsageError("min_df must be >= 1")


def load_resources(config: RunConfig) -> Resources:
    """Load and checksum every resource the config references. Fails fast
    before any training compute starts."""
    resources = Resources()
    if config.embeddings:
        resources.embeddings = load_embeddings(config.embeddings)
        resources.provenance["embedding"] = (config.embeddings, file_sha256(config.embeddings))
    if "S" in config.blocks:
        if config.sentiment_provider == "builtin":
            pos = load_word_set(config.positive_words)
            neg = load_word_set(config.negative_words)
            resources.sentiment_provider = BuiltinSentimentProvider(
                pos, neg, config.intensity_split
            )
            resources.provenance["sentiment_pos"] = (
                config.positive_words,
                file_sha256(config.positive_words),
            )
            resources.provenance["sentiment_neg"] = (
                config.negative_words,
                file_sha256(config.negative_words),
            )
        else:
            resources.sentiment_provider = SidecarSentimentProvider(
                load_sentiment_sidecar(config.sentiment_sidecar)
            )
    if config.liwc_lexicon:
        resources.category_lexicon = load_category_lexicon(config.liwc_lexicon)
        resources.provenance["liwc"] = (config.liwc_lexicon, file_sha256(config.liwc_lexicon))
    if config.gender_lexicon:
        resources.gender_lexicon = load_weighted_lexicon(config.gender_lexicon)
        resources.provenance["gender"] = (
            config.gender_lexicon,
            file_sha256(config.gender_lexicon),
        )
    return resources


def build_preprocess_settings(config: RunConfig, resources: Resources) -> PreprocessSettings:
    spell_dictionary = None
    if config.spell_correct:
        spell_dictionary = load_spell_dictionary(config.spell_dict)
        resources.provenance["spell_dict"] = (config.spell_dict, file_sha256(config.spell_dict))
    return PreprocessSettings(
        clean=config.clean_config(),
        transliterate=config.wants_transliteration(),
        spell_dictionary=spell_dictionary,
    )


def preprocess_corpus(corpus: Corpus, settings: PreprocessSettings) -> list[Document]:
    docs = []
    unknown_total = 0
    for doc in corpus.documents:
        text, unknown = settings.apply_with_stats(doc.text)
        unknown_total += unknown
        docs.append(Document(id=doc.id, text=text, gold=doc.gold))
    if unknown_total:
        log.warning(
            "%d Devanagari codepoints were outside the transliteration table "
            "and passed through unchanged",
            unknown_total,
        )
    return docs


def _embedding_coverage(documents: list[Document], resources: Resources) -> float:
    from .featurize import tokenize

    total = hits = 0
    for doc in documents:
        for token in tokenize(doc.text):
            total += 1
            hits += token in resources.embeddings
    return hits / total if total else 0.0


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------


def cmd_build_dict(args) -> int:
    corpus = load_corpus(
        args.corpus, has_labels=not args.unlabeled, language=args.language, format=args.format
    )
    settings = PreprocessSettings(
        clean=CleanConfig.for_language(args.language),
        transliterate=args.language == "hindi",
    )
    counts: Counter[str] = Counter()
    for doc in preprocess_corpus(corpus, settings):
        counts.update(doc.text.split())
    save_spell_dictionary(SpellDictionary(dict(counts)), args.out)
    log.info("wrote %d dictionary entries to %s", len(counts), args.out)
    return 0


def cmd_train(args) -> int:
    config = load_run_config(args.config)
    if args.merge_validation:
        config.merge_validation = True
    if args.seed is not None:
        config.train.seed = args.seed
    if config.merge_validation and not args.validation:
        raise UsageError("--merge-validation requires a validation corpus")

    # Fail fast: resources first, before corpora are even featurized.
    resources = load_resources(config)
    settings = build_preprocess_settings(config, resources)

    corpus = load_corpus(args.train_corpus, has_labels=True,
                         language=config.language, format=args.format)
    validation = None
    if args.validation:
        validation = load_corpus(args.validation, has_labels=True,
                                 language=config.language, format=args.format)

    train_docs = list(corpus.documents)
    if config.merge_validation and validation is not None:
        train_docs += validation.documents
        log.info(
            "merged validation into training: %d train + %d validation = %d documents",
            len(corpus.documents), len(validation.documents), len(train_docs),
        )

    prepped = preprocess_corpus(Corpus(train_docs, corpus.language), settings)
    blocks = [FeatureBlockSpec.from_name(name, config.min_df) for name in config.blocks]
    pipeline = FeaturePipeline(blocks, resources).fit(prepped)
    log.info("fitted %d feature blocks, total dimension %d",
             len(blocks), pipeline.total_dimension)
    if "W2V" in config.blocks:
        log.info("embedding coverage: %.1f%% of training tokens",
                 100.0 * _embedding_coverage(prepped, resources))

    X = pipeline.transform_many(prepped)
    gold = [doc.gold for doc in prepped]
    ovr = train_ovr(X, gold, config.train, pipeline=pipeline,
                    preprocess=settings, language=config.language)
    ovr.merged_validation = config.merge_validation
    if ovr.single_class_warning:
        log.warning("training corpus contains a single class")
    for label, clf in zip(("NAG", "CAG", "OAG"), ovr.classifiers):
        log.info("%s classifier: %d iterations, final grad norm %.2e",
                 label, clf.iterations, clf.final_grad_norm)
    save_model(ovr, args.model_out)
    log.info("model written to %s", args.model_out)

    if validation is not None and not config.merge_validation:
        val_prepped = preprocess_corpus(validation, settings)
        predictions = predict_many(ovr, pipeline.transform_many(val_prepped))
        report = build_report([doc.gold for doc in validation.documents], predictions)
        print(f"validation_weighted_f1\t{report.weighted_f1:.4f}")
        if args.report_dir:
            render_report(report, args.report_dir)
            log.info("validation report written to %s", args.report_dir)
    return 0


def cmd_predict(args) -> int:
    ovr = load_model(args.model)
    if args.sentiment_sidecar:
        ovr.pipeline.resources.sentiment_provider = SidecarSentimentProvider(
            load_sentiment_sidecar(args.sentiment_sidecar)
        )
    corpus = load_corpus(args.corpus, has_labels=not args.unlabeled,
                         language=ovr.language, format=args.format)
    prepped = preprocess_corpus(corpus, ovr.preprocess)
    predictions = predict_many(ovr, ovr.pipeline.transform_many(prepped))
    write_predictions(corpus, predictions, args.out)
    log.info("wrote %d predictions to %s", len(predictions), args.out)
    return 0


def _parse_baseline_args(items: list[str], default_seed: int) -> tuple[int, int, str]:
    trials, seed, mode = 1000, default_seed, "uniform"
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or key not in ("trials", "seed", "mode"):
            raise UsageError(f"--baseline takes trials=N seed=S mode=M, got {item!r}")
        if key == "mode":
            if value not in ("uniform", "empirical"):
                raise UsageError(f"--baseline mode must be uniform or empirical, got {value!r}")
            mode = value
            continue
        try:
            parsed = int(value)
        except ValueError:
            raise UsageError(f"--baseline {key} must be an integer, got {value!r}") from None
        if key == "trials":
            trials = parsed
        else:
            seed = parsed
    if trials < 1:
        raise UsageError("--baseline trials must be >= 1")
    return trials, seed, mode


def cmd_evaluate(args) -> int:
    corpus = load_corpus(args.gold_corpus, has_labels=True, format=args.format)
    predictions = load_predictions(args.predictions)
    pred_labels = []
    for doc in corpus.documents:
        if doc.id not in predictions:
            raise DataError(f"predictions are missing document id {doc.id!r}")
        pred_labels.append(predictions[doc.id])
    extra = set(predictions) - {doc.id for doc in corpus.documents}
    if extra:
        raise DataError(f"predictions contain unknown document id {sorted(extra)[0]!r}")

    gold = corpus.gold_labels()
    baseline = None
    if args.baseline is not None:
        trials, seed, mode = _parse_baseline_args(args.baseline, args.seed or 0)
        baseline = random_baseline(gold, seed=seed, trials=trials, mode=mode)
        log.info("random baseline (%s, %d trials, seed %d): %.4f", mode, trials, seed, baseline)

    report = build_report(gold, pred_labels, baseline_weighted_f1=baseline)
    render_report(report, args.out_dir)
    print(f"weighted_f1\t{report.weighted_f1:.4f}")
    log.info("report written to %s", args.out_dir)
    return 0


def cmd_inspect(args) -> int:
    from .corpus_io import LABELS

    ovr = load_model(args.model)
    columns = [[name for name, _w in top_features(ovr, label, args.top)]
               for label in LABELS]
    print("NAG\tCAG\tOAG")
    for row in range(max((len(c) for c in columns), default=0)):
        print("\t".join(col[row] if row < len(col) else "" for col in columns))
    return 0


def cmd_dump_translit_table(args) -> int:
    print("devanagari\tcodepoint\troman\tkind")
    for ch, roman, kind in translit.table_rows():
        print(f"{ch}\tU+{ord(ch):04X}\t{roman}\t{kind}")
    return 0


# ----------------------------------------------------------------------
# Parser / entry point
# ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aggdetect",
                     description="Aggression classification (NAG/CAG/OAG) pipeline")
    parser.add_argument("--quiet", action="store_true", help="only warnings on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("tsv", "csv"), default="tsv",
                       help="corpus file format (default tsv)")

    p = sub.add_parser("build-dict", help="build a spell dictionary from a corpus")
    p.add_argument("corpus")
    p.add_argument("out")
    p.add_argument("--language", choices=LANGUAGES, default="english")
    p.add_argument("--unlabeled", action="store_true", help="corpus has no label column")
    add_format(p)
    p.set_defaults(func=cmd_build_dict)

    p = sub.add_parser("train", help="fit the pipeline and train the classifier")
    p.add_argument("train_corpus")
    p.add_argument("model_out")
    p.add_argument("--config", required=True, help="run config file")
    p.add_argument("--validation", help="validation corpus (scored unless merged)")
    p.add_argument("--merge-validation", action="store_true",
                   help="train on train + validation")
    p.add_argument("--report-dir", help="where to write the validation report")
    p.add_argument("--seed", type=int, help="override the config seed")
    add_format(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label a corpus with a trained model")
    p.add_argument("model")
    p.add_argument("corpus")
    p.add_argument("out")
    p.add_argument("--unlabeled", action="store_true", help="corpus has no label column")
    p.add_argument("--sentiment-sidecar", help="per-sentence sentiment for this corpus")
    add_format(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against gold labels")
    p.add_argument("gold_corpus")
    p.add_argument("predictions")
    p.add_argument("out_dir")
    p.add_argument("--baseline", nargs="*", metavar="KEY=VAL",
                   help="add a random baseline (trials=N seed=S)")
    p.add_argument("--seed", type=int, help="default baseline seed")
    add_format(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("inspect", help="print the top features per class")
    p.add_argument("model")
    p.add_argument("--top", type=int, default=10, help="features per class (default 10)")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("dump-translit-table", help="print the transliteration table")
    p.set_defaults(func=cmd_dump_translit_table)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s")
        log.setLevel(logging.WARNING if args.quiet else logging.INFO)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())
