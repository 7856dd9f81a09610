"""Command-line entry point.

Subcommands wire lexicons, corpora, backends, pair generation and
metrics into reproducible runs:

  extract   partition a corpus by gender-word content
  coverage  lexicon coverage over a line-aligned parallel corpus
  pairs     generate a counterfactual pair dataset
  eval      compute bias metrics and write a run report
  sweep-k   top-k coverage curve for mask filling
  report    re-render a run report (summary + optional CSV series)

Options may come from a TOML file (--config); command-line flags
override file values.  Exit codes: 0 success, 2 configuration/input
error, 3 backend/transport error, 4 metric undefined.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import kernels, report as report_mod
from .corpus import (
    DEFAULT_TOKEN_LIMIT,
    load_monolingual,
    load_parallel,
    partition_gendered,
    validate_coverage,
    write_partition,
)
from .errors import (
    BackendError,
    ConfigError,
    EmbeddingError,
    InputError,
    MetricUndefinedError,
    MlmBiasError,
)
from .lexicon import load_lexicon
from .metrics import (
    BiasScore,
    compute_dbm,
    compute_mbe,
    compute_sbm,
    diagnostics,
    gender_distribution,
)
from .pairgen import (
    MsgConfig,
    analyze_topk_coverage,
    balance_lsg,
    balance_msg,
    balance_sentence_sets,
    generate_lsg,
    generate_msg,
    replace_stats,
    write_pairs,
)
from .rng import PRNG_NAME
from .scoring import CachingBackend, RemoteBackend, ScorerBackend, TableBackend

VALID_METRICS = ("mbe", "sbm", "dbm")
VALID_METHODS = ("lsg", "msg")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BACKEND = 3
EXIT_UNDEFINED = 4


@dataclass
class RunConfig:
    lang: str = "und"
    lexicon: Optional[str] = None
    lexicon_tgt: Optional[str] = None
    corpus: Optional[str] = None
    corpus_tgt: Optional[str] = None
    backend: Optional[str] = None
    method: str = "lsg"
    metrics: Tuple[str, ...] = ("sbm",)
    threshold: float = 0.01
    top_k: int = 10
    folds: int = 5
    seed: int = 0
    sample_size: Optional[int] = None
    token_limit: int = DEFAULT_TOKEN_LIMIT
    k_max: int = 15
    jobs: int = 0  # 0 = logical cores
    stoplist: Optional[str] = None
    out: Optional[str] = None

    def __post_init__(self):
        if self.jobs == 0:
            self.jobs = os.cpu_count() or 1

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        file_values = {}
        config_path = getattr(args, "config", None)
        if config_path:
            try:
                with open(config_path, "rb") as fh:
                    file_values = tomllib.load(fh)
            except (OSError, tomllib.TOMLDecodeError) as exc:
                raise ConfigError(f"cannot read config file {config_path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(file_values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = dict(file_values)
        for name in known:
            value = getattr(args, name, None)
            if value is not None:
                merged[name] = value
        if "metrics" in merged and isinstance(merged["metrics"], str):
            merged["metrics"] = tuple(
                m.strip() for m in merged["metrics"].split(",") if m.strip())
        if "metrics" in merged:
            merged["metrics"] = tuple(merged["metrics"])
        try:
            return cls(**merged)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                flag = "--" + name.replace("_", "-")
                raise ConfigError(f"{flag} is required for this command")

    def validate_eval(self) -> None:
        if self.method not in VALID_METHODS:
            raise ConfigError(f"unknown method {self.method!r}, expected lsg or msg")
        bad = [m for m in self.metrics if m not in VALID_METRICS]
        if bad:
            raise ConfigError(f"unknown metrics {bad}, expected subset of {VALID_METRICS}")
        if not self.metrics:
            raise ConfigError("at least one metric must be requested")
        if "dbm" in self.metrics and self.method != "msg":
            raise ConfigError("dbm requires method=msg (it compares model prediction scores)")
        if self.folds < 1:
            raise ConfigError("folds must be >= 1")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.top_k < 1:
            raise ConfigError("top-k must be >= 1")


def make_backend(spec: str) -> ScorerBackend:
    if spec.startswith("table:"):
        return TableBackend.load(spec[len("table:"):])
    if spec.startswith(("http://", "https://")):
        return RemoteBackend.connect(spec)
    raise ConfigError(
        f"unknown backend spec {spec!r}: expected table:<path> or http(s)://<url>")


def _read_stoplist(path) -> set:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"stoplist file not found: {path}")
    ids = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#")[0].strip()
        if not line:
            continue
        try:
            ids.add(int(line))
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: stoplist entries are sentence ids")
    return ids


def _load_inputs(config: RunConfig):
    config.require("lexicon", "corpus")
    lexicon_path = Path(config.lexicon)
    if not lexicon_path.exists():
        raise ConfigError(f"lexicon file not found: {lexicon_path}")
    corpus_path = Path(config.corpus)
    if not corpus_path.exists():
        raise ConfigError(f"corpus file not found: {corpus_path}")
    lexicon = load_lexicon(lexicon_path)
    records = load_monolingual(corpus_path, config.lang)
    if config.stoplist:
        stop = _read_stoplist(config.stoplist)
        records = [r for r in records if r.id not in stop]
    partition = partition_gendered(records, lexicon, config.token_limit)
    return lexicon, records, partition


def _config_block(config: RunConfig, backend: Optional[ScorerBackend]) -> dict:
    block = {
        "lang": config.lang,
        "lexicon": config.lexicon,
        "corpus": config.corpus,
        "backend": config.backend,
        "method": config.method,
        "metrics": sorted(config.metrics),
        "threshold": config.threshold,
        "top_k": config.top_k,
        "folds": config.folds,
        "seed": config.seed,
        "token_limit": config.token_limit,
        "prng": PRNG_NAME,
        "kernel": kernels.active_impl(),
        "notes": {
            "sbm_summation": "matched_pairs",
            "msg_one_gender_completion": "original_corpus_word_or_its_counterpart",
            "aula_ties": "count_as_zero",
        },
    }
    if backend is not None:
        info = backend.info()
        block["backend_info"] = {
            "model_id": info.model_id,
            "max_tokens": info.max_tokens,
            "embedding_dim": info.embedding_dim,
        }
        block["notes"]["embedding_source"] = info.model_id
    return block


def cmd_extract(config: RunConfig) -> int:
    config.require("out")
    lexicon, records, partition = _load_inputs(config)
    if not records:
        print("warning: corpus is empty", file=sys.stderr)
    written = write_partition(partition, config.out)
    summary = {
        "config": _config_block(config, None),
        "counts": {
            "male_only": len(partition.male_only),
            "female_only": len(partition.female_only),
            "multi": len(partition.multi),
            "neutral": len(partition.neutral),
            "dropped_over_limit": partition.dropped_over_limit,
        },
    }
    if partition.single_gender_count:
        summary["distribution"] = gender_distribution(partition).to_dict()
    report_mod.write_report(summary, Path(config.out) / "summary.json")
    counts = summary["counts"]
    print(f"male_only={counts['male_only']} female_only={counts['female_only']} "
          f"multi={counts['multi']} neutral={counts['neutral']} "
          f"dropped_over_limit={counts['dropped_over_limit']}")
    if "distribution" in summary:
        dist = summary["distribution"]
        ratio = dist["ratio"]
        ratio_s = f"{ratio:.2f}:1" if isinstance(ratio, (int, float)) else f"{ratio}:1"
        print(f"male/female: {dist['male_pct']:.2f}% / {dist['female_pct']:.2f}% ({ratio_s})")
    else:
        print("warning: no single-gender sentences found", file=sys.stderr)
    print(f"partition written to {', '.join(str(p) for p in written)}")
    return EXIT_OK


def cmd_coverage(config: RunConfig) -> int:
    config.require("lexicon", "lexicon_tgt", "corpus", "corpus_tgt")
    for path in (config.lexicon, config.lexicon_tgt, config.corpus, config.corpus_tgt):
        if not Path(path).exists():
            raise ConfigError(f"file not found: {path}")
    src_lexicon = load_lexicon(config.lexicon)
    tgt_lexicon = load_lexicon(config.lexicon_tgt)
    pairs = load_parallel(config.corpus, config.corpus_tgt,
                          src_lexicon.language, tgt_lexicon.language)
    sample_size = config.sample_size if config.sample_size is not None else len(pairs)
    coverage = validate_coverage(pairs, src_lexicon, tgt_lexicon, sample_size, config.seed)
    print(f"coverage: {coverage.coverage_pct:.1f}% "
          f"({coverage.translated_gendered}/{coverage.translated} translated gendered; "
          f"sampled={coverage.sampled}, gendered={coverage.english_gendered})")
    if config.out:
        report_mod.write_report(
            {"config": _config_block(config, None), "coverage": coverage.to_dict()},
            config.out)
    return EXIT_OK


def _generate(config: RunConfig, lexicon, partition, backend):
    if config.method == "lsg":
        return generate_lsg(partition, lexicon)
    msg_config = MsgConfig(threshold=config.threshold, top_k=config.top_k, seed=config.seed)
    return generate_msg(partition, lexicon, backend, msg_config)


def cmd_pairs(config: RunConfig) -> int:
    config.require("out")
    config.validate_eval()
    lexicon, _, partition = _load_inputs(config)
    backend = None
    if config.method == "msg":
        config.require("backend")
        backend = CachingBackend(make_backend(config.backend))
    pairs, stats = _generate(config, lexicon, partition, backend)
    if config.method == "msg":
        pairs, stats = balance_msg(pairs, stats, config.seed)
    else:
        stats = replace_stats(stats, retained=len(pairs))
    write_pairs(pairs, config.out)
    print(report_mod.canonical_json(stats.to_dict()), end="")
    print(f"{len(pairs)} pairs written to {config.out}", file=sys.stderr)
    return EXIT_OK


def _prewarm_cache(config: RunConfig, backend: ScorerBackend, partition, eval_pairs) -> None:
    """Fill the caching backend concurrently; metric code then reads the
    cache in its own deterministic order, so results never depend on
    response arrival order."""
    from concurrent.futures import ThreadPoolExecutor

    score_texts = set()
    embed_texts = set()
    if "sbm" in config.metrics:
        score_texts |= {t for p in eval_pairs for t in (p.male.text, p.female.text)}
    if "mbe" in config.metrics:
        singles = {r.text for r in partition.male_only + partition.female_only}
        score_texts |= singles
        embed_texts = singles
    if not score_texts and not embed_texts:
        return
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        list(pool.map(backend.token_scores, sorted(score_texts)))
        list(pool.map(backend.embed, sorted(embed_texts)))


def cmd_eval(config: RunConfig) -> int:
    config.require("out", "backend")
    config.validate_eval()
    lexicon, _, partition = _load_inputs(config)
    backend = CachingBackend(make_backend(config.backend))
    if "mbe" in config.metrics and backend.info().embedding_dim <= 0:
        raise ConfigError("mbe requires a backend with embedding support")

    pairs, stats = _generate(config, lexicon, partition, backend)
    if config.method == "lsg":
        fold_sets, stats = balance_lsg(pairs, stats, config.folds, config.seed)
        eval_pairs = [p for fold in fold_sets for p in fold]
    else:
        retained, stats = balance_msg(pairs, stats, config.seed)
        fold_sets = [retained]  # mask filling truncates little; single fold
        eval_pairs = retained

    if config.jobs > 1:
        _prewarm_cache(config, backend, partition, eval_pairs)

    scores = {}
    if "sbm" in config.metrics:
        fold_scores = [compute_sbm(fold, backend) for fold in fold_sets]
        scores["sbm"] = BiasScore.from_folds(
            "SBM", [s.value for s in fold_scores],
            sum(s.n_comparisons for s in fold_scores))
    if "dbm" in config.metrics:
        scores["dbm"] = compute_dbm(eval_pairs, config.threshold)
    if "mbe" in config.metrics:
        sentence_folds = balance_sentence_sets(
            partition.male_only, partition.female_only, config.folds, config.seed)
        fold_scores = [compute_mbe(m, f, backend) for m, f in sentence_folds]
        scores["mbe"] = BiasScore.from_folds(
            "MBE", [s.value for s in fold_scores],
            sum(s.n_comparisons for s in fold_scores))

    run_report = {
        "config": _config_block(config, backend),
        "scores": {name: score.to_dict() for name, score in scores.items()},
        "distribution": gender_distribution(partition).to_dict(),
        "generation": stats.to_dict(),
        "diagnostics": diagnostics(stats, eval_pairs).to_dict(),
    }
    report_mod.write_report(run_report, config.out)
    print(report_mod.human_summary(run_report))
    print(f"report written to {config.out}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep_k(config: RunConfig) -> int:
    config.require("backend")
    lexicon, _, partition = _load_inputs(config)
    backend = CachingBackend(make_backend(config.backend))
    rows = analyze_topk_coverage(partition, lexicon, backend,
                                 config.threshold, config.k_max)
    for k, proportion in rows:
        print(f"k={k:2d} proportion={proportion:.4f}")
    if config.out:
        report_mod.write_sweep_csv(rows, config.out)
        print(f"curve written to {config.out}", file=sys.stderr)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    path = Path(args.report_path)
    if not path.exists():
        raise ConfigError(f"report file not found: {path}")
    run_report = report_mod.load_report(path)
    print(report_mod.human_summary(run_report))
    if args.csv_dir:
        csv_dir = Path(args.csv_dir)
        word_types = run_report.get("diagnostics", {}).get("word_types")
        if word_types:
            report_mod.write_word_type_csv(word_types, csv_dir / "word_types.csv")
        if run_report.get("scores"):
            report_mod.write_fold_csv(run_report["scores"], csv_dir / "folds.csv")
        print(f"CSV series written to {csv_dir}", file=sys.stderr)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file; flags override its values")
    parser.add_argument("--lang", help="language code")
    parser.add_argument("--lexicon", help="gender lexicon file")
    parser.add_argument("--lexicon-tgt", dest="lexicon_tgt",
                        help="target-language lexicon (coverage)")
    parser.add_argument("--corpus", help="corpus file, one sentence per line")
    parser.add_argument("--corpus-tgt", dest="corpus_tgt",
                        help="line-aligned target corpus (coverage)")
    parser.add_argument("--backend", help="scorer backend: table:<path> or http(s)://<url>")
    parser.add_argument("--method", choices=VALID_METHODS, help="pair generation method")
    parser.add_argument("--metrics", help="comma-separated subset of mbe,sbm,dbm")
    parser.add_argument("--threshold", type=float, help="mask-fill confidence threshold")
    parser.add_argument("--top-k", dest="top_k", type=int, help="mask-fill candidate count")
    parser.add_argument("--folds", type=int, help="number of balanced evaluation folds")
    parser.add_argument("--seed", type=int, help="PRNG seed")
    parser.add_argument("--sample-size", dest="sample_size", type=int,
                        help="coverage sample size")
    parser.add_argument("--token-limit", dest="token_limit", type=int,
                        help="drop sentences longer than this many tokens")
    parser.add_argument("--k-max", dest="k_max", type=int, help="sweep-k upper bound")
    parser.add_argument("--jobs", type=int, help="parallel scoring workers")
    parser.add_argument("--stoplist",
                        help="file of sentence ids (one per line) to exclude")
    parser.add_argument("--out", help="output path (file or directory per command)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlmbias",
        description="Gender bias evaluation for masked language models")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("extract", "partition a corpus by gender-word content"),
        ("coverage", "lexicon coverage over a parallel corpus"),
        ("pairs", "generate a counterfactual pair dataset"),
        ("eval", "compute bias metrics and write a run report"),
        ("sweep-k", "top-k coverage curve for mask filling"),
    ):
        sub_parser = sub.add_parser(name, help=help_text)
        _add_common(sub_parser)
    report_parser = sub.add_parser("report", help="re-render a run report")
    report_parser.add_argument("report_path", help="run report JSON")
    report_parser.add_argument("--csv-dir", dest="csv_dir", help="write CSV series here")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            return cmd_report(args)
        config = RunConfig.from_args(args)
        handler = {
            "extract": cmd_extract,
            "coverage": cmd_coverage,
            "pairs": cmd_pairs,
            "eval": cmd_eval,
            "sweep-k": cmd_sweep_k,
        }[args.command]
        return handler(config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (MetricUndefinedError, EmbeddingError) as exc:
        print(f"undefined: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except MlmBiasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
