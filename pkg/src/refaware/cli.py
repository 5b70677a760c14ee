"""Command line entry point: categorize, metrics, label, filter, eval."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import report
from .categorizer import CLEAN, pure_refactoring_filter, records_to_jsonl
from .errors import ConfigError, RefawareError
from .metrics import features_csv, load_kamei_csv, merge_external_metrics, read_features_csv
from .pipeline import AnalyzerPool, CommitAnalyzer, commit_metrics
from .predictor import TrainConfig, alberg_curves, evaluate, predict_proba, train
from .refactoring import group_by_commit, load_report
from .szz import (
    label_dataset,
    label_diff,
    labels_to_jsonl,
    load_annotations,
    verdicts_from_csv,
    verdicts_to_csv,
)
from .vcs import open_repo

log = logging.getLogger("refaware")

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2


@dataclass
class RunConfig:
    repo: str | None
    commits: str | None
    refactorings: str | None
    kamei: str | None
    out: Path
    threshold: float = 0.8
    workers: int = 1
    prefer_computed: bool = False
    effort_unit: str = "commit"
    max_commit_churn: int | None = None
    figures: bool = True

    def __post_init__(self):
        if not 0 < self.threshold <= 1:
            raise ConfigError(f"threshold must lie in (0, 1], got {self.threshold}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        if self.effort_unit not in ("commit", "line"):
            raise ConfigError(f"unknown effort unit {self.effort_unit!r}")


def _config(args) -> RunConfig:
    return RunConfig(
        repo=getattr(args, "repo", None),
        commits=getattr(args, "commits", None),
        refactorings=getattr(args, "refactorings", None),
        kamei=getattr(args, "kamei", None),
        out=Path(args.out),
        threshold=getattr(args, "threshold", 0.8),
        workers=getattr(args, "workers", 1),
        prefer_computed=getattr(args, "prefer_computed", False),
        effort_unit=getattr(args, "effort_unit", "commit"),
        max_commit_churn=getattr(args, "max_commit_churn", None),
        figures=not getattr(args, "no_figures", False),
    )


def _read(path, what) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc.strerror}") from None


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _safe_name(commit: str) -> str:
    return re.sub(r"[^\w.-]", "_", commit)


class Session:
    """Opened repository, commit selection and external instances."""

    def __init__(self, cfg: RunConfig):
        if not cfg.repo:
            raise ConfigError("--repo is required")
        self.cfg = cfg
        try:
            self.repo = open_repo(cfg.repo)
        except RefawareError as exc:
            raise ConfigError(f"cannot open repository: {exc}") from None
        self.instances = {}
        if cfg.refactorings:
            try:
                self.instances = group_by_commit(load_report(_read(cfg.refactorings, "refactoring report")))
            except RefawareError as exc:
                raise ConfigError(f"bad refactoring report: {exc}") from None
        self.commits = self._select(cfg.commits)
        self.pool = AnalyzerPool(lambda: open_repo(cfg.repo), self.instances, cfg.threshold)
        self.failures: list[dict] = []

    def _select(self, spec):
        try:
            if spec and Path(spec).is_file():
                wanted = [s.strip() for s in _read(spec, "commit list").splitlines() if s.strip()]
                order = {c: k for k, c in enumerate(self.repo.commits())}
                missing = [c for c in wanted if c not in order]
                if missing:
                    raise ConfigError(f"unknown commits in list: {', '.join(missing[:5])}")
                return sorted(dict.fromkeys(wanted), key=order.__getitem__)
            return self.repo.commits(spec or None)
        except RefawareError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad commit selection: {exc}") from None

    def map(self, fn):
        """Apply ``fn(analyzer, commit)`` over the selection in topological order.

        Failures are logged and yield ``None`` for that commit.
        """

        def run(commit):
            try:
                return fn(self.pool.get(), commit)
            except RefawareError as exc:
                return exc

        if self.cfg.workers == 1:
            results = [run(c) for c in self.commits]
        else:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as ex:
                results = list(ex.map(run, self.commits))
        out = []
        for commit, res in zip(self.commits, results):
            if isinstance(res, RefawareError):
                log.warning("commit %s failed: %s", commit, res)
                self.failures.append({"commit": commit, "error": f"{type(res).__name__}: {res}"})
                res = None
            out.append((commit, res))
        return out

    def write_failures(self, name: str) -> int:
        if not self.failures:
            return EXIT_OK
        _write(self.cfg.out / name, "".join(json.dumps(f) + "\n" for f in self.failures))
        return EXIT_PARTIAL


# -- subcommands --------------------------------------------------------------


def cmd_categorize(args) -> int:
    cfg = _config(args)
    s = Session(cfg)
    results = s.map(lambda a, c: a.analyze(c))
    done = [(c, recs) for c, recs in results if recs is not None]
    for commit, records in done:
        _write(cfg.out / "categorize" / f"{_safe_name(commit)}.jsonl", records_to_jsonl(records))
    _write(cfg.out / "summary.csv", report.summary_csv(done))
    _write(cfg.out / "categories.csv", report.categories_csv(done))
    if cfg.figures:
        report.plot_category_distribution(done, cfg.out / "category_distribution.png")
    return s.write_failures("categorize_failures.jsonl")


def cmd_metrics(args) -> int:
    cfg = _config(args)
    kamei = None
    if cfg.kamei:
        try:
            kamei = load_kamei_csv(_read(cfg.kamei, "Kamei CSV"))
        except RefawareError as exc:
            raise ConfigError(f"bad Kamei CSV: {exc}") from None
    s = Session(cfg)

    def one(analyzer, commit):
        ram, basic = commit_metrics(analyzer, commit)
        if basic["la"] + basic["ld"] == 0:
            return ()
        if kamei is None:
            return ram.values
        vec = merge_external_metrics(
            ram, kamei.get(commit), commit=commit, prefer_computed=cfg.prefer_computed, computed=basic
        )
        return vec.values

    rows = [(c, v) for c, v in s.map(one) if v]
    _write(cfg.out / "metrics.csv", features_csv(rows, merged=kamei is not None))
    return s.write_failures("metrics_failures.jsonl")


def cmd_label(args) -> int:
    cfg = _config(args)
    try:
        annotations = load_annotations(_read(args.annotations, "annotations"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    s = Session(cfg)
    analyzer = CommitAnalyzer(s.repo, s.instances, cfg.threshold)
    result = label_dataset(
        analyzer, annotations, s.commits, skip=not args.naive, max_commit_churn=cfg.max_commit_churn
    )
    _write(cfg.out / "labels.jsonl", labels_to_jsonl(result.labels))
    _write(cfg.out / "verdicts.csv", verdicts_to_csv(result.verdicts))
    if args.prior:
        prior = verdicts_from_csv(_read(args.prior, "prior labels"))
        _write(cfg.out / "label_diff.json", json.dumps(label_diff(prior, result.verdicts), indent=2) + "\n")
    for f in result.failures:
        log.warning("trace failed for %s %s:%d: %s", f.fix_commit, f.path, f.line, f.error)
        s.failures.append(f.to_dict())
    return s.write_failures("label_failures.jsonl")


def cmd_filter(args) -> int:
    cfg = _config(args)
    s = Session(cfg)

    def one(analyzer, commit):
        records = analyzer.analyze(commit)
        return pure_refactoring_filter(records) if records else "empty"

    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("commit_id", "verdict"))
    for commit, verdict in s.map(one):
        if verdict is not None:
            w.writerow((commit, verdict))
    _write(cfg.out / "filter.csv", out.getvalue())
    return s.write_failures("filter_failures.jsonl")


def _read_split(text):
    split = {}
    for row in csv.DictReader(io.StringIO(text)):
        value = (row.get("split") or "").strip().lower()
        if value not in ("train", "test"):
            raise ConfigError(f"split of {row.get('commit_id')} must be train or test, got {value!r}")
        split[row["commit_id"]] = value
    return split


def cmd_eval(args) -> int:
    cfg = _config(args)
    try:
        names, commits, rows = read_features_csv(_read(args.features, "features"))
    except RefawareError as exc:
        raise ConfigError(f"bad features CSV: {exc}") from None
    verdicts = verdicts_from_csv(_read(args.labels, "labels"))
    split = _read_split(_read(args.split, "split"))
    missing = [c for c in commits if c not in split or c not in verdicts]
    if missing:
        raise ConfigError(f"split or labels miss commits: {', '.join(missing[:5])}")
    prefiltered = set()
    if args.prefilter:
        prefiltered = {c for c, v in verdicts_from_csv(_read(args.prefilter, "filter")).items() if v == CLEAN}

    X = np.asarray(rows, float)
    y = np.asarray([1 if verdicts[c] == "buggy" else 0 for c in commits])
    line_cols = [k for k, n in enumerate(names) if n.startswith("line_")]
    churn = X[:, line_cols].sum(axis=1) if line_cols else X[:, [names.index("la"), names.index("ld")]].sum(axis=1)
    train_idx = [k for k, c in enumerate(commits) if split[c] == "train"]
    test_idx = [k for k, c in enumerate(commits) if split[c] == "test"]
    if not test_idx:
        raise ConfigError("split has no test commits")
    model = train(X[train_idx], y[train_idx], TrainConfig(balanced=args.balanced), names)
    scores = predict_proba(model, X[test_idx])
    for j, k in enumerate(test_idx):
        if commits[k] in prefiltered:
            scores[j] = 0.0
    churn_test = [float(v) for v in churn[test_idx]]
    rep = evaluate(scores, y[test_idx], churn_test, unit=cfg.effort_unit)
    _write(cfg.out / "eval_report.json", rep.to_json())
    _write(cfg.out / "eval_report.txt", rep.to_table())
    _write(cfg.out / "model.json", json.dumps(model.to_dict(), indent=2) + "\n")
    if cfg.figures:
        report.plot_alberg(alberg_curves(scores, y[test_idx], churn_test), cfg.out / "alberg.png")
    sys.stdout.write(rep.to_table())
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


def _unit_interval(text):
    value = float(text)
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1]")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="refaware", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, repo=True):
        if repo:
            p.add_argument("--repo", required=True, help="git work tree or synthetic history JSON")
            p.add_argument("--commits", help="revision range A..B or a file with one commit id per line")
            p.add_argument("--refactorings", help="refactoring report JSON")
            p.add_argument("--threshold", type=_unit_interval, default=0.8, help="cosine threshold (strict)")
            p.add_argument("--workers", type=_positive_int, default=1)
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--no-figures", action="store_true", help="skip PNG output")

    p = sub.add_parser("categorize", help="label every changed line")
    common(p)
    p.set_defaults(func=cmd_categorize)

    p = sub.add_parser("metrics", help="refactoring-aware metrics per commit")
    common(p)
    p.add_argument("--kamei", help="CSV with the 14 change metrics per commit")
    p.add_argument("--prefer-computed", action="store_true", help="diff-computed NS/ND/NF/Entropy/LA/LD win")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("label", help="refactoring-aware SZZ labeling")
    common(p)
    p.add_argument("--annotations", required=True, help="JSONL of fix lines")
    p.add_argument("--prior", help="earlier verdict CSV to diff against")
    p.add_argument("--max-commit-churn", type=int, help="exclude inducing commits larger than this")
    p.add_argument("--naive", action="store_true", help="disable the skip set (plain SZZ)")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("filter", help="pre-label pure refactoring commits clean")
    common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("eval", help="train and evaluate the baseline predictor")
    common(p, repo=False)
    p.add_argument("--features", required=True, help="metrics CSV")
    p.add_argument("--labels", required=True, help="verdict CSV")
    p.add_argument("--split", required=True, help="CSV commit_id,split with train/test")
    p.add_argument("--prefilter", help="filter CSV; commits marked clean score 0")
    p.add_argument("--effort-unit", choices=("commit", "line"), default="commit")
    p.add_argument("--balanced", action="store_true", help="reweight classes")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except RefawareError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
