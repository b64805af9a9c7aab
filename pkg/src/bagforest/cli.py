"""Command-line entry point: ``bagforest {train,evaluate,analyze,reproduce}``.

Exit status is 0 on success, 1 for bad input or data, 2 when an internal
consistency check fails.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import analysis, forest, metrics
from .data import DataError, Dataset, class_counts, load_csv, stratified_split
from .tree import default_depth, depth, leaf_bound, leaves

# reported figures from the reference study, as fractions
REFERENCE_FIGURES = {
    "accuracy": 0.92,
    "macro_precision": 0.91,
    "macro_recall": 0.89,
    "weighted_precision": 0.92,
    "weighted_recall": 0.92,
    "label0_precision": 0.93,
    "label0_recall": 0.96,
    "label1_precision": 0.90,
    "label1_recall": 0.81,
    "macro_f1": 0.90,
    "weighted_f1": 0.92,
    "label0_f1": 0.94,
    "label1_f1": 0.85,
    "kappa": 0.7802,
}

# (kind, tol): "floor" passes when achieved >= tol, "abs" when
# |achieved - reference| <= tol
TOLERANCES = {
    "weighted_precision": ("floor", 0.88),
    "weighted_recall": ("floor", 0.88),
    "macro_precision": ("abs", 0.05),
    "macro_recall": ("abs", 0.05),
    "label0_f1": ("abs", 0.05),
    "label1_f1": ("abs", 0.05),
    "kappa": ("abs", 0.08),
}

# column names used by the public PCOS table
PCOS_COLUMNS = {
    "follicle_l": "Follicle No. (L)",
    "follicle_r": "Follicle No. (R)",
    "endometrium": "Endometrium (mm)",
    "exercise": "Reg.Exercise(Y/N)",
    "fast_food": "Fast food (Y/N)",
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    input: str
    target_column: str
    test_fraction: float = 0.25
    seed: int = 42
    trees: int = 100
    max_depth: Union[int, str, None] = forest.LOG2_DEPTH
    features_per_split: Optional[int] = None
    min_samples_leaf: int = 1
    impute: str = "median"
    exclude: tuple[str, ...] = ()
    out_dir: str = "out"
    jobs: int = 1

    def forest_config(self) -> forest.ForestConfig:
        return forest.ForestConfig(
            self.trees, self.max_depth, self.features_per_split, self.min_samples_leaf, self.seed
        )

    def validate(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise DataError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        self.forest_config()

    def describe(self) -> dict:
        # jobs and out_dir never change results, so they stay out of reports
        d = asdict(self)
        d.pop("jobs")
        d.pop("out_dir")
        d["exclude"] = list(self.exclude)
        return d


def _json_dump(obj, path: Path) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _load(cfg: RunConfig) -> Dataset:
    return load_csv(cfg.input, cfg.target_column, cfg.impute, cfg.exclude)


def _dataset_summary(d: Dataset) -> dict:
    n0, n1 = class_counts(d)
    return {
        "n_rows": d.n_rows,
        "n_features": d.n_features,
        "class_counts": {"0": n0, "1": n1},
        "feature_names": list(d.feature_names),
        "imputed_columns": list(d.impute.applied_columns),
    }


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_train(cfg: RunConfig):
    """Split, fit and summarise. Returns (model, summary, split)."""
    cfg.validate()
    data = _load(cfg)
    split = stratified_split(data, cfg.test_fraction, cfg.seed)
    model = forest.fit(split.train, cfg.forest_config(), n_jobs=cfg.jobs)
    n_train = split.train.n_rows
    per_tree = []
    for t, boot in zip(model.trees, model.bootstrap_indices):
        n_leaves = len(leaves(t))
        if sum(sum(lf.class_counts) for lf in leaves(t)) != len(boot):
            raise AssertionError("leaf counts do not add up to the bootstrap size")
        per_tree.append({"leaves": n_leaves, "depth": depth(t)})
    n_train0, n_train1 = class_counts(split.train)
    n_test0, n_test1 = class_counts(split.test)
    summary = {
        "run_config": cfg.describe(),
        "dataset": _dataset_summary(data),
        "split": {
            "n_train": n_train,
            "n_test": split.test.n_rows,
            "train_class_counts": {"0": n_train0, "1": n_train1},
            "test_class_counts": {"0": n_test0, "1": n_test1},
        },
        "model": {
            "n_estimators": model.config.n_estimators,
            "max_depth_used": model.config.max_depth,
            "log2_default_depth": default_depth(n_train),
            "features_per_split": model.config.features_per_split,
            "min_samples_leaf": model.config.min_samples_leaf,
            "oob_score": model.oob_score,
            "leaf_bound": leaf_bound(n_train),
            "max_leaves": max(p["leaves"] for p in per_tree),
            "max_tree_depth": max(p["depth"] for p in per_tree),
            "trees": per_tree,
        },
    }
    return model, summary, split


def cmd_train(cfg: RunConfig) -> dict:
    model, summary, _ = run_train(cfg)
    out = _out_dir(cfg)
    forest.save(model, out / "model.json")
    _json_dump(summary, out / "train_summary.json")
    print(f"oob_score: {summary['model']['oob_score']}")
    print(f"wrote {out / 'model.json'}")
    return summary


def _evaluate(model: forest.ForestModel, d: Dataset):
    if d.n_features != model.n_features:
        raise forest.ModelError(
            f"data has {d.n_features} features but the model expects {model.n_features}"
        )
    if model.feature_names and tuple(model.feature_names) != d.feature_names:
        raise forest.ModelError("data columns differ from the columns the model was trained on")
    scores = model.predict_score(d.rows)
    pred = model.predict(d.rows)
    if not np.array_equal(pred, (scores > 0.5).astype(np.int64)):
        raise AssertionError("majority vote disagrees with the vote fraction")
    rep = metrics.report(pred, d.labels)
    roc = metrics.roc_curve(scores, d.labels) if 0 < d.labels.sum() < d.n_rows else None
    return rep, roc


def _print_display(rep: metrics.ClassificationReport, roc) -> None:
    disp = rep.display()
    print("Variation   Precision  Recall")
    for k, (p, r) in disp["precision_recall_averages"].items():
        print(f"{k:<11} {p:>9}  {r:>6}")
    for k, (p, r) in disp["precision_recall_labels"].items():
        print(f"{k:<11} {p:>9}  {r:>6}")
    print(f"F1 macro {disp['f1_averages']['Macro']}  weighted {disp['f1_averages']['Weighted']}")
    print("F1 " + "  ".join(f"{k} {v}" for k, v in disp["f1_labels"].items()))
    print(f"accuracy {disp['accuracy']}  kappa {disp['kappa']}", end="")
    print(f"  AUC {metrics.round_half_away(roc.auc, 2):.2f}" if roc else "  AUC n/a")


def evaluate_files(cfg: RunConfig, model_path, on: str = "test"):
    cfg.validate()
    model = forest.load(model_path)
    data = _load(cfg)
    d = stratified_split(data, cfg.test_fraction, cfg.seed).test if on == "test" else data
    rep, roc = _evaluate(model, d)
    doc = {
        "run_config": cfg.describe(),
        "evaluated_on": on,
        "n_rows": d.n_rows,
        "report": rep.to_dict(),
        "auc": roc.auc if roc else None,
    }
    return doc, rep, roc


def cmd_evaluate(cfg: RunConfig, model_path, on: str = "test") -> dict:
    doc, rep, roc = evaluate_files(cfg, model_path, on)
    out = _out_dir(cfg)
    if roc is not None:
        metrics.write_roc_csv(roc, out / "roc.csv")
    _json_dump(doc, out / "report.json")
    _print_display(rep, roc)
    return doc


@dataclass
class AnalysisRequest:
    correlation: list = field(default_factory=list)
    kde1d: list = field(default_factory=list)
    kde2d: list = field(default_factory=list)
    quadrant: list = field(default_factory=list)
    scatter: list = field(default_factory=list)
    by_label: bool = False
    grid_size: int = 100
    svg: bool = False

    def empty(self) -> bool:
        return not (self.correlation or self.kde1d or self.kde2d or self.quadrant or self.scatter)


def _slug(*names) -> str:
    s = "__".join(names)
    return "".join(c if c.isalnum() else "_" for c in s).strip("_")


def _check_columns(d: Dataset, names) -> None:
    for n in names:
        if n not in d.feature_names:
            raise DataError(f"unknown column {n!r}")


def run_analysis(d: Dataset, req: AnalysisRequest, out: Path) -> list[str]:
    """Write the requested artifacts under ``out``; returns their file names.

    A correlation request of just ``all`` expands to every feature column.
    """
    req.correlation = [
        list(d.feature_names) if cols == ["all"] and "all" not in d.feature_names else cols
        for cols in req.correlation
    ]
    for group in (req.correlation, req.kde1d, req.kde2d, req.quadrant, req.scatter):
        for cols in group:
            _check_columns(d, cols)
    written = []

    def emit(name, writer, *args):
        writer(*args, out / name)
        written.append(name)

    def svg(name, values, origin):
        if req.svg:
            (out / name).write_text(analysis.svg_heatmap(values, origin=origin), encoding="utf-8")
            written.append(name)

    for cols in req.correlation:
        cm = analysis.correlation(d, cols)
        if len(cols) > 4:
            base = "correlation_all" if tuple(cols) == d.feature_names else f"correlation_{len(cols)}cols"
        else:
            base = "correlation_" + _slug(*cols)
        emit(base + ".csv", analysis.write_correlation_csv, cm)
        svg(base + ".svg", np.abs(cm.values), "upper")
    for (col,) in req.kde1d:
        base = "kde1d_" + _slug(col)
        emit(base + ".csv", analysis.write_kde_csv, analysis.kde_1d(d.column(col), grid_size=req.grid_size))
        if req.by_label:
            for lab, g in analysis.kde_1d(d.column(col), d.labels, req.grid_size).items():
                emit(f"{base}_label{lab}.csv", analysis.write_kde_csv, g)
    for xcol, ycol in req.kde2d:
        base = "kde2d_" + _slug(xcol, ycol)
        x, y = d.column(xcol), d.column(ycol)
        g = analysis.kde_2d(x, y, grid_size=req.grid_size)
        emit(base + ".csv", analysis.write_kde_csv, g)
        svg(base + ".svg", g.density, "lower")
        if req.by_label:
            for lab, g in analysis.kde_2d(x, y, d.labels, req.grid_size).items():
                emit(f"{base}_label{lab}.csv", analysis.write_kde_csv, g)
                svg(f"{base}_label{lab}.svg", g.density, "lower")
    for a, b in req.quadrant:
        emit(f"quadrant_{_slug(a, b)}.json", analysis.write_quadrant_json, analysis.quadrant_table(d, a, b))
    for xcol, ycol in req.scatter:
        pts = analysis.scatter_export(d, xcol, ycol)
        analysis.write_scatter_csv(pts, out / f"scatter_{_slug(xcol, ycol)}.csv", xcol, ycol)
        written.append(f"scatter_{_slug(xcol, ycol)}.csv")
    return written


def cmd_analyze(cfg: RunConfig, req: AnalysisRequest) -> list[str]:
    if req.empty():
        raise UsageError("nothing to analyze: pass --correlation, --kde1d, --kde2d, --quadrant or --scatter")
    data = _load(cfg)
    files = run_analysis(data, req, _out_dir(cfg))
    for f in files:
        print(f"wrote {Path(cfg.out_dir) / f}")
    return files


def default_analysis(d: Dataset) -> AnalysisRequest:
    """Analyses mirroring the exploratory figures when the PCOS columns exist;
    otherwise a correlation matrix over all features."""
    have = {k: v for k, v in PCOS_COLUMNS.items() if v in d.feature_names}
    req = AnalysisRequest(by_label=True, svg=True)
    if "follicle_l" in have and "follicle_r" in have:
        pair = [have["follicle_l"], have["follicle_r"]]
        req.correlation.append(pair)
        req.scatter.append(pair)
        req.kde2d.append(pair)
    else:
        req.correlation.append(list(d.feature_names))
    if "endometrium" in have:
        req.kde1d.append([have["endometrium"]])
    if "exercise" in have and "fast_food" in have:
        req.quadrant.append([have["exercise"], have["fast_food"]])
    return req


def _achieved(rep: metrics.ClassificationReport) -> dict:
    pl = rep.per_label
    return {
        "accuracy": rep.accuracy,
        "macro_precision": rep.macro.precision,
        "macro_recall": rep.macro.recall,
        "weighted_precision": rep.weighted.precision,
        "weighted_recall": rep.weighted.recall,
        "label0_precision": pl[0].precision,
        "label0_recall": pl[0].recall,
        "label1_precision": pl[1].precision,
        "label1_recall": pl[1].recall,
        "macro_f1": rep.macro.f1,
        "weighted_f1": rep.weighted.f1,
        "label0_f1": pl[0].f1,
        "label1_f1": pl[1].f1,
        "kappa": rep.kappa,
    }


def comparison_rows(rep: metrics.ClassificationReport) -> list[dict]:
    got = _achieved(rep)
    rows = []
    for name, ref in REFERENCE_FIGURES.items():
        row = {"metric": name, "achieved": got[name], "reference": ref, "delta": got[name] - ref}
        if name in TOLERANCES:
            kind, tol = TOLERANCES[name]
            row["criterion"] = f">= {tol}" if kind == "floor" else f"|delta| <= {tol}"
            row["within_tolerance"] = bool(got[name] >= tol if kind == "floor" else abs(got[name] - ref) <= tol)
        rows.append(row)
    return rows


def _comparison_markdown(rows) -> str:
    lines = ["| metric | achieved | reference | delta | criterion | pass |", "|---|---|---|---|---|---|"]
    for r in rows:
        ok = r.get("within_tolerance")
        lines.append(
            f"| {r['metric']} | {r['achieved']:.4f} | {r['reference']:.4f} | {r['delta']:+.4f} "
            f"| {r.get('criterion', '')} | {'' if ok is None else ('yes' if ok else 'no')} |"
        )
    return "\n".join(lines) + "\n"


def cmd_reproduce(cfg: RunConfig) -> dict:
    """Split, fit, evaluate on the held-out part, run the exploratory
    analyses, and compare against the reference figures."""
    started = time.perf_counter()
    model, summary, split = run_train(cfg)
    rep, roc = _evaluate(model, split.test)
    if abs(rep.weighted.recall - rep.accuracy) > 1e-12:
        raise AssertionError("weighted recall differs from accuracy")
    data = _load(cfg)
    out = _out_dir(cfg)
    analysis_files = run_analysis(data, default_analysis(data), out)

    rows = comparison_rows(rep)
    report_doc = {
        "run_config": cfg.describe(),
        "evaluated_on": "test",
        "n_rows": split.test.n_rows,
        "report": rep.to_dict(),
        "auc": roc.auc if roc else None,
        "oob_score": model.oob_score,
    }
    comparison = {"run_config": cfg.describe(), "rows": rows}
    forest.save(model, out / "model.json")
    _json_dump(summary, out / "train_summary.json")
    _json_dump(report_doc, out / "report.json")
    if roc is not None:
        metrics.write_roc_csv(roc, out / "roc.csv")
    _json_dump(comparison, out / "comparison.json")
    (out / "comparison.md").write_text(_comparison_markdown(rows), encoding="utf-8")
    artifacts = ["model.json", "train_summary.json", "report.json"]
    artifacts += ["roc.csv"] if roc is not None else []
    artifacts += ["comparison.json", "comparison.md", *analysis_files]
    manifest = {
        "run_config": cfg.describe(),
        "input_sha256": _sha256(cfg.input),
        "artifacts": artifacts,
    }
    _json_dump(manifest, out / "manifest.json")
    _print_display(rep, roc)
    print(_comparison_markdown(rows), end="")
    print(f"elapsed {time.perf_counter() - started:.2f}s", file=sys.stderr)
    return comparison


# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _depth_arg(s: str):
    s = s.strip().lower()
    if s in ("none", "unbounded"):
        return None
    if s == forest.LOG2_DEPTH:
        return forest.LOG2_DEPTH
    return int(s)


def _columns_arg(n):
    def parse(s):
        cols = [c.strip() for c in s.split(",")]
        if n is not None and len(cols) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated column(s), got {len(cols)}")
        return cols

    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bagforest", description="Bagged decision-tree classifier for binary CSV data.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--input", required=True, help="CSV file with a header row")
        sp.add_argument("--target-column", required=True)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--test-fraction", type=float, default=0.25)
        sp.add_argument("--impute", choices=("median", "mean", "drop-row"), default="median")
        sp.add_argument("--exclude", action="append", default=[], metavar="COLUMN",
                        help="drop a feature column (repeatable)")
        sp.add_argument("--out-dir", default="out")

    def forest_opts(sp):
        sp.add_argument("--trees", type=int, default=100)
        sp.add_argument("--max-depth", type=_depth_arg, default=forest.LOG2_DEPTH,
                        help="integer, 'log2' (default: ceil(log2 n_train)) or 'none'")
        sp.add_argument("--features-per-split", type=int, default=None,
                        help="default floor(sqrt(n_features))")
        sp.add_argument("--min-samples-leaf", type=int, default=1)
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for tree growth")

    def analysis_opts(sp):
        sp.add_argument("--correlation", type=_columns_arg(None), action="append", default=[],
                        help="comma-separated columns, or 'all'")
        sp.add_argument("--kde1d", type=_columns_arg(1), action="append", default=[])
        sp.add_argument("--kde2d", type=_columns_arg(2), action="append", default=[])
        sp.add_argument("--quadrant", type=_columns_arg(2), action="append", default=[])
        sp.add_argument("--scatter", type=_columns_arg(2), action="append", default=[])
        sp.add_argument("--by-label", action="store_true")
        sp.add_argument("--grid-size", type=int, default=100)
        sp.add_argument("--svg", action="store_true")

    sp = sub.add_parser("train", help="fit a forest on the training split")
    common(sp)
    forest_opts(sp)

    sp = sub.add_parser("evaluate", help="score a saved model")
    common(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--on", choices=("test", "all"), default="test",
                    help="evaluate on the held-out split (default) or every row")

    sp = sub.add_parser("analyze", help="emit exploratory-analysis data files")
    common(sp)
    analysis_opts(sp)

    sp = sub.add_parser("reproduce", help="train, evaluate, analyze and compare")
    common(sp)
    forest_opts(sp)
    return p


def _run_config(ns) -> RunConfig:
    return RunConfig(
        input=ns.input,
        target_column=ns.target_column,
        test_fraction=ns.test_fraction,
        seed=ns.seed,
        trees=getattr(ns, "trees", 100),
        max_depth=getattr(ns, "max_depth", forest.LOG2_DEPTH),
        features_per_split=getattr(ns, "features_per_split", None),
        min_samples_leaf=getattr(ns, "min_samples_leaf", 1),
        impute=ns.impute,
        exclude=tuple(ns.exclude),
        out_dir=ns.out_dir,
        jobs=getattr(ns, "jobs", 1),
    )


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = _run_config(ns)
        if ns.command == "train":
            cmd_train(cfg)
        elif ns.command == "evaluate":
            cmd_evaluate(cfg, ns.model, ns.on)
        elif ns.command == "analyze":
            req = AnalysisRequest(ns.correlation, ns.kde1d, ns.kde2d, ns.quadrant, ns.scatter,
                                  ns.by_label, ns.grid_size, ns.svg)
            cmd_analyze(cfg, req)
        else:
            cmd_reproduce(cfg)
    except AssertionError as exc:
        print(f"bagforest: internal error: {exc}", file=sys.stderr)
        return 2
    except (DataError, forest.ModelError, UsageError, ValueError, OSError) as exc:
        print(f"bagforest: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
