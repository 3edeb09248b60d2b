"""Command line entry point: generate, evaluate, analyze, diff, report."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from statistics import mean
from typing import Optional
from urllib.parse import urlparse

from .analysis import (AliasTable, Matcher, align_to_gold, default_aliases, diff_table_sets, error_counts,
                       schema_size_report, DiffReport)
from .datasets import DatasetKind, Difficulty, Sample, load_dataset
from .errors import StageError, Text2TableError
from .llm import BackendConfig, Gateway, atomic_write_text
from .metrics import (SimilarityKind, autoqa, coverage_report, numeric_eval, tabeval)
from .pipeline import AblationFlags, GenerationResult, Strategy, run_strategy
from .tables import Table, TableSet, table_set_from_json, table_set_to_json
from .templates import Templates

log = logging.getLogger("text2table")

DETERMINISTIC_METRICS = ("em", "chrf", "numeric")
LLM_METRICS = ("embed", "autoqa", "tabeval")
ALL_METRICS = DETERMINISTIC_METRICS + LLM_METRICS


class ConfigError(Exception):
    """Bad flag combination; reported as a usage error."""


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _jsonl(records) -> str:
    return "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n" for r in records)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _gateway(args, required: bool) -> Optional[Gateway]:
    if not args.backend:
        if required:
            raise ConfigError("this command needs --backend")
        return None
    cfg = BackendConfig.parse(args.backend)
    if args.model:
        cfg.model = args.model
    return Gateway.from_config(cfg, cache_dir=args.cache_dir, parallelism=args.parallel)


def _backend_descriptor(gateway: Gateway, args) -> dict:
    desc = dict(gateway.backend.describe())
    if "base_url" in desc and desc["base_url"]:
        desc["base_url_host"] = urlparse(desc.pop("base_url")).hostname
    desc["model"] = gateway.model
    desc["sampling"] = gateway.sampling
    desc["spec"] = args.backend if not str(args.backend).startswith("http") else desc.get("kind", "http-chat")
    return desc


# ---------------------------------------------------------------------------
# generate

def prediction_record(sample: Sample, strategy: Strategy, flags: AblationFlags, res: GenerationResult) -> dict:
    return {
        "id": sample.id,
        "status": "ok",
        "strategy": strategy.value,
        "flags": flags.to_list(),
        "tables": table_set_to_json(res.tables),
        "statements": [s.text for s in res.statements],
        "schema": res.schema.to_json(),
        "transcript": [list(step) for step in res.transcript],
        "warnings": list(res.warnings),
        "token_usage": list(res.token_usage),
    }


def _error_record(sample: Sample, strategy: Strategy, flags: AblationFlags, exc: Exception) -> dict:
    rec = {"id": sample.id, "status": "error", "strategy": strategy.value, "flags": flags.to_list(),
           "error": f"{type(exc).__name__}: {exc}"}
    if isinstance(exc, StageError):
        rec["stage"] = exc.stage
        rec["error"] = f"{type(exc.cause).__name__}: {exc.cause}"
        rec["transcript"] = [list(step) for step in exc.transcript]
    return rec


def _previous_records(path: Path) -> dict[str, dict]:
    if not path.is_file():
        return {}
    out = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            rec = json.loads(line)
            if rec.get("status") == "ok":
                out[rec["id"]] = rec
    return out


def cmd_generate(args) -> int:
    strategy = Strategy(args.strategy)
    flags = AblationFlags.parse(args.ablate or "")
    samples = load_dataset(args.dataset, args.kind, args.limit)
    gateway = _gateway(args, required=True)
    templates = Templates(args.templates)
    out = Path(args.out)
    previous = _previous_records(out)
    started = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())

    def work(sample: Sample) -> dict:
        prev = previous.get(sample.id)
        if prev and prev.get("strategy") == strategy.value and prev.get("flags") == flags.to_list():
            return prev
        try:
            res = run_strategy(sample, strategy, flags, gateway=gateway, templates=templates)
        except (Text2TableError, ValueError) as exc:
            return _error_record(sample, strategy, flags, exc)
        return prediction_record(sample, strategy, flags, res)

    with ThreadPoolExecutor(max_workers=max(1, args.parallel)) as pool:
        records = list(pool.map(work, samples))
    atomic_write_text(out, _jsonl(records))

    failed = [r for r in records if r["status"] != "ok"]
    manifest = {
        "run_id": uuid.uuid4().hex,
        "strategy": strategy.value,
        "flags": flags.to_list(),
        "backend": _backend_descriptor(gateway, args),
        "templates": {"directory": str(templates.directory), "sha256": templates.digest()},
        "dataset": {"path": str(args.dataset), "kind": args.kind, "records": len(samples)},
        "cache_dir": args.cache_dir,
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "samples": {r["id"]: r["status"] for r in records},
        "usage": {
            "backend_calls": gateway.usage.backend_calls,
            "cache_hits": gateway.usage.cache_hits,
            "prompt_tokens": gateway.usage.prompt_tokens,
            "completion_tokens": gateway.usage.completion_tokens,
        },
        "predictions": str(out),
    }
    manifest_path = Path(args.manifest) if args.manifest else out.with_name(out.name + ".manifest.json")
    atomic_write_text(manifest_path, _dump(manifest))
    for r in failed:
        print(f"{r['id']}: failed at {r.get('stage', '?')}: {r['error']}", file=sys.stderr)
    print(f"{len(records) - len(failed)}/{len(records)} samples ok; "
          f"{gateway.usage.backend_calls} backend calls, {gateway.usage.cache_hits} cache hits")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# evaluate

def load_predictions(path) -> tuple[dict[str, TableSet], dict[str, str]]:
    """Read ``id -> TableSet`` from predictions JSONL (or any corpus with a ``tables`` key).

    Failed records are returned separately as ``id -> error``.
    """
    preds, failed = {}, {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("status", "ok") != "ok":
                failed[rec["id"]] = rec.get("error", "failed")
                continue
            preds[rec["id"]] = table_set_from_json(rec.get("tables", []))
    return preds, failed


def _pick_count_table(gold: Table, pred: TableSet) -> tuple[Table, list[str]]:
    t = pred.get(gold.name)
    if t is not None:
        return t, []
    if len(pred) == 1:
        only = pred.tables[0]
        return only, [f"pred table {only.name!r} used for gold table {gold.name!r}"]
    return Table.from_grid(gold.name, ["_"], []), [f"no pred table for {gold.name!r}"]


def _mean_or_none(values):
    values = [v for v in values if v is not None]
    return mean(values) if values else None


def _aggregate_coverage(per_sample: list[dict]) -> dict:
    agg: dict = {}
    for rep in per_sample:
        for label, levels in rep.items():
            for level, prf in levels.items():
                slot = agg.setdefault(label, {}).setdefault(level, {"precision": [], "recall": [], "f1": []})
                if prf is not None:
                    for k in slot:
                        slot[k].append(prf[k])
    return {label: {level: ({k: mean(v) for k, v in s.items()} if s["f1"] else None)
                    for level, s in levels.items()} for label, levels in agg.items()}


def _aggregate_numeric(per_sample: list[dict]) -> dict:
    out = {
        "n_samples": len(per_sample),
        "n_cells": sum(r["n_cells"] for r in per_sample),
        "rmse": _mean_or_none([r["rmse"] for r in per_sample]),
        "er": _mean_or_none([r["er"] for r in per_sample]),
        "over_rmse": _mean_or_none([r["over"]["rmse"] for r in per_sample]),
        "under_rmse": _mean_or_none([r["under"]["rmse"] for r in per_sample]),
        "over_n": sum(r["over"]["n"] for r in per_sample),
        "under_n": sum(r["under"]["n"] for r in per_sample),
        "per_difficulty": {},
    }
    for d in Difficulty:
        stats = [r["per_difficulty"][d.value] for r in per_sample if r["per_difficulty"].get(d.value)]
        out["per_difficulty"][d.value] = ({"rmse": mean(s["rmse"] for s in stats), "er": mean(s["er"] for s in stats),
                                           "n": sum(s["n"] for s in stats)} if stats else None)
    return out


def numeric_csv(agg: dict) -> str:
    rows = []
    for d in Difficulty:
        s = agg["per_difficulty"].get(d.value)
        rows.append([d.value, _fmt(s["rmse"]) if s else "", _fmt(s["er"]) if s else ""])
    rows.append(["Average", _fmt(agg["rmse"]), _fmt(agg["er"])])
    rows.append(["Overcount", _fmt(agg["over_rmse"]), ""])
    rows.append(["Undercount", _fmt(agg["under_rmse"]), ""])
    return _csv(["Difficulty", "RMSE", "ER"], rows)


def coverage_csv(agg: dict) -> str:
    rows = []
    for label in sorted(agg):
        for level in ("cell", "row", "col"):
            s = agg[label].get(level)
            rows.append([label, level] + ([_fmt(s["precision"]), _fmt(s["recall"]), _fmt(s["f1"])] if s else ["", "", ""]))
    return _csv(["similarity", "level", "precision", "recall", "f1"], rows)


def _fmt(x) -> str:
    return "" if x is None else f"{x:.6f}"


def cmd_evaluate(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = [m for m in metrics if m not in ALL_METRICS]
    if unknown:
        raise ConfigError(f"unknown metric(s) {unknown}; choose from {', '.join(ALL_METRICS)}")
    needs_llm = [m for m in metrics if m in LLM_METRICS]
    gateway = _gateway(args, required=False)
    if needs_llm and gateway is None:
        raise ConfigError(f"metric(s) {needs_llm} need --backend")
    templates = Templates(args.templates)
    gold = load_dataset(args.gold, args.kind)
    preds, failed = load_predictions(args.pred)
    missing = [s.id for s in gold if s.id not in preds]

    kinds = []
    if "em" in metrics:
        kinds.append(SimilarityKind.exact(args.normalize_case))
    if "chrf" in metrics:
        kinds.append(SimilarityKind.chrf(args.chrf_n, args.chrf_beta, args.normalize_case))
    if "embed" in metrics:
        kinds.append(SimilarityKind.embedding(args.normalize_case))
    aliases = AliasTable.load(args.aliases) if args.aliases else default_aliases()

    samples_out, errors = [], []
    cov_reps, num_reps, qa_reps, tab_reps = [], [], [], []
    for s in gold:
        if s.id not in preds:
            continue
        pred = preds[s.id]
        entry: dict = {"id": s.id}
        try:
            if kinds:
                entry["coverage"] = coverage_report(s.gold, pred, kinds, gateway, args.include_absent).to_json()
                cov_reps.append(entry["coverage"])
            if "numeric" in metrics:
                entry["numeric"] = {}
                for g in s.gold:
                    p, notes = _pick_count_table(g, pred)
                    rep = numeric_eval(g, p, aliases).to_json()
                    rep["flags"] = notes + rep["flags"]
                    entry["numeric"][g.name] = rep
                    num_reps.append(rep)
            if "autoqa" in metrics:
                entry["autoqa"] = autoqa(s.text, pred, gateway, templates, args.qa_n).to_json()
                qa_reps.append(entry["autoqa"])
            if "tabeval" in metrics:
                entry["tabeval"] = tabeval(pred, s.gold, gateway, templates).to_json()
                tab_reps.append(entry["tabeval"])
        except Text2TableError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            errors.append(s.id)
        samples_out.append(entry)

    aggregate: dict = {}
    if kinds:
        aggregate["coverage"] = _aggregate_coverage(cov_reps)
    if "numeric" in metrics:
        aggregate["numeric"] = _aggregate_numeric(num_reps) if num_reps else None
    if "autoqa" in metrics:
        aggregate["autoqa"] = {
            "accuracy_pct": _mean_or_none([r["accuracy_pct"] for r in qa_reps]),
            "n_questions": sum(r["n_questions"] for r in qa_reps),
            "n_correct": sum(r["n_correct"] for r in qa_reps),
        }
    if "tabeval" in metrics:
        aggregate["tabeval"] = {k: _mean_or_none([r["overall"][k] for r in tab_reps])
                                for k in ("correctness", "completeness", "overall")}

    report = {
        "type": "evaluation",
        "label": args.label or Path(args.pred).stem,
        "params": {
            "gold": str(args.gold),
            "pred": str(args.pred),
            "kind": args.kind,
            "metrics": metrics,
            "chrf_n": args.chrf_n,
            "chrf_beta": args.chrf_beta,
            "normalize_case": args.normalize_case,
            "include_absent": args.include_absent,
            "qa_n": args.qa_n,
            "matcher": "deterministic",
            "alias_file_sha256": aliases.digest,
            "templates_sha256": templates.digest(),
            "averaging": "per-sample mean, then mean over samples",
        },
        "missing_predictions": missing,
        "failed_predictions": sorted(failed),
        "sample_errors": errors,
        "aggregate": aggregate,
        "samples": samples_out,
    }
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out_dir / "report.json", _dump(report))
    if kinds:
        atomic_write_text(out_dir / "coverage.csv", coverage_csv(aggregate["coverage"]))
    if aggregate.get("numeric"):
        atomic_write_text(out_dir / "numeric.csv", numeric_csv(aggregate["numeric"]))

    for sid in missing:
        print(f"MissingPrediction: {sid}" + (f" ({failed[sid]})" if sid in failed else ""), file=sys.stderr)
    for sid in errors:
        print(f"{sid}: {next(e['error'] for e in samples_out if e['id'] == sid)}", file=sys.stderr)
    print(f"evaluated {len(samples_out)} samples -> {out_dir / 'report.json'}")
    if errors or (missing and not args.allow_partial):
        return 1
    return 0


# ---------------------------------------------------------------------------
# analyze / diff

def cmd_analyze(args) -> int:
    gold = load_dataset(args.gold, args.kind)
    preds, _failed = load_predictions(args.pred)
    aliases = AliasTable.load(args.aliases) if args.aliases else default_aliases()
    matcher = Matcher(args.matcher)
    gateway = _gateway(args, required=matcher is Matcher.LLM_ASSISTED)
    templates = Templates(args.templates)
    aligned = [align_to_gold(preds.get(s.id, TableSet()), s.gold, matcher, gateway, templates, aliases, s.id)
               for s in gold]
    names = []
    for s in gold:
        for t in s.gold:
            if t.name not in names:
                names.append(t.name)
    counts = {name: error_counts(aligned, name) for name in names}
    records = schema_size_report(gold, aligned)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out_dir / "aligned.jsonl", _jsonl(a.to_json() for a in aligned))
    atomic_write_text(out_dir / "error_counts.csv", _csv(
        ["table", "avg_extra_rows", "avg_extra_cols", "avg_missing_rows", "avg_missing_cols"],
        [[n] + [_fmt(v) for v in c] for n, c in counts.items()]))
    atomic_write_text(out_dir / "schema_size.csv", _csv(
        ["sample_id", "table_name", "gold_col_count", "missing_col_count"],
        [[r.sample_id, r.table_name, r.gold_col_count, r.missing_col_count] for r in records]))
    summary = {
        "type": "analysis",
        "label": args.label or Path(args.pred).stem,
        "params": {"gold": str(args.gold), "pred": str(args.pred), "matcher": matcher.value,
                   "alias_file": aliases.source, "alias_file_sha256": aliases.digest},
        "missing_predictions": [s.id for s in gold if s.id not in preds],
        "error_counts": {n: dict(zip(("extra_rows", "extra_cols", "missing_rows", "missing_cols"), c))
                         for n, c in counts.items()},
    }
    atomic_write_text(out_dir / "analysis.json", _dump(summary))
    print(f"aligned {len(aligned)} samples -> {out_dir}")
    return 0


def cmd_diff(args) -> int:
    a = {s.id: s.gold for s in load_dataset(args.a, args.kind)}
    b = {s.id: s.gold for s in load_dataset(args.b, args.kind)}
    aliases = AliasTable.load(args.aliases) if args.aliases else default_aliases()
    total = DiffReport()
    for sid in list(a) + [k for k in b if k not in a]:
        total.add(diff_table_sets(a.get(sid, TableSet()), b.get(sid, TableSet()), aliases))
    report = {"type": "diff", "a": str(args.a), "b": str(args.b), "alias_file_sha256": aliases.digest,
              "samples_only_in_a": sorted(set(a) - set(b)), "samples_only_in_b": sorted(set(b) - set(a)),
              "tables": total.to_json()}
    text = _dump(report)
    if args.out:
        atomic_write_text(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# report

def _md_table(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
    return "\n".join(lines)


def _pct(x) -> str:
    return "-" if x is None else f"{100 * x:.2f}"


def _num(x, digits=2) -> str:
    return "-" if x is None else f"{x:.{digits}f}"


def render_report(reports: list[dict]) -> str:
    parts = []
    evals = [r for r in reports if r.get("type") == "evaluation"]
    cov = [r for r in evals if r["aggregate"].get("coverage")]
    if cov:
        labels = sorted({k for r in cov for k in r["aggregate"]["coverage"]})
        parts.append("## Coverage (F1, %)\n")
        for label in labels:
            rows = []
            for r in cov:
                levels = r["aggregate"]["coverage"].get(label)
                if levels is None:
                    continue
                rows.append([r["label"]] + [_pct((levels.get(lv) or {}).get("f1")) for lv in ("cell", "row", "col")])
            parts.append(f"### {label}\n\n" + _md_table(["run", "cell", "row", "col"], rows) + "\n")
    num = [r for r in evals if r["aggregate"].get("numeric")]
    if num:
        header = ["run"] + [f"{d.value} {m}" for d in Difficulty for m in ("RMSE", "ER")] + ["Avg RMSE", "Avg ER"]
        rows = []
        for r in num:
            n = r["aggregate"]["numeric"]
            row = [r["label"]]
            for d in Difficulty:
                s = n["per_difficulty"].get(d.value) or {}
                row += [_num(s.get("rmse")), _num(s.get("er"))]
            rows.append(row + [_num(n["rmse"]), _num(n["er"])])
        parts.append("## Counting error\n\n" + _md_table(header, rows) + "\n")
    judged = [r for r in evals if r["aggregate"].get("autoqa") or r["aggregate"].get("tabeval")]
    if judged:
        rows = []
        for r in judged:
            qa = r["aggregate"].get("autoqa") or {}
            te = r["aggregate"].get("tabeval") or {}
            rows.append([r["label"], _num(qa.get("accuracy_pct")), _pct(te.get("correctness")),
                         _pct(te.get("completeness")), _pct(te.get("overall"))])
        parts.append("## LLM-judged\n\n" + _md_table(
            ["run", "AutoQA %", "TabEval correctness", "TabEval completeness", "TabEval overall"], rows) + "\n")
    analyses = [r for r in reports if r.get("type") == "analysis"]
    if analyses:
        rows = []
        for r in analyses:
            for name, c in r["error_counts"].items():
                rows.append([r["label"], name, _num(c["extra_rows"]), _num(c["extra_cols"]),
                             _num(c["missing_rows"]), _num(c["missing_cols"])])
        parts.append("## Per-table error counts\n\n" + _md_table(
            ["run", "table", "extra rows", "extra cols", "missing rows", "missing cols"], rows) + "\n")
    diffs = [r for r in reports if r.get("type") == "diff"]
    for r in diffs:
        rows = [[name, c["hallucinated_rows"], c["missing_rows"], c["hallucinated_cols"], c["missing_cols"],
                 c["hallucinated_cells"], c["missing_cells"]] for name, c in r["tables"].items()]
        parts.append(f"## Version diff: {Path(r['a']).name} -> {Path(r['b']).name}\n\n" + _md_table(
            ["table", "rows H", "rows MI", "cols H", "cols MI", "cells H", "cells MI"], rows) + "\n")
    return "\n".join(parts) if parts else "(no reports)\n"


def cmd_report(args) -> int:
    reports = [json.loads(Path(p).read_text(encoding="utf-8")) for p in args.inputs]
    text = render_report(reports)
    if args.out:
        atomic_write_text(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_backend_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", help="replay:<dir>, http:<base_url>, or a JSON backend config file")
    p.add_argument("--model", help="override the backend config's model name")
    p.add_argument("--cache-dir", help="content-addressed response cache directory")
    p.add_argument("--parallel", type=int, default=4, help="max concurrent backend calls (default 4)")
    p.add_argument("--templates", help="prompt template directory (default: bundled prompts)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="text2table", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    kinds = [k.value for k in DatasetKind]

    g = sub.add_parser("generate", help="run a generation strategy over a dataset")
    g.add_argument("--dataset", required=True)
    g.add_argument("--kind", choices=kinds, default="generic")
    g.add_argument("--strategy", choices=[s.value for s in Strategy], required=True)
    g.add_argument("--ablate", default="", help="comma list of: atomization, iter-schema, iter-table")
    g.add_argument("--out", required=True, help="predictions JSONL")
    g.add_argument("--manifest", help="run manifest path (default: <out>.manifest.json)")
    g.add_argument("--limit", type=int)
    _add_backend_args(g)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("evaluate", help="score predictions against gold tables")
    e.add_argument("--gold", required=True)
    e.add_argument("--pred", required=True)
    e.add_argument("--kind", choices=kinds, default="generic")
    e.add_argument("--metrics", default="em,chrf", help=f"comma list from {','.join(ALL_METRICS)}")
    e.add_argument("--chrf-n", type=int, default=6)
    e.add_argument("--chrf-beta", type=float, default=2.0)
    e.add_argument("--qa-n", type=int, default=10)
    e.add_argument("--normalize-case", action="store_true")
    e.add_argument("--include-absent", action="store_true", help="score None cells as tuples too")
    e.add_argument("--aliases", help="header alias file for numeric alignment")
    e.add_argument("--allow-partial", action="store_true")
    e.add_argument("--label", help="run label used in rendered reports")
    e.add_argument("--out-dir", default="report")
    _add_backend_args(e)
    e.set_defaults(func=cmd_evaluate)

    a = sub.add_parser("analyze", help="align predictions onto gold headers and count structural errors")
    a.add_argument("--gold", required=True)
    a.add_argument("--pred", required=True)
    a.add_argument("--kind", choices=kinds, default="generic")
    a.add_argument("--matcher", choices=[m.value for m in Matcher], default="deterministic")
    a.add_argument("--aliases")
    a.add_argument("--label")
    a.add_argument("--out-dir", default="analysis")
    _add_backend_args(a)
    a.set_defaults(func=cmd_analyze)

    d = sub.add_parser("diff", help="count hallucinated and missing structure between two corpus versions")
    d.add_argument("--a", required=True, help="source version JSONL")
    d.add_argument("--b", required=True, help="target version JSONL")
    d.add_argument("--kind", choices=kinds, default="generic")
    d.add_argument("--aliases")
    d.add_argument("--out")
    d.set_defaults(func=cmd_diff)

    r = sub.add_parser("report", help="render report/analysis/diff JSON files as Markdown")
    r.add_argument("inputs", nargs="+")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        parser.error(str(exc))
    except (Text2TableError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
