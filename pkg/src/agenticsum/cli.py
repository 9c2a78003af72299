"""Command-line interface.

Subcommands:
    summarize  run documents through the pipeline, writing traces
    focus      compress documents only
    detect     score document/summary pairs
    eval       lexical metrics over hypothesis/reference pairs
    stats      paired-rating analysis producing a domain report

Inputs and outputs are JSONL (one record per line). Option precedence:
command-line flags > config file (key=value lines) > built-in defaults.
Exit codes: 0 success, 1 at least one record failed, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from agenticsum import trace as trace_mod
from agenticsum.backend.base import ModelBackend
from agenticsum.backend.mock import MockBackend
from agenticsum.backend.remote import RemoteBackend
from agenticsum.detector import detect_text
from agenticsum.errors import AgenticSumError, ConfigError
from agenticsum.focus import SCORER_NAMES, compress
from agenticsum.metrics import bleu_1, bleu_2, rouge_l
from agenticsum.segmentation import Document
from agenticsum.stats import (
    PairedRatings,
    binomial_dominance,
    correct_guess_accuracy,
    rank_biserial,
    wilcoxon_signed_rank,
)
from agenticsum.supervisor import Mode, PipelineConfig, run_pipeline

BACKEND_URL_ENV = "AGENTICSUM_BACKEND_URL"

_CONFIG_CASTS = {
    "r": float,
    "tau": float,
    "eps_conv": float,
    "eps_stab": float,
    "t_max": int,
    "mode": str,
    "scorer": str,
    "max_new_tokens": int,
    "temperature": float,
    "backend": str,
    "backend_url": str,
    "seed": int,
    "heads": int,
    "jobs": int,
}

_METRIC_NAMES = ("rouge", "bleu1", "bleu2")


# -- option resolution ----------------------------------------------------


def _load_config_file(path: str) -> dict:
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_CASTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_CASTS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}")
    return values


class _Options:
    """Flags > config file > defaults, resolved once per invocation."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        self._file = (
            _load_config_file(args.config) if getattr(args, "config", None) else {}
        )

    def get(self, key: str, default):
        flag = self._args.get(key)
        if flag is not None:
            return flag
        if key in self._file:
            return self._file[key]
        return default

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            r=self.get("r", 0.6),
            tau=self.get("tau", 0.5),
            eps_conv=self.get("eps_conv", 0.01),
            eps_stab=self.get("eps_stab", 1e-8),
            t_max=self.get("t_max", 3),
            mode=self.get("mode", Mode.FULL),
            scorer=self.get("scorer", "verbatim"),
            max_new_tokens=self.get("max_new_tokens", 256),
            temperature=self.get("temperature", 0.0),
        )

    def backend(self) -> ModelBackend:
        kind = self.get("backend", "mock")
        if kind == "mock":
            return MockBackend(
                seed=self.get("seed", 0), heads=self.get("heads", 4)
            )
        if kind == "remote":
            url = self.get("backend_url", os.environ.get(BACKEND_URL_ENV))
            if not url:
                raise ConfigError(
                    "remote backend needs --backend-url or "
                    f"the {BACKEND_URL_ENV} environment variable"
                )
            return RemoteBackend(url)
        raise ConfigError(f"unknown backend {kind!r}")

    def jobs(self) -> int:
        n = self.get("jobs", os.cpu_count() or 1)
        if n < 1:
            raise ConfigError(f"jobs must be positive, got {n}")
        return n


# -- jsonl ----------------------------------------------------------------


def read_jsonl(path: str) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}:{lineno}: invalid JSON: {exc}")
            if not isinstance(obj, dict):
                raise ConfigError(f"{path}:{lineno}: expected an object")
            records.append(obj)
    return records


def write_jsonl(path: str, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def _require(record: dict, key: str, path: str):
    if key not in record:
        raise KeyError(f"record in {path} is missing {key!r}")
    return record[key]


# -- subcommands ------------------------------------------------------------


def cmd_summarize(args: argparse.Namespace) -> int:
    opts = _Options(args)
    cfg = opts.pipeline_config()
    backend = opts.backend()
    records = read_jsonl(args.infile)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def run_one(record: dict) -> tuple[dict, dict | None]:
        doc_id = str(_require(record, "id", args.infile))
        doc = Document.from_text(doc_id, _require(record, "text", args.infile))
        result = run_pipeline(doc, cfg, backend)
        trace_dict = trace_mod.trace_to_dict(result)
        summary_row = {
            "id": doc_id,
            "summary": result.final_summary,
            "halt_reason": result.halt_reason.value,
            "iterations": len(result.states),
            "a_bar_final": result.states[-1].a_bar,
        }
        return summary_row, trace_dict

    rows = []
    failures = 0
    with ThreadPoolExecutor(max_workers=opts.jobs()) as pool:
        futures = [pool.submit(run_one, record) for record in records]
        for record, future in zip(records, futures):
            try:
                summary_row, trace_dict = future.result()
            except Exception as exc:  # per-record isolation
                failures += 1
                rows.append(
                    {"id": str(record.get("id", "?")), "error": str(exc)}
                )
                continue
            rows.append(summary_row)
            trace_path = out_dir / f"{summary_row['id']}.trace.json"
            trace_path.write_text(
                trace_mod.dumps(trace_dict) + "\n", encoding="utf-8"
            )
    write_jsonl(str(out_dir / "summaries.jsonl"), rows)
    print(f"summarize: {len(rows) - failures}/{len(rows)} documents ok")
    return 1 if failures else 0


def cmd_focus(args: argparse.Namespace) -> int:
    opts = _Options(args)
    backend = opts.backend()
    ratio = opts.get("r", 0.6)
    scorer = opts.get("scorer", "verbatim")
    records = read_jsonl(args.infile)
    rows = []
    failures = 0
    for record in records:
        try:
            doc_id = str(_require(record, "id", args.infile))
            doc = Document.from_text(doc_id, _require(record, "text", args.infile))
            comp = compress(doc, ratio, backend, scorer)
            rows.append(
                {
                    "id": doc_id,
                    "text": comp.text,
                    "kept": list(comp.kept_indices),
                    "scores": list(comp.scores),
                    "k": comp.k,
                }
            )
        except Exception as exc:
            failures += 1
            rows.append({"id": str(record.get("id", "?")), "error": str(exc)})
    write_jsonl(args.out, rows)
    return 1 if failures else 0


def cmd_detect(args: argparse.Namespace) -> int:
    opts = _Options(args)
    cfg = opts.pipeline_config()
    backend = opts.backend()
    records = read_jsonl(args.infile)
    rows = []
    failures = 0
    for record in records:
        try:
            doc_id = str(_require(record, "id", args.infile))
            doc = Document.from_text(
                doc_id, _require(record, "document", args.infile)
            )
            summary = _require(record, "summary", args.infile)
            spans, hset = detect_text(doc, summary, backend, cfg.tau)
            rows.append(
                {
                    "id": doc_id,
                    "spans": [
                        {
                            "text": s.text,
                            "a": s.a,
                            "h": s.h,
                            "flagged": s.flagged,
                            "problematic_spans": list(
                                s.verdict.problematic_spans
                            ),
                        }
                        for s in spans
                    ],
                    "hset": sorted(hset.identities),
                }
            )
        except Exception as exc:
            failures += 1
            rows.append({"id": str(record.get("id", "?")), "error": str(exc)})
    write_jsonl(args.out, rows)
    return 1 if failures else 0


def _metric_values(record: dict, metrics: list[str], path: str) -> dict:
    hyp = _require(record, "hypothesis", path)
    ref = _require(record, "reference", path)
    values: dict = {}
    if "rouge" in metrics:
        score = rouge_l(hyp, ref)
        values["rouge_l"] = {
            "precision": score.precision,
            "recall": score.recall,
            "f1": score.f1,
        }
    if "bleu1" in metrics:
        values["bleu1"] = bleu_1(hyp, ref)
    if "bleu2" in metrics:
        values["bleu2"] = bleu_2(hyp, ref)
    if "bertscore" in record:
        values["bertscore"] = float(record["bertscore"])
    return values


def _mean_std(values: list[float]) -> dict:
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return {"mean": mean, "std": std}


def cmd_eval(args: argparse.Namespace) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = [m for m in metrics if m not in _METRIC_NAMES]
    if unknown:
        raise ConfigError(
            f"unknown metrics {unknown}, expected subset of {_METRIC_NAMES}"
        )
    records = read_jsonl(args.infile)
    rows = []
    failures = 0
    columns: dict[str, list[float]] = {}
    for record in records:
        try:
            values = _metric_values(record, metrics, args.infile)
        except Exception as exc:
            failures += 1
            rows.append({"id": str(record.get("id", "?")), "error": str(exc)})
            continue
        row = {"id": str(record.get("id", "?")), **values}
        rows.append(row)
        for name, value in values.items():
            if isinstance(value, dict):
                columns.setdefault(f"{name}_f1", []).append(value["f1"])
            else:
                columns.setdefault(name, []).append(value)
    if args.out:
        write_jsonl(args.out, rows)
    report = {
        name: _mean_std(values) for name, values in sorted(columns.items())
    }
    print(json.dumps({"corpus": report, "n": len(records)}, sort_keys=True))
    return 1 if failures else 0


def _format_p(p: float) -> str:
    return "<0.001" if p < 0.001 else f"{p:.3f}"


def _read_ratings(path: str) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {
            "rater_id",
            "domain",
            "vanilla_severity",
            "agentic_severity",
            "correct_guess",
        }
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ConfigError(
                f"{path}: ratings CSV needs columns {sorted(required)}"
            )
        return list(reader)


def _truthy(value: str) -> bool:
    return value.strip().casefold() in {"1", "true", "yes", "y"}


def cmd_stats(args: argparse.Namespace) -> int:
    rows = _read_ratings(args.ratings)
    by_domain: dict[str, list[dict]] = {}
    for row in rows:
        by_domain.setdefault(row["domain"], []).append(row)

    report = []
    for domain in sorted(by_domain):
        group = by_domain[domain]
        pairs = PairedRatings(
            pairs=tuple(
                (float(r["vanilla_severity"]), float(r["agentic_severity"]))
                for r in group
            ),
            domain=domain,
        )
        correct = sum(1 for r in group if _truthy(r["correct_guess"]))
        n = len(group)
        wilcoxon = wilcoxon_signed_rank(pairs, alternative="greater")
        entry = {
            "domain": domain,
            "n": n,
            "correct_guess_accuracy": correct_guess_accuracy(correct, n),
            "mean_vanilla": statistics.fmean(
                float(r["vanilla_severity"]) for r in group
            ),
            "mean_agentic": statistics.fmean(
                float(r["agentic_severity"]) for r in group
            ),
            "wilcoxon_w": wilcoxon.w,
            "wilcoxon_p": wilcoxon.p,
            "rank_biserial": rank_biserial(pairs),
            "dominance_p": binomial_dominance(correct, n),
        }
        report.append(entry)

    header = (
        f"{'domain':<12} {'n':>3} {'acc%':>6} {'mean_v':>7} {'mean_a':>7} "
        f"{'r_rb':>6} {'wilcoxon_p':>10} {'dominance_p':>11}"
    )
    print(header)
    for e in report:
        print(
            f"{e['domain']:<12} {e['n']:>3} {e['correct_guess_accuracy']:>6.1f} "
            f"{e['mean_vanilla']:>7.2f} {e['mean_agentic']:>7.2f} "
            f"{e['rank_biserial']:>6.3f} {_format_p(e['wilcoxon_p']):>10} "
            f"{_format_p(e['dominance_p']):>11}"
        )
    if args.out:
        Path(args.out).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return 0


# -- parser -----------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=("mock", "remote"), default=None)
    parser.add_argument(
        "--backend-url",
        dest="backend_url",
        default=None,
        help=f"remote backend base URL (falls back to ${BACKEND_URL_ENV})",
    )
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--heads", type=int, default=None)
    parser.add_argument("--config", default=None, help="key=value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agenticsum",
        description="Attention-guided summarization with span repair",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("summarize", help="run the refinement pipeline")
    _add_common(p)
    p.add_argument("--in", dest="infile", required=True, help="JSONL {id, text}")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--eps-conv", dest="eps_conv", type=float, default=None)
    p.add_argument("--eps-stab", dest="eps_stab", type=float, default=None)
    p.add_argument("--t-max", dest="t_max", type=int, default=None)
    p.add_argument("--scorer", choices=SCORER_NAMES, default=None)
    p.add_argument(
        "--max-new-tokens", dest="max_new_tokens", type=int, default=None
    )
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("focus", help="compress documents only")
    _add_common(p)
    p.add_argument("--in", dest="infile", required=True, help="JSONL {id, text}")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--scorer", choices=SCORER_NAMES, default=None)
    p.set_defaults(func=cmd_focus)

    p = sub.add_parser("detect", help="score document/summary pairs")
    _add_common(p)
    p.add_argument(
        "--in", dest="infile", required=True, help="JSONL {id, document, summary}"
    )
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--tau", type=float, default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="lexical metrics")
    p.add_argument(
        "--in",
        dest="infile",
        required=True,
        help="JSONL {id, hypothesis, reference}",
    )
    p.add_argument("--out", default=None, help="optional per-record JSONL")
    p.add_argument(
        "--metrics", default="rouge,bleu1,bleu2", help="comma-separated subset"
    )
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="paired-rating analysis")
    p.add_argument("--ratings", required=True, help="ratings CSV")
    p.add_argument("--out", default=None, help="optional JSON report path")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AgenticSumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
