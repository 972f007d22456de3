"""Command-line pipelines: generate, parse, decode, eval, simulate, show-config.

Exit codes: 0 success (per-record problems are reported on stderr),
1 configuration or usage error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import config as cfgmod
from . import grammar, ingest
from .core import Diagnostic, RefinementSequence, TimeSegment
from .decode import DecodeError, DecodeStrategy, decode_with_flag
from .metrics import EvalPair, build_report, format_table
from .seqgen import generate_dataset
from .simulate import PredictorModel, run_study, synthetic_samples

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _eprint(*args):
    print(*args, file=sys.stderr)


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\r\n") for line in fh]


def _read_jsonl_records(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(json.loads(line))
    return out


def _write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def _load_aux(path) -> list[Optional[tuple[float, float]]]:
    aux = []
    for rec in _read_jsonl_records(path):
        seg = rec.get("segment") if isinstance(rec, dict) else rec
        aux.append(None if seg is None else (float(seg[0]), float(seg[1])))
    return aux


def _config(args, **overrides):
    over = {k: v for k, v in overrides.items() if v is not None}
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    return cfgmod.load(getattr(args, "config", None), over)


def cmd_generate(args) -> int:
    seqgen_over = {"variant": args.variant} if args.variant else {}
    cfg = _config(args, seqgen=seqgen_over or None, workers=args.workers)
    in_path = args.input or cfg.paths.get("input")
    out_path = args.out or cfg.paths.get("output")
    fmt = args.input_format or cfg.paths.get("input_format", "jsonl")
    dur_path = args.durations or cfg.paths.get("durations")
    if not in_path or not out_path:
        raise UsageError("generate needs --input and --out (or paths.input/paths.output in the config)")
    if fmt not in ("jsonl", "charades", "anet"):
        raise UsageError(f"unknown input format {fmt!r}")

    durations = ingest.load_durations(dur_path) if dur_path else None
    read_diags: list[Diagnostic] = []
    samples = list(ingest.read_any(in_path, fmt, durations, read_diags))
    skipped: list[Diagnostic] = []
    n = clamped = 0
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        for ts in generate_dataset(samples, cfg.seqgen, workers=cfg.workers, skipped=skipped):
            rec = {
                "video_id": ts.sample.video.video_id,
                "query": ts.sample.query,
                "answer_text": ts.answer_text,
                "target": [ts.sample.target.start_s, ts.sample.target.end_s],
                "steps": ts.sequence.as_lists(),
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            n += 1
            clamped += ts.sequence.clamped
    for d in read_diags:
        _eprint(f"input {d.location}: {d.message}")
    for d in skipped:
        _eprint(f"record {d.location}: skipped ({d.message})")
    read_skips = sum(d.skipped for d in read_diags)
    _eprint(f"generated {n} samples; skipped {read_skips} input lines and {len(skipped)} records; "
            f"{clamped} sequences clamped")
    return EXIT_OK


def _outcome_record(i: int, out: grammar.ParseOutcome) -> dict:
    return {
        "line": i,
        "sequences": [s.as_lists() for s in out.sequences],
        "diagnostics": [[d.location, d.message] for d in out.diagnostics],
        "unparsed_spans": [list(sp) for sp in out.unparsed_spans],
    }


def cmd_parse(args) -> int:
    texts = _read_lines(args.input)
    records = [_outcome_record(i, grammar.parse(t)) for i, t in enumerate(texts)]
    _write_jsonl(args.out, records)
    failed = sum(1 for r in records if not r["sequences"])
    _eprint(f"parsed {len(records)} lines; {failed} without a valid block")
    return EXIT_OK


def _strategy(args, cfg) -> DecodeStrategy:
    if args.strategy:
        try:
            return DecodeStrategy.parse(args.strategy)
        except ValueError as exc:
            raise cfgmod.ConfigError(str(exc)) from exc
    return cfg.strategy


def _decode_first(seqs: list[RefinementSequence], strategy, aux):
    if not seqs:
        raise DecodeError("no parsed sequence")
    return decode_with_flag(seqs[0], strategy, aux)


def cmd_decode(args) -> int:
    cfg = _config(args)
    strategy = _strategy(args, cfg)
    parsed = _read_jsonl_records(args.input)
    aux = _load_aux(args.aux) if args.aux else [None] * len(parsed)
    if len(aux) != len(parsed):
        raise UsageError(f"--aux has {len(aux)} records but --in has {len(parsed)}")
    out, errors = [], 0
    for rec, a in zip(parsed, aux):
        seqs = [RefinementSequence.from_lists(s) for s in rec.get("sequences", [])]
        entry = {"line": rec.get("line"), "segment": None, "adjusted": False, "error": None}
        try:
            seg, adjusted = _decode_first(seqs, strategy, a)
            entry.update(segment=[seg.start_s, seg.end_s], adjusted=adjusted)
            if len(seqs) > 1:
                entry["error"] = f"{len(seqs)} blocks; decoded the first"
        except DecodeError as exc:
            entry["error"] = str(exc)
            errors += 1
        out.append(entry)
    _write_jsonl(args.out, out)
    _eprint(f"decoded {len(out) - errors} of {len(out)} records with {strategy.name}; {errors} errors")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _config(args)
    strategy = _strategy(args, cfg)
    preds = _read_lines(args.pred)
    gts = list(ingest.read_jsonl(args.gt))
    if len(preds) != len(gts):
        raise UsageError(f"{len(preds)} prediction lines but {len(gts)} ground-truth records")
    aux = _load_aux(args.aux) if args.aux else [None] * len(preds)
    if strategy.needs_aux and not args.aux:
        raise UsageError(f"strategy {strategy.name} needs --aux predictions")
    if len(aux) != len(preds):
        raise UsageError(f"--aux has {len(aux)} records but --pred has {len(preds)}")
    pairs, multi = [], 0
    for text, gt, a in zip(preds, gts, aux):
        seqs = grammar.parse(text).sequences
        multi += len(seqs) > 1
        try:
            pred: Optional[TimeSegment] = _decode_first(seqs, strategy, a)[0]
        except DecodeError:
            pred = None
        pairs.append(EvalPair(pred, gt.target))
    if not pairs:
        raise UsageError("nothing to evaluate")
    report = build_report(pairs)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    print(format_table({strategy.name: report}))
    if multi:
        _eprint(f"{multi} predictions held several blocks; the first was scored")
    _eprint(f"evaluated {report.n} pairs; failure rate {report.failure_rate:.3f}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    model = cfg.predictor
    if args.model_config:
        with open(args.model_config, encoding="utf-8") as fh:
            mc = json.load(fh)
        unknown = set(mc) - {"step_error_stds", "offset_error_stds", "seed"}
        if unknown:
            raise cfgmod.ConfigError(f"unknown model-config key {sorted(unknown)[0]!r}")
        try:
            model = PredictorModel(
                tuple(mc.get("step_error_stds", model.step_error_stds)),
                tuple(mc.get("offset_error_stds", model.offset_error_stds)),
                int(mc.get("seed", cfg.seed)) if args.seed is None else cfg.seed,
            )
        except (TypeError, ValueError) as exc:
            raise cfgmod.ConfigError(str(exc)) from exc
    try:
        strategies = [DecodeStrategy.parse(s) for s in args.strategies.split(",") if s.strip()]
    except ValueError as exc:
        raise cfgmod.ConfigError(str(exc)) from exc
    if not strategies:
        raise UsageError("--strategies is empty")
    if args.gt:
        samples = list(ingest.read_jsonl(args.gt))
    else:
        samples = synthetic_samples(args.synthetic, seed=cfg.seed)
    if not samples:
        raise UsageError("no samples to simulate")
    reports = run_study(samples, model, strategies, workers=cfg.workers)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({k: r.to_dict() for k, r in reports.items()}, fh, indent=2)
            fh.write("\n")
    print(format_table(reports))
    return EXIT_OK


def cmd_show_config(args) -> int:
    cfg = _config(args)
    print(json.dumps(cfg.raw, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="timerefine", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--seed", type=int, help=f"overrides the config and ${cfgmod.SEED_ENV}")

    g = sub.add_parser("generate", help="ground-truth annotations -> refinement training samples")
    common(g)
    g.add_argument("--input")
    g.add_argument("--input-format", choices=["jsonl", "charades", "anet"])
    g.add_argument("--durations", help="JSON {video_id: seconds} sidecar for Charades-STA")
    g.add_argument("--variant", choices=["offset_prediction", "iou_prediction", "no_refinement"])
    g.add_argument("--workers", type=int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    pa = sub.add_parser("parse", help="raw model outputs (one per line) -> parsed JSONL")
    pa.add_argument("--in", dest="input", required=True)
    pa.add_argument("--out", required=True)
    pa.set_defaults(func=cmd_parse)

    d = sub.add_parser("decode", help="parsed JSONL -> decoded segments JSONL")
    common(d)
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--strategy")
    d.add_argument("--aux", help="JSONL of auxiliary-head segments, aligned with --in")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_decode)

    e = sub.add_parser("eval", help="score raw model outputs against ground truth")
    common(e)
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--strategy")
    e.add_argument("--aux")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("simulate", help="compare decode strategies on a synthetic predictor")
    common(s)
    s.add_argument("--gt", help="ground-truth JSONL; synthetic samples are used when omitted")
    s.add_argument("--synthetic", type=int, default=10000)
    s.add_argument("--model-config")
    s.add_argument("--strategies", default="first_step,last_step,aux_head,merged")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("show-config", help="print the effective configuration")
    common(c)
    c.set_defaults(func=cmd_show_config)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (cfgmod.ConfigError, UsageError) as exc:
        _eprint(f"error: {exc}")
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        _eprint(f"I/O error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
