"""Batch command-line front end.

Subcommands: process, evaluate, aggregate, synth, factors, config.
All output files are written atomically (temp file + rename).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import factors as factors_mod
from . import ingest, pipeline, synth
from .core import FC, IC, GaitPipeError
from .evaluate import (
    compute_metrics,
    match_events,
    metrics_to_json,
    summary_to_json,
    temporal_errors,
    two_stage_aggregate,
)
from .pipeline import PipelineConfig


def write_json_atomic(doc, path) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_config(path) -> PipelineConfig:
    return PipelineConfig.load(path) if path else PipelineConfig()


def cmd_process(args) -> int:
    config = _load_config(args.config)
    rec = ingest.load_recording(args.recording)
    if len(rec.t) < 2:
        raise GaitPipeError("recording too short to process")
    result = pipeline.process_recording(rec, config)
    write_json_atomic(pipeline.events_to_json(result.events), args.out_events)
    write_json_atomic(pipeline.segments_to_json(result.segments), args.out_segments)
    skipped = [b for b in result.bouts if b.skipped_reason]
    for b in skipped:
        print(f"bout {b.start_s:.2f}-{b.end_s:.2f} s skipped: {b.skipped_reason}",
              file=sys.stderr)
    print(f"{len(result.events)} events in "
          f"{sum(1 for b in result.bouts if not b.skipped_reason)} bouts")
    return 0


def cmd_evaluate(args) -> int:
    with open(args.events, "r", encoding="utf-8") as fh:
        detected = pipeline.events_from_json(json.load(fh))
    reference = ingest.load_reference_events(args.reference)
    out = {"window_s": args.window, "participant": args.participant}
    for kind in (IC, FC):
        det = sorted(e.time_s for e in detected if e.kind == kind)
        ref = sorted(e.time_s for e in reference if e.kind == kind)
        report = match_events(det, ref, window_s=args.window, kind=kind)
        metrics = compute_metrics(report)
        errors = temporal_errors(report) if report.tp else None
        out[kind] = metrics_to_json(kind, metrics, errors)
    write_json_atomic(out, args.out)
    for kind in (IC, FC):
        print(f"{kind}: f1={out[kind]['f1']}")
    return 0


def cmd_aggregate(args) -> int:
    per_kind: dict[str, dict[str, list[float]]] = {IC: {}, FC: {}}
    for path in args.metrics:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        pid = doc.get("participant")
        if pid is None:
            raise GaitPipeError(f"{path}: metrics file lacks a participant id")
        for kind in (IC, FC):
            value = doc.get(kind, {}).get(args.metric)
            if value is None:
                continue
            per_kind[kind].setdefault(str(pid), []).append(float(value))
    out = {"metric": args.metric, "two_stage": args.two_stage}
    for kind in (IC, FC):
        groups = per_kind[kind]
        if not groups:
            out[kind] = None
            continue
        if args.two_stage:
            summary = two_stage_aggregate(groups)
        else:
            from .evaluate import aggregate_across
            values = [v for vals in groups.values() for v in vals]
            summary = aggregate_across(values)
        out[kind] = summary_to_json(summary)
    write_json_atomic(out, args.out)
    print(f"aggregated {sum(len(v) for k in per_kind.values() for v in k.values())} "
          f"values from {len(args.metrics)} files")
    return 0


def _synth_config_from_json(doc: dict) -> synth.SynthConfig:
    known = {"duration_s", "sample_rate_hz", "stride_s", "ic_phase", "fc_phase",
             "vertical_amp", "ap_amp", "yaw_amp", "noise_sigma",
             "sensor_rotation", "script", "seed"}
    unknown = set(doc) - known
    if unknown:
        raise GaitPipeError(f"unknown synth config keys: {sorted(unknown)}")
    kwargs = dict(doc)
    if "sensor_rotation" in kwargs:
        q = np.asarray(kwargs["sensor_rotation"], dtype=float)
        kwargs["sensor_rotation"] = q / np.linalg.norm(q)
    if "script" in kwargs and kwargs["script"] is not None:
        kwargs["script"] = [
            synth.Phase(kind=p["kind"], duration_s=float(p["duration_s"]),
                        angle_deg=float(p.get("angle_deg", 0.0)))
            for p in kwargs["script"]
        ]
    return synth.SynthConfig(**kwargs)


def cmd_synth(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = _synth_config_from_json(json.load(fh))
    else:
        cfg = synth.SynthConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    rec, events, segments, _turns = synth.generate(cfg)
    ingest.write_recording(rec, args.out_recording)
    ingest.write_reference_events(events, args.out_events)
    write_json_atomic(pipeline.segments_to_json(segments), args.out_segments)
    print(f"wrote {len(rec.t)} samples, {len(events)} events")
    return 0


def cmd_factors(args) -> int:
    data = factors_mod.load_factor_table(args.table)
    result = factors_mod.sample_posterior(
        data, n_draws=args.draws, n_warmup=args.warmup, seed=args.seed,
        n_chains=args.chains, prior_scale=args.prior_scale)
    summaries = factors_mod.contrasts(result)
    doc = {
        "n_observations": len(data),
        "n_subjects": result.n_sub,
        "accept_rates": result.accept_rates,
        "max_rhat": result.max_rhat,
        "contrasts": [s.to_json() for s in summaries],
    }
    write_json_atomic(doc, args.out)
    for s in summaries:
        print(f"{s.name}: mean={s.mean:.3f} median={s.median:.3f} "
              f"std={s.std:.3f}")
    return 0


def cmd_config(args) -> int:
    if args.print_defaults:
        json.dump(PipelineConfig().to_json(), sys.stdout, indent=2)
        print()
        return 0
    print("nothing to do; use --print-defaults", file=sys.stderr)
    return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaitpipe",
        description="Placement-agnostic smartphone gait event detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="detect gait events in a recording CSV")
    p.add_argument("recording")
    p.add_argument("--config")
    p.add_argument("--out-events", default="events.json")
    p.add_argument("--out-segments", default="segments.json")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("evaluate", help="score detected events against a reference")
    p.add_argument("events")
    p.add_argument("reference")
    p.add_argument("--window", type=float, default=0.5)
    p.add_argument("--participant")
    p.add_argument("--out", default="metrics.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("aggregate", help="aggregate metrics files across participants")
    p.add_argument("metrics", nargs="+")
    p.add_argument("--metric", default="f1")
    p.add_argument("--two-stage", action="store_true")
    p.add_argument("--out", default="summary.json")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("synth", help="generate a synthetic recording with ground truth")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-recording", default="recording.csv")
    p.add_argument("--out-events", default="events_truth.csv")
    p.add_argument("--out-segments", default="segments_truth.json")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("factors", help="fit the beta-regression factor model")
    p.add_argument("table")
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--warmup", type=int, default=1000)
    p.add_argument("--chains", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prior-scale", type=float,
                   default=factors_mod.DEFAULT_PRIOR_SCALE)
    p.add_argument("--out", default="posterior.json")
    p.set_defaults(func=cmd_factors)

    p = sub.add_parser("config", help="configuration helpers")
    p.add_argument("--print-defaults", action="store_true")
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GaitPipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
