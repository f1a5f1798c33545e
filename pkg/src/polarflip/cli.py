"""Command-line interface.

Subcommands: ``simulate`` (config-driven Monte Carlo sweeps), ``memory``
(bit-exact footprint table), ``latency`` (closed-form vs counted single-pass
cycles), ``conformance`` (restart-mechanism equivalence checks), and
``reproduce`` (the published FER curves, execution-time reduction tables, and
memory table).

Exit codes: 0 success, 2 configuration error, 3 conformance failure, 4 I/O
error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import reference
from .codes import make_code_spec
from .config import (ConfigError, apply_overrides, build_plans, describe_keys,
                     load_config, resolve_workers)
from .flip_decoder import DecoderConfig
from .perf_model import memory_footprint
from .sc_engine import DecoderWorkspace, lsc_closed_form, sc_pass, scheduled_cycles
from .sim_harness import (ExperimentPlan, PairedEquivalenceError, run_point,
                          run_sweep, write_results_csv)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONFORMANCE = 3
EXIT_IO = 4


class ConformanceFailure(RuntimeError):
    pass


def _reference_spec(code_label: str):
    try:
        code = reference.CODES[code_label]
    except KeyError:
        raise ConfigError(
            f"unknown code {code_label!r}; choose from {sorted(reference.CODES)}")
    return make_code_spec(code["N"], code["k"], reference.CRC_BITS,
                          code["design_ebno_db"], label=code_label)


def _reference_decoder(spec, decoder_label: str, srm: bool = False) -> DecoderConfig:
    try:
        dec = reference.DECODERS[decoder_label]
    except KeyError:
        raise ConfigError(
            f"unknown decoder {decoder_label!r}; choose from {sorted(reference.DECODERS)}")
    return DecoderConfig(spec=spec, algorithm=dec["algorithm"], t_max=dec["t_max"],
                         omega=dec["omega"], srm_enabled=srm,
                         pe_count=reference.PE_COUNT)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# --------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    apply_overrides(config, args.override)
    plans = build_plans(config, cli_workers=args.workers,
                        paired=True if args.paired else None)
    os.makedirs(args.output, exist_ok=True)

    manifest = {
        "subcommand": "simulate",
        "config": os.path.abspath(args.config),
        "output": os.path.abspath(args.output),
        "overrides": list(args.override or ()),
        "resolved": config,
    }
    print(json.dumps(manifest, indent=2))
    manifest_path = os.path.join(args.output, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)

    all_results = []
    frame_log = open(args.frame_log, "w") if args.frame_log else None
    try:
        for name, plan in plans:
            checkpoint = (os.path.join(args.output, f"checkpoint_{name}.json")
                          if args.checkpoint else None)
            if frame_log is not None:
                for ebno in plan.ebno_points:
                    all_results.append(run_point(plan, ebno, frame_log=frame_log))
            else:
                all_results.extend(run_sweep(plan, checkpoint_path=checkpoint))
    finally:
        if frame_log is not None:
            frame_log.close()

    results_path = os.path.join(args.output, "results.csv")
    write_results_csv(results_path, all_results)
    for result in all_results:
        for row in result.rows:
            extra = " censored" if result.censored else ""
            print(f"{row.code} {row.decoder} srm={'on' if row.srm else 'off'} "
                  f"{row.ebno_db:g} dB: fer={row.fer:.4e} "
                  f"frames={row.frames} avg_exec={row.avg_exec:.1f}{extra}")
    print(f"results written to {results_path}")
    return EXIT_OK


# --------------------------------------------------------------------------
# memory


def _memory_rows(extra=None):
    rows = []
    for ref in reference.MEMORY_REFERENCE:
        plain = memory_footprint(ref.N, ref.t_max, ref.omega, srm=False)
        with_restart = memory_footprint(ref.N, ref.t_max, ref.omega, srm=True)
        rows.append([ref.decoder, ref.N, ref.t_max, ref.omega,
                     plain.total_bits, with_restart.total_bits,
                     round(with_restart.overhead_percent, 2)])
    if extra:
        n, tmax, omega = extra
        plain = memory_footprint(n, tmax, omega, srm=False)
        with_restart = memory_footprint(n, tmax, omega, srm=True)
        rows.append(["custom", n, tmax, omega, plain.total_bits,
                     with_restart.total_bits,
                     round(with_restart.overhead_percent, 2)])
    return rows


def cmd_memory(args) -> int:
    extra = None
    if args.n is not None:
        if args.tmax is None or args.omega is None:
            raise ConfigError("--n requires --tmax and --omega")
        extra = (args.n, args.tmax, args.omega)
    rows = _memory_rows(extra)
    header = ["decoder", "N", "tmax", "omega", "bits", "bits_with_restart",
              "overhead_pct"]
    widths = [8, 6, 6, 6, 8, 18, 13]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        print("  ".join(str(v).ljust(w) for v, w in zip(row, widths)))
    if args.csv:
        _write_csv(args.csv, header, rows)
        print(f"csv written to {args.csv}")
    return EXIT_OK


# --------------------------------------------------------------------------
# latency


def _latency_pairs(n_values, p_values):
    for N in n_values:
        for P in p_values:
            if 4 * P <= N:
                yield N, P


def cmd_latency(args) -> int:
    n_values = args.n or [8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096]
    p_values = args.pe or [2, 4, 8, 16, 32, 64, 128, 256]
    rows = []
    mismatch = False
    for N, P in _latency_pairs(n_values, p_values):
        closed = lsc_closed_form(N, P)
        counted = scheduled_cycles(N, P, "full")
        spec = make_code_spec(N, max(N // 2 - reference.CRC_BITS, 1),
                              design_ebno_db=1.0)
        measured = sc_pass(np.ones(N), spec, pe_count=P).cycles
        restart = scheduled_cycles(N, P, "midpoint")
        ok = closed == counted == measured
        mismatch |= not ok
        rows.append([N, P, closed, counted, measured, restart,
                     "ok" if ok else "MISMATCH"])
    header = ["N", "P", "closed_form", "schedule", "measured", "restart", "check"]
    print("  ".join(h.ljust(11) for h in header))
    for row in rows:
        print("  ".join(str(v).ljust(11) for v in row))
    if args.csv:
        _write_csv(args.csv, header, rows)
    if mismatch:
        raise ConformanceFailure("cycle counter disagrees with the closed form")
    return EXIT_OK


# --------------------------------------------------------------------------
# conformance


def _half_rate_spec(N):
    k_total = max(1, N // 2)
    crc = reference.CRC_BITS if k_total > reference.CRC_BITS else 0
    return make_code_spec(N, k_total - crc, crc, design_ebno_db=1.25)


def _check_midpoint_equivalence(frames: int, seed: int) -> int:
    """Full pass vs midpoint restart on random frames with right-half flips."""
    failures = 0
    for N in (8, 64, 1024):
        rng = np.random.default_rng(seed + N)
        spec = _half_rate_spec(N)
        ws = DecoderWorkspace(N)
        rhs_info = spec.info_set[spec.info_set >= N // 2]
        for _ in range(frames):
            alpha = rng.normal(size=N) * 4.0
            flips = tuple(sorted(rng.choice(rhs_info, size=min(2, rhs_info.size),
                                            replace=False).tolist()))
            base = sc_pass(alpha, spec, workspace=ws)
            full = sc_pass(alpha, spec, flip_set=flips, workspace=ws)
            mid = sc_pass(alpha, spec, flip_set=flips, start="midpoint",
                          snapshot=base.snapshot, workspace=ws)
            if not (np.array_equal(full.u_hat, mid.u_hat)
                    and np.array_equal(full.alpha_dec[N // 2:],
                                       mid.alpha_dec[N // 2:])
                    and mid.cycles < full.cycles):
                failures += 1
    return failures


def cmd_conformance(args) -> int:
    failures = _check_midpoint_equivalence(args.frames // 10 or 1, args.seed)
    print(f"midpoint equivalence: {'ok' if failures == 0 else f'{failures} failures'}")

    spec = _reference_spec(args.code)
    decoder = _reference_decoder(spec, args.decoder)
    plan = ExperimentPlan(code=spec, decoder=decoder, ebno_points=[args.ebno_db],
                          min_frames=args.frames, min_frame_errors=0,
                          max_frames=args.frames, seed=args.seed,
                          paired_mode=True, workers=resolve_workers(0, args.workers))
    result = run_point(plan, args.ebno_db)
    print(f"paired decode {args.code}/{args.decoder} at {args.ebno_db:g} dB: "
          f"{result.paired.frames_compared} frames, "
          f"{len(result.paired.mismatches)} mismatches")
    if failures:
        raise ConformanceFailure("midpoint restart diverged from the full pass")
    return EXIT_OK


# --------------------------------------------------------------------------
# reproduce


def _delta_pct(off, on):
    if off is None or on is None or off == 0:
        return None
    return 100.0 * (off - on) / off


def _reduction_scenario(args, code_label: str) -> int:
    decoders = [args.decoder] if args.decoder else sorted(reference.DECODERS)
    rows = []
    for dec_label in decoders:
        ref = reference.EXEC_REDUCTIONS[(code_label, dec_label)]
        ebno = args.ebno_db if args.ebno_db is not None else ref.ebno_db
        spec = _reference_spec(code_label)
        decoder = _reference_decoder(spec, dec_label)
        plan = ExperimentPlan(code=spec, decoder=decoder, ebno_points=[ebno],
                              min_frames=args.frames, min_frame_errors=0,
                              max_frames=args.frames, seed=args.seed,
                              paired_mode=True,
                              workers=resolve_workers(0, args.workers))
        result = run_point(plan, ebno)
        off, on = result.rows
        rows.append([code_label, dec_label, f"{ebno:g}",
                     f"{_delta_pct(off.avg_exec, on.avg_exec):.2f}",
                     f"{_delta_pct(off.avg_add_exec, on.avg_add_exec):.2f}",
                     f"{_delta_pct(off.var_exec, on.var_exec):.2f}",
                     f"{ref.avg_exec_pct:.2f}", f"{ref.avg_additional_pct:.2f}",
                     f"{ref.variance_pct:.2f}", str(off.frames), f"{off.fer:.4e}"])
    header = ["code", "decoder", "ebno_db", "d_avg_pct", "d_add_pct", "d_var_pct",
              "ref_avg_pct", "ref_add_pct", "ref_var_pct", "frames", "fer"]
    print("  ".join(header))
    for row in rows:
        print("  ".join(row))
    out = os.path.join(args.output, f"{args.scenario}.csv")
    _write_csv(out, header, rows)
    print(f"csv written to {out}")
    return EXIT_OK


def _fer_scenario(args) -> int:
    decoders = [args.decoder] if args.decoder else sorted(reference.DECODERS)
    spec = _reference_spec(args.code)
    rows = []
    for dec_label in decoders:
        curve = dict(reference.FER_REFERENCE.get(dec_label, ()))
        points = [args.ebno_db] if args.ebno_db is not None else sorted(curve)
        decoder = _reference_decoder(spec, dec_label)
        plan = ExperimentPlan(code=spec, decoder=decoder, ebno_points=points,
                              min_frames=args.frames, min_frame_errors=0,
                              max_frames=args.frames, seed=args.seed,
                              paired_mode=True,
                              workers=resolve_workers(0, args.workers))
        for result in run_sweep(plan):
            off, on = result.rows
            ref_fer = curve.get(result.ebno_db, "")
            rows.append([dec_label, f"{result.ebno_db:g}", f"{off.fer:.6e}",
                         f"{on.fer:.6e}",
                         f"{ref_fer:.6e}" if ref_fer != "" else "",
                         f"{off.avg_exec:.2f}", f"{on.avg_exec:.2f}",
                         str(off.frames)])
            print(f"{dec_label} {result.ebno_db:g} dB: fer={off.fer:.4e} "
                  f"(reference {ref_fer if ref_fer != '' else 'n/a'}) "
                  f"avg_exec {off.avg_exec:.1f} -> {on.avg_exec:.1f}")
    header = ["decoder", "ebno_db", "fer", "fer_with_restart", "fer_reference",
              "avg_exec", "avg_exec_with_restart", "frames"]
    out = os.path.join(args.output, f"{args.scenario}.csv")
    _write_csv(out, header, rows)
    print(f"csv written to {out}")
    return EXIT_OK


def _table3_scenario(args) -> int:
    rows = _memory_rows()
    header = ["decoder", "N", "tmax", "omega", "bits", "bits_with_restart",
              "overhead_pct"]
    bad = []
    for row, ref in zip(rows, reference.MEMORY_REFERENCE):
        ok = (row[4] == ref.bits_plain and row[5] == ref.bits_with_restart
              and abs(row[6] - ref.overhead_pct) < 0.005)
        print(f"{ref.decoder:6s} N={ref.N:5d}: {row[4]:6d} -> {row[5]:6d} "
              f"(+{row[6]:.2f}%) reference {ref.bits_plain} -> "
              f"{ref.bits_with_restart} (+{ref.overhead_pct:.2f}%) "
              f"{'ok' if ok else 'MISMATCH'}")
        if not ok:
            bad.append(ref)
    out = os.path.join(args.output, "table3.csv")
    _write_csv(out, header, rows)
    print(f"csv written to {out}")
    if bad:
        raise ConformanceFailure(f"{len(bad)} memory rows disagree with the reference")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    os.makedirs(args.output, exist_ok=True)
    if args.scenario == "table3":
        return _table3_scenario(args)
    if args.scenario == "table1":
        return _reduction_scenario(args, args.code)
    if args.scenario == "table2":
        return _reduction_scenario(args, "P512_64")
    if args.scenario in ("fig3", "fig4"):
        return _fer_scenario(args)
    raise ConfigError(f"unknown scenario {args.scenario!r}")


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarflip",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser(
        "simulate", help="run the sweeps described by a config file",
        epilog="config keys:\n" + describe_keys(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p_sim.add_argument("--config", required=True, help="TOML experiment config")
    p_sim.add_argument("--output", default=".", help="output directory")
    p_sim.add_argument("--paired", action="store_true",
                       help="decode each frame with restart off and on")
    p_sim.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
    p_sim.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: config / env)")
    p_sim.add_argument("--checkpoint", action="store_true",
                       help="write resumable per-decoder checkpoints")
    p_sim.add_argument("--frame-log", default=None,
                       help="JSONL per-frame outcome log (forces serial run)")
    p_sim.set_defaults(func=cmd_simulate)

    p_mem = sub.add_parser("memory", help="memory-footprint table")
    p_mem.add_argument("--n", type=int, default=None, help="custom block length")
    p_mem.add_argument("--tmax", type=int, default=None, help="custom trial cap")
    p_mem.add_argument("--omega", type=int, default=None, help="custom flip order")
    p_mem.add_argument("--csv", default=None, help="also write CSV here")
    p_mem.set_defaults(func=cmd_memory)

    p_lat = sub.add_parser("latency",
                           help="single-pass latency: closed form vs counters")
    p_lat.add_argument("--n", type=int, nargs="*", default=None)
    p_lat.add_argument("--pe", type=int, nargs="*", default=None)
    p_lat.add_argument("--csv", default=None)
    p_lat.set_defaults(func=cmd_latency)

    p_conf = sub.add_parser("conformance",
                            help="restart-mechanism equivalence checks")
    p_conf.add_argument("--frames", type=int, default=2000)
    p_conf.add_argument("--seed", type=int, default=20240101)
    p_conf.add_argument("--code", default="P1024_128",
                        choices=sorted(reference.CODES))
    p_conf.add_argument("--decoder", default="scf",
                        choices=sorted(reference.DECODERS))
    p_conf.add_argument("--ebno-db", type=float, default=2.0)
    p_conf.add_argument("--workers", type=int, default=None)
    p_conf.set_defaults(func=cmd_conformance)

    p_rep = sub.add_parser("reproduce",
                           help="reproduce the published tables and figures")
    p_rep.add_argument("scenario",
                       choices=["fig3", "fig4", "table1", "table2", "table3"])
    p_rep.add_argument("--frames", type=int, default=20000,
                       help="frames per point (desk scale)")
    p_rep.add_argument("--code", default="P1024_128",
                       choices=sorted(reference.CODES))
    p_rep.add_argument("--decoder", default=None,
                       choices=sorted(reference.DECODERS))
    p_rep.add_argument("--ebno-db", type=float, default=None,
                       help="override the scenario's Eb/N0 point(s)")
    p_rep.add_argument("--seed", type=int, default=20240101)
    p_rep.add_argument("--output", default=".")
    p_rep.add_argument("--workers", type=int, default=None)
    p_rep.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PairedEquivalenceError, ConformanceFailure) as exc:
        print(f"conformance failure: {exc}", file=sys.stderr)
        return EXIT_CONFORMANCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
