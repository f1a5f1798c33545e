"""Monte Carlo experiment runner.

Frames are simulated in fixed-size chunks whose boundaries depend only on the
plan, and every frame's randomness is keyed by ``(seed, frame index)``; the
emitted statistics are therefore bit-identical for any worker count.  In
paired mode each frame is decoded twice on the same channel LLRs, with the
restart mechanism off and on, and any outcome difference aborts the run.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import ChannelParams, frame_rng, llr_from_channel, modulate_bpsk, transmit
from .codes import CodeSpec, assemble_input_vector, polar_encode
from .flip_decoder import DecoderConfig, decode_frame
from .perf_model import StatsAccumulator
from .sc_engine import DecoderWorkspace, scheduled_cycles

RESULTS_HEADER = ["code", "decoder", "omega", "tmax", "srm", "ebno_db",
                  "frames", "errors", "fer", "avg_exec", "avg_add_exec",
                  "var_exec", "srm_restart_rate", "undetected_errors"]

_CHECKPOINT_VERSION = 1


class PairedEquivalenceError(RuntimeError):
    """A frame decoded differently with the restart mechanism on vs off."""

    def __init__(self, mismatches):
        self.mismatches = mismatches
        first = mismatches[0] if mismatches else None
        super().__init__(
            f"{len(mismatches)} paired-outcome mismatch(es); first: {first}")


@dataclass
class ExperimentPlan:
    """One decoder swept over Eb/N0 points."""

    code: CodeSpec
    decoder: DecoderConfig
    ebno_points: list
    min_frames: int = 100_000
    min_frame_errors: int = 1_000
    max_frames: int = 10_000_000
    seed: int = 1
    paired_mode: bool = False
    workers: int = 1
    chunk_size: int = 4096
    decoder_label: str = ""

    def __post_init__(self):
        if not self.ebno_points:
            raise ValueError("ebno_points must be non-empty")
        if self.min_frames < 1:
            raise ValueError("min_frames must be >= 1")
        if self.max_frames < self.min_frames:
            raise ValueError("max_frames must be >= min_frames")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.decoder.spec is not self.code and self.decoder.spec.label != self.code.label:
            raise ValueError("plan.decoder must be configured for plan.code")
        if not self.decoder_label:
            d = self.decoder
            self.decoder_label = (d.algorithm if d.algorithm != "dscf"
                                  else f"dscf{d.omega}")

    def fingerprint(self) -> str:
        d = self.decoder
        core = {
            "code": self.code.to_config_dict(),
            "decoder": [d.algorithm, d.t_max, d.omega, d.penalty_mode,
                        d.penalty_c, d.pe_count],
            "seed": self.seed,
            "paired": self.paired_mode,
            "min_frames": self.min_frames,
            "min_frame_errors": self.min_frame_errors,
            "max_frames": self.max_frames,
            "chunk_size": self.chunk_size,
        }
        return json.dumps(core, sort_keys=True)


@dataclass
class StatsRow:
    code: str
    decoder: str
    omega: int
    tmax: int
    srm: bool
    ebno_db: float
    frames: int
    errors: int
    fer: float
    avg_exec: float
    avg_add_exec: Optional[float]
    var_exec: Optional[float]
    srm_restart_rate: float
    undetected_errors: int

    def as_csv(self) -> list:
        def num(x):
            return "" if x is None else f"{x:.10g}"
        return [self.code, self.decoder, str(self.omega), str(self.tmax),
                "true" if self.srm else "false", f"{self.ebno_db:.10g}",
                str(self.frames), str(self.errors), f"{self.fer:.10g}",
                f"{self.avg_exec:.10g}", num(self.avg_add_exec),
                num(self.var_exec), f"{self.srm_restart_rate:.10g}",
                str(self.undetected_errors)]


@dataclass
class PairedReport:
    frames_compared: int = 0
    mismatches: list = field(default_factory=list)


@dataclass
class PointResult:
    ebno_db: float
    rows: list
    censored: bool = False
    paired: Optional[PairedReport] = None


def _decoder_variants(plan: ExperimentPlan):
    """The decoder configs a chunk must run: (srm flag, config) pairs."""
    if plan.paired_mode:
        return [(False, dataclasses.replace(plan.decoder, srm_enabled=False)),
                (True, dataclasses.replace(plan.decoder, srm_enabled=True))]
    cfg = plan.decoder
    return [(cfg.srm_enabled, cfg)]


def simulate_chunk(code: CodeSpec, variants, ebno_db: float, seed: int,
                   start: int, count: int, l_sc: float, frame_log=None):
    """Simulate frames ``start .. start+count-1``; returns one accumulator per
    variant plus the paired mismatch records (empty unless two variants)."""
    params = ChannelParams(ebno_db=ebno_db, rate_for_energy=code.rate, seed=seed)
    accs = [StatsAccumulator(l_sc=l_sc) for _ in variants]
    workspaces = [DecoderWorkspace(code.N) for _ in variants]
    mismatches = []
    symbols_buf = None
    for idx in range(start, start + count):
        rng = frame_rng(seed, idx)
        payload = rng.integers(0, 2, size=code.k, dtype=np.uint8)
        u = assemble_input_vector(payload, code)
        x = polar_encode(u)
        symbols_buf = modulate_bpsk(x)
        y = transmit(symbols_buf, params, rng)
        alpha = llr_from_channel(y, params.sigma)
        outcomes = []
        for (srm, cfg), acc, ws in zip(variants, accs, workspaces):
            outcome = decode_frame(alpha, cfg, workspace=ws)
            acc.accumulate(outcome, payload)
            outcomes.append(outcome)
            if frame_log is not None:
                frame_log.write(json.dumps({
                    "frame": idx, "srm": srm, "success": outcome.success,
                    "t_req": outcome.t_req, "cycles": outcome.total_cycles,
                    "srm_restarts": outcome.srm_restarts}) + "\n")
        if len(outcomes) == 2:
            off, on = outcomes
            if (off.success != on.success or off.t_req != on.t_req
                    or not np.array_equal(off.u_hat, on.u_hat)):
                mismatches.append({"frame": idx,
                                   "success": (off.success, on.success),
                                   "t_req": (off.t_req, on.t_req)})
    return [acc.state_dict() for acc in accs], mismatches


def _chunk_task(args):
    return simulate_chunk(*args)


def _next_chunk_size(plan: ExperimentPlan, done: int) -> int:
    size = min(plan.chunk_size, plan.max_frames - done)
    if done < plan.min_frames:
        size = min(size, plan.min_frames - done)
    return size


def _should_stop(plan: ExperimentPlan, frames: int, errors: int) -> bool:
    if frames >= plan.max_frames:
        return True
    return frames >= plan.min_frames and errors >= plan.min_frame_errors


def run_point(plan: ExperimentPlan, ebno_db: float, resume: Optional[dict] = None,
              checkpoint_cb=None, frame_log=None) -> PointResult:
    """Simulate one Eb/N0 point until the stopping rule fires.

    ``resume`` is a previously checkpointed state dict for this point;
    ``checkpoint_cb(state)`` is invoked after every consumed chunk with the
    serializable progress state.
    """
    variants = _decoder_variants(plan)
    l_sc = float(scheduled_cycles(plan.code.N, plan.decoder.pe_count, "full"))

    if resume is not None:
        frames_done = resume["frames_done"]
        accs = [StatsAccumulator.from_state_dict(s) for s in resume["accumulators"]]
        compared = resume.get("frames_compared", 0)
    else:
        frames_done = 0
        accs = [StatsAccumulator(l_sc=l_sc) for _ in variants]
        compared = 0
    report = PairedReport(frames_compared=compared) if plan.paired_mode else None

    def consume(states, mismatches, count):
        nonlocal frames_done, compared
        for i, state in enumerate(states):
            accs[i] = accs[i].merge(StatsAccumulator.from_state_dict(state))
        frames_done += count
        if report is not None:
            compared += count
            report.frames_compared = compared
            report.mismatches.extend(mismatches)
            if mismatches:
                raise PairedEquivalenceError(report.mismatches)
        if checkpoint_cb is not None:
            checkpoint_cb({"frames_done": frames_done,
                           "accumulators": [a.state_dict() for a in accs],
                           "frames_compared": compared})

    if plan.workers == 1 or frame_log is not None:
        while not _should_stop(plan, frames_done, accs[0].errors):
            count = _next_chunk_size(plan, frames_done)
            states, mism = simulate_chunk(plan.code, variants, ebno_db, plan.seed,
                                          frames_done, count, l_sc, frame_log)
            consume(states, mism, count)
    else:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            pending = []
            submitted = frames_done
            while True:
                while (len(pending) < plan.workers
                       and submitted < plan.max_frames):
                    count = _next_chunk_size(plan, submitted)
                    args = (plan.code, variants, ebno_db, plan.seed, submitted,
                            count, l_sc, None)
                    pending.append((count, pool.submit(_chunk_task, args)))
                    submitted += count
                if not pending:
                    break
                count, fut = pending.pop(0)
                states, mism = fut.result()
                consume(states, mism, count)
                if _should_stop(plan, frames_done, accs[0].errors):
                    # Later speculative chunks are dropped so the stop point
                    # matches the single-worker schedule exactly.
                    for _, f in pending:
                        f.cancel()
                    break

    censored = accs[0].errors < plan.min_frame_errors
    rows = []
    for (srm, cfg), acc in zip(variants, accs):
        stats = acc.finalize()
        rows.append(StatsRow(
            code=plan.code.label, decoder=plan.decoder_label, omega=cfg.omega,
            tmax=cfg.t_max, srm=srm, ebno_db=ebno_db, frames=stats.frames,
            errors=stats.errors, fer=stats.fer, avg_exec=stats.avg_exec,
            avg_add_exec=stats.avg_additional, var_exec=stats.var_exec,
            srm_restart_rate=stats.srm_restart_rate,
            undetected_errors=stats.undetected_errors))
    return PointResult(ebno_db=ebno_db, rows=rows, censored=censored,
                       paired=report)


def _atomic_write_json(path, payload) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ckpt-")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_sweep(plan: ExperimentPlan, checkpoint_path=None) -> list:
    """Run every Eb/N0 point of the plan; returns the list of PointResults.

    With ``checkpoint_path`` the sweep records progress after every chunk and
    resumes bit-identically after interruption.
    """
    state = {"version": _CHECKPOINT_VERSION, "fingerprint": plan.fingerprint(),
             "points": {}}
    if checkpoint_path is not None and os.path.exists(checkpoint_path):
        with open(checkpoint_path) as fh:
            loaded = json.load(fh)
        if loaded.get("fingerprint") != plan.fingerprint():
            raise ValueError(
                f"checkpoint {checkpoint_path} belongs to a different plan")
        state = loaded

    results = []
    for ebno_db in plan.ebno_points:
        key = f"{ebno_db:.6g}"
        point_state = state["points"].get(key)
        resume = None
        if point_state is not None and not point_state.get("done"):
            resume = point_state
        if point_state is not None and point_state.get("done"):
            resume = point_state  # re-finalize from the stored moments

        def save_cb(progress, key=key):
            state["points"][key] = progress
            if checkpoint_path is not None:
                _atomic_write_json(checkpoint_path, state)

        result = run_point(plan, ebno_db, resume=resume,
                           checkpoint_cb=save_cb if checkpoint_path else None)
        if checkpoint_path is not None:
            state["points"][key] = state["points"].get(key, {})
            state["points"][key]["done"] = True
            _atomic_write_json(checkpoint_path, state)
        results.append(result)
    return results


def write_results_csv(path, results) -> None:
    """Write the stats table; ``results`` is an iterable of PointResults."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for result in results:
            for row in result.rows:
                writer.writerow(row.as_csv())
