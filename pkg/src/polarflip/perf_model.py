"""Execution-time statistics and memory-footprint estimation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .flip_decoder import FrameOutcome

DEFAULT_Q_CH = 6
DEFAULT_Q_INT = 7
DEFAULT_Q_FLIP = 7


@dataclass
class PointStats:
    """Finalized statistics of one simulated operating point."""

    frames: int
    errors: int
    fer: float
    avg_exec: float
    avg_additional: Optional[float]
    var_exec: Optional[float]
    srm_restart_rate: float
    undetected_errors: int
    retry_frames: int


@dataclass
class StatsAccumulator:
    """Streaming estimators for FER and the execution-time characteristics.

    ``l_sc`` is the single-pass reference latency; the additional execution
    time of a frame is its measured cycle total minus ``l_sc``, summed only
    over frames that needed more than one trial.  Accumulators merge exactly
    (moment sums), so sharding frames over workers cannot change the result.
    """

    l_sc: float
    frames: int = 0
    retry_frames: int = 0
    errors: int = 0
    undetected_errors: int = 0
    srm_restarts: int = 0
    sum_cycles: float = 0.0
    sum_cycles_sq: float = 0.0
    sum_additional: float = 0.0

    def accumulate(self, outcome: FrameOutcome, transmitted_payload=None) -> None:
        self.frames += 1
        l = float(outcome.total_cycles)
        self.sum_cycles += l
        self.sum_cycles_sq += l * l
        if outcome.t_req > 1:
            self.retry_frames += 1
            self.sum_additional += l - self.l_sc
        self.srm_restarts += outcome.srm_restarts
        if transmitted_payload is None:
            error = not outcome.success
            undetected = False
        else:
            matches = np.array_equal(outcome.payload,
                                     np.asarray(transmitted_payload, dtype=outcome.payload.dtype))
            error = (not outcome.success) or not matches
            undetected = outcome.success and not matches
        self.errors += error
        self.undetected_errors += undetected

    def merge(self, other: "StatsAccumulator") -> "StatsAccumulator":
        if other.l_sc != self.l_sc:
            raise ValueError("cannot merge accumulators with different references")
        return StatsAccumulator(
            l_sc=self.l_sc,
            frames=self.frames + other.frames,
            retry_frames=self.retry_frames + other.retry_frames,
            errors=self.errors + other.errors,
            undetected_errors=self.undetected_errors + other.undetected_errors,
            srm_restarts=self.srm_restarts + other.srm_restarts,
            sum_cycles=self.sum_cycles + other.sum_cycles,
            sum_cycles_sq=self.sum_cycles_sq + other.sum_cycles_sq,
            sum_additional=self.sum_additional + other.sum_additional,
        )

    def finalize(self) -> PointStats:
        if self.frames < 1:
            raise ValueError("no frames accumulated")
        mean = self.sum_cycles / self.frames
        if self.frames >= 2:
            var = (self.sum_cycles_sq - self.frames * mean * mean) / (self.frames - 1)
            var = max(var, 0.0)
        else:
            var = None
        additional = (self.sum_additional / self.retry_frames
                      if self.retry_frames else None)
        return PointStats(
            frames=self.frames,
            errors=self.errors,
            fer=self.errors / self.frames,
            avg_exec=mean,
            avg_additional=additional,
            var_exec=var,
            srm_restart_rate=self.srm_restarts / self.frames,
            undetected_errors=self.undetected_errors,
            retry_frames=self.retry_frames,
        )

    def state_dict(self) -> dict:
        return {
            "l_sc": self.l_sc,
            "frames": self.frames,
            "retry_frames": self.retry_frames,
            "errors": self.errors,
            "undetected_errors": self.undetected_errors,
            "srm_restarts": self.srm_restarts,
            "sum_cycles": self.sum_cycles,
            "sum_cycles_sq": self.sum_cycles_sq,
            "sum_additional": self.sum_additional,
        }

    @classmethod
    def from_state_dict(cls, state: dict) -> "StatsAccumulator":
        return cls(**state)


@dataclass
class MemoryProfile:
    """Bit-level memory estimate of one decoder configuration."""

    components: dict
    total_bits: int = field(init=False)
    srm_enabled: bool = False
    overhead_percent: Optional[float] = None
    q_ch: int = DEFAULT_Q_CH
    q_int: int = DEFAULT_Q_INT
    q_flip: int = DEFAULT_Q_FLIP

    def __post_init__(self):
        self.total_bits = int(sum(self.components.values()))


def memory_footprint(N: int, t_max: int, omega: int, q_ch: int = DEFAULT_Q_CH,
                     q_int: int = DEFAULT_Q_INT, q_flip: int = DEFAULT_Q_FLIP,
                     srm: bool = False) -> MemoryProfile:
    """Decoder memory in bits.

    Channel LLRs use ``N x q_ch``, intermediate LLRs ``(N-1) x q_int``,
    partial sums and bit estimates one bit each, flip metrics
    ``(t_max - 1) x q_flip`` and the candidate list ``(t_max - 1) x omega x
    log2(N)``.  Enabling the restart mechanism adds one stored half of
    partial sums plus one half of bit estimates: exactly ``N`` extra bits.
    """
    if N < 2 or N & (N - 1):
        raise ValueError(f"N must be a power of two >= 2, got {N}")
    if t_max < 1 or omega < 1:
        raise ValueError("t_max and omega must be >= 1")
    if min(q_ch, q_int, q_flip) < 1:
        raise ValueError("quantization widths must be >= 1")
    n = N.bit_length() - 1
    components = {
        "channel_llrs": N * q_ch,
        "internal_llrs": (N - 1) * q_int,
        "partial_sums": (N - 1) * 1,
        "bit_estimates": N * 1,
        "flip_metrics": (t_max - 1) * q_flip,
        "flip_sets": (t_max - 1) * omega * n,
    }
    overhead = None
    if srm:
        base = sum(components.values())
        components["restart_partial_sums"] = N // 2
        components["restart_bit_estimates"] = N // 2
        overhead = 100.0 * N / base
    return MemoryProfile(components=components, srm_enabled=srm,
                         overhead_percent=overhead, q_ch=q_ch, q_int=q_int,
                         q_flip=q_flip)
