"""Polar-code SC-Flip / dynamic SC-Flip decoding with a conditional
restart-from-midpoint mechanism, cycle-accurate latency and memory models,
and a reproducible AWGN Monte Carlo harness."""

from .channel import ChannelParams, frame_rng, llr_from_channel, modulate_bpsk, transmit
from .codes import (CodeSpec, assemble_input_vector, construct_info_set,
                    crc16_check, crc16_compute, make_code_spec, polar_encode)
from .flip_decoder import DecoderConfig, FrameOutcome, decode_frame, extract_payload
from .flip_strategies import (FlipCandidate, FlipList, dscf_build_candidates,
                              dscf_extend_candidates, dscf_metric,
                              dscf_penalty_approx, dscf_penalty_exact,
                              scf_build_candidates)
from .perf_model import MemoryProfile, StatsAccumulator, memory_footprint
from .sc_engine import (DecoderWorkspace, RestartSnapshot, SCResult,
                        combine_partial_sums, f_func, g_func, lsc_closed_form,
                        sc_pass, scheduled_cycles)
from .sim_harness import (ExperimentPlan, PairedEquivalenceError, PointResult,
                          StatsRow, run_point, run_sweep, write_results_csv)

__version__ = "0.1.0"

__all__ = [
    "ChannelParams", "CodeSpec", "DecoderConfig", "DecoderWorkspace",
    "ExperimentPlan", "FlipCandidate", "FlipList", "FrameOutcome",
    "MemoryProfile", "PairedEquivalenceError", "PointResult", "RestartSnapshot",
    "SCResult", "StatsAccumulator", "StatsRow", "assemble_input_vector",
    "combine_partial_sums", "construct_info_set", "crc16_check", "crc16_compute",
    "decode_frame", "dscf_build_candidates", "dscf_extend_candidates",
    "dscf_metric", "dscf_penalty_approx", "dscf_penalty_exact", "extract_payload",
    "f_func", "frame_rng", "g_func", "llr_from_channel", "lsc_closed_form",
    "make_code_spec", "memory_footprint", "modulate_bpsk", "polar_encode",
    "run_point", "run_sweep", "sc_pass", "scf_build_candidates",
    "scheduled_cycles", "transmit", "write_results_csv",
]
