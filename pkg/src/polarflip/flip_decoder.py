"""Frame-level SC / SC-Flip / dynamic SC-Flip decoding with the
restart-from-midpoint mechanism.

The trial loop: an initial full pass; on CRC failure the left-half state is
snapshotted once and a candidate list is built; each extra trial consumes the
best untried candidate and, when the restart mechanism is enabled and the
candidate's first index lies in the right half, resumes decoding from the
codeword midpoint instead of re-deriving the unchanged left half.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .codes import CodeSpec, crc16_compute
from .flip_strategies import (FlipList, dscf_build_candidates,
                              dscf_extend_candidates, scf_build_candidates)
from .sc_engine import DecoderWorkspace, sc_pass

ALGORITHMS = ("sc", "scf", "dscf")


@dataclass
class DecoderConfig:
    """Everything a frame decode needs besides the channel LLRs."""

    spec: CodeSpec
    algorithm: str = "scf"
    t_max: int = 1
    omega: int = 1
    srm_enabled: bool = False
    penalty_mode: str = "approx"
    penalty_c: float = 1.0
    pe_count: int = 64

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {self.t_max}")
        if self.pe_count < 1:
            raise ValueError(f"pe_count must be >= 1, got {self.pe_count}")
        k_total = self.spec.k_total
        if self.algorithm == "sc":
            if self.t_max != 1:
                raise ValueError("plain SC runs exactly one trial; use scf/dscf for more")
            self.omega = 1
        elif self.algorithm == "scf":
            if self.omega != 1:
                raise ValueError("scf flips one bit per trial; use dscf for omega > 1")
            if self.t_max > k_total + 1:
                raise ValueError(
                    f"scf requires t_max <= k + r + 1 = {k_total + 1}, got {self.t_max}")
        else:
            if not 1 <= self.omega <= 3:
                raise ValueError(f"omega must be in 1..3, got {self.omega}")
            if self.omega == 1 and self.t_max > k_total + 1:
                raise ValueError(
                    f"single-flip dscf requires t_max <= k + r + 1 = {k_total + 1}, "
                    f"got {self.t_max}")
        if self.penalty_mode not in ("approx", "exact"):
            raise ValueError(f"unknown penalty mode {self.penalty_mode!r}")
        if not 0.0 < self.penalty_c <= 1.0:
            raise ValueError(f"penalty_c must be in (0, 1], got {self.penalty_c}")


@dataclass
class FrameOutcome:
    """Result of decoding one frame."""

    u_hat: np.ndarray
    payload: np.ndarray
    success: bool
    t_req: int
    total_cycles: int
    srm_restarts: int = 0
    candidate_log: Optional[list] = field(default=None, repr=False)


def extract_payload(u_hat, spec: CodeSpec):
    """Read the information positions, split payload and CRC, verify."""
    u_hat = np.asarray(u_hat)
    info_bits = u_hat[spec.info_set]
    if spec.r == 0:
        return info_bits.astype(np.uint8), True
    payload = info_bits[: spec.k].astype(np.uint8)
    crc_field = info_bits[spec.k:]
    crc_value = int(crc_field.dot(1 << np.arange(spec.r - 1, -1, -1, dtype=np.int64)))
    return payload, crc16_compute(payload) == crc_value


def _build_candidates(alpha_dec, config: DecoderConfig) -> FlipList:
    count = config.t_max - 1
    if config.algorithm == "scf":
        return scf_build_candidates(alpha_dec, config.spec.info_set, count)
    return dscf_build_candidates(alpha_dec, config.spec.info_set, count,
                                 config.penalty_mode, config.penalty_c)


def decode_frame(alpha_ch, config: DecoderConfig,
                 workspace: Optional[DecoderWorkspace] = None,
                 candidate_log: Optional[list] = None) -> FrameOutcome:
    """Decode one frame, running up to ``t_max`` trials.

    When ``candidate_log`` is a list, every attempted flip set is appended as
    ``(trial, indices, metric)``.
    """
    spec = config.spec
    ws = workspace if workspace is not None else DecoderWorkspace(spec.N)

    result = sc_pass(alpha_ch, spec, pe_count=config.pe_count, workspace=ws)
    total_cycles = result.cycles
    payload, crc_ok = extract_payload(result.u_hat, spec)
    if crc_ok or config.t_max == 1:
        return FrameOutcome(u_hat=result.u_hat, payload=payload, success=crc_ok,
                            t_req=1, total_cycles=total_cycles,
                            candidate_log=candidate_log)

    # Initial pass failed: snapshot the left half once and build candidates.
    snapshot = result.snapshot
    alpha_dec_init = result.alpha_dec
    candidates = _build_candidates(alpha_dec_init, config)
    psi_rest = spec.N // 2 - 1
    srm_restarts = 0
    extend = config.algorithm == "dscf" and config.omega > 1

    t = 1
    while t < config.t_max and len(candidates):
        t += 1
        cand = candidates.pop_best()
        if candidate_log is not None:
            candidate_log.append((t, cand.indices, cand.metric))
        use_restart = config.srm_enabled and cand.first_index > psi_rest
        if use_restart:
            srm_restarts += 1
            result = sc_pass(alpha_ch, spec, flip_set=cand.indices,
                             start="midpoint", snapshot=snapshot,
                             pe_count=config.pe_count, workspace=ws)
        else:
            result = sc_pass(alpha_ch, spec, flip_set=cand.indices,
                             pe_count=config.pe_count, workspace=ws,
                             capture_snapshot=False)
        total_cycles += result.cycles
        payload, crc_ok = extract_payload(result.u_hat, spec)
        if crc_ok:
            return FrameOutcome(u_hat=result.u_hat, payload=payload, success=True,
                                t_req=t, total_cycles=total_cycles,
                                srm_restarts=srm_restarts, candidate_log=candidate_log)
        if extend and t < config.t_max:
            if use_restart:
                # A restarted trial recomputes only the right half; its left
                # half equals the initial pass (no left-half flips), so the
                # composed vector matches what a full pass would have seen.
                alpha_dec = alpha_dec_init.copy()
                alpha_dec[spec.N // 2:] = result.alpha_dec[spec.N // 2:]
            else:
                alpha_dec = result.alpha_dec
            dscf_extend_candidates(candidates, cand, alpha_dec, spec.info_set,
                                   config.omega, config.penalty_mode,
                                   config.penalty_c)

    return FrameOutcome(u_hat=result.u_hat, payload=payload, success=False,
                        t_req=t, total_cycles=total_cycles,
                        srm_restarts=srm_restarts, candidate_log=candidate_log)
