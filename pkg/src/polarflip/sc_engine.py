"""Successive-cancellation tree decoding with flip injection, midpoint
restart, and cycle-exact latency accounting for a semi-parallel architecture.

The traversal itself is iterative (one pass over the leaves with the usual
recompute-depth bookkeeping), so a restart is literally the suffix of the full
schedule that begins at leaf ``N / 2``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels import sc_pass_kernel
from .codes import CodeSpec


def f_func(a, d):
    """Hardware-friendly boxplus: ``sign(a) sign(d) min(|a|, |d|)``."""
    return np.sign(a) * np.sign(d) * np.minimum(np.abs(a), np.abs(d))


def g_func(a, d, b):
    """Partial-sum-corrected combine: ``(1 - 2 b) a + d``."""
    return (1.0 - 2.0 * np.asarray(b)) * a + d


def combine_partial_sums(beta_l, beta_r):
    """Stack two child partial-sum vectors: ``[beta_l ^ beta_r, beta_r]``."""
    beta_l = np.asarray(beta_l, dtype=np.uint8)
    beta_r = np.asarray(beta_r, dtype=np.uint8)
    if beta_l.shape != beta_r.shape:
        raise ValueError(
            f"partial-sum halves differ in length: {beta_l.size} vs {beta_r.size}")
    return np.concatenate([beta_l ^ beta_r, beta_r])


class DecoderWorkspace:
    """Scratch memory for one in-flight decode.

    ``alpha_int`` and ``beta`` are the flat ``N - 1`` per-level buffers
    (level ``s`` at offset ``2^s - 1``); ``u_hat`` and ``alpha_dec`` hold the
    leaf outputs.  A workspace must not be shared by concurrent decodes.
    """

    def __init__(self, N: int):
        if N < 2 or N & (N - 1):
            raise ValueError(f"N must be a power of two >= 2, got {N}")
        self.N = N
        self.alpha_int = np.zeros(N - 1, dtype=np.float64)
        self.beta = np.zeros(N - 1, dtype=np.uint8)
        self.u_hat = np.zeros(N, dtype=np.uint8)
        self.alpha_dec = np.zeros(N, dtype=np.float64)
        self.carry = np.zeros(max(N // 2, 1), dtype=np.uint8)
        self.flip_mask = np.zeros(N, dtype=np.uint8)


@dataclass
class RestartSnapshot:
    """Left-half state stored after a completed full pass: the root's
    left-child partial sums plus the first ``N / 2`` bit estimates."""

    beta_rest: np.ndarray
    u_hat_rest: np.ndarray
    psi_rest: int

    def __post_init__(self):
        if self.beta_rest.size != self.u_hat_rest.size:
            raise ValueError("snapshot halves must have equal length")
        if self.psi_rest != self.beta_rest.size - 1:
            raise ValueError("psi_rest must equal N/2 - 1")


@dataclass
class SCResult:
    u_hat: np.ndarray
    alpha_dec: np.ndarray
    cycles: int
    snapshot: Optional[RestartSnapshot] = None


def sc_pass(alpha_ch, spec: CodeSpec, flip_set=(), start="full",
            snapshot: Optional[RestartSnapshot] = None, pe_count: int = 64,
            workspace: Optional[DecoderWorkspace] = None,
            capture_snapshot: bool = True) -> SCResult:
    """Run one SC pass over a frame of channel LLRs.

    Parameters
    ----------
    alpha_ch : array of float
        ``N`` channel LLRs.
    spec : CodeSpec
        Code geometry; frozen leaves decode to zero.
    flip_set : iterable of int
        Information indices whose hard decision is inverted.
    start : {"full", "midpoint"}
        ``"midpoint"`` resumes at leaf ``N / 2`` from ``snapshot``; every
        flip index must then lie in the right half.
    snapshot : RestartSnapshot, optional
        Required for a midpoint start.
    pe_count : int
        Processing elements of the modeled architecture (cycle count only).
    workspace : DecoderWorkspace, optional
        Reused scratch memory; allocated on demand.
    capture_snapshot : bool
        Capture the restart snapshot on full passes (on by default).

    Returns
    -------
    SCResult
        Bit estimates, decision LLRs, the cycle count of the executed
        schedule, and (full passes) the restart snapshot.  On a midpoint pass
        the left-half decision LLRs are NaN: that half is not recomputed.
    """
    alpha_ch = np.ascontiguousarray(alpha_ch, dtype=np.float64)
    N = spec.N
    if alpha_ch.size != N:
        raise ValueError(f"expected {N} channel LLRs, got {alpha_ch.size}")
    if pe_count < 1:
        raise ValueError(f"pe_count must be >= 1, got {pe_count}")
    if start not in ("full", "midpoint"):
        raise ValueError(f"start must be 'full' or 'midpoint', got {start!r}")
    ws = workspace if workspace is not None else DecoderWorkspace(N)

    flip = ws.flip_mask
    flip[:] = 0
    flip_idx = np.asarray(list(flip_set), dtype=np.int64)
    if flip_idx.size:
        if np.any(spec.frozen_mask[flip_idx]):
            bad = flip_idx[spec.frozen_mask[flip_idx] == 1]
            raise ValueError(f"flip index {bad[0]} is frozen")
        flip[flip_idx] = 1

    if start == "midpoint":
        if snapshot is None:
            raise ValueError("midpoint start requires a snapshot")
        if snapshot.beta_rest.size != N // 2:
            raise ValueError(
                f"snapshot is for N={2 * snapshot.beta_rest.size}, expected N={N}")
        if flip_idx.size and flip_idx.min() < N // 2:
            raise ValueError("midpoint start cannot flip left-half indices")
        ws.beta[N // 2 - 1: N - 1] = snapshot.beta_rest
        ws.u_hat[: N // 2] = snapshot.u_hat_rest
        ws.alpha_dec[: N // 2] = np.nan
        start_leaf = N // 2
    else:
        start_leaf = 0

    cycles = int(sc_pass_kernel(alpha_ch, spec.frozen_mask, flip, start_leaf,
                                pe_count, ws.alpha_int, ws.beta, ws.u_hat,
                                ws.alpha_dec, ws.carry))

    snap = None
    if start == "full" and capture_snapshot:
        # The level n-1 slice still holds the left child's partial sums: no
        # right-half climb reaches that level except from leaf N-1, which is
        # skipped as unconsumed.
        snap = RestartSnapshot(beta_rest=ws.beta[N // 2 - 1: N - 1].copy(),
                               u_hat_rest=ws.u_hat[: N // 2].copy(),
                               psi_rest=N // 2 - 1)
    return SCResult(u_hat=ws.u_hat.copy(), alpha_dec=ws.alpha_dec.copy(),
                    cycles=cycles, snapshot=snap)


def lsc_closed_form(N: int, P: int) -> int:
    """Single-pass latency ``(2N + (N/P) log2(N/4P)) + (N - n - 1)`` cycles."""
    for name, v in (("N", N), ("P", P)):
        if v < 1 or v & (v - 1):
            raise ValueError(f"{name} must be a power of two, got {v}")
    if 4 * P > N:
        raise ValueError(f"closed form requires 4P <= N, got N={N}, P={P}")
    n = N.bit_length() - 1
    log_term = (N // (4 * P)).bit_length() - 1
    return 2 * N + (N // P) * log_term + (N - n - 1)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def schedule_trace(N: int, P: int, start: str = "full"):
    """Per-node schedule of one SC pass as ``(node, stage, width, cycles)``
    rows, via an explicit recursive walk (independent of the decode kernel).

    Nodes are heap-indexed (root 1, children ``2v`` and ``2v + 1``); stages
    are ``f``, ``g`` and ``combine``.  Combines whose output no node consumes
    (the rightmost root-to-leaf path) are charged zero cycles.
    """
    if N < 2 or N & (N - 1):
        raise ValueError(f"N must be a power of two >= 2, got {N}")
    if start not in ("full", "midpoint"):
        raise ValueError(f"start must be 'full' or 'midpoint', got {start!r}")
    rows = []

    def walk(node: int, width: int, rightmost: bool):
        if width == 1:
            return
        half = width // 2
        rows.append((node, "f", half, _ceil_div(half, P)))
        walk(2 * node, half, False)
        rows.append((node, "g", half, _ceil_div(half, P)))
        walk(2 * node + 1, half, rightmost)
        rows.append((node, "combine", width, 0 if rightmost else 1))

    if start == "full":
        walk(1, N, True)
    else:
        rows.append((1, "g", N // 2, _ceil_div(N // 2, P)))
        walk(3, N // 2, True)
        rows.append((1, "combine", N, 0))
    return rows


def scheduled_cycles(N: int, P: int, start: str = "full") -> int:
    """Total cycles of the schedule walked by :func:`schedule_trace`."""
    return sum(c for _, _, _, c in schedule_trace(N, P, start))


def write_trace_csv(path, N: int, P: int, start: str = "full") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "stage", "width", "cycles"])
        writer.writerows(schedule_trace(N, P, start))
