"""Published reference values this toolkit reproduces.

Frame-error-rate curves, execution-time reduction percentages at the
FER = 1e-2 operating points, and bit-exact memory estimates, for CRC-16-aided
polar codes of length 1024 (rates 1/8, 1/4, 1/2) and 512 (rate 1/8) decoded
with SC-Flip (t_max 13) and dynamic SC-Flip of orders 1..3 (t_max 8, 51, 301)
on a 64-processing-element architecture.
"""

from __future__ import annotations

from dataclasses import dataclass

CRC_BITS = 16
PE_COUNT = 64

# (payload bits, design Eb/N0 in dB) per code label.
CODES = {
    "P1024_128": {"N": 1024, "k": 128, "design_ebno_db": 1.25},
    "P1024_256": {"N": 1024, "k": 256, "design_ebno_db": 1.25},
    "P1024_512": {"N": 1024, "k": 512, "design_ebno_db": 2.5},
    "P512_64": {"N": 512, "k": 64, "design_ebno_db": 1.25},
}

DECODERS = {
    "scf": {"algorithm": "scf", "omega": 1, "t_max": 13},
    "dscf1": {"algorithm": "dscf", "omega": 1, "t_max": 8},
    "dscf2": {"algorithm": "dscf", "omega": 2, "t_max": 51},
    "dscf3": {"algorithm": "dscf", "omega": 3, "t_max": 301},
}


@dataclass(frozen=True)
class ReductionRow:
    """Reference reduction (percent) of the execution-time characteristics
    when the restart mechanism is enabled, at the stated Eb/N0 point."""

    ebno_db: float
    avg_exec_pct: float
    avg_additional_pct: float
    variance_pct: float


EXEC_REDUCTIONS = {
    ("P1024_128", "scf"): ReductionRow(2.0, 11.17, 48.30, 73.50),
    ("P1024_128", "dscf1"): ReductionRow(1.875, 7.57, 43.57, 67.28),
    ("P1024_128", "dscf2"): ReductionRow(1.5, 22.73, 40.71, 63.26),
    ("P1024_128", "dscf3"): ReductionRow(1.25, 31.70, 37.08, 57.28),
    ("P1024_256", "scf"): ReductionRow(1.875, 9.00, 44.68, 69.15),
    ("P1024_256", "dscf1"): ReductionRow(1.75, 5.01, 33.33, 50.87),
    ("P1024_256", "dscf2"): ReductionRow(1.44, 14.74, 27.60, 41.74),
    ("P1024_256", "dscf3"): ReductionRow(1.25, 19.09, 22.57, 34.78),
    ("P1024_512", "scf"): ReductionRow(2.375, 6.54, 37.44, 59.71),
    ("P1024_512", "dscf1"): ReductionRow(2.25, 2.95, 22.04, 32.35),
    ("P1024_512", "dscf2"): ReductionRow(2.0, 6.96, 13.83, 19.00),
    ("P1024_512", "dscf3"): ReductionRow(1.875, 7.33, 9.03, 12.20),
    ("P512_64", "scf"): ReductionRow(2.625, 10.36, 47.49, 72.27),
    ("P512_64", "dscf1"): ReductionRow(2.625, 6.03, 43.93, 67.94),
    ("P512_64", "dscf2"): ReductionRow(2.0, 24.01, 40.52, 63.08),
    ("P512_64", "dscf3"): ReductionRow(1.75, 32.33, 37.59, 58.67),
}

# FER of the P1024_128 code per decoder; identical with and without the
# restart mechanism.
FER_REFERENCE = {
    "scf": (
        (0.25, 0.533780), (0.5, 0.401080), (0.75, 0.276750), (1.0, 0.178000),
        (1.25, 0.102700), (1.5, 0.054850), (1.75, 0.026920), (2.0, 0.011660),
        (2.25, 0.004823), (2.5, 0.001827),
    ),
    "dscf1": (
        (0.25, 0.544050), (0.5, 0.398670), (0.75, 0.268450), (1.0, 0.163360),
        (1.25, 0.087870), (1.5, 0.042450), (1.75, 0.019100), (2.0, 0.007371),
        (2.25, 0.002819), (2.5, 0.001005), (2.75, 0.000302),
    ),
    "dscf2": (
        (0.25, 0.382990), (0.5, 0.246460), (0.75, 0.140310), (1.0, 0.070650),
        (1.25, 0.030570), (1.5, 0.011620), (1.75, 0.004046), (2.0, 0.001174),
        (2.25, 0.000329),
    ),
    "dscf3": (
        (0.25, 0.260600), (0.5, 0.146490), (0.75, 0.072610), (1.0, 0.031110),
        (1.25, 0.011720), (1.5, 0.003501), (1.75, 0.000986), (2.0, 0.000232),
    ),
}


@dataclass(frozen=True)
class MemoryRow:
    N: int
    decoder: str
    t_max: int
    omega: int
    bits_plain: int
    bits_with_restart: int
    overhead_pct: float


MEMORY_REFERENCE = (
    MemoryRow(1024, "scf", 13, 1, 15556, 16580, 6.58),
    MemoryRow(1024, "dscf1", 8, 1, 15471, 16495, 6.62),
    MemoryRow(1024, "dscf2", 51, 2, 16702, 17726, 6.13),
    MemoryRow(1024, "dscf3", 301, 3, 26452, 27476, 3.87),
    MemoryRow(512, "scf", 13, 1, 7864, 8376, 6.51),
    MemoryRow(512, "dscf1", 8, 1, 7784, 8296, 6.58),
    MemoryRow(512, "dscf2", 51, 2, 8922, 9434, 5.74),
    MemoryRow(512, "dscf3", 301, 3, 17872, 18384, 2.86),
)

# Eb/N0 grid of the published FER curves for P1024_128.
FER_SWEEP_EBNO = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75)
