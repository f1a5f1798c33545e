"""Polar code construction, CRC-16, input-vector assembly, and encoding."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from ._kernels import CRC16_POLY, crc16_kernel, polar_transform_kernel

logger = logging.getLogger(__name__)

CRC_WIDTH = 16

CONSTRUCTION_METHODS = ("gaussian-approx", "bhattacharyya", "file")

# Density evolution works on mean LLRs in [_GA_MEAN_FLOOR, _GA_MEAN_CAP];
# values driven below the floor are hopeless channels and collapse to zero,
# values above the cap are saturated far beyond any selection boundary.
_GA_MEAN_FLOOR = 1e-12
_GA_MEAN_CAP = 1e7
# Gauss-Hermite rule for the mean-tanh integrals; accurate while the
# integrand's saddle stays inside the node range, i.e. for means up to a few
# hundred.  The tail asymptotic takes over at _GA_ASYM_SWITCH.
_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(128)
_GA_ASYM_SWITCH = 100.0
_SQRT_PI = math.sqrt(math.pi)


class FrozenSetFileError(ValueError):
    """Raised when a frozen-set file cannot be parsed or is inconsistent."""


@dataclass
class CodeSpec:
    """A CRC-aided polar code: geometry, information set, and design point.

    The information set carries ``k`` payload positions plus ``r`` CRC
    positions; frozen inputs are always zero.  Rate is the payload rate
    ``k / N`` (the CRC is treated as overhead).
    """

    N: int
    k: int
    r: int
    design_ebno_db: float
    info_set: np.ndarray
    construction: str = "gaussian-approx"
    label: str = ""
    n: int = field(init=False)
    rate: float = field(init=False)
    frozen_set: np.ndarray = field(init=False)
    frozen_mask: np.ndarray = field(init=False)

    def __post_init__(self):
        N = self.N
        if N < 2 or N & (N - 1):
            raise ValueError(f"block length must be a power of two >= 2, got {N}")
        if self.k < 0 or self.r < 0:
            raise ValueError("payload and CRC widths must be non-negative")
        if self.r not in (0, CRC_WIDTH):
            raise ValueError(f"CRC width must be 0 or {CRC_WIDTH}, got {self.r}")
        self.info_set = np.asarray(self.info_set, dtype=np.int64)
        if self.info_set.size != self.k + self.r:
            raise ValueError(
                f"information set has {self.info_set.size} indices, expected "
                f"k + r = {self.k + self.r}")
        if self.info_set.size == 0 or self.info_set.size > N:
            raise ValueError("information set size out of range")
        if np.any(np.diff(self.info_set) <= 0):
            raise ValueError("information set must be strictly ascending")
        if self.info_set[0] < 0 or self.info_set[-1] >= N:
            raise ValueError("information set index out of range")
        self.n = N.bit_length() - 1
        self.rate = self.k / N
        mask = np.ones(N, dtype=np.uint8)
        mask[self.info_set] = 0
        self.frozen_mask = mask
        self.frozen_set = np.flatnonzero(mask).astype(np.int64)
        if not self.label:
            self.label = f"P{N}_{self.k}"

    @property
    def k_total(self) -> int:
        return self.k + self.r

    def to_config_dict(self) -> dict:
        return {
            "block_length": self.N,
            "payload_bits": self.k,
            "crc_bits": self.r,
            "design_ebno_db": self.design_ebno_db,
            "construction": self.construction,
            "label": self.label,
        }


def _ln_complement(m: float) -> float:
    """``ln E[2 / (e^u + 1)]`` for ``u ~ N(m, 2m)``: the complement of the
    mean tanh, i.e. how much uncertainty a check-style combine sees."""
    if m <= 0.0:
        return 0.0
    if m < _GA_ASYM_SWITCH:
        u = m + 2.0 * math.sqrt(m) * _GH_NODES
        with np.errstate(over="ignore"):
            val = float(np.dot(_GH_WEIGHTS, 2.0 / (np.exp(u) + 1.0))) / _SQRT_PI
        return math.log(val)
    return 0.5 * (math.log(math.pi) - math.log(m)) - m / 4.0 + math.log1p(-10.0 / (7.0 * m))


def _ln_mean_tanh(m: float) -> float:
    """``ln E[tanh(u / 2)]`` for ``u ~ N(m, 2m)``."""
    if m <= 0.0:
        return -math.inf
    s = math.exp(_ln_complement(m))
    if s < 0.5:
        return math.log1p(-s)
    u = m + 2.0 * math.sqrt(m) * _GH_NODES
    val = float(np.dot(_GH_WEIGHTS, np.tanh(u / 2.0))) / _SQRT_PI
    return math.log(max(val, 1e-320))


_LN_LO, _LN_HI = math.log(_GA_MEAN_FLOOR), math.log(_GA_MEAN_CAP)


def _mean_from_ln_mean_tanh(target: float) -> float:
    if target <= _ln_mean_tanh(_GA_MEAN_FLOOR):
        return 0.0
    if target >= _ln_mean_tanh(_GA_MEAN_CAP):
        return _GA_MEAN_CAP
    lm = brentq(lambda v: _ln_mean_tanh(math.exp(v)) - target,
                _LN_LO, _LN_HI, xtol=1e-10)
    return math.exp(lm)


def _mean_from_ln_complement(target: float) -> float:
    if target >= _ln_complement(_GA_MEAN_FLOOR):
        return 0.0
    if target <= _ln_complement(_GA_MEAN_CAP):
        return _GA_MEAN_CAP
    lm = brentq(lambda v: _ln_complement(math.exp(v)) - target,
                _LN_LO, _LN_HI, xtol=1e-10)
    return math.exp(lm)


def _ga_minus(m: float) -> float:
    """Mean LLR after the degrading (check-node) transform.

    The mean tanh squares under the transform.  Work in whichever of the
    complementary log quantities is well conditioned, so neither very weak
    nor very strong channels lose their ordering to rounding.
    """
    if m <= _GA_MEAN_FLOOR:
        return 0.0
    lq = _ln_mean_tanh(m)
    if lq < math.log(0.5):
        return _mean_from_ln_mean_tanh(2.0 * lq)
    ls = _ln_complement(m)
    s = math.exp(ls)
    return _mean_from_ln_complement(math.log(2.0) + ls + math.log1p(-0.5 * s))


def _ga_means(N: int, sigma: float) -> np.ndarray:
    """Mean decision LLR of every polarized subchannel under BPSK/AWGN."""
    means = np.array([2.0 / sigma**2], dtype=np.float64)
    while means.size < N:
        minus = np.array([_ga_minus(m) for m in means])
        plus = np.minimum(2.0 * means, _GA_MEAN_CAP)
        nxt = np.empty(2 * means.size, dtype=np.float64)
        nxt[0::2] = minus
        nxt[1::2] = plus
        means = nxt
    return means


def _bhattacharyya_params(N: int, z0: float) -> np.ndarray:
    """Bhattacharyya parameter of every subchannel from an initial value."""
    z = np.array([z0], dtype=np.float64)
    while z.size < N:
        nxt = np.empty(2 * z.size, dtype=np.float64)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def read_frozen_set_file(path) -> tuple[int, np.ndarray]:
    """Parse a frozen-set file: line 1 is N, line 2 the ascending info set."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = [ln.strip() for ln in fh.readlines() if ln.strip()]
    except OSError as exc:
        raise FrozenSetFileError(f"cannot read frozen-set file {path}: {exc}") from exc
    if len(lines) < 2:
        raise FrozenSetFileError(f"frozen-set file {path} needs two lines (N, info set)")
    try:
        N = int(lines[0])
        info = np.array([int(tok) for tok in lines[1].split()], dtype=np.int64)
    except ValueError as exc:
        raise FrozenSetFileError(f"frozen-set file {path} is not numeric: {exc}") from exc
    if N < 2 or N & (N - 1):
        raise FrozenSetFileError(f"frozen-set file {path}: N={N} is not a power of two")
    if info.size == 0 or np.any(np.diff(info) <= 0) or info[0] < 0 or info[-1] >= N:
        raise FrozenSetFileError(
            f"frozen-set file {path}: indices must be strictly ascending and in [0, {N})")
    return N, info


def write_frozen_set_file(path, N: int, info_set) -> None:
    info = np.asarray(info_set, dtype=np.int64)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{N}\n")
        fh.write(" ".join(str(int(i)) for i in info) + "\n")


@lru_cache(maxsize=64)
def _cached_reliability_order(N: int, method: str, design_key: float) -> tuple:
    if method == "gaussian-approx":
        sigma = 1.0 / math.sqrt(design_key)
        scores = _ga_means(N, sigma)
        # Higher mean is better; ties resolve to the lower index.
        order = np.lexsort((np.arange(N), -scores))
    else:
        scores = _bhattacharyya_params(N, design_key)
        order = np.lexsort((np.arange(N), scores))
    return tuple(int(i) for i in order)


def construct_info_set(N, K_total, design_ebno_db=0.0, method="gaussian-approx",
                       *, design_rate=None, erasure_prob=None, frozen_file=None):
    """Select the ``K_total`` most reliable input positions.

    Parameters
    ----------
    N : int
        Block length, a power of two.
    K_total : int
        Information-set size (payload plus CRC bits).
    design_ebno_db : float
        Construction design point in dB.
    method : str
        ``"gaussian-approx"``, ``"bhattacharyya"`` or ``"file"``.
    design_rate : float, optional
        Rate used to convert the design point into noise variance /
        Bhattacharyya parameter.  Defaults to ``K_total / N``.
    erasure_prob : float, optional
        Explicit initial Bhattacharyya parameter; overrides the design point
        for ``method="bhattacharyya"``.
    frozen_file : path-like, optional
        Required for ``method="file"``; the file's info set is returned
        verbatim.

    Returns
    -------
    ndarray
        ``K_total`` indices in ascending order.
    """
    if N < 2 or N & (N - 1):
        raise ValueError(f"N must be a power of two >= 2, got {N}")
    if not 1 <= K_total <= N:
        raise ValueError(f"K_total must be in [1, {N}], got {K_total}")
    if method not in CONSTRUCTION_METHODS:
        raise ValueError(f"unknown construction method {method!r}")

    if method == "file":
        if frozen_file is None:
            raise ValueError("method 'file' requires frozen_file")
        file_n, info = read_frozen_set_file(frozen_file)
        if file_n != N:
            raise FrozenSetFileError(
                f"frozen-set file is for N={file_n}, requested N={N}")
        if info.size != K_total:
            raise FrozenSetFileError(
                f"frozen-set file holds {info.size} indices, requested K_total={K_total}")
        return info

    rate = K_total / N if design_rate is None else float(design_rate)
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"design rate must be in (0, 1], got {rate}")
    esn0 = rate * 10.0 ** (design_ebno_db / 10.0)
    if method == "gaussian-approx":
        design_key = 2.0 * esn0  # equals 1 / sigma^2
    else:
        z0 = math.exp(-esn0) if erasure_prob is None else float(erasure_prob)
        if not 0.0 < z0 < 1.0:
            raise ValueError(f"initial Bhattacharyya parameter must be in (0, 1), got {z0}")
        design_key = z0
    order = _cached_reliability_order(N, method, design_key)
    chosen = np.array(sorted(order[:K_total]), dtype=np.int64)
    return chosen


def make_code_spec(N, k, crc_bits=CRC_WIDTH, design_ebno_db=0.0,
                   construction="gaussian-approx", frozen_file=None, label=""):
    """Build a :class:`CodeSpec`, constructing its information set.

    The design point is converted to a noise variance at the transmitted
    rate ``(k + r) / N``: the CRC positions carry bits the construction must
    rank channels for, even though the channel's energy accounting treats
    them as overhead.
    """
    info = construct_info_set(N, k + crc_bits, design_ebno_db,
                              method=construction, frozen_file=frozen_file)
    return CodeSpec(N=N, k=k, r=crc_bits, design_ebno_db=design_ebno_db,
                    info_set=info, construction=construction, label=label)


def _as_bit_array(message) -> np.ndarray:
    bits = np.asarray(message, dtype=np.uint8)
    if bits.ndim != 1:
        raise ValueError("message must be one-dimensional")
    if bits.size and bits.max() > 1:
        raise ValueError("message must contain only bits")
    return bits


def crc16_compute(message) -> int:
    """CRC-16 of a bit sequence: the message polynomial, MSB first, reduced
    modulo ``z^16 + z^15 + z^2 + 1`` with a zero initial register, no
    reflection, and no final XOR."""
    bits = _as_bit_array(message)
    return int(crc16_kernel(bits))


def crc16_bits(message) -> np.ndarray:
    """CRC-16 as 16 bits, MSB first, ready to append to the payload."""
    rem = crc16_compute(message)
    return np.array([(rem >> (15 - i)) & 1 for i in range(16)], dtype=np.uint8)


def crc16_check(message_with_crc) -> bool:
    """True when the trailing 16 bits equal the CRC of the leading bits."""
    bits = _as_bit_array(message_with_crc)
    if bits.size < CRC_WIDTH:
        raise ValueError("message shorter than the CRC field")
    return crc16_compute(bits[:-CRC_WIDTH]) == int(
        bits[-CRC_WIDTH:].dot(1 << np.arange(15, -1, -1)))


def assemble_input_vector(payload, spec: CodeSpec) -> np.ndarray:
    """Place payload plus CRC on the information set; frozen inputs stay zero."""
    payload = _as_bit_array(payload)
    if payload.size != spec.k:
        raise ValueError(f"payload has {payload.size} bits, expected k={spec.k}")
    u = np.zeros(spec.N, dtype=np.uint8)
    if spec.r:
        u[spec.info_set] = np.concatenate([payload, crc16_bits(payload)])
    else:
        u[spec.info_set] = payload
    return u


def polar_encode(u) -> np.ndarray:
    """Encode an input vector through the butterfly network, O(N log N)."""
    u = _as_bit_array(u)
    N = u.size
    if N < 1 or N & (N - 1):
        raise ValueError(f"input length must be a power of two, got {N}")
    x = u.copy()
    polar_transform_kernel(x)
    return x
