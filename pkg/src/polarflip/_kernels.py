"""Numba-compiled hot loops shared by the encoder, the CRC, and the SC engine.

Everything here operates on flat preallocated arrays so the per-frame decode
loop stays allocation-free.  The level-``s`` scratch slice of both the
intermediate-LLR array and the partial-sum array starts at offset
``(1 << s) - 1`` and has width ``1 << s``; summed over ``s = 0..n-1`` this is
exactly the ``N - 1`` entries of the flat memory layout the decoder models.
"""

import numpy as np
from numba import njit

# Generator z^16 + z^15 + z^2 + 1.  0x8005 keeps the usual convention of
# dropping the implicit top coefficient; 0x18005 carries it for long division.
CRC16_POLY = 0x8005
_CRC16_DIVISOR = 0x18005


@njit(cache=True, nogil=True)
def crc16_kernel(bits):
    """Remainder of the message polynomial (MSB first) modulo the generator."""
    reg = 0
    for i in range(bits.size):
        reg = (reg << 1) | bits[i]
        if reg & 0x10000:
            reg ^= 0x18005
    return reg


@njit(cache=True, nogil=True)
def polar_transform_kernel(x):
    """In-place butterfly computing ``u @ G^(kron n)`` over GF(2)."""
    N = x.size
    half = 1
    while half < N:
        step = 2 * half
        for base in range(0, N, step):
            for j in range(base, base + half):
                x[j] ^= x[j + half]
        half = step
    return x


@njit(cache=True, nogil=True)
def sc_pass_kernel(alpha_ch, frozen, flip, start_leaf, pe_count,
                   alpha_int, beta, u_hat, alpha_dec, carry):
    """Run one SC traversal and return its cycle count.

    ``start_leaf = 0`` is a full pass.  ``start_leaf = N // 2`` resumes from
    the codeword midpoint; the caller must have preloaded the level ``n - 1``
    slice of ``beta`` (the root's left-child partial sums) and
    ``u_hat[: N // 2]``.  Cycle accounting follows the semi-parallel model:
    an f- or g-stage of width ``w`` costs ``ceil(w / pe_count)`` cycles, each
    consumed partial-sum combine costs one cycle and combines on the
    rightmost root-to-leaf path (which nothing consumes) cost none.
    """
    N = alpha_ch.size
    n = 0
    while (1 << n) < N:
        n += 1
    cycles = 0
    for j in range(start_leaf, N):
        if j == 0:
            lo = n
        else:
            z = 0
            while ((j >> z) & 1) == 0:
                z += 1
            w = 1 << z
            off = w - 1
            if z == n - 1:
                for i in range(w):
                    alpha_int[off + i] = ((1.0 - 2.0 * beta[off + i]) * alpha_ch[i]
                                          + alpha_ch[i + w])
            else:
                poff = 2 * w - 1
                for i in range(w):
                    alpha_int[off + i] = ((1.0 - 2.0 * beta[off + i]) * alpha_int[poff + i]
                                          + alpha_int[poff + i + w])
            cycles += (w + pe_count - 1) // pe_count
            lo = z
        for s in range(lo - 1, -1, -1):
            w = 1 << s
            off = w - 1
            if s == n - 1:
                for i in range(w):
                    a = alpha_ch[i]
                    d = alpha_ch[i + w]
                    v = min(abs(a), abs(d))
                    if (a < 0.0) != (d < 0.0):
                        v = -v
                    alpha_int[off + i] = v
            else:
                poff = 2 * w - 1
                for i in range(w):
                    a = alpha_int[poff + i]
                    d = alpha_int[poff + i + w]
                    v = min(abs(a), abs(d))
                    if (a < 0.0) != (d < 0.0):
                        v = -v
                    alpha_int[off + i] = v
            cycles += (w + pe_count - 1) // pe_count
        llr = alpha_int[0]
        alpha_dec[j] = llr
        if frozen[j]:
            u_hat[j] = 0
        else:
            bit = 1 if llr < 0.0 else 0
            u_hat[j] = bit ^ flip[j]
        if j != N - 1:
            # Climb while this leaf closes right children; the carry holds the
            # completing child's partial sums and doubles in width per level.
            carry[0] = u_hat[j]
            s = 0
            while ((j >> s) & 1) == 1:
                w = 1 << s
                off = w - 1
                for i in range(w):
                    carry[w + i] = carry[i]
                    carry[i] ^= beta[off + i]
                cycles += 1
                s += 1
            w = 1 << s
            off = w - 1
            for i in range(w):
                beta[off + i] = carry[i]
    return cycles
