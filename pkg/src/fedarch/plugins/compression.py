"""Message compressor: uniform per-vector quantization.

A weight vector is stored as (min, max, bits, packed codes). Payload size
is ceil(d*bits/8) + 24 header bytes (min and max as float64, plus bits and
element count). Round-trip error is bounded by half a quantization step:
(max-min) / (2^bits - 1) / 2, plus float representation noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from ..errors import ConfigError

HEADER_BYTES = 24
MIN_BITS, MAX_BITS = 2, 16


def quantized_payload_bytes(d: int, bits: int) -> int:
    return ceil(d * bits / 8) + HEADER_BYTES


@dataclass
class QuantizedVector:
    vmin: float
    vmax: float
    bits: int
    n: int
    packed: bytes

    @property
    def payload_bytes(self) -> int:
        return len(self.packed) + HEADER_BYTES


def _check_bits(bits: int) -> None:
    if not MIN_BITS <= bits <= MAX_BITS:
        raise ConfigError(f"compressor bits must be in [{MIN_BITS}, {MAX_BITS}]")


def compress(w: np.ndarray, bits: int) -> QuantizedVector:
    _check_bits(bits)
    w = np.asarray(w, dtype=np.float64).ravel()
    vmin, vmax = float(w.min()), float(w.max())
    levels = (1 << bits) - 1
    if vmax > vmin:
        codes = np.rint((w - vmin) / (vmax - vmin) * levels).astype(np.uint32)
    else:
        codes = np.zeros(len(w), dtype=np.uint32)
    # bit-pack: big-endian within each code, codes concatenated
    shifts = np.arange(bits - 1, -1, -1, dtype=np.uint32)
    bit_rows = ((codes[:, None] >> shifts) & 1).astype(np.uint8)
    flat = bit_rows.ravel()
    pad = (-len(flat)) % 8
    if pad:
        flat = np.concatenate([flat, np.zeros(pad, dtype=np.uint8)])
    packed = np.packbits(flat).tobytes()
    return QuantizedVector(vmin=vmin, vmax=vmax, bits=bits, n=len(w), packed=packed)


def decompress(q: QuantizedVector) -> np.ndarray:
    bits = q.bits
    _check_bits(bits)
    flat = np.unpackbits(np.frombuffer(q.packed, dtype=np.uint8))[: q.n * bits]
    bit_rows = flat.reshape(q.n, bits).astype(np.uint32)
    weights = (1 << np.arange(bits - 1, -1, -1, dtype=np.uint32))
    codes = (bit_rows * weights).sum(axis=1)
    if q.vmax > q.vmin:
        levels = (1 << bits) - 1
        return q.vmin + codes.astype(np.float64) * (q.vmax - q.vmin) / levels
    return np.full(q.n, q.vmin, dtype=np.float64)


def roundtrip_error_bound(q: QuantizedVector) -> float:
    if q.vmax <= q.vmin:
        return 1e-12
    step = (q.vmax - q.vmin) / ((1 << q.bits) - 1)
    return step / 2 + 1e-9 * max(abs(q.vmin), abs(q.vmax))
