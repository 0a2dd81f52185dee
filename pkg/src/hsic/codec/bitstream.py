"""Reduced-precision parameter payloads and the ``.hsic`` container.

Byte layout, all integers little-endian::

    offset size  field
    0      4     magic  b"HSIC"
    4      1     version (u8, currently 1)
    5      4     height M (u32)
    9      4     width N (u32)
    13     4     bands C (u32)
    17     1     interleave of the source cube (u8: 0 BSQ, 1 BIL, 2 BIP)
    18     1     hidden layers d (u8)
    19     2     hidden width w (u16)
    21     4     omega0 (f32)
    25     1     bits per parameter (u8: 32, 16 or 8)
    26     8     normalization lo (f64)
    34     8     normalization hi (f64)
    42     ...   payload

The payload walks the layers input to output, each layer's weights row-major
followed by its bias. At 32 and 16 bits every parameter is an IEEE binary32 or
binary16 value. At 8 bits each layer starts with its f32 ``scale`` and f32
``zero`` and is followed by one u8 code per parameter, decoded as
``zero + code * scale``.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from ..cube_io import CubeHeader, Interleave, NormParams, SampleFormat
from ..errors import (BadMagicError, FormatError, PayloadLengthError, TruncatedError,
                      ValidationError, VersionError)
from ..siren import SirenConfig, SirenModel, param_count

__all__ = [
    "MAGIC",
    "VERSION",
    "HEADER_BYTES",
    "HEADER_BITS",
    "SUPPORTED_BITS",
    "CompressedModel",
    "payload_nbytes",
    "quantize",
    "dequantize",
    "encode",
    "decode",
    "write_bitstream",
    "read_bitstream",
]

MAGIC = b"HSIC"
VERSION = 1
SUPPORTED_BITS = (32, 16, 8)

_HEADER = struct.Struct("<4sBIIIBBHfBdd")
HEADER_BYTES = _HEADER.size
HEADER_BITS = 8 * HEADER_BYTES

_F16_MAX = float(np.finfo(np.float16).max)


@dataclass(frozen=True)
class CompressedModel:
    height: int
    width: int
    bands: int
    interleave: int
    hidden_layers: int
    hidden_width: int
    omega0: float
    bits: int
    lo: float
    hi: float
    payload: bytes

    @property
    def config(self) -> SirenConfig:
        return SirenConfig(self.hidden_layers, self.hidden_width, self.bands, self.omega0)

    @property
    def norm(self) -> NormParams:
        return NormParams(self.lo, self.hi)

    @property
    def cube_header(self) -> CubeHeader:
        return CubeHeader(self.height, self.width, self.bands,
                          Interleave(self.interleave), SampleFormat.F32LE)

    @property
    def param_count(self) -> int:
        return param_count(self.config)

    @property
    def total_bits(self) -> int:
        return HEADER_BITS + 8 * len(self.payload)


def payload_nbytes(config: SirenConfig, bits: int) -> int:
    if bits not in SUPPORTED_BITS:
        raise ValidationError(f"bits must be one of {SUPPORTED_BITS}, got {bits}")
    n = param_count(config)
    if bits == 8:
        return n + 8 * len(config.layer_dims)
    return n * bits // 8


def _layer_params(model: SirenModel):
    for W, b in model.layers:
        yield np.concatenate([W.ravel(), b.ravel()]).astype(np.float64)


def _quantize_u8(values: np.ndarray) -> bytes:
    lo, hi = float(values.min()), float(values.max())
    if hi > lo:
        # exact-ratio codes; only the stored scale/zero are rounded to f32
        q = np.floor((values - lo) * (255.0 / (hi - lo)) + 0.5)
        codes = np.clip(q, 0, 255).astype(np.uint8)
    else:
        codes = np.zeros(values.size, dtype=np.uint8)
    scale = np.float32((hi - lo) / 255.0)
    return struct.pack("<ff", scale, np.float32(lo)) + codes.tobytes()


def quantize(model: SirenModel, bits: int, header: CubeHeader, norm: NormParams) -> CompressedModel:
    """Encode ``model`` and the cube metadata needed to rebuild it."""
    cfg = model.config
    if bits not in SUPPORTED_BITS:
        raise ValidationError(f"bits must be one of {SUPPORTED_BITS}, got {bits}")
    if header.bands != cfg.out_dim:
        raise ValidationError(f"model outputs {cfg.out_dim} bands, header says {header.bands}")
    if cfg.hidden_layers > 0xFF or cfg.hidden_width > 0xFFFF:
        raise ValidationError("architecture exceeds the header field widths (d <= 255, w <= 65535)")
    flat = model.flat_params()
    if not np.all(np.isfinite(flat)):
        raise ValidationError("cannot quantize non-finite parameters")
    if bits == 32:
        payload = flat.astype("<f4").tobytes()
    elif bits == 16:
        payload = np.clip(flat, -_F16_MAX, _F16_MAX).astype("<f2").tobytes()
    else:
        payload = b"".join(_quantize_u8(p) for p in _layer_params(model))
    return CompressedModel(
        header.height, header.width, header.bands, int(header.interleave),
        cfg.hidden_layers, cfg.hidden_width, cfg.omega0, bits,
        float(norm.lo), float(norm.hi), payload,
    )


def dequantize(cm: CompressedModel, precision: str = "fp32") -> SirenModel:
    """Rebuild the network described by ``cm`` at training precision."""
    cfg = cm.config
    expected = payload_nbytes(cfg, cm.bits)
    if len(cm.payload) != expected:
        raise PayloadLengthError(
            f"payload holds {len(cm.payload)} bytes, d={cfg.hidden_layers} w={cfg.hidden_width} "
            f"C={cfg.out_dim} at {cm.bits} bits needs {expected}"
        )
    template = SirenModel(cfg, tuple((np.zeros((o, i)), np.zeros(o)) for o, i in cfg.layer_dims),
                          "fp32")
    if cm.bits == 32:
        flat = np.frombuffer(cm.payload, dtype="<f4")
    elif cm.bits == 16:
        flat = np.frombuffer(cm.payload, dtype="<f2").astype(np.float32)
    else:
        chunks, pos = [], 0
        for o, i in cfg.layer_dims:
            n = o * i + o
            scale, zero = np.frombuffer(cm.payload, dtype="<f4", count=2, offset=pos)
            codes = np.frombuffer(cm.payload, dtype=np.uint8, count=n, offset=pos + 8)
            chunks.append(zero + codes.astype(np.float32) * scale)
            pos += 8 + n
        flat = np.concatenate(chunks)
    return template.with_flat_params(flat).astype(precision)


def encode(cm: CompressedModel) -> bytes:
    head = _HEADER.pack(MAGIC, VERSION, cm.height, cm.width, cm.bands, cm.interleave,
                        cm.hidden_layers, cm.hidden_width, cm.omega0, cm.bits, cm.lo, cm.hi)
    return head + cm.payload


def decode(data: bytes) -> CompressedModel:
    if len(data) < HEADER_BYTES:
        if data[:len(MAGIC)] != MAGIC[:len(data)]:
            raise BadMagicError(f"bad magic {data[:4]!r}")
        raise TruncatedError(f"header needs {HEADER_BYTES} bytes, got {len(data)}")
    magic, version, M, N, C, il, d, w, omega0, bits, lo, hi = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise VersionError(f"unsupported bitstream version {version}, expected {VERSION}")
    try:
        Interleave(il)
        cfg = SirenConfig(d, w, C, float(omega0))
        expected = payload_nbytes(cfg, bits)
        NormParams(lo, hi)
        if M < 1 or N < 1:
            raise ValidationError("zero image dimension")
    except ValueError as e:
        raise FormatError(f"corrupt header: {e}") from None
    actual = len(data) - HEADER_BYTES
    if actual < expected:
        raise TruncatedError(f"payload truncated: expected {expected} bytes, got {actual}")
    if actual > expected:
        raise PayloadLengthError(f"payload has {actual} bytes, header implies {expected}")
    return CompressedModel(M, N, C, il, d, w, float(omega0), bits, lo, hi, bytes(data[HEADER_BYTES:]))


def write_bitstream(cm: CompressedModel, path: str | os.PathLike) -> None:
    with open(path, "wb") as f:
        f.write(encode(cm))


def read_bitstream(path: str | os.PathLike) -> CompressedModel:
    with open(path, "rb") as f:
        return decode(f.read())
