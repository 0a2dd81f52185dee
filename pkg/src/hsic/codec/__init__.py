"""Encode (overfit, quantize, serialize) and decode (evaluate on a grid)."""

from .bitstream import (HEADER_BITS, HEADER_BYTES, MAGIC, SUPPORTED_BITS, VERSION,
                        CompressedModel, decode, dequantize, encode, payload_nbytes,
                        quantize, read_bitstream, write_bitstream)
from .decoder import decode_partial, decode_region, decompress, reconstruct_spectra
from .grid import CoordGrid, axis_coords, make_grid, pixel_coords
from .train import TrainSettings, overfit, snapshot_mse

__all__ = [
    "HEADER_BITS", "HEADER_BYTES", "MAGIC", "SUPPORTED_BITS", "VERSION",
    "CompressedModel", "decode", "dequantize", "encode", "payload_nbytes",
    "quantize", "read_bitstream", "write_bitstream",
    "decode_partial", "decode_region", "decompress", "reconstruct_spectra",
    "CoordGrid", "axis_coords", "make_grid", "pixel_coords",
    "TrainSettings", "overfit", "snapshot_mse",
]
