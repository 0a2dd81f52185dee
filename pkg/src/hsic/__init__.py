"""Hyperspectral image compression with sine-activated implicit neural representations.

A cube is encoded by overfitting a small coordinate MLP to the map from pixel
position to spectrum and storing its (optionally reduced-precision) weights;
decoding evaluates the network on the pixel grid.
"""

from .codec import (CompressedModel, TrainSettings, decode_partial, decompress, dequantize,
                    make_grid, overfit, quantize, read_bitstream, write_bitstream)
from .cube_io import (CubeHeader, HyperCube, Interleave, NormParams, SampleFormat, denormalize,
                      normalize, read_cube, read_header, write_cube, write_header)
from .metrics import RdPoint, bpppb, mse, psnr
from .search import Budget, SearchSpace, enumerate_candidates, search
from .siren import SirenConfig, SirenModel, forward, init_siren, loss_and_grad, param_count

__version__ = "0.1.0"
