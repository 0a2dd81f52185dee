"""Raw hyperspectral cube I/O and global min-max normalization.

Cubes live on disk as headerless little-endian rasters described by a JSON
sidecar with exactly five fields::

    {"height": 145, "width": 145, "bands": 220,
     "interleave": "BSQ", "sample_format": "u16le"}

In memory every cube is band-sequential: ``samples[c, m, n]`` is band ``c``
at row ``m``, column ``n``. Interleave only matters at the file boundary.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import FileSizeError, FormatError, ValidationError

__all__ = [
    "Interleave",
    "SampleFormat",
    "CubeHeader",
    "NormParams",
    "HyperCube",
    "read_header",
    "write_header",
    "read_cube",
    "write_cube",
    "normalize",
    "denormalize",
]


class Interleave(enum.IntEnum):
    # values double as the on-wire code in the bitstream header
    BSQ = 0
    BIL = 1
    BIP = 2


class SampleFormat(enum.Enum):
    U8 = "u8"
    U16LE = "u16le"
    F32LE = "f32le"
    F64LE = "f64le"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(_DTYPES[self])

    @property
    def itemsize(self) -> int:
        return self.dtype.itemsize

    @property
    def is_integer(self) -> bool:
        return self in (SampleFormat.U8, SampleFormat.U16LE)


_DTYPES = {
    SampleFormat.U8: "<u1",
    SampleFormat.U16LE: "<u2",
    SampleFormat.F32LE: "<f4",
    SampleFormat.F64LE: "<f8",
}

# on-disk axis order for each interleave, in terms of (band, row, col)
_DISK_AXES = {
    Interleave.BSQ: (0, 1, 2),
    Interleave.BIL: (1, 0, 2),
    Interleave.BIP: (1, 2, 0),
}


def _parse_enum(kind, value):
    if isinstance(value, kind):
        return value
    try:
        if kind is Interleave:
            return Interleave[str(value).upper()]
        return SampleFormat(str(value).lower())
    except (KeyError, ValueError):
        raise FormatError(f"unknown {kind.__name__.lower()}: {value!r}") from None


@dataclass(frozen=True)
class CubeHeader:
    height: int
    width: int
    bands: int
    interleave: Interleave = Interleave.BSQ
    sample_format: SampleFormat = SampleFormat.F32LE

    def __post_init__(self):
        object.__setattr__(self, "interleave", _parse_enum(Interleave, self.interleave))
        object.__setattr__(self, "sample_format", _parse_enum(SampleFormat, self.sample_format))
        for name in ("height", "width", "bands"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValidationError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def shape(self) -> tuple[int, int, int]:
        """Canonical in-memory shape ``(bands, height, width)``."""
        return (self.bands, self.height, self.width)

    @property
    def n_samples(self) -> int:
        return self.height * self.width * self.bands

    @property
    def nbytes(self) -> int:
        return self.n_samples * self.sample_format.itemsize

    def to_dict(self) -> dict:
        return {
            "height": self.height,
            "width": self.width,
            "bands": self.bands,
            "interleave": self.interleave.name,
            "sample_format": self.sample_format.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> CubeHeader:
        expected = {"height", "width", "bands", "interleave", "sample_format"}
        if set(d) != expected:
            raise FormatError(f"header fields must be exactly {sorted(expected)}, got {sorted(d)}")
        return cls(**d)


@dataclass(frozen=True)
class NormParams:
    """Affine map between raw samples and [0, 1]; ``lo == hi`` only for constant cubes."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.hi < self.lo:
            raise ValidationError(f"invalid normalization range lo={self.lo} hi={self.hi}")

    @property
    def span(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True, eq=False)
class HyperCube:
    """A cube of real samples in band-sequential order.

    ``norm`` is set exactly when ``samples`` hold normalized values in [0, 1].
    """

    header: CubeHeader
    samples: np.ndarray
    norm: NormParams | None = field(default=None)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.size != self.header.n_samples:
            raise ValidationError(
                f"expected {self.header.n_samples} samples for {self.header.shape}, got {samples.size}"
            )
        samples = samples.reshape(self.header.shape)
        if samples.flags.writeable:
            samples = samples.copy()
            samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.header.shape

    @property
    def is_normalized(self) -> bool:
        return self.norm is not None

    def spectra(self) -> np.ndarray:
        """Per-pixel spectra as a ``(height*width, bands)`` array in row-major pixel order."""
        return self.samples.reshape(self.header.bands, -1).T

    @classmethod
    def from_spectra(cls, spectra: np.ndarray, header: CubeHeader,
                     norm: NormParams | None = None) -> HyperCube:
        spectra = np.asarray(spectra)
        return cls(header, np.ascontiguousarray(spectra.T), norm)


def read_header(path: str | os.PathLike) -> CubeHeader:
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON header ({e})") from None
    if not isinstance(data, dict):
        raise FormatError(f"{path}: header must be a JSON object")
    return CubeHeader.from_dict(data)


def write_header(header: CubeHeader, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(header.to_dict(), indent=2) + "\n")


def read_cube(path: str | os.PathLike, header: CubeHeader) -> HyperCube:
    """Read a raw cube file laid out as ``header`` describes.

    Samples come back as float64 in canonical order, unnormalized.
    """
    size = os.path.getsize(path)
    if size != header.nbytes:
        raise FileSizeError(
            f"{path}: expected {header.nbytes} bytes for {header.height}x{header.width}x"
            f"{header.bands} {header.sample_format.value}, file has {size}"
        )
    raw = np.fromfile(path, dtype=header.sample_format.dtype)
    axes = _DISK_AXES[header.interleave]
    disk_shape = tuple(header.shape[a] for a in axes)
    canonical = np.moveaxis(raw.reshape(disk_shape), range(3), axes)
    return HyperCube(header, canonical.astype(np.float64))


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def write_cube(cube: HyperCube, path: str | os.PathLike, header: CubeHeader | None = None) -> None:
    """Write ``cube`` in the layout and sample format of ``header``.

    Integer formats clamp to the representable range and round half away from
    zero; float formats are cast directly.
    """
    header = header or cube.header
    if header.shape != cube.shape:
        raise ValidationError(f"cube shape {cube.shape} does not match header {header.shape}")
    fmt = header.sample_format
    data = cube.samples
    if fmt.is_integer:
        if not np.all(np.isfinite(data)):
            raise ValidationError("cannot write non-finite samples to an integer format")
        info = np.iinfo(fmt.dtype)
        data = _round_half_away(np.clip(data, info.min, info.max))
    disk = np.transpose(data, _DISK_AXES[header.interleave])
    with open(path, "wb") as f:
        f.write(np.ascontiguousarray(disk, dtype=fmt.dtype).tobytes())


def normalize(cube: HyperCube) -> HyperCube:
    """Map raw samples affinely onto [0, 1] using the global min and max."""
    x = cube.samples
    if not np.all(np.isfinite(x)):
        raise ValidationError("cube contains non-finite samples")
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return replace(cube, samples=np.zeros_like(x), norm=NormParams(lo, hi))
    # clip guards the last-ulp overshoot of the division
    v = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    return replace(cube, samples=v, norm=NormParams(lo, hi))


def denormalize(cube: HyperCube, norm: NormParams | None = None) -> HyperCube:
    norm = norm or cube.norm
    if norm is None:
        raise ValidationError("denormalize needs NormParams")
    return replace(cube, samples=norm.lo + cube.samples * norm.span, norm=None)
