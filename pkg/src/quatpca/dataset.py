"""Labeled color-image collections and on-disk artifacts.

A dataset is a directory of class subdirectories holding 8-bit RGB
images (PNG or binary PPM).  A pixel with channels (r, g, b) becomes the
pure quaternion (r i + g j + b k) / 255, so an h x w image is an h x w
pure quaternion matrix.  Sample order is deterministic: sorted by label,
then by file name.

Fitted bases serialize to a little-endian binary format (magic "BQP1"):
header u32 version, u32 m n k1 k2, f64 s p (p = +inf allowed), followed
by row-major float64 planes of U (4), V (4), d_left, d_right and the
mean (4).  The format is bit-exact and language neutral.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidDataset, InvalidParameter, IoError
from .quaternion import QMatrix
from .solver import BasisPair, FitParams

__all__ = [
    "Sample",
    "SampleSet",
    "load_dataset",
    "center",
    "split",
    "save_basis",
    "load_basis",
    "export_image",
]

_IMAGE_SUFFIXES = (".png", ".ppm")


@dataclass(frozen=True)
class Sample:
    """One labeled image; ``source`` keeps the original path when loaded."""

    label: str
    image: QMatrix
    source: str | None = None


@dataclass(frozen=True, eq=False)
class SampleSet:
    """An ordered collection of labeled images plus the training mean.

    ``centered`` marks that ``mean`` has been subtracted from every
    image.  Images from :func:`load_dataset` are pure quaternions and
    stay pure under centering because the mean of pure matrices is pure.
    """

    samples: tuple[Sample, ...]
    mean: QMatrix
    centered: bool = False

    def __post_init__(self):
        shape = self.mean.shape
        for sample in self.samples:
            if sample.image.shape != shape:
                raise InvalidDataset(
                    f"mixed image dimensions: {sample.image.shape} vs {shape}")

    @classmethod
    def build(cls, labeled_images, centered=False):
        """Assemble a set from (label, image) pairs with a zero mean."""
        samples = tuple(Sample(label, image) for label, image in labeled_images)
        if not samples:
            raise InvalidDataset("need at least one sample")
        m, n = samples[0].image.shape
        return cls(samples=samples, mean=QMatrix.zeros(m, n), centered=centered)

    def __len__(self):
        return len(self.samples)

    @property
    def shape(self):
        return self.mean.shape

    def images(self):
        return [s.image for s in self.samples]

    def labels(self):
        return [s.label for s in self.samples]

    def classes(self):
        return sorted({s.label for s in self.samples})

    def by_class(self):
        groups: dict[str, list[int]] = {}
        for idx, s in enumerate(self.samples):
            groups.setdefault(s.label, []).append(idx)
        return groups

    def subset(self, indices):
        picked = tuple(self.samples[i] for i in indices)
        return SampleSet(samples=picked, mean=self.mean, centered=self.centered)


def _read_ppm(path):
    data = path.read_bytes()
    if not data.startswith(b"P6"):
        raise IoError(f"{path}: not a binary PPM (P6) file")
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise IoError(f"{path}: malformed PPM header")
        fields.append(int(token))
    if pos >= len(data):
        raise IoError(f"{path}: truncated PPM header")
    pos += 1  # single whitespace byte ends the header
    width, height, maxval = fields
    if maxval != 255:
        raise IoError(f"{path}: only 8-bit PPM supported (maxval 255, got {maxval})")
    raster = data[pos:]
    if len(raster) != width * height * 3:
        raise IoError(f"{path}: raster has {len(raster)} bytes, expected {width * height * 3}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)


def _write_ppm(path, rgb):
    h, w, _ = rgb.shape
    header = b"P6\n%d %d\n255\n" % (w, h)
    path.write_bytes(header + rgb.tobytes())


def _read_image(path):
    try:
        if path.suffix.lower() == ".ppm":
            return _read_ppm(path)
        from PIL import Image

        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except IoError:
        raise
    except Exception as exc:
        raise IoError(f"{path}: cannot read image ({exc})") from exc


def _image_to_pure(rgb):
    planes = rgb.astype(np.float64).transpose(2, 0, 1) / 255.0
    h, w = rgb.shape[:2]
    return QMatrix(np.concatenate([np.zeros((1, h, w)), planes]))


def load_dataset(root):
    """Load every class subdirectory of ``root`` into a SampleSet."""
    rootp = Path(root)
    if not rootp.is_dir():
        raise IoError(f"{rootp}: not a readable directory")
    class_dirs = sorted((d for d in rootp.iterdir() if d.is_dir()),
                        key=lambda d: d.name)
    if not class_dirs:
        raise InvalidDataset(f"{rootp}: no class subdirectories")
    samples = []
    shape = None
    for cdir in class_dirs:
        files = sorted((f for f in cdir.iterdir()
                        if f.is_file() and f.suffix.lower() in _IMAGE_SUFFIXES),
                       key=lambda f: f.name)
        for f in files:
            image = _image_to_pure(_read_image(f))
            if shape is None:
                shape = image.shape
            elif image.shape != shape:
                raise InvalidDataset(
                    f"{f}: image dimensions {image.shape} differ from {shape}")
            samples.append(Sample(label=cdir.name, image=image, source=str(f)))
    if not samples:
        raise InvalidDataset(f"{rootp}: no images found")
    m, n = shape
    return SampleSet(samples=tuple(samples), mean=QMatrix.zeros(m, n), centered=False)


def export_image(image, path):
    """Write a quaternion matrix as an 8-bit RGB image.

    The i, j, k planes become the R, G, B channels, clipped to [0, 1]
    and scaled back to the 8-bit grid; any real plane is dropped.  The
    format follows the file suffix (.ppm or .png).  Exporting an image
    loaded from a canonical P6 file reproduces its bytes.
    """
    planes = np.clip(image.data[1:], 0.0, 1.0)
    rgb = np.rint(planes * 255.0).astype(np.uint8).transpose(1, 2, 0)
    pathp = Path(path)
    try:
        if pathp.suffix.lower() == ".ppm":
            _write_ppm(pathp, rgb)
        elif pathp.suffix.lower() == ".png":
            from PIL import Image

            Image.fromarray(rgb, mode="RGB").save(pathp)
        else:
            raise IoError(f"{pathp}: unsupported image suffix {pathp.suffix!r}")
    except IoError:
        raise
    except Exception as exc:
        raise IoError(f"{pathp}: cannot write image ({exc})") from exc


def center(sample_set):
    """Subtract the mean image from every sample; idempotent."""
    if sample_set.centered:
        return sample_set
    if len(sample_set) == 0:
        raise InvalidDataset("cannot center an empty sample set")
    mean_data = np.mean([s.image.data for s in sample_set.samples], axis=0)
    mean = QMatrix(mean_data)
    shifted = tuple(
        replace(s, image=QMatrix(s.image.data - mean_data))
        for s in sample_set.samples)
    return SampleSet(samples=shifted, mean=mean, centered=True)


def split(sample_set, fractions, seed):
    """Stratified (train, validation, test) split.

    ``fractions`` are three nonnegative numbers summing to one.  Within
    each class, the validation and test parts receive floor(fraction *
    count) samples but at least one when their fraction is nonzero;
    leftovers go to the training part (or to the largest nonzero part
    when the training fraction is zero).  The shuffle is driven only by
    ``seed``, and each part keeps the original sample order.
    """
    fracs = [float(x) for x in fractions]
    if len(fracs) != 3:
        raise InvalidParameter(f"expected three split fractions, got {len(fracs)}")
    if any(x < 0 for x in fracs):
        raise InvalidParameter(f"split fractions must be nonnegative, got {fracs}")
    if abs(sum(fracs) - 1.0) > 1e-9:
        raise InvalidParameter(f"split fractions must sum to 1, got {sum(fracs)}")
    nonzero = sum(1 for x in fracs if x > 0)

    rng = np.random.default_rng(seed)
    parts: tuple[list[int], list[int], list[int]] = ([], [], [])
    groups = sample_set.by_class()
    for label in sorted(groups):
        idxs = groups[label]
        count = len(idxs)
        if count < nonzero:
            raise InvalidDataset(
                f"class {label!r} has {count} samples but the split needs {nonzero}")
        perm = rng.permutation(count)
        n_val = max(1, math.floor(fracs[1] * count)) if fracs[1] > 0 else 0
        n_test = max(1, math.floor(fracs[2] * count)) if fracs[2] > 0 else 0
        n_train = count - n_val - n_test
        if fracs[0] == 0:
            # Leftovers go to the largest nonzero part instead.
            if fracs[1] >= fracs[2]:
                n_val += n_train
            else:
                n_test += n_train
            n_train = 0
        shuffled = [idxs[t] for t in perm]
        parts[0].extend(shuffled[:n_train])
        parts[1].extend(shuffled[n_train:n_train + n_val])
        parts[2].extend(shuffled[n_train + n_val:])
    return tuple(sample_set.subset(sorted(part)) for part in parts)


# -- basis serialization ----------------------------------------------

_MAGIC = b"BQP1"
_VERSION = 1


def _plane_bytes(arr):
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def save_basis(basis, path):
    """Write a BasisPair in the binary BQP1 format."""
    m, n, k1, k2 = basis.m, basis.n, basis.k1, basis.k2
    blob = [
        _MAGIC,
        struct.pack("<IIIII", _VERSION, m, n, k1, k2),
        struct.pack("<dd", float(basis.params.s), float(basis.params.p)),
    ]
    for c in range(4):
        blob.append(_plane_bytes(basis.U.data[c]))
    for c in range(4):
        blob.append(_plane_bytes(basis.V.data[c]))
    blob.append(_plane_bytes(basis.d_left))
    blob.append(_plane_bytes(basis.d_right))
    for c in range(4):
        blob.append(_plane_bytes(basis.mean.data[c]))
    try:
        Path(path).write_bytes(b"".join(blob))
    except OSError as exc:
        raise IoError(f"{path}: cannot write basis ({exc})") from exc


def load_basis(path):
    """Read a BasisPair back; rejects malformed files with FormatError."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"{path}: cannot read basis ({exc})") from exc

    header_size = 4 + struct.calcsize("<IIIII") + struct.calcsize("<dd")
    if len(data) < header_size:
        raise FormatError(f"{path}: truncated header")
    if data[:4] != _MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}")
    version, m, n, k1, k2 = struct.unpack_from("<IIIII", data, 4)
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    s, p = struct.unpack_from("<dd", data, 4 + struct.calcsize("<IIIII"))

    counts = [m * k1] * 4 + [n * k2] * 4 + [k1, k2] + [m * n] * 4
    expected = header_size + 8 * sum(counts)
    if len(data) < expected:
        raise FormatError(f"{path}: truncated payload ({len(data)} of {expected} bytes)")
    if len(data) > expected:
        raise FormatError(f"{path}: trailing data ({len(data) - expected} extra bytes)")

    pos = header_size
    arrays = []
    for count in counts:
        arrays.append(np.frombuffer(data, dtype="<f8", count=count, offset=pos))
        pos += 8 * count

    try:
        U = QMatrix(np.stack([a.reshape(m, k1) for a in arrays[0:4]]))
        V = QMatrix(np.stack([a.reshape(n, k2) for a in arrays[4:8]]))
        d_left = arrays[8].copy()
        d_right = arrays[9].copy()
        mean = QMatrix(np.stack([a.reshape(m, n) for a in arrays[10:14]]))
        params = FitParams(s=float(s), p=float(p), k1=int(k1), k2=int(k2))
        problems = params.violations(m, n)
        if problems:
            raise FormatError(f"{path}: invalid hyperparameters: " + "; ".join(problems))
        return BasisPair(U=U, V=V, d_left=d_left, d_right=d_right,
                         params=params, mean=mean)
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"{path}: malformed payload ({exc})") from exc
