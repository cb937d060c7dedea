"""Face-image corpora, train/test splits and synthetic test data.

Images are stored as an ``(n, r, n')`` float64 stack; vector datasets as a
``d x n`` matrix whose columns are samples.
"""
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DatasetError,
    EmptyDirectory,
    InconsistentDimensions,
    InsufficientImagesForSubject,
    MalformedHeader,
)

CENTER_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ImageDataset:
    """Stack of equally sized images with one subject label per image.

    ``mean`` is the r x n' offset removed by :func:`center` (None until then).
    """

    images: np.ndarray
    labels: tuple
    mean: Optional[np.ndarray] = None
    centered: bool = False
    paths: tuple = ()

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.float64)
        if images.ndim == 2:
            images = images[None]
        if images.ndim != 3 or images.shape[0] < 1 or min(images.shape[1:]) < 1:
            raise InconsistentDimensions(f"expected a non-empty (n, r, n') stack, got {images.shape}")
        if not np.all(np.isfinite(images)):
            raise ValueError("image stack contains NaN or Inf")
        labels = tuple(self.labels)
        if len(labels) != images.shape[0]:
            raise DatasetError(f"{len(labels)} labels for {images.shape[0]} images")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.images.shape[0]

    @property
    def r(self) -> int:
        return self.images.shape[1]

    @property
    def n_prime(self) -> int:
        return self.images.shape[2]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.images.shape[1:]

    def __len__(self):
        return self.n


@dataclass(frozen=True, eq=False)
class VectorDataset:
    """``d x n`` sample matrix (column i is sample i).

    ``mean`` is the offset removed by :func:`center`; ``image_shape`` is kept
    when the data came from :func:`vectorize` so it can be reshaped back.
    """

    data: np.ndarray
    labels: tuple
    mean: Optional[np.ndarray] = None
    centered: bool = False
    image_shape: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or min(data.shape) < 1:
            raise InconsistentDimensions(f"expected a non-empty d x n matrix, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("sample matrix contains NaN or Inf")
        labels = tuple(self.labels) if self.labels is not None else tuple(range(data.shape[1]))
        if len(labels) != data.shape[1]:
            raise DatasetError(f"{len(labels)} labels for {data.shape[1]} samples")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class LabeledSplit:
    train_indices: tuple
    test_indices: tuple

    def apply(self, ds):
        return take(ds, self.train_indices), take(ds, self.test_indices)


# --------------------------------------------------------------------------
# PGM and plain-text matrix IO


def _pgm_tokens(data: bytes, pos: int, count: int):
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise MalformedHeader("unexpected end of PGM header")
        tok = data[start:pos]
        if not tok.isdigit():
            raise MalformedHeader(f"non-numeric PGM header field {tok!r}")
        tokens.append(int(tok))
    return tokens, pos


def parse_pgm(data: bytes) -> np.ndarray:
    """Decode a binary (P5) or ASCII (P2) PGM with maxval <= 255.

    Returns an ``(height, width)`` float64 array of raw pixel values.
    """
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise MalformedHeader(f"not a P5/P2 PGM file (magic {magic!r})")
    if len(data) < 3 or not data[2:3].isspace() and data[2:3] != b"#":
        raise MalformedHeader("missing whitespace after PGM magic number")
    (width, height, maxval), pos = _pgm_tokens(data, 2, 3)
    if width < 1 or height < 1:
        raise MalformedHeader(f"bad PGM dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise MalformedHeader(f"unsupported PGM maxval {maxval} (need 1..255)")
    count = width * height
    if magic == b"P5":
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise MalformedHeader("missing whitespace before P5 raster")
        raster = data[pos + 1:pos + 1 + count]
        if len(raster) < count:
            raise MalformedHeader(f"truncated P5 raster: {len(raster)} of {count} bytes")
        pixels = np.frombuffer(raster, dtype=np.uint8)
    else:
        text = re.sub(rb"#[^\r\n]*", b" ", data[pos:])
        values = text.split()
        if len(values) < count:
            raise MalformedHeader(f"truncated P2 raster: {len(values)} of {count} values")
        try:
            pixels = np.array([int(v) for v in values[:count]], dtype=np.int64)
        except ValueError as exc:
            raise MalformedHeader(f"non-numeric P2 pixel: {exc}") from None
    if pixels.max(initial=0) > maxval or pixels.min(initial=0) < 0:
        raise MalformedHeader("pixel value outside [0, maxval]")
    return pixels.reshape(height, width).astype(np.float64)


def read_pgm(path) -> np.ndarray:
    return parse_pgm(Path(path).read_bytes())


def write_pgm(path, image, binary: bool = True) -> None:
    """Write an image as 8-bit PGM; values are rounded and clipped to [0, 255]."""
    img = np.clip(np.rint(np.asarray(image, dtype=np.float64)), 0, 255).astype(np.uint8)
    height, width = img.shape
    path = Path(path)
    if binary:
        path.write_bytes(b"P5\n%d %d\n255\n" % (width, height) + img.tobytes())
    else:
        rows = "\n".join(" ".join(str(v) for v in row) for row in img)
        path.write_text(f"P2\n{width} {height}\n255\n{rows}\n")


def load_matrix_text(path) -> np.ndarray:
    """Read a plain-text matrix: one row per line, entries whitespace-separated."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError:
            raise DatasetError(f"{path}:{lineno}: non-numeric entry") from None
        if len(rows[-1]) != len(rows[0]):
            raise InconsistentDimensions(f"{path}:{lineno}: expected {len(rows[0])} entries, got {len(rows[-1])}")
    if not rows:
        raise DatasetError(f"{path}: empty matrix file")
    return np.array(rows, dtype=np.float64)


def save_matrix_text(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    Path(path).write_text("".join(" ".join(repr(float(v)) for v in row) + "\n" for row in M))


# --------------------------------------------------------------------------
# Directory layouts


@dataclass(frozen=True)
class Layout:
    """How subjects and images are arranged under a dataset root.

    With ``subject_pattern`` unset, each subject is a subdirectory matching
    ``subject_glob`` holding its images. Otherwise all images sit directly in
    the root and group 1 of ``subject_pattern`` (searched in the file name)
    is the subject id.
    """

    name: str
    subject_glob: str = "*"
    extension: str = ".pgm"
    images_per_subject: Optional[int] = None
    subject_pattern: Optional[str] = None


LAYOUTS: Dict[str, Layout] = {
    "orl": Layout("orl", "s*", ".pgm", 10),
    "yale": Layout("yale", "subject*", ".pgm", 11, subject_pattern=r"subject0*(\d+)"),
    "xm2vts": Layout("xm2vts", "*", ".pgm"),
    "subdirs": Layout("subdirs", "*", ".pgm"),
    "flat": Layout("flat", "*", ".pgm", subject_pattern=r"^([^_.]+)"),
}


def _natural_key(text: str):
    return [(0, int(tok), "") if tok.isdigit() else (1, 0, tok) for tok in re.split(r"(\d+)", text) if tok]


def _subject_label(name: str):
    digits = re.findall(r"\d+", name)
    return int(digits[-1]) if digits else name


def load_pgm_directory(path, layout: Union[str, Layout] = "orl") -> ImageDataset:
    """Load every image under ``path``, ordered by (subject, image index)."""
    if isinstance(layout, str):
        try:
            layout = LAYOUTS[layout]
        except KeyError:
            raise DatasetError(f"unknown layout {layout!r}; known: {sorted(LAYOUTS)}") from None
    root = Path(path)
    if not root.is_dir():
        raise EmptyDirectory(f"dataset directory {root} does not exist")

    groups: Dict[object, List[Path]] = {}
    if layout.subject_pattern is None:
        for sub in root.glob(layout.subject_glob):
            if sub.is_dir():
                files = [f for f in sub.iterdir() if f.is_file() and f.name.endswith(layout.extension)]
                if files:
                    groups[_subject_label(sub.name)] = files
    else:
        rx = re.compile(layout.subject_pattern)
        for f in root.glob(layout.subject_glob):
            if f.is_file() and f.name.endswith(layout.extension):
                m = rx.search(f.name)
                if m:
                    groups.setdefault(_subject_label(m.group(1)), []).append(f)
    if not groups:
        raise EmptyDirectory(f"no {layout.extension} images found under {root} (layout {layout.name})")

    images, labels, paths = [], [], []
    for subject in sorted(groups, key=lambda s: _natural_key(str(s))):
        files = sorted(groups[subject], key=lambda f: _natural_key(f.name))
        if layout.images_per_subject is not None and len(files) != layout.images_per_subject:
            raise DatasetError(
                f"subject {subject} has {len(files)} images; layout {layout.name} expects {layout.images_per_subject}"
            )
        for f in files:
            try:
                img = read_pgm(f)
            except MalformedHeader as exc:
                raise MalformedHeader(f"{f}: {exc}") from None
            if images and img.shape != images[0].shape:
                raise InconsistentDimensions(f"{f} is {img.shape}, expected {images[0].shape}")
            images.append(img)
            labels.append(subject)
            paths.append(str(f))
    return ImageDataset(np.stack(images), tuple(labels), paths=tuple(paths))


def save_pgm_directory(ds: ImageDataset, path) -> None:
    """Write ``ds`` in the subdirectory layout (``s<label>/<index>.pgm``)."""
    root = Path(path)
    counters: Dict[object, int] = {}
    for img, label in zip(ds.images, ds.labels):
        counters[label] = counters.get(label, 0) + 1
        sub = root / f"s{label}"
        sub.mkdir(parents=True, exist_ok=True)
        write_pgm(sub / f"{counters[label]}.pgm", img)


# --------------------------------------------------------------------------
# Splits


def _by_subject(labels) -> Dict[object, List[int]]:
    groups: Dict[object, List[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    return groups


def _check_counts(groups, k_train):
    if k_train < 1:
        raise InsufficientImagesForSubject(f"k_train must be >= 1, got {k_train}")
    for subject, idx in groups.items():
        if len(idx) <= k_train:
            raise InsufficientImagesForSubject(
                f"subject {subject} has {len(idx)} images; need more than {k_train}"
            )


def split_first_k(ds, k_train: int) -> LabeledSplit:
    """First ``k_train`` images of every subject (in dataset order) train, the rest test."""
    groups = _by_subject(ds.labels)
    _check_counts(groups, k_train)
    train = sorted(i for idx in groups.values() for i in idx[:k_train])
    test = sorted(i for idx in groups.values() for i in idx[k_train:])
    return LabeledSplit(tuple(train), tuple(test))


def split_random_k(ds, k_train: int, seed: int) -> LabeledSplit:
    groups = _by_subject(ds.labels)
    _check_counts(groups, k_train)
    rng = np.random.default_rng(seed)
    train = []
    for idx in groups.values():
        train.extend(int(i) for i in rng.choice(idx, size=k_train, replace=False))
    chosen = set(train)
    test = [i for i in range(len(ds.labels)) if i not in chosen]
    return LabeledSplit(tuple(sorted(train)), tuple(test))


def take(ds, indices: Sequence[int]):
    idx = np.asarray(indices, dtype=np.intp)
    labels = tuple(ds.labels[i] for i in idx)
    if isinstance(ds, ImageDataset):
        paths = tuple(ds.paths[i] for i in idx) if ds.paths else ()
        return replace(ds, images=ds.images[idx], labels=labels, paths=paths)
    return replace(ds, data=ds.data[:, idx], labels=labels)


# --------------------------------------------------------------------------
# Vectorization and centering


def vectorize(ds: ImageDataset) -> VectorDataset:
    """Column-major stacking of each image into a column of a ``d x n`` matrix."""
    n, r, c = ds.images.shape
    data = ds.images.transpose(0, 2, 1).reshape(n, r * c).T
    mean = None if ds.mean is None else ds.mean.ravel(order="F")
    return VectorDataset(data.copy(), ds.labels, mean, ds.centered, (r, c))


def unvectorize(vds: VectorDataset, shape: Optional[Tuple[int, int]] = None) -> ImageDataset:
    shape = shape or vds.image_shape
    if shape is None:
        raise InconsistentDimensions("no image shape recorded; pass shape explicitly")
    r, c = shape
    if r * c != vds.d:
        raise InconsistentDimensions(f"cannot reshape d={vds.d} into {r}x{c}")
    images = vds.data.T.reshape(vds.n, c, r).transpose(0, 2, 1)
    mean = None if vds.mean is None else vds.mean.reshape(c, r).T
    return ImageDataset(images.copy(), vds.labels, mean, vds.centered)


def uncenter(ds):
    """Add the stored mean back (no-op for uncentered datasets)."""
    if not ds.centered:
        return ds
    if isinstance(ds, ImageDataset):
        return replace(ds, images=ds.images + ds.mean[None], mean=None, centered=False)
    return replace(ds, data=ds.data + ds.mean[:, None], mean=None, centered=False)


def center(ds, mean=None):
    """Subtract ``mean`` (default: the sample mean) and record it for un-centering.

    A centered dataset is returned as is unless a different mean is given,
    in which case the original data is restored first.
    """
    if ds.centered and (mean is None or np.array_equal(np.asarray(mean), ds.mean)):
        return ds
    base = uncenter(ds)
    if isinstance(base, ImageDataset):
        m = base.images.mean(axis=0) if mean is None else np.asarray(mean, dtype=np.float64)
        if m.shape != base.shape:
            raise InconsistentDimensions(f"mean has shape {m.shape}, images are {base.shape}")
        return replace(base, images=base.images - m[None], mean=m.copy(), centered=True)
    m = base.data.mean(axis=1) if mean is None else np.asarray(mean, dtype=np.float64).ravel()
    if m.shape != (base.d,):
        raise InconsistentDimensions(f"mean has length {m.size}, data has d={base.d}")
    return replace(base, data=base.data - m[:, None], mean=m.copy(), centered=True)


# --------------------------------------------------------------------------
# Synthetic data


def synth_line_with_outliers(
    n_inliers: int,
    n_outliers: int,
    direction,
    noise_sigma: float,
    outlier_scale: float,
    seed: int,
) -> VectorDataset:
    """Points along a line through the origin plus isotropic far-away outliers.

    Inliers are ``t * direction + N(0, noise_sigma^2 I)`` with t ~ U[-1, 1];
    outliers have uniformly random directions and radius within 10% of
    ``outlier_scale``. Labels: 0 inlier, 1 outlier.
    """
    u = np.asarray(direction, dtype=np.float64).ravel()
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    if noise_sigma < 0 or outlier_scale <= 0:
        raise ValueError("noise_sigma must be >= 0 and outlier_scale > 0")
    rng = np.random.default_rng(seed)
    d = u.size
    t = rng.uniform(-1.0, 1.0, n_inliers)
    inliers = np.outer(u, t) + noise_sigma * rng.standard_normal((d, n_inliers))
    dirs = rng.standard_normal((d, n_outliers))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=0), 1e-300)
    radius = outlier_scale * (1.0 + 0.1 * rng.uniform(-1.0, 1.0, n_outliers))
    data = np.hstack([inliers, dirs * radius])
    return VectorDataset(data, (0,) * n_inliers + (1,) * n_outliers)


def _smooth_field(rng, shape, n_modes=6):
    r, c = shape
    y = np.linspace(0.0, 1.0, r)[:, None]
    x = np.linspace(0.0, 1.0, c)[None, :]
    img = np.zeros(shape)
    for _ in range(n_modes):
        fy, fx = rng.uniform(0.5, 3.0, 2)
        py, px = rng.uniform(0, 2 * np.pi, 2)
        img += rng.standard_normal() * np.cos(2 * np.pi * fy * y + py) * np.cos(2 * np.pi * fx * x + px)
    return img


def synth_face_stack(
    n_subjects: int,
    per_subject: int,
    shape: Tuple[int, int] = (28, 23),
    seed: int = 0,
    noise: float = 12.0,
    variation: float = 0.35,
    n_occluded: int = 0,
) -> ImageDataset:
    """Face-like multiclass image stack with pixel values in [0, 255].

    Each subject gets a smooth prototype; each image adds a smooth
    within-subject variation (scaled by ``variation``), a brightness shift and
    pixel noise. ``n_occluded`` random images get a bright rectangular block.
    """
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for s in range(n_subjects):
        proto = _smooth_field(rng, shape)
        proto = 128.0 + 40.0 * proto / max(np.abs(proto).max(), 1e-12)
        for _ in range(per_subject):
            var = _smooth_field(rng, shape, n_modes=3)
            var = 40.0 * variation * var / max(np.abs(var).max(), 1e-12)
            img = proto + var + rng.normal(0.0, 8.0) + noise * rng.standard_normal(shape)
            images.append(img)
            labels.append(s + 1)
    stack = np.stack(images)
    r, c = shape
    for i in rng.choice(len(images), size=min(n_occluded, len(images)), replace=False):
        h, w = max(1, r // 3), max(1, c // 3)
        y0, x0 = rng.integers(0, r - h + 1), rng.integers(0, c - w + 1)
        stack[i, y0:y0 + h, x0:x0 + w] = 255.0
    return ImageDataset(np.clip(stack, 0.0, 255.0), tuple(labels))


def corrupt_images(ds: ImageDataset, indices: Sequence[int], amplitude: float, seed: int) -> ImageDataset:
    """Add dense large-amplitude Gaussian noise to every pixel of the chosen images."""
    rng = np.random.default_rng(seed)
    images = ds.images.copy()
    for i in indices:
        images[i] += amplitude * rng.standard_normal(ds.shape)
    return replace(ds, images=images)
