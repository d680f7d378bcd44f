"""CSV points I/O and synthetic low-intrinsic-dimension data generation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import LABEL_NAMES, Clustering, LabelSet
from .metrics import Dataset


class ParseError(ValueError):
    """Malformed points file; message carries the path and line number."""


@dataclass
class SyntheticSpec:
    """Planted 2-D blobs plus uniform outliers, lifted to R^D.

    Points are drawn in the plane — k_blobs disks of blob_radius with centers
    uniform in [0, box_size]^2, outliers uniform in the twice-inflated box —
    then embedded by x -> Ax + b with a random Gaussian D x 2 matrix A, so the
    data has intrinsic dimension 2 regardless of D.
    """

    n: int
    ambient_dim: int = 2
    k_blobs: int = 5
    blob_radius: float = 2.0
    outlier_count: int = 0
    box_size: float = 100.0
    seed: int = 0

    def validate(self) -> None:
        if self.n < self.k_blobs + self.outlier_count:
            raise ValueError("n=%d cannot fit %d blobs plus %d outliers"
                             % (self.n, self.k_blobs, self.outlier_count))
        if self.ambient_dim < 2:
            raise ValueError("ambient_dim must be >= 2")
        if self.k_blobs < 1 or self.outlier_count < 0:
            raise ValueError("k_blobs must be >= 1 and outlier_count >= 0")
        if not (self.blob_radius > 0 and self.box_size > 0):
            raise ValueError("blob_radius and box_size must be positive")


def generate_synthetic(spec: SyntheticSpec, identity_embedding: bool = False):
    """Returns (Dataset, labels) with labels[i] = blob index or -1 for outliers.

    identity_embedding skips the random affine map (ambient_dim must be 2);
    the output then equals the planted plane points, which makes geometric
    assertions exact in tests.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    centers = rng.uniform(0.0, spec.box_size, size=(spec.k_blobs, 2))
    inliers = spec.n - spec.outlier_count
    base, extra = divmod(inliers, spec.k_blobs)
    pieces = []
    labels = []
    for b in range(spec.k_blobs):
        m = base + (1 if b < extra else 0)
        rad = spec.blob_radius * np.sqrt(rng.random(m))
        ang = rng.random(m) * (2.0 * math.pi)
        pieces.append(centers[b] + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]))
        labels.append(np.full(m, b, dtype=np.int64))
    if spec.outlier_count:
        lo, hi = -0.5 * spec.box_size, 1.5 * spec.box_size
        pieces.append(rng.uniform(lo, hi, size=(spec.outlier_count, 2)))
        labels.append(np.full(spec.outlier_count, -1, dtype=np.int64))
    plane = np.concatenate(pieces)
    truth = np.concatenate(labels)
    if identity_embedding:
        if spec.ambient_dim != 2:
            raise ValueError("identity embedding requires ambient_dim == 2")
        return Dataset(plane), truth
    A = rng.standard_normal((spec.ambient_dim, 2))
    b = rng.standard_normal(spec.ambient_dim)
    return Dataset(plane @ A.T + b), truth


def _tokens(line: str):
    return [t for t in (line.split(",") if "," in line else line.split()) if t.strip()]


def load_points(path, format: str = "csv") -> Dataset:
    """Parse one point per line (comma or whitespace separated floats).

    A single leading header line is skipped when its first token is not a
    number.  Ragged rows, non-finite values, and empty files are errors that
    name the offending line.
    """
    if format != "csv":
        raise ValueError("unsupported format %r" % (format,))
    rows = []
    width = None
    may_be_header = True
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            toks = _tokens(line)
            if may_be_header:
                may_be_header = False
                try:
                    float(toks[0])
                except ValueError:
                    continue  # the single permitted header line
            try:
                vals = [float(t) for t in toks]
            except ValueError:
                raise ParseError("%s: line %d: not a number" % (path, lineno)) from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ParseError("%s: line %d: expected %d values, got %d"
                                 % (path, lineno, width, len(vals)))
            if not all(math.isfinite(v) for v in vals):
                raise ParseError("%s: line %d: non-finite value" % (path, lineno))
            rows.append(vals)
    if not rows:
        raise ParseError("%s: no data rows" % (path,))
    return Dataset(np.asarray(rows, dtype=np.float64))


def save_points(path, points) -> None:
    """Write points as CSV at 17 significant digits (lossless float64)."""
    pts = np.asarray(points, dtype=np.float64)
    with open(path, "w") as fh:
        for row in pts:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def save_clustering(path, labels: LabelSet, clustering: Clustering) -> None:
    """Write "point_index,label,cluster_id" rows, ascending index."""
    with open(path, "w") as fh:
        for i in range(labels.labels.shape[0]):
            fh.write("%d,%s,%d" % (i, LABEL_NAMES[int(labels.labels[i])],
                                   int(clustering.cluster_ids[i])) + "\n")
