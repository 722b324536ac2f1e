"""Dataset container, CSV/JSON round-trip helpers, synthetic generators."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError

_LABEL_INT_TOL = 1e-9


@dataclass(frozen=True)
class SampleMatrix:
    """n samples in d dimensions, optional 1-based integer class labels."""

    data: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValidationError(f"data must be 2-D, got shape {data.shape}")
        n, d = data.shape
        if n < 2:
            raise ValidationError(f"need at least 2 samples, got {n}")
        if d < 1:
            raise ValidationError("need at least 1 feature")
        if not np.all(np.isfinite(data)):
            raise ValidationError("data contains non-finite entries")
        object.__setattr__(self, "data", data)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (n,):
                raise ValidationError(
                    f"labels shape {labels.shape} does not match n={n}"
                )
            if not np.all(np.abs(labels - np.round(labels)) <= _LABEL_INT_TOL):
                raise ValidationError("labels must be integers")
            labels = np.round(labels).astype(np.int64)
            c = labels.max(initial=0)
            if labels.min(initial=1) < 1 or c < 1:
                raise ValidationError("labels must lie in {1..c}")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def _relabel_to_contiguous(values: np.ndarray) -> np.ndarray:
    """Map integer label values onto {1..c} by sorted order of the vocabulary."""
    uniq = np.unique(values)
    lookup = {v: i + 1 for i, v in enumerate(uniq.tolist())}
    return np.array([lookup[v] for v in values.tolist()], dtype=np.int64)


def load_csv(path, label_column: int | None = None, header: bool = False) -> SampleMatrix:
    """Read a numeric CSV into a SampleMatrix.

    No header line is expected by default; pass header=True to skip line 1.
    label_column is a 0-based column index whose (integer) values become the
    class labels; label values are mapped onto {1..c} preserving sorted order.
    """
    rows: list[list[float]] = []
    raw_labels: list[float] = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        width = None
        for lineno, cells in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not cells or (len(cells) == 1 and cells[0].strip() == ""):
                continue
            try:
                values = [float(cell) for cell in cells]
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: non-numeric cell") from exc
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ParseError(
                    f"{path}: line {lineno}: expected {width} columns, got {len(values)}"
                )
            if label_column is not None:
                if not 0 <= label_column < len(values):
                    raise ValidationError(
                        f"label column {label_column} out of range for {len(values)} columns"
                    )
                lab = values.pop(label_column)
                if abs(lab - round(lab)) > _LABEL_INT_TOL:
                    raise ValidationError(
                        f"{path}: line {lineno}: label {lab!r} is not an integer"
                    )
                raw_labels.append(round(lab))
            rows.append(values)
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least 2 data rows, got {len(rows)}")
    data = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        raise ValidationError(f"{path}: non-finite value in data")
    labels = None
    if label_column is not None:
        labels = _relabel_to_contiguous(np.array(raw_labels, dtype=np.int64))
    return SampleMatrix(data=data, labels=labels)


def write_csv(sample: SampleMatrix, path) -> None:
    """Write features (and labels, as a final column) back out as plain CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for i in range(sample.n):
            row = [repr(v) for v in sample.data[i].tolist()]
            if sample.labels is not None:
                row.append(str(int(sample.labels[i])))
            writer.writerow(row)


def make_blobs(n_per_cluster: int, centers, sigma: float, seed: int = 0) -> SampleMatrix:
    """Isotropic Gaussian blobs; labels are 1-based center indices."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] < 2:
        raise ValidationError("need at least 2 centers, one per row")
    if n_per_cluster < 1:
        raise ValidationError("n_per_cluster must be >= 1")
    if not sigma > 0:
        raise ValidationError("sigma must be > 0")
    rng = np.random.default_rng(seed)
    chunks = []
    labels = []
    for k, center in enumerate(centers, start=1):
        chunks.append(center + sigma * rng.standard_normal((n_per_cluster, centers.shape[1])))
        labels.extend([k] * n_per_cluster)
    return SampleMatrix(np.vstack(chunks), np.array(labels, dtype=np.int64))


def make_two_moons(n: int, noise: float, seed: int = 0) -> SampleMatrix:
    """Two interleaved half-circles of n/2 points each; labels 1 and 2.

    With noise=0 each moon lies exactly on a unit circle (centers (0,0) and
    (1, 0.5)).
    """
    if n < 4 or n % 2 != 0:
        raise ValidationError("n must be an even number >= 4")
    if noise < 0:
        raise ValidationError("noise must be >= 0")
    half = n // 2
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, np.pi, half)
    outer = np.column_stack([np.cos(t), np.sin(t)])
    inner = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    pts = np.vstack([outer, inner])
    if noise > 0:
        pts = pts + noise * rng.standard_normal(pts.shape)
    labels = np.concatenate([np.ones(half, dtype=np.int64), np.full(half, 2, dtype=np.int64)])
    return SampleMatrix(pts, labels)


@dataclass
class ClusteringResult:
    """Output of one clustering run."""

    labels: np.ndarray
    alpha: np.ndarray
    objective_trace: list[float] = field(default_factory=list)
    metrics: dict | None = None
    lambda_used: float = 0.1
    bandwidth_used: float = 1.0
    seed: int = 0
    qp_converged: bool = True


_RESULT_KEYS = ("labels", "alpha", "objective_trace", "metrics", "lambda", "bandwidth", "seed")


def write_result(result: ClusteringResult, path) -> None:
    """Serialize a ClusteringResult as a JSON document with fixed keys."""
    doc = {
        "labels": [int(v) for v in result.labels.tolist()],
        "alpha": [float(v) for v in np.asarray(result.alpha).tolist()],
        "objective_trace": [float(v) for v in result.objective_trace],
        "metrics": result.metrics,
        "lambda": float(result.lambda_used),
        "bandwidth": float(result.bandwidth_used),
        "seed": int(result.seed),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_result(path) -> ClusteringResult:
    """Inverse of write_result; raises ParseError on malformed documents."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read result document {path}: {exc}") from exc
    missing = [k for k in _RESULT_KEYS if k not in doc]
    if missing:
        raise ParseError(f"{path}: missing result keys {missing}")
    return ClusteringResult(
        labels=np.array(doc["labels"], dtype=np.int64),
        alpha=np.array(doc["alpha"], dtype=np.float64),
        objective_trace=[float(v) for v in doc["objective_trace"]],
        metrics=doc["metrics"],
        lambda_used=float(doc["lambda"]),
        bandwidth_used=float(doc["bandwidth"]),
        seed=int(doc["seed"]),
    )
