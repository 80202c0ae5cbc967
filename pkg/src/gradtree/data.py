"""Dataset container, synthetic generators, CSV ingestion, CV splits.

Six generators produce an expected event time y from features, each a
standard nonlinear regression surface. Observed targets are optionally
drawn from a Weibull distribution with mean y (shape k controls the
noise level), and censoring flags come from a Bernoulli draw, so one
generated sample can serve regression (y or T as target) and survival
(T, delta) experiments alike.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CsvFormatError

TASKS = ("regression", "classification", "survival")
SYNTH_KINDS = (
    "friedman1",
    "friedman2",
    "friedman3",
    "strong_interactions",
    "sparse_features",
    "nonlinear",
)

_SPARSITY = 0.7  # fraction of exactly-zero entries in the sparse design


@dataclass
class Dataset:
    X: np.ndarray
    task: str
    y: Optional[np.ndarray] = None
    time: Optional[np.ndarray] = None
    event: Optional[np.ndarray] = None
    n_classes: Optional[int] = None
    class_values: Optional[list] = None
    feature_names: list = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise ValueError("X must be 2-d")
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        n = self.X.shape[0]
        if not np.all(np.isfinite(self.X)):
            raise ValueError("X must be finite")
        if not self.feature_names:
            self.feature_names = [f"x{i + 1}" for i in range(self.X.shape[1])]
        if self.task == "survival":
            if self.time is None or self.event is None:
                raise ValueError("survival task requires time and event arrays")
            self.time = np.asarray(self.time, dtype=float)
            self.event = np.asarray(self.event, dtype=int)
            if self.time.shape[0] != n or self.event.shape[0] != n:
                raise ValueError("time/event length does not match X")
        else:
            if self.y is None:
                raise ValueError(f"{self.task} task requires y")
            if self.task == "classification":
                self.y = np.asarray(self.y, dtype=int)
                if self.n_classes is None:
                    self.n_classes = int(self.y.max()) + 1 if self.y.size else 0
            else:
                self.y = np.asarray(self.y, dtype=float)
            if self.y.shape[0] != n:
                raise ValueError("y length does not match X")

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(
            X=self.X[idx],
            task=self.task,
            y=None if self.y is None else self.y[idx],
            time=None if self.time is None else self.time[idx],
            event=None if self.event is None else self.event[idx],
            n_classes=self.n_classes,
            class_values=self.class_values,
            feature_names=list(self.feature_names),
        )


@dataclass(frozen=True)
class SynthSpec:
    kind: str
    n_samples: int
    weibull_k: float = 5.0
    censor_event_prob: float = 0.8
    rng_seed: int = 0

    def validate(self) -> None:
        if self.kind not in SYNTH_KINDS:
            raise ValueError(f"unknown synthetic kind {self.kind!r}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.weibull_k <= 0:
            raise ValueError("weibull_k must be positive")
        if not 0.0 < self.censor_event_prob <= 1.0:
            raise ValueError("censor_event_prob must be in (0, 1]")


@dataclass
class SyntheticSample:
    """Everything one generator run produced.

    expected holds the noiseless formula value per sample (after the
    positivity shift, recorded in offset); time/event are the Weibull
    draw and the censoring flag. weights keeps the random coefficients
    of the kinds that draw any, so the formula can be re-evaluated.
    """

    kind: str
    X: np.ndarray
    expected: np.ndarray
    time: np.ndarray
    event: np.ndarray
    offset: float
    weights: Optional[np.ndarray] = None

    def regression_dataset(self, observed: bool = False) -> Dataset:
        y = self.time if observed else self.expected
        return Dataset(X=self.X, task="regression", y=y)

    def survival_dataset(self) -> Dataset:
        return Dataset(X=self.X, task="survival", time=self.time, event=self.event)


def expected_time_formula(kind: str, X: np.ndarray, weights=None) -> np.ndarray:
    """Noiseless expected time for each row of X (no positivity shift)."""
    x = np.asarray(X, dtype=float)
    if kind == "friedman1":
        return (
            10.0 * np.sin(np.pi * x[:, 0] * x[:, 1])
            + 20.0 * (x[:, 2] - 0.5) ** 2
            + 10.0 * x[:, 3]
            + 5.0 * x[:, 4]
        )
    if kind == "friedman2":
        return np.sqrt(
            x[:, 0] ** 2 + (x[:, 1] * x[:, 2] - 1.0 / (x[:, 1] * x[:, 3])) ** 2
        )
    if kind == "friedman3":
        return np.arctan(
            (x[:, 1] * x[:, 2] - 1.0 / (x[:, 1] * x[:, 3])) / x[:, 0]
        )
    if kind == "strong_interactions":
        w = np.asarray(weights, dtype=float)
        y = np.zeros(x.shape[0])
        d = x.shape[1]
        pos = 0
        for i in range(d):
            for j in range(i + 1, d):
                y += w[pos] * x[:, i] * x[:, j]
                pos += 1
        return y
    if kind == "sparse_features":
        return x @ np.asarray(weights, dtype=float)
    if kind == "nonlinear":
        return (
            4.0 * np.sin(x[:, 0])
            + np.log(np.abs(x[:, 1]) + 1.0)
            + x[:, 2] ** 2
            + np.exp(0.5 * x[:, 3])
            + np.tanh(x[:, 4])
        )
    raise ValueError(f"unknown synthetic kind {kind!r}")


def weibull_event_times(y, k: float, rng: np.random.Generator) -> np.ndarray:
    """Weibull draws with mean y: T = y / Gamma(1+1/k) * (-log u)^(1/k)."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("expected times must be positive")
    if k <= 0:
        raise ValueError("weibull shape k must be positive")
    u = rng.uniform(0.0, 1.0, size=y.shape)
    u = np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
    return y / math.gamma(1.0 + 1.0 / k) * (-np.log(u)) ** (1.0 / k)


def apply_censoring(times, event_prob: float, rng: np.random.Generator) -> np.ndarray:
    """Bernoulli event indicators; times themselves are left unchanged."""
    times = np.asarray(times, dtype=float)
    if not 0.0 < event_prob <= 1.0:
        raise ValueError("event_prob must be in (0, 1]")
    return (rng.uniform(size=times.shape) < event_prob).astype(int)


def generate_synthetic(spec: SynthSpec) -> SyntheticSample:
    """Run one generator: features, expected times, Weibull draws, flags.

    Draw order is fixed (weights, features, Weibull uniforms, censoring
    flags) so a given (spec, seed) always produces the same sample.
    """
    spec.validate()
    rng = np.random.default_rng(spec.rng_seed)
    n = spec.n_samples
    weights = None
    if spec.kind == "strong_interactions":
        d = 5
        weights = rng.uniform(0.0, 1.0, size=d * (d - 1) // 2)
        X = rng.uniform(0.0, 1.0, size=(n, d))
    elif spec.kind == "sparse_features":
        d = 5
        weights = rng.uniform(0.0, 1.0, size=d)
        X = rng.uniform(0.0, 1.0, size=(n, d))
        X[rng.uniform(size=(n, d)) < _SPARSITY] = 0.0
    elif spec.kind == "friedman1":
        X = rng.uniform(0.0, 1.0, size=(n, 5))
    elif spec.kind in ("friedman2", "friedman3"):
        X = np.column_stack(
            [
                rng.uniform(0.0, 100.0, size=n),
                rng.uniform(40.0 * np.pi, 560.0 * np.pi, size=n),
                rng.uniform(0.0, 1.0, size=n),
                rng.uniform(1.0, 11.0, size=n),
            ]
        )
    else:  # nonlinear
        X = rng.uniform(0.0, 1.0, size=(n, 5))
    y = expected_time_formula(spec.kind, X, weights)
    offset = 0.0
    lowest = float(y.min())
    if lowest < 0.1:
        offset = 0.1 - lowest
        y = y + offset
    times = weibull_event_times(y, spec.weibull_k, rng)
    events = apply_censoring(times, spec.censor_event_prob, rng)
    return SyntheticSample(
        kind=spec.kind,
        X=X,
        expected=y,
        time=times,
        event=events,
        offset=offset,
        weights=weights,
    )


@dataclass(frozen=True)
class CsvSchema:
    task: str
    target: str = "y"
    time_col: str = "time"
    event_col: str = "event"


def _parse_number(value: str, row: int, col: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise CsvFormatError(
            f"row {row}, column {col!r}: cannot parse {value!r} as a number"
        ) from None


def load_csv(path, schema: CsvSchema) -> Dataset:
    """Read a dataset from a headered CSV file.

    Feature columns are everything not claimed by the schema, in header
    order. Parse failures name the data row (1-based, excluding the
    header) and the column. Classification targets may be arbitrary
    strings; they are mapped to contiguous indices in sorted order and
    the original values kept on the dataset.
    """
    if schema.task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: file is empty") from None
        rows = list(reader)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    header = [h.strip() for h in header]

    if schema.task == "survival":
        claimed = {schema.time_col, schema.event_col}
    else:
        claimed = {schema.target}
    missing = claimed - set(header)
    if missing:
        raise CsvFormatError(f"{path}: missing required columns {sorted(missing)}")
    feature_names = [h for h in header if h not in claimed]
    if not feature_names:
        raise CsvFormatError(f"{path}: no feature columns left after targets")
    col_index = {h: i for i, h in enumerate(header)}

    n = len(rows)
    X = np.empty((n, len(feature_names)))
    for r, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise CsvFormatError(
                f"row {r}: expected {len(header)} fields, found {len(row)}"
            )
        for j, name in enumerate(feature_names):
            X[r - 1, j] = _parse_number(row[col_index[name]], r, name)

    if schema.task == "survival":
        time = np.empty(n)
        event = np.empty(n, dtype=int)
        for r, row in enumerate(rows, start=1):
            time[r - 1] = _parse_number(row[col_index[schema.time_col]], r, schema.time_col)
            ev = _parse_number(row[col_index[schema.event_col]], r, schema.event_col)
            if ev not in (0.0, 1.0):
                raise CsvFormatError(
                    f"row {r}, column {schema.event_col!r}: event must be 0 or 1, got {row[col_index[schema.event_col]]!r}"
                )
            event[r - 1] = int(ev)
        return Dataset(X=X, task="survival", time=time, event=event, feature_names=feature_names)

    raw = [row[col_index[schema.target]] for row in rows]
    if schema.task == "regression":
        y = np.array([_parse_number(v, r, schema.target) for r, v in enumerate(raw, start=1)])
        return Dataset(X=X, task="regression", y=y, feature_names=feature_names)

    # classification: sort class values numerically when possible
    uniq = sorted(set(raw))
    try:
        uniq = sorted(set(raw), key=float)
    except ValueError:
        pass
    mapping = {v: i for i, v in enumerate(uniq)}
    y = np.array([mapping[v] for v in raw], dtype=int)
    if len(uniq) < 2:
        raise CsvFormatError(f"{path}: classification needs at least two classes")
    return Dataset(
        X=X,
        task="classification",
        y=y,
        n_classes=len(uniq),
        class_values=list(uniq),
        feature_names=feature_names,
    )


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset in the same schema load_csv reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if dataset.task == "survival":
            writer.writerow(dataset.feature_names + ["time", "event"])
            for i in range(dataset.n_samples):
                writer.writerow(
                    [repr(float(v)) for v in dataset.X[i]]
                    + [repr(float(dataset.time[i])), int(dataset.event[i])]
                )
        else:
            writer.writerow(dataset.feature_names + ["y"])
            for i in range(dataset.n_samples):
                if dataset.task == "classification":
                    label = (
                        dataset.class_values[int(dataset.y[i])]
                        if dataset.class_values
                        else int(dataset.y[i])
                    )
                else:
                    label = repr(float(dataset.y[i]))
                writer.writerow([repr(float(v)) for v in dataset.X[i]] + [label])


def kfold_split(n: int, k: int, rng_seed: int = 0):
    """Shuffled k-fold partition; fold sizes differ by at most one."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError("k must not exceed the number of samples")
    rng = np.random.default_rng(rng_seed)
    perm = rng.permutation(n)
    folds = np.array_split(perm, k)
    out = []
    for i in range(k):
        test = np.sort(folds[i])
        train = np.sort(np.concatenate([folds[j] for j in range(k) if j != i]))
        out.append((train, test))
    return out
