"""Evaluation harness: per-class random splits, 1-NN classification,
accuracy metrics, repeated-trial experiments, and the w/k parameter sweep.

Splits are drawn with numpy's default PCG64 generator seeded by
``seed + trial``, so every (seed, trial) pair reproduces exactly across
runs and platforms. An experiment fits its embedding on the training
pixels only; test pixels enter the pipeline solely through projection.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.spatial.distance

from .config import RunConfig
from .core import FeatureMatrix, HyperCube, LabelRaster
from .embed import npe_fit, pca_fit, project, ssmrpe_fit
from .errors import ConfigError, ShapeError, ValidationError
from .sscd import SscdContext
from .wmf import FilterConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitSpec:
    """Per-class training draw: a fixed count or a fraction, repeated."""

    train_count: int | None = None
    train_frac: float | None = None
    seed: int = 0
    repeats: int = 5

    def __post_init__(self):
        if (self.train_count is None) == (self.train_frac is None):
            raise ConfigError("exactly one of train_count / train_frac must be set")
        if self.train_count is not None and self.train_count < 1:
            raise ConfigError(f"train count must be >= 1, got {self.train_count}")
        if self.train_frac is not None and not (0.0 < self.train_frac < 1.0):
            raise ConfigError(f"train fraction must be in (0, 1), got {self.train_frac}")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}")

    def class_train_size(self, class_size: int) -> int:
        if self.train_count is not None:
            return self.train_count
        return max(1, math.ceil(self.train_frac * class_size))


@dataclass(frozen=True)
class TrialMetrics:
    """Metrics of one train/test trial; percentages except the kappa
    coefficient. Classes absent from the test set hold NaN."""

    per_class: np.ndarray  # (c,) percent recall per class
    oa: float              # percent
    aa: float              # percent
    kappa: float           # coefficient in [-1, 1]


@dataclass(frozen=True)
class MetricsReport:
    """Mean and population std of the trial metrics, plus split book-keeping."""

    train_counts: np.ndarray      # (c,) per-class training sizes
    test_counts: np.ndarray       # (c,) per-class test sizes
    per_class_mean: np.ndarray    # (c,) percent
    per_class_std: np.ndarray     # (c,) percent
    oa_mean: float
    oa_std: float
    aa_mean: float
    aa_std: float
    kappa_mean: float
    kappa_std: float
    trials: tuple                 # the underlying TrialMetrics

    @property
    def class_count(self) -> int:
        return self.per_class_mean.shape[0]


def split_per_class(labels: LabelRaster, spec: SplitSpec, trial: int):
    """Random train/test split drawing the same number from every class.

    Unlabeled pixels (label 0) belong to neither side; the labeled rest is
    split exhaustively. Deterministic in (seed, trial). Returns sorted flat
    index arrays (train, test).
    """
    rng = np.random.default_rng(spec.seed + trial)
    flat = labels.flat
    train, test = [], []
    for cls in range(1, labels.class_count + 1):
        members = np.flatnonzero(flat == cls)
        n_train = spec.class_train_size(members.size)
        if spec.train_count is not None:
            if members.size <= n_train:
                raise ConfigError(
                    f"class {cls} has {members.size} labeled pixels, "
                    f"needs more than {n_train} for this split"
                )
        elif members.size < 2:
            raise ConfigError(
                f"class {cls} has {members.size} labeled pixels, needs at least 2"
            )
        perm = rng.permutation(members)
        train.append(perm[:n_train])
        test.append(perm[n_train:])
        if members.size == n_train:
            log.info("class %d is fully consumed by training (%d pixels)", cls, n_train)
    return (np.sort(np.concatenate(train)), np.sort(np.concatenate(test)))


def nn_classify(train: FeatureMatrix, train_labels, test: FeatureMatrix) -> np.ndarray:
    """1-nearest-neighbor labels for every test row; distance ties resolve
    to the smaller training index."""
    train_labels = np.asarray(train_labels)
    if train.count == 0:
        raise ConfigError("training set must be nonempty")
    if train_labels.shape != (train.count,):
        raise ShapeError(
            f"training labels must be ({train.count},), got {train_labels.shape}"
        )
    if test.dim != train.dim:
        raise ShapeError(f"feature dims differ: train {train.dim}, test {test.dim}")
    d2 = scipy.spatial.distance.cdist(test.values, train.values, "sqeuclidean")
    return train_labels[d2.argmin(axis=1)]


def classification_metrics(y_true, y_pred, class_count: int) -> TrialMetrics:
    """Overall accuracy, average per-class recall, and Cohen's kappa.

    OA and per-class recalls are in percent; kappa is the coefficient
    (p_o - p_e) / (1 - p_e) from the confusion-matrix marginals. Classes
    without test samples are excluded from AA and reported as NaN.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size < 1:
        raise ShapeError(
            f"label vectors must be equal-length and nonempty, "
            f"got {y_true.shape} and {y_pred.shape}"
        )
    for name, arr in (("true", y_true), ("predicted", y_pred)):
        if arr.min() < 1 or arr.max() > class_count:
            raise ValidationError(
                f"{name} labels must lie in [1, {class_count}], "
                f"found range [{arr.min()}, {arr.max()}]"
            )
    confusion = np.zeros((class_count, class_count), dtype=np.int64)
    np.add.at(confusion, (y_true - 1, y_pred - 1), 1)
    total = int(confusion.sum())
    support = confusion.sum(axis=1)
    present = support > 0
    per_class = np.full(class_count, np.nan)
    per_class[present] = 100.0 * np.diag(confusion)[present] / support[present]
    if not present.all():
        absent = np.flatnonzero(~present) + 1
        log.info("classes absent from the test set, excluded from AA: %s", list(absent))
    p_observed = np.trace(confusion) / total
    p_expected = float(support @ confusion.sum(axis=0)) / total**2
    if p_expected == 1.0:
        kappa = 1.0 if p_observed == 1.0 else 0.0
    else:
        kappa = (p_observed - p_expected) / (1.0 - p_expected)
    return TrialMetrics(per_class=per_class, oa=100.0 * p_observed,
                        aa=float(per_class[present].mean()), kappa=float(kappa))


def _fit_and_project(cube, cfg: RunConfig, ctx, train_idx, eval_idx, workers):
    """Embed the training and evaluation pixels; the fit sees train only."""
    X_all = cube.flat
    if cfg.method == "raw":
        return FeatureMatrix(X_all[train_idx]), FeatureMatrix(X_all[eval_idx])
    if cfg.method == "pca":
        model = pca_fit(X_all[train_idx].T, cfg.d)
    elif cfg.method == "npe":
        model = npe_fit(X_all[train_idx].T, cfg.k, cfg.d, ridge=cfg.ridge, eps=cfg.eps)
    else:
        model = ssmrpe_fit(ctx, cfg.k, cfg.d, nodes=train_idx, eps=cfg.eps,
                           ridge=cfg.ridge, use_filtered=cfg.project_filtered,
                           scd_override=cfg.scd_const, workers=workers)
        if cfg.project_filtered:
            X_all = ctx.filtered.flat
    return (project(model, X_all[train_idx].T), project(model, X_all[eval_idx].T))


def _aggregate(trials, train_counts, test_counts) -> MetricsReport:
    per_class = np.stack([t.per_class for t in trials])
    oa = np.array([t.oa for t in trials])
    aa = np.array([t.aa for t in trials])
    kappa = np.array([t.kappa for t in trials])
    with np.errstate(invalid="ignore"):  # classes absent from every trial stay NaN
        pc_mean = np.nanmean(per_class, axis=0)
        pc_std = np.nanstd(per_class, axis=0)
    return MetricsReport(
        train_counts=train_counts, test_counts=test_counts,
        per_class_mean=pc_mean, per_class_std=pc_std,
        oa_mean=float(oa.mean()), oa_std=float(oa.std()),
        aa_mean=float(aa.mean()), aa_std=float(aa.std()),
        kappa_mean=float(kappa.mean()), kappa_std=float(kappa.std()),
        trials=tuple(trials),
    )


def _class_counts(labels: LabelRaster, indices) -> np.ndarray:
    return np.bincount(labels.flat[indices], minlength=labels.class_count + 1)[1:]


def run_experiment(cube: HyperCube, labels: LabelRaster, cfg: RunConfig,
                   split: SplitSpec, workers=None) -> MetricsReport:
    """Repeated split/fit/classify trials, aggregated mean +/- std.

    The filtered cube is computed once (it reads no labels); each trial
    fits the embedding on its training pixels only, projects train and
    test, and classifies with 1-NN.
    """
    if labels.labels.shape != (cube.height, cube.width):
        raise ShapeError("cube and label raster dimensions differ")
    ctx = None
    if cfg.method == "ssmrpe":
        ctx = SscdContext.from_cube(cube, FilterConfig(cfg.w, cfg.gamma0), workers)
    trials = []
    train_counts = test_counts = None
    for trial in range(split.repeats):
        train_idx, test_idx = split_per_class(labels, split, trial)
        if trial == 0:
            train_counts = _class_counts(labels, train_idx)
            test_counts = _class_counts(labels, test_idx)
        f_train, f_test = _fit_and_project(cube, cfg, ctx, train_idx, test_idx, workers)
        predicted = nn_classify(f_train, labels.flat[train_idx], f_test)
        trials.append(classification_metrics(labels.flat[test_idx], predicted,
                                             labels.class_count))
    return _aggregate(trials, train_counts, test_counts)


def predict_map(cube: HyperCube, labels: LabelRaster, cfg: RunConfig,
                split: SplitSpec, trial: int = 0, workers=None) -> LabelRaster:
    """Predicted labels for every labeled pixel under one trial's split.

    Fits on the trial's training pixels and classifies all labeled pixels
    (training pixels trivially recover their own label at distance zero).
    Unlabeled pixels stay 0. Feeds the rendered classification maps.
    """
    if labels.labels.shape != (cube.height, cube.width):
        raise ShapeError("cube and label raster dimensions differ")
    ctx = None
    if cfg.method == "ssmrpe":
        ctx = SscdContext.from_cube(cube, FilterConfig(cfg.w, cfg.gamma0), workers)
    train_idx, test_idx = split_per_class(labels, split, trial)
    labeled = np.sort(np.concatenate([train_idx, test_idx]))
    f_train, f_all = _fit_and_project(cube, cfg, ctx, train_idx, labeled, workers)
    predicted = nn_classify(f_train, labels.flat[train_idx], f_all)
    out = np.zeros(labels.flat.shape, dtype=np.uint16)
    out[labeled] = predicted
    return LabelRaster(out.reshape(labels.labels.shape), labels.class_count)


@dataclass(frozen=True)
class SweepResult:
    """OA means and stds over a (w, k) grid, percent."""

    w_values: tuple
    k_values: tuple
    oa_mean: np.ndarray  # (len(w), len(k))
    oa_std: np.ndarray


def sweep(cube: HyperCube, labels: LabelRaster, w_values, k_values,
          cfg: RunConfig, split: SplitSpec, workers=None) -> SweepResult:
    """Run one experiment per (w, k) cell of the parameter grid."""
    w_values = tuple(int(w) for w in w_values)
    k_values = tuple(int(k) for k in k_values)
    if not w_values or not k_values:
        raise ConfigError("sweep grids must be nonempty")
    oa_mean = np.empty((len(w_values), len(k_values)))
    oa_std = np.empty_like(oa_mean)
    for a, w in enumerate(w_values):
        for b, k in enumerate(k_values):
            report = run_experiment(cube, labels,
                                    dataclasses.replace(cfg, w=w, k=k),
                                    split, workers)
            oa_mean[a, b] = report.oa_mean
            oa_std[a, b] = report.oa_std
            log.info("sweep cell w=%d k=%d: OA %.2f +/- %.2f",
                     w, k, report.oa_mean, report.oa_std)
    return SweepResult(w_values, k_values, oa_mean, oa_std)
