"""
Dataset preparation: mask labelling, feature reduction and splits.

Two entry paths feed the learners:

* masks: polygons are rasterised (or PGM masks read), tiled, and each tile is
  labelled from its white-pixel fraction gamma against a percentile threshold;
* features: latent feature CSVs (``id,f0..f63[,gamma][,label]``) or synthetic
  2-D generators.

Feature tables then go through zscore -> PCA/truncated SVD -> [-1, 1] scaling.
Every table carries a provenance tag and stages must run in that order. Fitted
statistics are frozen read-only arrays; applying them never refits.
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from PIL import Image
from sklearn.datasets import make_blobs, make_circles, make_moons
from sklearn.model_selection import StratifiedKFold, train_test_split
from sklearn.preprocessing import StandardScaler

from nqklab.errors import ConfigError, DataError

logger = logging.getLogger(__name__)

PROVENANCE_ORDER = ('raw', 'zscored', 'reduced', 'scaled')
EXCLUDED = None


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=np.float64)
    out.setflags(write=False)
    return out


# --------------------------------------------------------------------------
# Masks and tiles
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BinaryMask:
    width: int
    height: int
    bits: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DataError(f"mask dimensions must be positive, got {self.width}x{self.height}")
        bits = np.asarray(self.bits, dtype=bool).reshape(self.height, self.width)
        object.__setattr__(self, 'bits', bits)

    @classmethod
    def from_array(cls, array: np.ndarray) -> 'BinaryMask':
        array = np.asarray(array, dtype=bool)
        return cls(array.shape[1], array.shape[0], array)


def rasterize_polygon(vertices: Sequence[Tuple[float, float]], width: int, height: int) -> BinaryMask:
    """
    Even-odd fill evaluated at pixel centres.

    Args:
        vertices: Polygon corners as (x, y) pixel coordinates, x to the right, y down
        width: Canvas width in pixels
        height: Canvas height in pixels

    Returns:
        Mask with the pixels whose centre lies inside the polygon set
    """
    pts = np.asarray(vertices, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise DataError("a polygon needs at least 3 (x, y) vertices")
    xs = np.arange(width) + 0.5
    ys = np.arange(height) + 0.5
    cx, cy = np.meshgrid(xs, ys)
    inside = np.zeros((height, width), dtype=bool)
    x0, y0 = pts[:, 0], pts[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    for ax, ay, bx, by in zip(x0, y0, x1, y1):
        if ay == by:
            continue
        straddles = (ay > cy) != (by > cy)
        x_cross = ax + (cy - ay) * (bx - ax) / (by - ay)
        inside ^= straddles & (cx < x_cross)
    return BinaryMask(width, height, inside)


@dataclass
class Tiling:
    tiles: List[np.ndarray]
    grid: Tuple[int, int]
    tile: int
    dropped_rows: int
    dropped_cols: int

    @property
    def remainder_pixels(self) -> int:
        rows, cols = self.grid
        covered = rows * cols * self.tile * self.tile
        height = rows * self.tile + self.dropped_rows
        width = cols * self.tile + self.dropped_cols
        return height * width - covered


def partition(grid: np.ndarray, tile: int) -> Tiling:
    """Cut a 2-D grid into row-major tile x tile blocks, dropping the trailing remainder."""
    grid = np.asarray(grid)
    if grid.ndim < 2:
        raise DataError("partition needs a 2-D grid")
    height, width = grid.shape[:2]
    if tile <= 0 or tile > height or tile > width:
        raise DataError(f"tile size {tile} does not fit a {width}x{height} image")
    rows, cols = height // tile, width // tile
    tiles = [grid[r * tile:(r + 1) * tile, c * tile:(c + 1) * tile]
             for r in range(rows) for c in range(cols)]
    result = Tiling(tiles, (rows, cols), tile, height - rows * tile, width - cols * tile)
    if result.remainder_pixels:
        logger.info("Tiling dropped %d remainder pixels (%d rows, %d cols)",
                    result.remainder_pixels, result.dropped_rows, result.dropped_cols)
    return result


def reassemble(tiling: Tiling) -> np.ndarray:
    """Inverse of partition on the covered area."""
    rows, cols = tiling.grid
    return np.block([[tiling.tiles[r * cols + c] for c in range(cols)] for r in range(rows)])


def gamma(mask: Union[BinaryMask, np.ndarray]) -> float:
    """Fraction of white pixels."""
    bits = mask.bits if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool)
    return float(np.count_nonzero(bits)) / bits.size


def percentile_threshold(gammas: Sequence[float], q: float) -> float:
    """Nearest-rank percentile of the positive-tile gammas."""
    values = np.sort(np.asarray(gammas, dtype=np.float64))
    if values.size == 0:
        raise DataError("percentile threshold needs at least one positive tile")
    if not 0.0 <= q <= 100.0:
        raise ConfigError(f"percentile must be in [0, 100], got {q}")
    rank = max(1, math.ceil(q * values.size / 100.0))
    return float(values[rank - 1])


def _positive_threshold(gammas: np.ndarray, q: float, source: str) -> float:
    """Threshold over the positive gammas; 0.0 when there are none, so every tile is a negative."""
    positives = gammas[gammas > 0]
    if positives.size == 0:
        logger.warning("No white pixels in %s; every tile is labelled -1", source)
        return 0.0
    return percentile_threshold(positives, q)


def assign_label(gamma_value: float, epsilon: float) -> Optional[int]:
    """+1 above the threshold, -1 for empty tiles, EXCLUDED in between."""
    if gamma_value > epsilon:
        return 1
    if gamma_value == 0.0:
        return -1
    return EXCLUDED


@dataclass
class TileLabels:
    gammas: np.ndarray
    labels: List[Optional[int]]
    epsilon: float
    n_excluded: int
    dropped_pixels: int

    @property
    def coverage_percent(self) -> float:
        """Threshold expressed as percent of a tile covered by white pixels."""
        return 100.0 * self.epsilon


def label_tiles(masks: Iterable[Union[BinaryMask, np.ndarray]], tile: int = 250, q: float = 15.0) -> TileLabels:
    """
    Tile every mask, compute gamma per tile and label against the q-th percentile of positive gammas.

    Args:
        masks: Full-size masks
        tile: Tile edge in pixels
        q: Percentile of the positive-gamma distribution used as threshold

    Returns:
        TileLabels with one entry per tile across all masks, in mask then row-major order
    """
    gammas: List[float] = []
    dropped = 0
    for mask in masks:
        bits = mask.bits if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool)
        tiling = partition(bits, tile)
        dropped += tiling.remainder_pixels
        gammas.extend(gamma(t) for t in tiling.tiles)
    gammas_arr = np.asarray(gammas)
    epsilon = _positive_threshold(gammas_arr, q, "the masks")
    labels = [assign_label(g, epsilon) for g in gammas_arr]
    excluded = sum(1 for label in labels if label is EXCLUDED)
    logger.info("📊 %d tiles: %d positive, %d negative, %d excluded (epsilon = %.5f)",
                len(labels), labels.count(1), labels.count(-1), excluded, epsilon)
    return TileLabels(gammas_arr, labels, epsilon, excluded, dropped)


def read_pgm(path: Union[str, Path]) -> BinaryMask:
    """Binary PGM mask: 0 is black, anything above mid-grey is white."""
    try:
        with Image.open(path) as image:
            array = np.asarray(image.convert('L'))
    except (OSError, ValueError) as e:
        raise DataError(f"Could not read mask {path}: {e}") from e
    return BinaryMask.from_array(array > 127)


def write_pgm(mask: BinaryMask, path: Union[str, Path]) -> None:
    Image.fromarray(mask.bits.astype(np.uint8) * 255, mode='L').save(path, format='PPM')


# --------------------------------------------------------------------------
# Feature tables
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FeatureTable:
    features: np.ndarray
    labels: np.ndarray
    ids: Tuple[str, ...]
    provenance: str = 'raw'
    gammas: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        features = np.atleast_2d(np.asarray(self.features, dtype=np.float64))
        labels = np.asarray(self.labels).astype(np.int64).ravel()
        ids = tuple(str(i) for i in self.ids)
        if features.shape[0] != labels.size or labels.size != len(ids):
            raise DataError(f"row count mismatch: {features.shape[0]} features, {labels.size} labels, "
                            f"{len(ids)} ids")
        if not np.all(np.isfinite(features)):
            raise DataError("feature table contains non-finite values")
        if not np.all(np.isin(labels, (-1, 1))):
            raise DataError("labels must be +1 or -1")
        if self.provenance not in PROVENANCE_ORDER:
            raise DataError(f"unknown provenance tag {self.provenance!r}")
        if self.provenance == 'scaled' and np.any(np.abs(features) > 1.0 + 1e-12):
            raise DataError("scaled features must lie in [-1, 1]")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'ids', ids)

    @property
    def n_rows(self) -> int:
        return self.labels.size

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, index: Sequence[int]) -> 'FeatureTable':
        index = np.asarray(index, dtype=np.int64)
        gammas = None if self.gammas is None else np.asarray(self.gammas)[index]
        return FeatureTable(self.features[index], self.labels[index],
                            tuple(self.ids[i] for i in index), self.provenance, gammas)

    def select_ids(self, ids: Iterable[str]) -> 'FeatureTable':
        position = {pid: i for i, pid in enumerate(self.ids)}
        try:
            return self.subset([position[str(pid)] for pid in ids])
        except KeyError as e:
            raise DataError(f"id {e.args[0]!r} is not in the table") from e

    def class_counts(self) -> Dict[int, int]:
        return {1: int(np.sum(self.labels == 1)), -1: int(np.sum(self.labels == -1))}


def _require_stage(table: FeatureTable, stage: str) -> None:
    """Stages may be skipped but never revisited or reordered."""
    if PROVENANCE_ORDER.index(table.provenance) >= PROVENANCE_ORDER.index(stage):
        raise DataError(f"cannot apply the {stage!r} stage to a {table.provenance!r} table; "
                        f"order is {' -> '.join(PROVENANCE_ORDER)}")


def _with_features(table: FeatureTable, features: np.ndarray, provenance: str) -> FeatureTable:
    return replace(table, features=features, provenance=provenance)


def read_feature_csv(path: Union[str, Path], q: float = 15.0) -> FeatureTable:
    """
    Load latent features from ``id,f0..fN[,gamma][,label]``.

    When no label column is present the labels come from the gamma column
    through the percentile threshold; excluded rows are dropped.
    """
    try:
        frame = pd.read_csv(path, dtype={'id': str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"Could not read feature CSV {path}: {e}") from e
    if 'id' not in frame.columns:
        raise DataError(f"{path} has no 'id' column")
    feature_cols = [c for c in frame.columns if c.startswith('f') and c[1:].isdigit()]
    feature_cols.sort(key=lambda c: int(c[1:]))
    if not feature_cols:
        raise DataError(f"{path} has no f0.. feature columns")
    gammas = frame['gamma'].to_numpy(dtype=np.float64) if 'gamma' in frame.columns else None

    if 'label' in frame.columns:
        labels = frame['label'].to_numpy()
    elif gammas is not None:
        epsilon = _positive_threshold(gammas, q, str(path))
        assigned = [assign_label(g, epsilon) for g in gammas]
        keep = np.array([label is not EXCLUDED for label in assigned])
        logger.info("Labelled %s from gamma: epsilon %.5f, %d rows excluded", path, epsilon, int((~keep).sum()))
        frame = frame.loc[keep].reset_index(drop=True)
        gammas = gammas[keep]
        labels = np.array([label for label in assigned if label is not EXCLUDED])
    else:
        raise DataError(f"{path} needs a 'label' or a 'gamma' column")

    return FeatureTable(frame[feature_cols].to_numpy(dtype=np.float64), labels,
                        tuple(frame['id']), 'raw', gammas)


def write_feature_csv(table: FeatureTable, path: Union[str, Path]) -> None:
    frame = pd.DataFrame(table.features, columns=[f"f{i}" for i in range(table.p)])
    frame.insert(0, 'id', list(table.ids))
    if table.gammas is not None:
        frame['gamma'] = table.gammas
    frame['label'] = table.labels
    frame.to_csv(path, index=False, float_format='%.10g')


def make_synthetic(kind: str, n_samples: int, noise: float, seed: int, n_features: int = 2) -> FeatureTable:
    """
    Deterministic two-class toy data with labels in {+1, -1}.

    blobs: two isotropic clusters centred at -2 and +2 on every axis;
    circles: inner circle (+1) inside an outer one (-1);
    moons: two interleaved half circles.
    """
    if kind == 'blobs':
        centers = np.array([[-2.0] * n_features, [2.0] * n_features])
        x, y = make_blobs(n_samples=n_samples, centers=centers, cluster_std=noise, random_state=seed)
    elif kind == 'circles':
        x, y = make_circles(n_samples=n_samples, noise=noise, factor=0.5, random_state=seed)
    elif kind == 'moons':
        x, y = make_moons(n_samples=n_samples, noise=noise, random_state=seed)
    else:
        raise ConfigError(f"unknown synthetic dataset {kind!r}; choose blobs, circles or moons")
    labels = np.where(y == 1, 1, -1)
    ids = tuple(f"{kind}-{i:05d}" for i in range(n_samples))
    return FeatureTable(x, labels, ids, 'raw')


def rebalance(table: FeatureTable, seed: int) -> FeatureTable:
    """Undersample the majority class to the minority count, keeping row order."""
    counts = table.class_counts()
    minority = min(counts, key=lambda c: (counts[c], c))
    majority = -minority
    if counts[majority] == counts[minority]:
        return table
    rng = np.random.default_rng(seed)
    major_idx = np.flatnonzero(table.labels == majority)
    kept = rng.choice(major_idx, size=counts[minority], replace=False)
    index = np.sort(np.concatenate([np.flatnonzero(table.labels == minority), kept]))
    logger.info("Rebalanced %d/%d -> %d/%d", counts[1], counts[-1], counts[minority], counts[minority])
    return table.subset(index)


# --------------------------------------------------------------------------
# Normalisation and reduction
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ZScoreStats:
    mean: np.ndarray
    std: np.ndarray
    constant_columns: Tuple[int, ...]


def zscore_fit(table: FeatureTable) -> Tuple[FeatureTable, ZScoreStats]:
    """Population-std z-score; constant columns keep std 1 and are flagged."""
    _require_stage(table, 'zscored')
    scaler = StandardScaler().fit(table.features)
    constant = tuple(int(i) for i in np.flatnonzero(scaler.var_ == 0.0))
    if constant:
        logger.warning("Zero-variance columns %s left unscaled", list(constant))
    stats = ZScoreStats(_frozen(scaler.mean_), _frozen(scaler.scale_), constant)
    return zscore_apply(table, stats), stats


def zscore_apply(table: FeatureTable, stats: ZScoreStats) -> FeatureTable:
    _require_stage(table, 'zscored')
    if table.p != stats.mean.size:
        raise DataError(f"z-score stats fitted on {stats.mean.size} columns, table has {table.p}")
    return _with_features(table, (table.features - stats.mean) / stats.std, 'zscored')


@dataclass(frozen=True, eq=False)
class Reduction:
    """Top right singular vectors as rows; centre is zero for truncated SVD."""

    method: str
    components: np.ndarray
    center: np.ndarray
    singular_values: np.ndarray


def _orient(components: np.ndarray) -> np.ndarray:
    """Make the largest-|entry| coordinate of every component positive."""
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(components.shape[0]), pivots])
    signs[signs == 0] = 1.0
    return components * signs[:, None]


def pca_fit(table: FeatureTable, p: int, method: str = 'pca') -> Tuple[FeatureTable, Reduction]:
    """
    Fit a p-component projection.

    Args:
        table: Training partition only
        p: Number of components kept
        method: 'pca' centres on the fit-set mean, 'tsvd' does not

    Returns:
        Reduced training table and the fitted Reduction
    """
    _require_stage(table, 'reduced')
    if method not in ('pca', 'tsvd'):
        raise ConfigError(f"unknown reduction {method!r}; choose pca or tsvd")
    rows, dim = table.features.shape
    if p < 1 or p > dim:
        raise DataError(f"cannot keep {p} components of {dim}-dimensional data")
    if rows < 2:
        raise DataError("reduction needs at least two rows")
    center = table.features.mean(axis=0) if method == 'pca' else np.zeros(dim)
    _, s, vt = np.linalg.svd(table.features - center, full_matrices=False)
    reduction = Reduction(method, _frozen(_orient(vt[:p])), _frozen(center), _frozen(s))
    return pca_apply(table, reduction), reduction


def pca_apply(table: FeatureTable, reduction: Reduction) -> FeatureTable:
    _require_stage(table, 'reduced')
    if table.p != reduction.components.shape[1]:
        raise DataError(f"reduction fitted on {reduction.components.shape[1]} columns, table has {table.p}")
    return _with_features(table, (table.features - reduction.center) @ reduction.components.T, 'reduced')


@dataclass(frozen=True, eq=False)
class MinMaxStats:
    low: np.ndarray
    high: np.ndarray
    constant_columns: Tuple[int, ...]


def minmax_scale_fit(table: FeatureTable) -> Tuple[FeatureTable, MinMaxStats]:
    """Per-column affine map of the fit-set range onto [-1, 1]; constant columns map to 0."""
    _require_stage(table, 'scaled')
    low, high = table.features.min(axis=0), table.features.max(axis=0)
    constant = tuple(int(i) for i in np.flatnonzero(high == low))
    if constant:
        logger.warning("Constant columns %s scaled to 0", list(constant))
    stats = MinMaxStats(_frozen(low), _frozen(high), constant)
    scaled, _ = minmax_scale_apply(table, stats)
    return scaled, stats


def minmax_scale_apply(table: FeatureTable, stats: MinMaxStats) -> Tuple[FeatureTable, int]:
    """Scale with fitted ranges, clamping outliers to the boundary; returns the clamp count."""
    _require_stage(table, 'scaled')
    if table.p != stats.low.size:
        raise DataError(f"min-max stats fitted on {stats.low.size} columns, table has {table.p}")
    span = stats.high - stats.low
    safe = np.where(span == 0.0, 1.0, span)
    scaled = 2.0 * (table.features - stats.low) / safe - 1.0
    scaled[:, span == 0.0] = 0.0
    clamped = int(np.count_nonzero(np.abs(scaled) > 1.0))
    if clamped:
        logger.info("Clamped %d values outside the fitted range", clamped)
    return _with_features(table, np.clip(scaled, -1.0, 1.0), 'scaled'), clamped


@dataclass(frozen=True)
class FeatureChain:
    """zscore -> reduce -> [-1, 1] statistics fitted on one training partition."""

    zscore: ZScoreStats
    reduction: Reduction
    minmax: MinMaxStats

    @classmethod
    def fit(cls, train: FeatureTable, p: int, method: str = 'pca') -> Tuple[FeatureTable, 'FeatureChain']:
        z, zstats = zscore_fit(train)
        r, reduction = pca_fit(z, p, method)
        scaled, mstats = minmax_scale_fit(r)
        return scaled, cls(zstats, reduction, mstats)

    def transform(self, table: FeatureTable) -> FeatureTable:
        reduced = pca_apply(zscore_apply(table, self.zscore), self.reduction)
        scaled, _ = minmax_scale_apply(reduced, self.minmax)
        return scaled


# --------------------------------------------------------------------------
# Splits
# --------------------------------------------------------------------------

def stratified_kfold(labels: Sequence[int], k: int, seed: int) -> List[np.ndarray]:
    """k disjoint test-index folds with per-class counts differing by at most one."""
    labels = np.asarray(labels)
    if k < 2 or k > labels.size:
        raise ConfigError(f"k must be between 2 and the number of samples, got {k}")
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    return [np.sort(test) for _, test in splitter.split(np.zeros(labels.size), labels)]


def fold_partitions(folds: List[np.ndarray]) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(train, test) index pairs, train being the union of the other folds."""
    pairs = []
    for i, test in enumerate(folds):
        train = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
        pairs.append((train, test))
    return pairs


def train_test_indices(labels: Sequence[int], n_train: int, n_test: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Stratified random train/test subsets of exactly the requested sizes."""
    labels = np.asarray(labels)
    if n_train + n_test > labels.size:
        raise DataError(f"requested {n_train}+{n_test} points from {labels.size}")
    index = np.arange(labels.size)
    rest = labels.size - n_train - n_test
    if rest:
        index, _ = train_test_split(index, train_size=n_train + n_test, stratify=labels, random_state=seed)
    train, test = train_test_split(index, train_size=n_train, test_size=n_test,
                                   stratify=labels[index], random_state=seed)
    return np.sort(train), np.sort(test)


SPLIT_NAMES = ('unet_train', 'unet_test', 'one_to_n', 'n_to_n')


@dataclass
class SplitSpec:
    subsets: Dict[str, List[str]]
    seed: int

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        sets = {name: set(self.subsets.get(name, [])) for name in SPLIT_NAMES}
        unknown = set(self.subsets) - set(SPLIT_NAMES)
        if unknown:
            raise DataError(f"unknown split names {sorted(unknown)}")
        for name, ids in self.subsets.items():
            if len(set(ids)) != len(ids):
                raise DataError(f"split {name!r} lists an id twice")
        if sets['unet_train'] & sets['unet_test']:
            raise DataError("unet_train and unet_test overlap")
        if sets['one_to_n'] & sets['n_to_n']:
            raise DataError("one_to_n and n_to_n overlap")
        for name in ('one_to_n', 'n_to_n'):
            if not sets[name] <= sets['unet_test']:
                raise DataError(f"{name} must be drawn from unet_test")

    def to_dict(self) -> Dict:
        return {'seed': self.seed, 'subsets': {k: list(v) for k, v in self.subsets.items()}}

    @classmethod
    def from_dict(cls, data: Dict) -> 'SplitSpec':
        return cls({k: [str(i) for i in v] for k, v in data['subsets'].items()}, int(data['seed']))

    def save(self, path: Union[str, Path]) -> None:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'SplitSpec':
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return cls.from_dict(json.load(f))
        except (OSError, json.JSONDecodeError, KeyError) as e:
            raise DataError(f"Could not load split spec {path}: {e}") from e


def make_split_spec(ids: Sequence[str], n_unet_train: int, seed: int,
                    n_one_to_n: int = 2000, n_n_to_n: int = 700) -> SplitSpec:
    """Draw the four named subsets from a list of ids."""
    ids = [str(i) for i in ids]
    if n_unet_train + n_one_to_n + n_n_to_n > len(ids):
        raise DataError(f"{len(ids)} ids cannot hold {n_unet_train} + {n_one_to_n} + {n_n_to_n}")
    order = np.random.default_rng(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    unet_train = shuffled[:n_unet_train]
    unet_test = shuffled[n_unet_train:]
    return SplitSpec({
        'unet_train': unet_train,
        'unet_test': unet_test,
        'one_to_n': unet_test[:n_one_to_n],
        'n_to_n': unet_test[n_one_to_n:n_one_to_n + n_n_to_n],
    }, seed)
