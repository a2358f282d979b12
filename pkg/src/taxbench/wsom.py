"""Weighted self-organizing maps: competitive learning on a square grid of
units interleaved with gradient steps on a per-feature weight vector.

Inputs are multiplied by the weight vector before BMU search, and the
weights are trained so that inputs end up distinctively close to their BMU
relative to the rest of the map: one step per batch descends

    J(w) = mean_x [ min_i dist(w*x, M_i) / mean_i dist(w*x, M_i) ] + l2 * ||w||^2

followed by projection onto {w >= 0, mean(w) = 1}. The per-sample
distinctiveness score ``wsom_loss`` is 1 minus that ratio, so descending J
raises the score. Units live in weighted feature space and are treated as
constants during each weight step.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ValidationError

DISTANCES = ("euclidean", "cosine")

#: learning rate decays linearly to alpha0 / ALPHA_DECAY_FACTOR
ALPHA_DECAY_FACTOR = 100.0
#: neighborhood radius decays linearly to this floor
BETA_FLOOR = 0.5


class TrainingError(ValidationError):
    """Raised for invalid training configuration or data."""


def default_side(n_rows: int) -> int:
    """Map side heuristic: fourth root of the extension size, clamped to [2, 10]."""
    return int(min(10, max(2, math.ceil(n_rows ** 0.25))))


@dataclass(frozen=True)
class TrainConfig:
    side: int | None = None  # None: default_side(n) at train time
    epochs: int = 20
    alpha0: float = 0.5
    beta0: float | None = None  # None: side / 2
    distance: str = "euclidean"
    weight_lr: float = 0.02
    l2: float = 0.01
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if self.side is not None and self.side < 2:
            raise TrainingError(f"side must be >= 2, got {self.side}")
        if self.epochs < 1:
            raise TrainingError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 < self.alpha0 <= 1.0:
            raise TrainingError(f"alpha0 must be in (0, 1], got {self.alpha0}")
        if self.beta0 is not None and self.beta0 <= 0.0:
            raise TrainingError(f"beta0 must be positive, got {self.beta0}")
        if self.distance not in DISTANCES:
            raise TrainingError(f"distance must be one of {DISTANCES}, got {self.distance!r}")
        if self.weight_lr < 0.0:
            raise TrainingError(f"weight_lr must be nonnegative, got {self.weight_lr}")
        if self.l2 < 0.0:
            raise TrainingError(f"l2 must be nonnegative, got {self.l2}")
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be >= 1, got {self.batch_size}")

    def to_doc(self) -> dict[str, Any]:
        return {
            "side": self.side,
            "epochs": self.epochs,
            "alpha0": self.alpha0,
            "beta0": self.beta0,
            "distance": self.distance,
            "weight_lr": self.weight_lr,
            "l2": self.l2,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise TrainingError(f"unknown training options: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class SomMap:
    """Square grid of unit vectors; unit i sits at grid[i] = (i // side, i % side)."""

    side: int
    units: np.ndarray  # (side*side, d)
    grid: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if self.side < 2:
            raise TrainingError(f"side must be >= 2, got {self.side}")
        coords = np.indices((self.side, self.side)).reshape(2, -1).T
        self.grid = coords.astype(int)

    @property
    def n_units(self) -> int:
        return self.side * self.side

    def grid_coordinate(self, index: int) -> tuple[int, int]:
        return int(self.grid[index, 0]), int(self.grid[index, 1])

    def chebyshev_distances(self) -> np.ndarray:
        """(n_units, n_units) grid distances, cached on first use."""
        cached = getattr(self, "_cheb", None)
        if cached is None:
            diff = np.abs(self.grid[:, None, :] - self.grid[None, :, :])
            cached = diff.max(axis=2).astype(float)
            self._cheb = cached
        return cached


@dataclass(frozen=True)
class FeatureWeights:
    """Nonnegative per-feature importance weights normalized to mean 1."""

    w: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=float)
        object.__setattr__(self, "w", w)
        if w.ndim != 1 or w.size == 0:
            raise TrainingError("weights must be a nonempty 1-D vector")
        if (w < 0).any():
            raise TrainingError("weights must be nonnegative")
        if abs(float(w.mean()) - 1.0) > 1e-6:
            raise TrainingError(f"weights must have mean 1, got {float(w.mean())!r}")

    @classmethod
    def uniform(cls, n_features: int) -> "FeatureWeights":
        return cls(np.ones(n_features))


@dataclass
class TrainTrace:
    """Per-epoch training diagnostics."""

    quantization_errors: list[float] = field(default_factory=list)
    mean_losses: list[float] = field(default_factory=list)
    weight_snapshots: list[np.ndarray] = field(default_factory=list)

    def to_csv(self) -> str:
        out = io.StringIO()
        d = len(self.weight_snapshots[0]) if self.weight_snapshots else 0
        header = ["epoch", "quantization_error", "mean_loss"] + [f"w_{j}" for j in range(d)]
        out.write(",".join(header) + "\n")
        for e, (qe, ml, w) in enumerate(
            zip(self.quantization_errors, self.mean_losses, self.weight_snapshots)
        ):
            row = [str(e), repr(qe), repr(ml)] + [repr(float(x)) for x in w]
            out.write(",".join(row) + "\n")
        return out.getvalue()


def _as_matrix(data: Any) -> np.ndarray:
    """Accept a FeatureMatrix or a plain (n, d) array."""
    matrix = getattr(data, "matrix", data)
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise TrainingError(f"expected a nonempty (n, d) matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise TrainingError("data contains non-finite values")
    return arr


def distances_to_units(units: np.ndarray, x: np.ndarray, distance: str) -> np.ndarray:
    """Distance from one (already weighted) vector to every unit."""
    if distance == "euclidean":
        diff = units - x
        return np.sqrt((diff * diff).sum(axis=1))
    norm_x = float(np.linalg.norm(x))
    norms_u = np.linalg.norm(units, axis=1)
    out = np.ones(len(units))
    if norm_x == 0.0:
        return out
    ok = norms_u > 0.0
    out[ok] = 1.0 - (units[ok] @ x) / (norms_u[ok] * norm_x)
    return out


def _batch_distances(units: np.ndarray, xs: np.ndarray, distance: str) -> np.ndarray:
    """(n, n_units) distances for a batch of weighted vectors."""
    if distance == "euclidean":
        sq = (
            (xs * xs).sum(axis=1)[:, None]
            - 2.0 * xs @ units.T
            + (units * units).sum(axis=1)[None, :]
        )
        return np.sqrt(np.maximum(sq, 0.0))
    norms_x = np.linalg.norm(xs, axis=1)
    norms_u = np.linalg.norm(units, axis=1)
    denom = norms_x[:, None] * norms_u[None, :]
    out = np.ones((xs.shape[0], units.shape[0]))
    ok = denom > 0.0
    sims = xs @ units.T
    out[ok] = 1.0 - sims[ok] / denom[ok]
    return out


def init_map(config: TrainConfig, data: Any) -> SomMap:
    """Units sampled from data rows: without replacement when the data is
    large enough, with replacement otherwise. Deterministic given the seed."""
    matrix = _as_matrix(data)
    rng = np.random.default_rng(config.seed)
    side = config.side or default_side(matrix.shape[0])
    return _init_units(rng, matrix, side)


def _init_units(rng: np.random.Generator, matrix: np.ndarray, side: int) -> SomMap:
    n_units = side * side
    n = matrix.shape[0]
    if n >= n_units:
        picks = rng.permutation(n)[:n_units]
    else:
        picks = rng.integers(0, n, size=n_units)
    return SomMap(side=side, units=matrix[picks].copy())


def bmu(som: SomMap, weights: FeatureWeights, x: np.ndarray) -> int:
    """Index of the best matching unit for a raw input; ties go to the
    lowest unit index."""
    x = np.asarray(x, dtype=float)
    if not np.isfinite(x).all():
        raise TrainingError("bmu input contains non-finite values")
    if x.shape != (som.units.shape[1],):
        raise TrainingError(f"input has {x.shape} but units have {som.units.shape[1]} features")
    d = distances_to_units(som.units, weights.w * x, "euclidean")
    return int(np.argmin(d))


def bmu_with_distance(
    som: SomMap, weights: FeatureWeights, x: np.ndarray, distance: str = "euclidean"
) -> tuple[int, float]:
    d = distances_to_units(som.units, weights.w * np.asarray(x, dtype=float), distance)
    idx = int(np.argmin(d))
    return idx, float(d[idx])


def neighborhood(som: SomMap, bmu_index: int, beta: float) -> np.ndarray:
    """Gaussian neighborhood over Chebyshev grid distance: 1 at the BMU,
    exp(-g^2 / (2 beta^2)) elsewhere."""
    g = som.chebyshev_distances()[bmu_index]
    return np.exp(-(g * g) / (2.0 * beta * beta))


def som_update(som: SomMap, x: np.ndarray, bmu_index: int, alpha: float, beta: float) -> SomMap:
    """One competitive-learning update, in place: every unit moves toward the
    (already weighted) input by alpha scaled by its neighborhood factor."""
    if not 0.0 <= alpha <= 1.0:
        raise TrainingError(f"alpha must be in [0, 1], got {alpha}")
    if beta <= 0.0:
        raise TrainingError(f"beta must be positive, got {beta}")
    theta = neighborhood(som, bmu_index, beta)
    som.units += (alpha * theta)[:, None] * (np.asarray(x, dtype=float) - som.units)
    return som


def wsom_loss(som: SomMap, weights: FeatureWeights, x: np.ndarray) -> float:
    """Distinctiveness of one input on the map, in [0, 1].

    0 when the input is equidistant from every unit (and for the degenerate
    all-zero-distance case), 1 when it coincides with its BMU while other
    units are strictly farther.
    """
    if som.n_units < 2:
        raise TrainingError("wsom_loss requires at least 2 units")
    d = distances_to_units(som.units, weights.w * np.asarray(x, dtype=float), "euclidean")
    return _loss_from_distances(d)


def wsom_loss_with(som: SomMap, weights: FeatureWeights, x: np.ndarray, distance: str) -> float:
    d = distances_to_units(som.units, weights.w * np.asarray(x, dtype=float), distance)
    return _loss_from_distances(d)


def _loss_from_distances(d: np.ndarray) -> float:
    mean = float(d.mean())
    if mean == 0.0:
        return 0.0
    return 1.0 - float(d.min()) / mean


def weight_objective(
    weights: FeatureWeights | np.ndarray,
    som: SomMap,
    batch: np.ndarray,
    l2: float,
    distance: str = "euclidean",
) -> float:
    """The scalar the weight step descends: mean BMU-to-mean distance ratio
    over the batch plus the L2 penalty. Exposed for finite-difference checks."""
    w = weights.w if isinstance(weights, FeatureWeights) else np.asarray(weights, dtype=float)
    batch = np.atleast_2d(np.asarray(batch, dtype=float))
    dists = _batch_distances(som.units, batch * w, distance)
    means = dists.mean(axis=1)
    ratios = np.ones(len(batch))
    ok = means > 0.0
    ratios[ok] = dists.min(axis=1)[ok] / means[ok]
    return float(ratios.mean()) + float(l2) * float(w @ w)


def weight_gradient(
    weights: FeatureWeights | np.ndarray,
    som: SomMap,
    batch: np.ndarray,
    l2: float,
    distance: str = "euclidean",
) -> np.ndarray:
    """Analytic gradient of ``weight_objective`` with the min resolved to the
    current BMU (ties to the lowest unit index, a subgradient at ties)."""
    w = weights.w if isinstance(weights, FeatureWeights) else np.asarray(weights, dtype=float)
    batch = np.atleast_2d(np.asarray(batch, dtype=float))
    n, d = batch.shape
    units = som.units
    k = units.shape[0]
    weighted = batch * w

    grad = np.zeros(d)
    if distance == "euclidean":
        diffs = weighted[:, None, :] - units[None, :, :]  # (n, k, d)
        dists = np.sqrt((diffs * diffs).sum(axis=2))  # (n, k)
        with np.errstate(invalid="ignore", divide="ignore"):
            ddw = np.where(dists[:, :, None] > 0.0, diffs / dists[:, :, None], 0.0)
        ddw = ddw * batch[:, None, :]  # d d_i / d w_j, shape (n, k, d)
    else:
        sims = weighted @ units.T  # (n, k)
        norms_x = np.linalg.norm(weighted, axis=1)  # (n,)
        norms_u = np.linalg.norm(units, axis=1)  # (k,)
        denom = norms_x[:, None] * norms_u[None, :]
        dists = np.ones((n, k))
        ok = denom > 0.0
        dists[ok] = 1.0 - sims[ok] / denom[ok]
        # d dist_i / d w_j = -(x_j M_ij / (|a| m_i)) + s_i w_j x_j^2 / (|a|^3 m_i)
        ddw = np.zeros((n, k, d))
        with np.errstate(invalid="ignore", divide="ignore"):
            term1 = batch[:, None, :] * units[None, :, :] / denom[:, :, None]
            term2 = (
                sims[:, :, None]
                * (w * batch * batch)[:, None, :]
                / (norms_x[:, None, None] ** 3 * norms_u[None, :, None])
            )
        mask = ok[:, :, None]
        ddw = np.where(mask, -term1 + term2, 0.0)

    bmus = np.argmin(dists, axis=1)
    means = dists.mean(axis=1)
    mean_grads = ddw.mean(axis=1)  # (n, d)
    rows = np.arange(n)
    d_bmu = dists[rows, bmus]  # (n,)
    g_bmu = ddw[rows, bmus]  # (n, d)
    ok_rows = means > 0.0
    per_sample = np.zeros((n, d))
    per_sample[ok_rows] = (
        g_bmu[ok_rows] * means[ok_rows, None] - d_bmu[ok_rows, None] * mean_grads[ok_rows]
    ) / (means[ok_rows, None] ** 2)
    grad = per_sample.mean(axis=0) + 2.0 * float(l2) * w
    return grad


def project_to_weight_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w >= 0, mean(w) = 1}: shift-and-clamp with
    the threshold chosen so the clamped vector sums to d."""
    d = v.size
    target = float(d)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - target
    ks = np.arange(1, d + 1)
    rho = int(np.nonzero(u - css / ks > 0)[0][-1])
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def weight_step(
    weights: FeatureWeights,
    som: SomMap,
    batch: np.ndarray,
    weight_lr: float,
    l2: float,
    distance: str = "euclidean",
) -> FeatureWeights:
    """One projected gradient step on the batch objective."""
    if len(np.atleast_2d(batch)) == 0:
        raise TrainingError("weight_step requires a nonempty batch")
    if weight_lr == 0.0:
        return weights
    grad = weight_gradient(weights, som, batch, l2, distance)
    return FeatureWeights(project_to_weight_simplex(weights.w - weight_lr * grad))


def quantization_error(som: SomMap, weights: FeatureWeights, data: Any, distance: str = "euclidean") -> float:
    """Mean distance from each (weighted) row to its BMU."""
    matrix = _as_matrix(data)
    dists = _batch_distances(som.units, matrix * weights.w, distance)
    return float(dists.min(axis=1).mean())


def mean_loss(som: SomMap, weights: FeatureWeights, data: Any, distance: str = "euclidean") -> float:
    """Mean distinctiveness score over all rows."""
    matrix = _as_matrix(data)
    dists = _batch_distances(som.units, matrix * weights.w, distance)
    means = dists.mean(axis=1)
    losses = np.zeros(len(matrix))
    ok = means > 0.0
    losses[ok] = 1.0 - dists.min(axis=1)[ok] / means[ok]
    return float(losses.mean())


def _epoch_schedule(start: float, end: float, epochs: int) -> np.ndarray:
    if epochs == 1:
        return np.array([start])
    return np.linspace(start, end, epochs)


def train(
    data: Any,
    config: TrainConfig,
    progress: Callable[[int, int], None] | None = None,
) -> tuple[SomMap, FeatureWeights, TrainTrace]:
    """Full training run: seeded shuffling per epoch; per batch, BMUs are
    found against the map as of the batch start, units are updated sample by
    sample, then one weight step is taken. Alpha and beta decay linearly
    per epoch. Bit-reproducible for a given (data, config)."""
    matrix = _as_matrix(data)
    n, d = matrix.shape
    side = config.side or default_side(n)
    beta0 = config.beta0 if config.beta0 is not None else side / 2.0
    alphas = _epoch_schedule(config.alpha0, config.alpha0 / ALPHA_DECAY_FACTOR, config.epochs)
    betas = _epoch_schedule(max(beta0, BETA_FLOOR), BETA_FLOOR, config.epochs)

    rng = np.random.default_rng(config.seed)
    som = _init_units(rng, matrix, side)
    weights = FeatureWeights.uniform(d)
    trace = TrainTrace()
    cheb = som.chebyshev_distances()

    for epoch in range(config.epochs):
        alpha = float(alphas[epoch])
        beta = float(betas[epoch])
        theta_table = np.exp(-(cheb * cheb) / (2.0 * beta * beta))
        coef_table = alpha * theta_table
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch_ids = order[start : start + config.batch_size]
            batch = matrix[batch_ids]
            weighted = batch * weights.w
            bmus = np.argmin(_batch_distances(som.units, weighted, config.distance), axis=1)
            units = som.units
            for i in range(len(batch_ids)):
                coef = coef_table[bmus[i]]
                units += coef[:, None] * (weighted[i] - units)
            weights = weight_step(
                weights, som, batch, config.weight_lr, config.l2, config.distance
            )
        trace.quantization_errors.append(quantization_error(som, weights, matrix, config.distance))
        trace.mean_losses.append(mean_loss(som, weights, matrix, config.distance))
        trace.weight_snapshots.append(weights.w.copy())
        if progress is not None:
            progress(epoch + 1, config.epochs)

    return som, weights, trace
