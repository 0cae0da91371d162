"""Spatial-spectral adjacency graph and manifold reconstruction weights.

Neighbors are the k points with smallest SSCD (ties broken by ascending
flat index). Each point is then reconstructed from its neighbors through
the coordinate-distance-normalized measures h = (x_i - x_j) / d_scd(i, j);
the affine weights minimizing ||sum_j w_j h_j||^2 subject to sum w = 1 have
the closed form w = z^{-1} 1 / (1' z^{-1} 1) on the Gram matrix z of the
measures, regularized when z is singular. Weights may be negative; rows of
the resulting sparse matrix sum to 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.spatial.distance

from .errors import ConfigError, NumericalError, ShapeError
from .sscd import SscdContext, sscd_row
from .parallel import map_blocks

DEFAULT_EPS = 1e-3


@dataclass(frozen=True)
class NeighborGraph:
    """k-nearest-neighbor lists over a set of graph nodes.

    ``pixels`` holds the flat raster indices of the nodes in ascending
    order; ``neighbors[r]`` holds k positions into ``pixels`` sorted by
    ascending SSCD (ties by ascending flat index), with matching distances.
    """

    k: int
    pixels: np.ndarray     # (n,) int64 flat indices, strictly increasing
    neighbors: np.ndarray  # (n, k) int64 positions into pixels
    distances: np.ndarray  # (n, k) float64

    def __post_init__(self):
        n = self.pixels.shape[0]
        if not (1 <= self.k < n):
            raise ConfigError(f"neighbor count must satisfy 1 <= k < n={n}, got {self.k}")
        if self.neighbors.shape != (n, self.k) or self.distances.shape != (n, self.k):
            raise ShapeError("neighbor and distance arrays must be (n, k)")
        if np.any(self.neighbors == np.arange(n)[:, None]):
            raise ConfigError("neighbor lists must not contain self-loops")

    @property
    def node_count(self) -> int:
        return self.pixels.shape[0]

    def neighbor_pixels(self, node: int) -> np.ndarray:
        """Flat raster indices of the neighbors of graph node ``node``."""
        return self.pixels[self.neighbors[node]]


def _resolve_nodes(ctx: SscdContext, nodes) -> np.ndarray:
    if nodes is None:
        return np.arange(ctx.pixel_count, dtype=np.int64)
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.ndim != 1:
        raise ShapeError("graph nodes must be a 1-D index array")
    if nodes.size and (nodes.min() < 0 or nodes.max() >= ctx.pixel_count):
        raise ConfigError(f"node indices must lie in [0, {ctx.pixel_count})")
    out = np.unique(nodes)
    if out.size != nodes.size:
        raise ConfigError("node indices must be distinct")
    return out


def knn_sscd(ctx: SscdContext, k: int, nodes=None, workers=None) -> NeighborGraph:
    """k-nearest-neighbor graph under SSCD over ``nodes`` (default: all pixels).

    Row r lists the k graph nodes j minimizing sscd(pixels[r], pixels[j]),
    j != r, ascending, ties by ascending flat index. Exact brute force.
    """
    pixels = _resolve_nodes(ctx, nodes)
    n = pixels.shape[0]
    if not (1 <= k < n):
        raise ConfigError(f"neighbor count must satisfy 1 <= k < n={n}, got {k}")
    queries = np.ascontiguousarray(ctx.filtered.flat[pixels])
    neighbors = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k), dtype=np.float64)

    def run(start, stop):
        for r in range(start, stop):
            row = sscd_row(ctx, int(pixels[r]), queries)
            row[r] = np.inf
            order = np.argsort(row, kind="stable")[:k]
            neighbors[r] = order
            distances[r] = row[order]

    map_blocks(run, n, workers)
    return NeighborGraph(k=k, pixels=pixels, neighbors=neighbors, distances=distances)


def knn_euclidean(X: np.ndarray, k: int) -> np.ndarray:
    """Plain Euclidean k-NN over row-sample matrix X, same tie rule as SSCD.

    Returns (n, k) neighbor indices per row, ascending distance, ties by
    ascending index. Used by the spectral-only baseline graph.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not (1 <= k < n):
        raise ConfigError(f"neighbor count must satisfy 1 <= k < n={n}, got {k}")
    d2 = scipy.spatial.distance.squareform(
        scipy.spatial.distance.pdist(X, "sqeuclidean")
    )
    np.fill_diagonal(d2, np.inf)
    return np.argsort(d2, axis=1, kind="stable")[:, :k]


def combined_measure(ctx: SscdContext, i: int, j: int, *,
                     scd_override=None, use_filtered=False) -> np.ndarray:
    """Coordinate-normalized spectral difference (x_i - x_j) / d_scd(i, j).

    Computed on raw spectra unless ``use_filtered``; ``scd_override``
    substitutes a constant divisor (the baseline-equivalence switch).
    """
    if i == j:
        raise ConfigError(f"combined measure is undefined for a pixel with itself (i={i})")
    source = ctx.filtered if use_filtered else ctx.raw
    denom = _scd_divisor(ctx, np.asarray([i]), np.asarray([j]), scd_override)[0]
    return (source.flat[i] - source.flat[j]) / denom


def _scd_divisor(ctx, i_idx, j_idx, scd_override):
    if scd_override is not None:
        if not (scd_override > 0):
            raise ConfigError(f"scd override must be > 0, got {scd_override}")
        return np.full(j_idx.shape[0], float(scd_override))
    width = ctx.raw.width
    pi, qi = np.divmod(i_idx, width)
    pj, qj = np.divmod(j_idx, width)
    return np.hypot(pi - pj, qi - qj).astype(np.float64)


def _measure_rows(ctx, node, graph, scd_override, use_filtered):
    source = ctx.filtered if use_filtered else ctx.raw
    i = graph.pixels[node]
    nbrs = graph.neighbor_pixels(node)
    denom = _scd_divisor(ctx, np.full(nbrs.shape[0], i), nbrs, scd_override)
    return (source.flat[i] - source.flat[nbrs]) / denom[:, None]


def gram_z(ctx: SscdContext, node: int, graph: NeighborGraph, *,
           scd_override=None, use_filtered=False) -> np.ndarray:
    """k x k Gram matrix of node's combined measures: z[a, b] = <h^a, h^b>."""
    H = _measure_rows(ctx, node, graph, scd_override, use_filtered)
    return H @ H.T


def reconstruction_weights(z: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Affine weights minimizing w' z w subject to sum(w) = 1.

    Solves (z + eps * trace(z)/k * I) u = 1 and normalizes u to unit sum.
    An all-zero Gram matrix yields uniform weights when eps > 0 and is a
    singularity otherwise. Weights may be negative.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise ShapeError(f"Gram matrix must be square, got {z.shape}")
    k = z.shape[0]
    if not (eps >= 0):
        raise ConfigError(f"eps must be >= 0, got {eps}")
    trace = float(np.trace(z))
    if trace == 0.0:
        # PSD with zero trace means z is identically zero.
        if eps > 0:
            return np.full(k, 1.0 / k)
        raise NumericalError("all-zero Gram matrix with no regularization")
    zr = z + (eps * trace / k) * np.eye(k) if eps > 0 else z
    try:
        u = np.linalg.solve(zr, np.ones(k))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular Gram matrix: {exc}") from exc
    total = u.sum()
    if not np.isfinite(total) or total == 0.0:
        raise NumericalError("Gram solve produced no normalizable weights")
    return u / total


def build_weight_matrix(ctx: SscdContext, graph: NeighborGraph, *,
                        eps: float = DEFAULT_EPS, scd_override=None,
                        use_filtered=False, workers=None) -> scipy.sparse.csr_matrix:
    """Sparse n x n reconstruction weight matrix over the graph nodes.

    Row r carries the weights of node r scattered onto its neighbor
    columns; every row sums to 1 and the diagonal is structurally zero.
    """
    n = graph.node_count
    k = graph.k
    data = np.empty((n, k), dtype=np.float64)

    def run(start, stop):
        for r in range(start, stop):
            H = _measure_rows(ctx, r, graph, scd_override, use_filtered)
            data[r] = reconstruction_weights(H @ H.T, eps)

    map_blocks(run, n, workers)
    indptr = np.arange(0, n * k + 1, k)
    matrix = scipy.sparse.csr_matrix(
        (data.reshape(-1), graph.neighbors.reshape(-1).copy(), indptr), shape=(n, n)
    )
    matrix.sort_indices()
    return matrix
