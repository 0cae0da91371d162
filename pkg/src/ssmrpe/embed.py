"""Linear projections: the manifold-preserving eigensolve plus PCA and the
spectral-only neighborhood-preserving baseline.

The manifold methods minimize the projected reconstruction error
tr(A' X M X' A) under the pencil normalization a'(XX' + ridge I)a = 1,
which leads to the generalized eigenproblem (X M X') a = lambda (XX') a;
the projection keeps the eigenvectors of the d smallest eigenvalues. XX'
is singular whenever n < D (routine for small training sets), so a ridge
proportional to trace(XX')/D is added by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .core import FeatureMatrix
from .errors import ConfigError, NumericalError, ShapeError
from .ssgraph import (DEFAULT_EPS, build_weight_matrix, knn_euclidean,
                      knn_sscd, reconstruction_weights)
from .sscd import SscdContext

RIDGE_SCALE = 1e-6


@dataclass(frozen=True)
class EmbeddingModel:
    """A fitted linear embedding: projection matrix, spectrum, training mean.

    Eigenvalues are stored in column order: ascending for the pencil
    methods (d smallest), descending by explained variance for PCA.
    """

    projection: np.ndarray   # (D, d)
    eigenvalues: np.ndarray  # (d,)
    mean: np.ndarray         # (D,) training mean subtracted before projecting
    method: str

    def __post_init__(self):
        A = np.asarray(self.projection, dtype=np.float64)
        if A.ndim != 2 or A.shape[1] > A.shape[0]:
            raise ShapeError(f"projection must be (D, d) with d <= D, got {A.shape}")
        if not np.isfinite(A).all():
            raise ShapeError("projection contains non-finite entries")
        if np.any(np.all(A == 0.0, axis=0)):
            raise ShapeError("projection has an all-zero column")
        if np.asarray(self.eigenvalues).shape != (A.shape[1],):
            raise ShapeError("eigenvalues must match the projection columns")
        if np.asarray(self.mean).shape != (A.shape[0],):
            raise ShapeError("mean must match the projection rows")

    @property
    def input_dim(self) -> int:
        return self.projection.shape[0]

    @property
    def output_dim(self) -> int:
        return self.projection.shape[1]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # Largest-magnitude entry of each column made positive; removes the
    # eigenvector sign ambiguity so fits are reproducible.
    lead = np.abs(vectors).argmax(axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2.0


def default_ridge(X: np.ndarray) -> float:
    """Default pencil regularizer 1e-6 * trace(XX') / D."""
    X = np.asarray(X, dtype=np.float64)
    return RIDGE_SCALE * float(np.einsum("ij,ij->", X, X)) / X.shape[0]


def build_m(weights) -> np.ndarray:
    """Dense n x n alignment matrix (I - W)'(I - W) of a weight matrix.

    Rows of W sum to 1, so the all-ones vector lies in the null space.
    """
    if scipy.sparse.issparse(weights):
        W = weights.toarray()
    else:
        W = np.asarray(weights, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ShapeError(f"weight matrix must be square, got {W.shape}")
    IW = np.eye(W.shape[0]) - W
    return _symmetrize(IW.T @ IW)


def solve_projection(X: np.ndarray, M: np.ndarray, d: int, ridge: float = 0.0,
                     *, mean=None, method: str = "pencil") -> EmbeddingModel:
    """Generalized eigensolve of (X M X', XX' + ridge I) for the d smallest
    eigenvalues. X must be column-centered by the caller.

    Columns are normalized to a'(XX' + ridge I)a = 1 with the leading
    entry positive; eigenvalues come back ascending.
    """
    X = np.asarray(X, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"X must be (D, n), got ndim={X.ndim}")
    D, n = X.shape
    if M.shape != (n, n):
        raise ShapeError(f"M must be ({n}, {n}) to match X, got {M.shape}")
    if not (1 <= d <= D):
        raise ConfigError(f"embedding dimension must satisfy 1 <= d <= D={D}, got {d}")
    if not (ridge >= 0):
        raise ConfigError(f"ridge must be >= 0, got {ridge}")
    objective = _symmetrize(X @ M @ X.T)
    gram = _symmetrize(X @ X.T)
    if ridge > 0:
        gram = gram + ridge * np.eye(D)
    try:
        eigenvalues, vectors = scipy.linalg.eigh(objective, gram,
                                                 subset_by_index=(0, d - 1))
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise NumericalError(
            f"generalized eigensolve failed (XX' singular? try ridge > 0): {exc}"
        ) from exc
    if mean is None:
        mean = np.zeros(D)
    return EmbeddingModel(projection=_fix_signs(vectors), eigenvalues=eigenvalues,
                          mean=np.asarray(mean, dtype=np.float64), method=method)


def project(model: EmbeddingModel, X: np.ndarray) -> FeatureMatrix:
    """Embed columns of X: Y = A'(X - mean), returned one sample per row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != model.input_dim:
        raise ShapeError(
            f"X must have {model.input_dim} rows, got shape {X.shape}"
        )
    Y = model.projection.T @ (X - model.mean[:, None])
    return FeatureMatrix(Y.T)


def pca_fit(X: np.ndarray, d: int) -> EmbeddingModel:
    """Principal components: top-d eigenvectors of the sample covariance,
    descending eigenvalue order."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"X must be (D, n), got ndim={X.ndim}")
    D, n = X.shape
    if not (1 <= d <= D):
        raise ConfigError(f"embedding dimension must satisfy 1 <= d <= D={D}, got {d}")
    if n < 2:
        raise ConfigError(f"PCA needs at least 2 samples, got {n}")
    mean = X.mean(axis=1)
    Xc = X - mean[:, None]
    cov = _symmetrize((Xc @ Xc.T) / (n - 1))
    eigenvalues, vectors = np.linalg.eigh(cov)  # ascending
    order = np.arange(D - 1, D - d - 1, -1)
    return EmbeddingModel(projection=_fix_signs(vectors[:, order]),
                          eigenvalues=eigenvalues[order], mean=mean, method="pca")


def npe_weights(X: np.ndarray, k: int, eps: float = DEFAULT_EPS) -> scipy.sparse.csr_matrix:
    """Reconstruction weight matrix of the spectral-only baseline: Euclidean
    k-NN and plain differences (x_i - x_j), no coordinate normalization."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    neighbors = knn_euclidean(X, k)
    data = np.empty((n, k), dtype=np.float64)
    for i in range(n):
        H = X[i] - X[neighbors[i]]
        data[i] = reconstruction_weights(H @ H.T, eps)
    indptr = np.arange(0, n * k + 1, k)
    matrix = scipy.sparse.csr_matrix(
        (data.reshape(-1), neighbors.reshape(-1).astype(np.int64), indptr), shape=(n, n)
    )
    matrix.sort_indices()
    return matrix


def npe_fit(X: np.ndarray, k: int, d: int, ridge=None,
            eps: float = DEFAULT_EPS) -> EmbeddingModel:
    """Neighborhood-preserving baseline on spectra alone.

    Same pipeline as the spatial-spectral method but with Euclidean
    neighbors and unnormalized differences; X is (D, n), one spectrum per
    column.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"X must be (D, n), got ndim={X.ndim}")
    weights = npe_weights(X.T, k, eps)
    M = build_m(weights)
    mean = X.mean(axis=1)
    Xc = X - mean[:, None]
    if ridge is None:
        ridge = default_ridge(Xc)
    return solve_projection(Xc, M, d, ridge, mean=mean, method="npe")


def ssmrpe_fit(ctx: SscdContext, k: int, d: int, *, nodes=None,
               eps: float = DEFAULT_EPS, ridge=None, use_filtered=False,
               scd_override=None, workers=None) -> EmbeddingModel:
    """Fit the spatial-spectral manifold embedding over ``nodes``.

    Neighbor selection runs on SSCD (filtered queries against raw windows);
    the reconstruction measures and the projected spectra are raw unless
    ``use_filtered``. ``scd_override`` freezes the coordinate divisor,
    which together with w = 1 reduces the method to the spectral baseline.
    """
    graph = knn_sscd(ctx, k, nodes=nodes, workers=workers)
    weights = build_weight_matrix(ctx, graph, eps=eps, scd_override=scd_override,
                                  use_filtered=use_filtered, workers=workers)
    M = build_m(weights)
    source = ctx.filtered if use_filtered else ctx.raw
    X = source.flat[graph.pixels].T
    mean = X.mean(axis=1)
    Xc = X - mean[:, None]
    if ridge is None:
        ridge = default_ridge(Xc)
    return solve_projection(Xc, M, d, ridge, mean=mean, method="ssmrpe")
