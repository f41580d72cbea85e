"""scikit-learn style transformers for the forward and inverse operators.

Each row of ``X`` holds one function sampled on the fixed ``grid``; the
output row holds the transformed function on the same grid.  Rows are
interpolated by cubic splines, so accuracy near the origin is limited by how
well the grid resolves the power-law behaviour there.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .operators import GridFunction, Parameters, QuadratureSpec, forward_N, inverse_T


class _OperatorTransformer(TransformerMixin, BaseEstimator):
    def __init__(self, grid, alpha=-0.1, beta=-0.3, lam=0.0, n_nodes=64):
        self.grid = grid
        self.alpha = alpha
        self.beta = beta
        self.lam = lam
        self.n_nodes = n_nodes

    def fit(self, X=None, y=None):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size < 4 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be a strictly increasing 1-D array of at least 4 points")
        self.params_ = Parameters(self.alpha, self.beta, self.lam)
        self.params_.require_theorem_regime()
        self.quad_ = QuadratureSpec(self.n_nodes)
        self.grid_ = grid
        return self

    def _check_X(self, X):
        check_is_fitted(self, "params_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.grid_.size:
            raise ValueError(f"expected {self.grid_.size} columns, got {X.shape[1]}")
        return X

    def _apply(self, op, X):
        X = self._check_X(X)
        pts = self.grid_[self.grid_ > 0]
        out = np.zeros_like(X)
        for i, row in enumerate(X):
            f = GridFunction(self.grid_, row)
            out[i, self.grid_ > 0] = op(f, pts)
        return out


class ForwardTransformer(_OperatorTransformer):
    """Apply the forward operator ``N`` row by row.

    Parameters
    ----------
    grid : array_like
        Sample points in ``[0, 1]`` shared by input and output.
    alpha, beta, lam : float
        Kernel parameters; ``-1 < 2 beta < 2 alpha <= 0`` is required so the
        transform can be inverted.
    n_nodes : int
        Gauss-Jacobi nodes per integral.
    """

    def transform(self, X):
        return self._apply(lambda f, x: forward_N(f, x, self.params_, self.quad_), X)

    def inverse_transform(self, X):
        return self._apply(lambda f, x: inverse_T(f, x, self.params_, self.quad_), X)


class InverseTransformer(_OperatorTransformer):
    """Apply the inverse operator ``T`` row by row; rows must vanish at 0."""

    def transform(self, X):
        return self._apply(lambda f, x: inverse_T(f, x, self.params_, self.quad_), X)

    def inverse_transform(self, X):
        return self._apply(lambda f, x: forward_N(f, x, self.params_, self.quad_), X)
