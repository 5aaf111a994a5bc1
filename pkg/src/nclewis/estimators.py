"""
scikit-learn style front end
~~~~~~~~~~~~~~~~~~~~~~~~~~~~
:class:`LewisFactorization` treats each row of ``X`` as a vectorized
operator (see :meth:`TracialAlgebra.vec`). ``fit`` computes the Lewis
basis of their span; ``transform`` applies the change-of-density analysis
map ``A`` and ``inverse_transform`` the synthesis map ``B``, so that
``inverse_transform(transform(x)) = x`` for every ``x`` in the span.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .algebra import Subspace, TracialAlgebra
from .exceptions import DomainError, ShapeError
from .factorization import _check_open_p, _factor_maps

__all__ = ["LewisFactorization", "check_complex_array"]


def check_complex_array(X, n_features=None, name="X"):
    """2-D finite complex array (``sklearn.utils.check_array`` rejects complex input)."""
    arr = np.asarray(X)
    if arr.dtype == object or not (np.issubdtype(arr.dtype, np.number) or arr.dtype == bool):
        raise DomainError(f"{name} must be numeric")
    arr = arr.astype(np.complex128)
    if arr.ndim == 1:
        raise ShapeError(f"{name} must be 2-D; reshape a single sample with X.reshape(1, -1)")
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be a nonempty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or infinity")
    if n_features is not None and arr.shape[1] != n_features:
        raise ShapeError(f"{name} has {arr.shape[1]} features, expected {n_features}")
    return arr


class LewisFactorization(TransformerMixin, BaseEstimator):
    """Change-of-density factorization of the span of the rows of ``X``.

    Parameters
    ----------
    p : float, default=3.0
        Exponent, ``1 < p < inf``.
    block_dims : tuple of int, optional
        Block sizes of the algebra; defaults to one square block matching
        the number of features.
    trace_weights : tuple of float, optional
    tol, max_iter, damping
        Forwarded to :func:`lewis_basis`.

    Attributes
    ----------
    algebra_ : TracialAlgebra
    lewis_ : LewisBasisResult
    components_ : ndarray of shape (n_components, n_features)
        Vectorized Lewis basis.
    analysis_ : ndarray of shape (n_components, n_features)
        Matrix of ``A``.
    density_ : ndarray of shape (n_features,)
        Vectorized density ``X^{p-2}`` (q-inverse power for ``p < 2``).
    """

    def __init__(self, p=3.0, block_dims=None, trace_weights=None, tol=1e-9, max_iter=2000, damping=None):
        self.p = p
        self.block_dims = block_dims
        self.trace_weights = trace_weights
        self.tol = tol
        self.max_iter = max_iter
        self.damping = damping

    def _algebra(self, d):
        if self.block_dims is None:
            m = int(round(np.sqrt(d)))
            if m * m != d:
                raise ShapeError(f"{d} features is not a square; pass block_dims")
            return TracialAlgebra((m,), self.trace_weights)
        alg = TracialAlgebra(tuple(self.block_dims), self.trace_weights)
        if alg.dim != d:
            raise ShapeError(f"algebra has dimension {alg.dim}, X has {d} features")
        return alg

    def fit(self, X, y=None):
        p = _check_open_p(self.p)
        X = check_complex_array(X)
        alg = self._algebra(X.shape[1])
        E = Subspace.from_vecs(alg, X)
        opts = {"tol": self.tol, "max_iter": self.max_iter, "damping": self.damping}
        lew, A, B, residuals = _factor_maps(E, p, opts)
        self.algebra_ = alg
        self.lewis_ = lew
        self.components_ = B.matrix.T.copy()
        self.analysis_ = A.matrix.copy()
        self.density_ = alg.vec(lew.density)
        self.residuals_ = residuals
        self.n_features_in_ = X.shape[1]
        self.n_components_ = E.n
        return self

    def transform(self, X):
        """Coordinates ``A x`` in ``C_p^n``."""
        check_is_fitted(self, "analysis_")
        X = check_complex_array(X, self.n_features_in_)
        return X @ self.analysis_.T

    def inverse_transform(self, C):
        """Operators ``B c`` (vectorized)."""
        check_is_fitted(self, "components_")
        C = check_complex_array(C, self.n_components_, name="C")
        return C @ self.components_

    def projection_matrix(self):
        """Matrix of the projection ``BA`` onto the fitted span."""
        check_is_fitted(self, "components_")
        return self.components_.T @ self.analysis_
