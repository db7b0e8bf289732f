"""scikit-learn style wrappers around the functional core.

Samples are group elements (one integer index per row), so ``X`` is a single
column rather than a feature matrix.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .connectivity import is_additively_connected
from .fuzzy import extraction_report
from .homs import hom_space, is_universally_rigid
from .quadruples import isolated_elements, ordered_count, pair_orbits
from .validation import check_elements, check_group, check_subset, check_values


class FreimanAnalyzer(TransformerMixin, BaseEstimator):
    """Fit on a set ``A``; ``transform`` returns each element's quadruple degree.

    Fitted attributes: ``subset_``, ``orbits_``, ``n_quads_``, ``isolated_``,
    ``freiman_dim_``, ``connectivity_``, ``rigid_`` (``None`` when skipped).
    """

    def __init__(self, group=None, eta=0.2, w_max=4, exact_rank=False, rigidity_max=150):
        self.group = group
        self.eta = eta
        self.w_max = w_max
        self.exact_rank = exact_rank
        self.rigidity_max = rigidity_max

    def fit(self, X, y=None):
        g = check_group(self.group)
        A = check_subset(X, g)
        space = hom_space(A, exact=self.exact_rank)
        self.subset_ = A
        self.orbits_ = pair_orbits(A)
        self.n_quads_ = ordered_count(self.orbits_)
        self.isolated_ = isolated_elements(A)
        self.freiman_dim_ = space.freiman_dim
        self.connectivity_ = is_additively_connected(A, self.eta, self.w_max)
        if space.freiman_dim > 0:
            self.rigid_ = False
        elif len(A) <= self.rigidity_max:
            self.rigid_ = is_universally_rigid(A, space)
        else:
            self.rigid_ = None
        deg = np.zeros(len(A), dtype=np.int64)
        if len(self.orbits_):
            op = np.where(self.orbits_[:, 0] == self.orbits_[:, 1], 1, 2)
            oq = np.where(self.orbits_[:, 2] == self.orbits_[:, 3], 1, 2)
            w = 2 * op * oq  # ordered quadruples per orbit; each contains all its members
            for c in range(4):
                first = np.ones(len(self.orbits_), dtype=bool)
                for prev in range(c):
                    first &= self.orbits_[:, c] != self.orbits_[:, prev]
                np.add.at(deg, self.orbits_[first, c], w[first])
        self.degree_ = deg
        return self

    def transform(self, X):
        check_is_fitted(self, "subset_")
        x = check_elements(X, self.subset_.group)
        idx = self.subset_.index
        missing = [v for v in x.tolist() if v not in idx]
        if missing:
            raise ValueError(f"elements {missing[:5]} are not in the fitted set")
        return self.degree_[[idx[v] for v in x.tolist()]].reshape(-1, 1)


class AffineExtractor(BaseEstimator):
    """Fit ``phi: U -> H`` as ``(X = U, y = phi(U))``; predict with the recovered affine map."""

    def __init__(self, group=None, target=None, threshold=0.5, exact=None):
        self.group = group
        self.target = target
        self.threshold = threshold
        self.exact = exact

    def fit(self, X, y):
        g = check_group(self.group)
        h = check_group(self.target if self.target is not None else self.group)
        x = check_elements(X, g)
        vals = check_values(y, h, x.size)
        order = np.argsort(x)
        U = check_subset(x, g)
        self.report_ = extraction_report(U, vals[order], h, threshold=self.threshold, exact=self.exact)
        self.alpha_ = self.report_.alpha
        self.agreement_ = self.report_.agreement
        self.target_ = h
        return self

    def predict(self, X):
        check_is_fitted(self, "report_")
        if self.alpha_ is None:
            raise ValueError("no affine map was recovered; see report_")
        x = check_elements(X, self.alpha_.source)
        return np.atleast_1d(np.asarray(self.alpha_(x), dtype=np.int64))

    def score(self, X, y):
        """Fraction of ``X`` on which the recovered map matches ``y``."""
        pred = self.predict(X)
        vals = check_values(y, self.target_, pred.size)
        return float(np.mean(pred == vals))
