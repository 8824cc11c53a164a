"""Causal Wiener filters of the two blocks, exact and least-squares estimated.

Two filters carry the whole topology story. The deterministic-block filter
maps the full-rank channels (past and present) onto the deterministic
channels. The full-rank-block filter projects each full-rank channel onto
its own strict past joined with the other channels' past, which forces a
zero diagonal at lag 0 by construction of the regression design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, InvalidModel, RankDeficientDesign
from .model import LrdnModel, require_valid
from .polymat import (
    DEFAULT_COND_BOUND,
    DEFAULT_DECAY_TOL,
    DEFAULT_HORIZON,
    PolynomialMatrix,
    truncated_inverse,
)
from .sim import TimeSeries

M_BLOCK = "m_block"
L_BLOCK = "l_block"

STRUCTURAL_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ExactFilters:
    """Closed-form filters of a model: s (l x l, zero diagonal at lag 0),
    h (m x l), and the diagonal innovation gains d."""

    s: PolynomialMatrix
    h: PolynomialMatrix
    d: np.ndarray


def exact_filters(model: LrdnModel) -> ExactFilters:
    """Closed forms from the model coefficients, with no truncation.

    d_i is the i-th diagonal entry of (I - G_0)^-1 and
    s = I - diag(d) (I - g_l). The deterministic-block filter equals g_ml.
    The strict-causality consequence [s_0]_ii = 0 requires d_i = 1; it can
    fail only when lag-0 couplings form feedback loops, in which case the
    projection interpretation breaks down and we refuse to return a filter.
    """
    require_valid(model)
    g0 = model.g_l.coeff(0)
    lead_inv = np.linalg.inv(np.eye(model.l) - g0)
    d = np.diag(lead_inv).copy()

    i_minus_gl = PolynomialMatrix.identity(model.l) - model.g_l
    s = PolynomialMatrix.identity(model.l) - (PolynomialMatrix.constant(np.diag(d)) @ i_minus_gl)

    diag0 = np.abs(np.diag(s.coeff(0))).max()
    if diag0 > STRUCTURAL_ZERO_TOL:
        raise InvalidModel(
            "closed-form filter has a nonzero lag-0 diagonal "
            f"({diag0:.3e}); lag-0 couplings of this model form a feedback loop"
        )
    off = ~np.eye(model.l, dtype=bool)
    if (d != 0).all():
        sup_s = s.support()[off]
        sup_g = model.g_l.support()[off]
        if not np.array_equal(sup_s, sup_g):
            raise InvalidModel("off-diagonal supports of s and g_l disagree")
    return ExactFilters(s=s.normalized(), h=model.g_ml, d=d)


def exact_s_via_factor(
    w: PolynomialMatrix,
    horizon: int = DEFAULT_HORIZON,
    decay_tol: float = DEFAULT_DECAY_TOL,
    cond_bound: float = DEFAULT_COND_BOUND,
) -> PolynomialMatrix:
    """Filter of the full-rank block computed from a causal spectral factor.

    s = I - diag([W_0]_11 .. [W_0]_ll) W^-1 with the inverse truncated at the
    horizon. Agrees with :func:`exact_filters` up to truncation error when w
    is the model's reduced-form factor, which ties the two derivations
    together as a cross-check.
    """
    if w.rows != w.cols:
        raise ValueError(f"factor must be square, got {w.shape}")
    w_inv = truncated_inverse(w, horizon=horizon, decay_tol=decay_tol, cond_bound=cond_bound)
    d = np.diag(np.diag(w.coeff(0)))
    return PolynomialMatrix.identity(w.rows) - (PolynomialMatrix.constant(d) @ w_inv)


@dataclass
class FilterEstimate:
    """Least-squares FIR filter fit for one block.

    ``regressor_groups`` maps (row, source channel) to the column index set
    of that source's lags inside the row's design matrix (0-based channels).
    ``gram_inv_blocks`` holds the matching diagonal blocks of (X'X)^-1, which
    is all the group tests need.
    """

    target_block: str
    order: int
    m: int
    l: int
    coeffs: PolynomialMatrix
    residuals: np.ndarray
    rss_full: np.ndarray
    regressor_groups: dict
    gram_inv_blocks: dict
    n_regressors: np.ndarray

    @property
    def num_rows(self) -> int:
        return self.coeffs.rows

    @property
    def num_used_samples(self) -> int:
        return self.residuals.shape[0]

    def residual_variances(self) -> np.ndarray:
        dof = self.num_used_samples - self.n_regressors
        return self.rss_full / np.maximum(dof, 1)

    def group_coefficients(self, row: int, source: int) -> np.ndarray:
        """Estimated coefficients of one regressor group, ordered by lag."""
        lags = self.group_lags(row, source)
        return self.coeffs.coeffs[lags, row, source]

    def group_lags(self, row: int, source: int) -> np.ndarray:
        if (row, source) not in self.regressor_groups:
            raise KeyError(f"no regressor group for row {row}, source {source}")
        first = 1 if (self.target_block == L_BLOCK and row == source) else 0
        return np.arange(first, self.order + 1)

    def to_dict(self) -> dict:
        return {
            "block": self.target_block,
            "order": self.order,
            "m": self.m,
            "l": self.l,
            "coeffs": self.coeffs.to_dict(),
            "per_row_rss": self.rss_full.tolist(),
            "residual_variances": self.residual_variances().tolist(),
        }


def _lagged_design(y_l: np.ndarray, order: int) -> np.ndarray:
    """Design with one column per (channel, lag): column j*(order+1)+k holds
    y_l[t-k, j] for t = order..T-1."""
    T, l = y_l.shape
    rows = T - order
    X = np.empty((rows, l * (order + 1)))
    for j in range(l):
        for k in range(order + 1):
            X[:, j * (order + 1) + k] = y_l[order - k : T - k, j]
    return X


def _solve_ls(X: np.ndarray, Y: np.ndarray, ridge: float, cond_bound: float):
    """Backward-stable least squares via SVD; returns (beta, gram_inverse).

    With ridge = 0 a Gram condition number above the bound raises
    RankDeficientDesign; with ridge > 0 the regularized problem is solved.
    """
    u, s, vt = np.linalg.svd(X, full_matrices=False)
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    if ridge == 0.0:
        smin = s[-1]
        if smin == 0.0 or (s[0] / smin) ** 2 > cond_bound:
            gram_cond = np.inf if smin == 0.0 else (s[0] / smin) ** 2
            raise RankDeficientDesign(
                f"Gram condition number {gram_cond:.3e} exceeds {cond_bound:.1e}; "
                "pass a positive ridge or drop collinear channels"
            )
    denom = s**2 + ridge
    y2 = Y if Y.ndim == 2 else Y[:, np.newaxis]
    beta = vt.T @ ((s / denom)[:, np.newaxis] * (u.T @ y2))
    if Y.ndim == 1:
        beta = beta[:, 0]
    gram_inv = (vt.T / denom) @ vt
    return beta, gram_inv


def _check_sample_budget(T: int, order: int, n_cols: int) -> None:
    if T - order < n_cols + 2:
        raise InsufficientData(
            f"{T} samples cannot support order {order} with {n_cols} regressors"
        )


def estimate_h(
    data: TimeSeries,
    order: int = 8,
    ridge: float = 0.0,
    cond_bound: float = DEFAULT_COND_BOUND,
) -> FilterEstimate:
    """Fit the deterministic block on lags 0..order of the full-rank block.

    Plain least squares row by row (all rows share one design); the optional
    ridge is off by default. Lag 0 is included because the relation is causal
    but not strictly causal.
    """
    if data.m < 1:
        raise ValueError("data has no deterministic block to fit")
    p = order
    l = data.l
    n_cols = l * (p + 1)
    _check_sample_budget(data.num_samples, p, n_cols)
    X = _lagged_design(data.y_l, p)
    Y = data.y_m[p:]
    beta, gram_inv = _solve_ls(X, Y, ridge, cond_bound)
    resid = Y - X @ beta

    coeffs = np.zeros((p + 1, data.m, l))
    for j in range(l):
        for k in range(p + 1):
            coeffs[k, :, j] = beta[j * (p + 1) + k]

    groups = {}
    blocks = {}
    for i in range(data.m):
        for j in range(l):
            idx = np.arange(j * (p + 1), (j + 1) * (p + 1))
            groups[(i, j)] = idx
            blocks[(i, j)] = gram_inv[np.ix_(idx, idx)]
    return FilterEstimate(
        target_block=M_BLOCK,
        order=p,
        m=data.m,
        l=l,
        coeffs=PolynomialMatrix(coeffs),
        residuals=resid,
        rss_full=np.sum(resid**2, axis=0),
        regressor_groups=groups,
        gram_inv_blocks=blocks,
        n_regressors=np.full(data.m, n_cols),
    )


def estimate_s(
    data: TimeSeries,
    order: int = 8,
    ridge: float = 0.0,
    cond_bound: float = DEFAULT_COND_BOUND,
) -> FilterEstimate:
    """Fit each full-rank channel on its own strict past and the others' past.

    Row i regresses y_l[i](t) on its own lags 1..order and every other
    channel's lags 0..order; excluding the own lag-0 column makes the zero
    diagonal at infinity structural rather than statistical. Row i's residual
    estimates d_i e_i(t).
    """
    p = order
    l = data.l
    n_cols_full = l * (p + 1)
    _check_sample_budget(data.num_samples, p, n_cols_full - 1)
    X_full = _lagged_design(data.y_l, p)
    Y = data.y_l[p:]

    coeffs = np.zeros((p + 1, l, l))
    residuals = np.empty((data.num_samples - p, l))
    rss = np.empty(l)
    groups = {}
    blocks = {}

    for i in range(l):
        drop = i * (p + 1)  # own lag-0 column
        keep = np.delete(np.arange(n_cols_full), drop)
        X = X_full[:, keep]
        beta, gram_inv = _solve_ls(X, Y[:, i], ridge, cond_bound)
        resid = Y[:, i] - X @ beta
        residuals[:, i] = resid
        rss[i] = float(resid @ resid)

        for pos, col in enumerate(keep):
            j, k = divmod(col, p + 1)
            coeffs[k, i, j] = beta[pos]
        for j in range(l):
            if j == i:
                idx = np.arange(drop, drop + p)  # own lags 1..p slide into drop's slot
            else:
                start = j * (p + 1)
                idx = np.arange(start, start + p + 1)
                idx = idx - (idx > drop)  # account for the removed column
            groups[(i, j)] = idx
            blocks[(i, j)] = gram_inv[np.ix_(idx, idx)]

    return FilterEstimate(
        target_block=L_BLOCK,
        order=p,
        m=data.m,
        l=l,
        coeffs=PolynomialMatrix(coeffs),
        residuals=residuals,
        rss_full=rss,
        regressor_groups=groups,
        gram_inv_blocks=blocks,
        n_regressors=np.full(l, n_cols_full - 1),
    )
