"""Binary logistic regression by ridged, step-halved iteratively reweighted least squares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

MAX_ITER = 50
COEF_TOL = 1e-8
LL_REL_TOL = 1e-10
LP_CLAMP = 30.0
MAX_HALVINGS = 10


class FitError(ValueError):
    pass


@dataclass
class FittedModel:
    coefficients: np.ndarray  # intercept first, then one per design column
    std_errors: np.ndarray
    log_likelihood: float
    n_obs: int
    converged: bool
    n_iterations: int

    @property
    def n_params(self):
        return len(self.coefficients)


def _sigmoid(eta):
    return 1.0 / (1.0 + np.exp(-np.clip(eta, -LP_CLAMP, LP_CLAMP)))


def _loglik(eta, y):
    # sum(y*eta - log(1+exp(eta))), clamped for overflow safety
    eta = np.clip(eta, -LP_CLAMP, LP_CLAMP)
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def fit(X, y, ridge=1e-8, max_iter=MAX_ITER, warm_start=None):
    """Maximum-likelihood logistic fit with an implicit intercept.

    A small ridge on the normal equations guards rank deficiency; since the
    ridge damps only the Newton step (not the score), the fixed point is the
    unpenalized MLE.  Steps that would lower the log-likelihood are halved up
    to 10 times.  Under separation the capped estimate is returned with
    converged=False rather than raising.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(y) != X.shape[0]:
        raise FitError("X must be (N, p) with matching outcome length")
    if not np.all(np.isfinite(X)):
        raise FitError("non-finite values in design matrix")
    n, p = X.shape
    if y.min() == y.max():
        raise FitError("outcome has a single class")
    if n < p + 1:
        raise FitError(f"too few rows ({n}) for {p} columns plus intercept")

    Xd = np.hstack([np.ones((n, 1)), X])
    if warm_start is not None and len(warm_start) == p + 1:
        beta = np.asarray(warm_start, dtype=np.float64).copy()
    else:
        beta = np.zeros(p + 1)
    ll = _loglik(Xd @ beta, y)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        eta = Xd @ beta
        mu = _sigmoid(eta)
        w = mu * (1.0 - mu)
        H = Xd.T @ (w[:, None] * Xd)
        H[np.diag_indices_from(H)] += ridge
        g = Xd.T @ (y - mu)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            raise FitError("singular information matrix despite ridge")
        new_ll = _loglik(Xd @ (beta + step), y)
        halved = 0
        while new_ll < ll and halved < MAX_HALVINGS:
            step *= 0.5
            halved += 1
            new_ll = _loglik(Xd @ (beta + step), y)
        if new_ll < ll:
            # no ascent direction left at this scale; stop at current beta
            converged = True
            break
        beta = beta + step
        delta_ll = new_ll - ll
        ll = new_ll
        if np.max(np.abs(step)) < COEF_TOL:
            converged = True
            break
        if abs(delta_ll) < LL_REL_TOL * (abs(ll) + 1e-300):
            # one polishing Newton step: the likelihood has flattened but the
            # coefficients may still be a few ulps short of the score root
            eta = Xd @ beta
            mu = _sigmoid(eta)
            w = mu * (1.0 - mu)
            H = Xd.T @ (w[:, None] * Xd)
            H[np.diag_indices_from(H)] += ridge
            beta = beta + np.linalg.solve(H, Xd.T @ (y - mu))
            ll = _loglik(Xd @ beta, y)
            converged = True
            break

    mu = _sigmoid(Xd @ beta)
    w = mu * (1.0 - mu)
    H = Xd.T @ (w[:, None] * Xd)
    H[np.diag_indices_from(H)] += ridge
    cov = np.linalg.inv(H)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return FittedModel(
        coefficients=beta,
        std_errors=se,
        log_likelihood=ll,
        n_obs=n,
        converged=converged,
        n_iterations=it,
    )


def predict(model, X):
    """Predicted probabilities, strictly inside (0,1) by linear-predictor clamping."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_params - 1:
        raise FitError(
            f"design has {X.shape[1] if X.ndim == 2 else '?'} columns, "
            f"model expects {model.n_params - 1}"
        )
    eta = model.coefficients[0] + X @ model.coefficients[1:]
    return _sigmoid(eta)


def wald_p_values(model):
    """Two-sided normal-tail p-value per coefficient (intercept first)."""
    se = model.std_errors
    if not np.all(np.isfinite(se)) or np.any(se == 0.0):
        raise FitError("cannot compute Wald p-values: zero or non-finite std errors")
    z = model.coefficients / se
    return 2.0 * stats.norm.sf(np.abs(z))


def aic(model):
    return 2.0 * model.n_params - 2.0 * model.log_likelihood
