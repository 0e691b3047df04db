"""Gaussian-process regression with a Matern 5/2 kernel, used to smooth training curves.

Only the posterior mean is ever consumed. Hyperparameters are chosen by
empirical Bayes: the exact log marginal likelihood is maximized with
L-BFGS-B from 8 deterministic starts on a log-spaced lattice over a bounded
domain, and the best start wins. Inputs are standardized before fitting
(steps to [0, 1], scores to zero mean / unit variance) purely for
conditioning; reported hyperparameters are mapped back to original units.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky
from scipy.optimize import minimize

from .errors import DegenerateInput, IllConditioned

_SQRT5 = math.sqrt(5.0)
_LOG2PI = math.log(2.0 * math.pi)

# Jitter escalation ladder applied to the kernel diagonal when a Cholesky
# factorization fails. Values are absolute in the (standardized) units of K.
_JITTERS = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4)

# Bounded search domain for empirical Bayes, in standardized units.
# The lengthscale bounds depend on the data and are computed per fit.
_SIGNAL_VAR_BOUNDS = (1e-4, 1e3)
_NOISE_VAR_BOUNDS = (1e-8, 1e1)


@dataclass(frozen=True)
class GPHyper:
    """Kernel hyperparameters in original data units.

    signal_variance and noise_variance are in squared score units,
    lengthscale is in training-step units. All strictly positive.
    """

    signal_variance: float
    lengthscale: float
    noise_variance: float

    def __post_init__(self):
        for name in ("signal_variance", "lengthscale", "noise_variance"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise DegenerateInput(f"{name} must be strictly positive and finite, got {v!r}")


@dataclass
class GPModel:
    """A fitted GP: hyperparameters plus the cached posterior factorization."""

    hyper: GPHyper
    train_x: np.ndarray
    train_y: np.ndarray
    # standardization recipe and cached factorization (opaque to callers)
    _x0: float
    _span: float
    _y_mean: float
    _y_scale: float
    _theta: np.ndarray  # log [signal_var, lengthscale, noise_var], standardized units
    _chol: np.ndarray
    _alpha: np.ndarray


def _validate_xy(xs, ys):
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or ys.ndim != 1 or len(xs) != len(ys):
        raise DegenerateInput("xs and ys must be 1-d sequences of equal length")
    if len(xs) < 2:
        raise DegenerateInput("need at least 2 points")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise DegenerateInput("inputs must be finite")
    if np.any(np.diff(xs) <= 0):
        raise DegenerateInput("xs must be strictly increasing")
    return xs, ys


def _matern52(d, signal_var, lengthscale):
    a = (_SQRT5 / lengthscale) * d
    return signal_var * (1.0 + a + a * a / 3.0) * np.exp(-a)


def _chol_with_jitter(k):
    """Cholesky of k with escalating diagonal jitter; None if all fail."""
    n = k.shape[0]
    eye = np.eye(n)
    for jitter in _JITTERS:
        try:
            return cholesky(k + jitter * eye, lower=True)
        except np.linalg.LinAlgError:
            continue
    return None


def _lml_value_and_grad(theta, dists, targets):
    """Log marginal likelihood and its gradient w.r.t. log-hyperparameters.

    theta is log([signal_var, lengthscale, noise_var]); dists is the
    pairwise |x_i - x_j| matrix; targets the observation vector. Returns
    (-inf, zeros) when the kernel matrix cannot be factorized, so an
    optimizer simply moves away from that region.
    """
    sv, ls, nv = np.exp(theta)
    n = len(targets)
    a = (_SQRT5 / ls) * dists
    e = np.exp(-a)
    kf = sv * (1.0 + a + a * a / 3.0) * e
    k = kf + nv * np.eye(n)
    chol = _chol_with_jitter(k)
    if chol is None:
        return -np.inf, np.zeros(3)
    alpha = cho_solve((chol, True), targets)
    lml = (
        -0.5 * float(targets @ alpha)
        - float(np.sum(np.log(np.diag(chol))))
        - 0.5 * n * _LOG2PI
    )
    k_inv = cho_solve((chol, True), np.eye(n))
    w = np.outer(alpha, alpha) - k_inv
    dk_dlog_sv = kf
    dk_dlog_ls = sv * (a * a / 3.0) * (1.0 + a) * e
    grad = np.array(
        [
            0.5 * float(np.sum(w * dk_dlog_sv)),
            0.5 * float(np.sum(w * dk_dlog_ls)),
            0.5 * nv * float(np.trace(w)),
        ]
    )
    return lml, grad


def _standardize(xs, ys):
    x0 = float(xs[0])
    span = float(xs[-1] - xs[0])
    xt = (xs - x0) / span
    y_mean = float(np.mean(ys))
    y_scale = float(np.std(ys))
    if y_scale == 0.0:
        y_scale = 1.0  # constant data; residuals are identically zero
    z = (ys - y_mean) / y_scale
    return xt, z, x0, span, y_mean, y_scale


def _build_model(xs, ys, theta, x0, span, y_mean, y_scale):
    xt = (xs - x0) / span
    z = (ys - y_mean) / y_scale
    sv, ls, nv = np.exp(theta)
    dists = np.abs(xt[:, None] - xt[None, :])
    k = _matern52(dists, sv, ls) + nv * np.eye(len(xt))
    chol = _chol_with_jitter(k)
    if chol is None:
        raise IllConditioned("kernel matrix not factorizable after jitter escalation")
    alpha = cho_solve((chol, True), z)
    hyper = GPHyper(
        signal_variance=sv * y_scale * y_scale,
        lengthscale=ls * span,
        noise_variance=nv * y_scale * y_scale,
    )
    return GPModel(
        hyper=hyper,
        train_x=xs.copy(),
        train_y=ys.copy(),
        _x0=x0,
        _span=span,
        _y_mean=y_mean,
        _y_scale=y_scale,
        _theta=np.asarray(theta, dtype=np.float64).copy(),
        _chol=chol,
        _alpha=alpha,
    )


def fit_gp(xs, ys) -> GPModel:
    """Fit kernel hyperparameters by empirical Bayes and return the model.

    Deterministic: the 8 optimizer starts form a fixed log-spaced lattice
    over the bounded domain and ties are broken by lattice order.
    """
    xs, ys = _validate_xy(xs, ys)
    xt, z, x0, span, y_mean, y_scale = _standardize(xs, ys)

    min_spacing = float(np.min(np.diff(xt)))
    ls_bounds = (0.1 * min_spacing, 10.0)
    log_bounds = [
        (math.log(_SIGNAL_VAR_BOUNDS[0]), math.log(_SIGNAL_VAR_BOUNDS[1])),
        (math.log(ls_bounds[0]), math.log(ls_bounds[1])),
        (math.log(_NOISE_VAR_BOUNDS[0]), math.log(_NOISE_VAR_BOUNDS[1])),
    ]
    dists = np.abs(xt[:, None] - xt[None, :])

    def objective(theta):
        value, grad = _lml_value_and_grad(theta, dists, z)
        if not np.isfinite(value):
            return 1e300, np.zeros(3)
        return -value, -grad

    # 2 starts per dimension at the geometric 1/4 and 3/4 points of each range.
    start_axes = [(lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)) for lo, hi in log_bounds]
    best_theta = None
    best_value = -np.inf
    for start in itertools.product(*start_axes):
        res = minimize(
            objective,
            x0=np.array(start),
            jac=True,
            method="L-BFGS-B",
            bounds=log_bounds,
            options={"maxiter": 60},
        )
        value, _ = _lml_value_and_grad(res.x, dists, z)
        if value > best_value:
            best_value = value
            best_theta = res.x
    if best_theta is None:
        raise IllConditioned("no feasible hyperparameters found")
    return _build_model(xs, ys, best_theta, x0, span, y_mean, y_scale)


def build_gp(xs, ys, hyper: GPHyper) -> GPModel:
    """Build a model with explicitly chosen hyperparameters (no fitting)."""
    xs, ys = _validate_xy(xs, ys)
    _, _, x0, span, y_mean, y_scale = _standardize(xs, ys)
    theta = np.log(
        [
            hyper.signal_variance / (y_scale * y_scale),
            hyper.lengthscale / span,
            hyper.noise_variance / (y_scale * y_scale),
        ]
    )
    return _build_model(xs, ys, theta, x0, span, y_mean, y_scale)


def posterior_mean(model: GPModel, query_xs) -> np.ndarray:
    """Posterior mean of the fitted GP at the query step coordinates."""
    q = np.asarray(query_xs, dtype=np.float64)
    if not np.all(np.isfinite(q)):
        raise DegenerateInput("query points must be finite")
    sv, ls, _ = np.exp(model._theta)
    qt = (q - model._x0) / model._span
    xt = (model.train_x - model._x0) / model._span
    k_star = _matern52(np.abs(qt[:, None] - xt[None, :]), sv, ls)
    mean_std = k_star @ model._alpha
    return model._y_mean + model._y_scale * mean_std


def log_marginal_likelihood(hyper: GPHyper, xs, ys, with_grad: bool = False):
    """Standard GP log marginal likelihood of (xs, ys) under hyper.

    Computed directly in the original data units (no standardization), so it
    can be checked against a dense textbook evaluation. With with_grad=True
    also returns the gradient with respect to the logarithms of the three
    hyperparameters, in the order (signal_variance, lengthscale,
    noise_variance).
    """
    xs, ys = _validate_xy(xs, ys)
    theta = np.log([hyper.signal_variance, hyper.lengthscale, hyper.noise_variance])
    dists = np.abs(xs[:, None] - xs[None, :])
    value, grad = _lml_value_and_grad(theta, dists, ys)
    if not np.isfinite(value):
        raise IllConditioned("kernel matrix not factorizable after jitter escalation")
    if with_grad:
        return value, grad
    return value
