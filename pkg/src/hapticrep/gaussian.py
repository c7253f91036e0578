"""Diagonal Gaussian distributions: sampling, log-density, analytic KL.

Numpy versions operate on ``GaussianDiag`` values; the ``*_t`` variants
build the same expressions on the autodiff tape for training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T

SIGMA_FLOOR = 1e-3
LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GaussianDiag:
    """Diagonal Gaussian over a real vector: per-dimension mean/stddev."""

    mean: np.ndarray
    stddev: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        stddev = np.asarray(self.stddev, dtype=np.float64)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "stddev", stddev)
        if mean.shape != stddev.shape:
            raise T.ShapeError("mean/stddev shape mismatch: %s vs %s"
                               % (mean.shape, stddev.shape))
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(stddev))):
            raise T.NumericalError("non-finite Gaussian parameters")
        if np.any(stddev < SIGMA_FLOOR):
            raise ValueError("stddev below floor %g" % SIGMA_FLOOR)

    @property
    def dim(self):
        return self.mean.shape[-1]

    def sample(self, noise):
        """Reparameterized sample mean + noise * stddev."""
        noise = np.asarray(noise, dtype=np.float64)
        return self.mean + noise * self.stddev


def log_likelihood(x, dist):
    """Log-density of ``x`` under a diagonal Gaussian."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != dist.mean.shape:
        raise T.ShapeError("log_likelihood: %s vs %s" % (x.shape, dist.mean.shape))
    z = (x - dist.mean) / dist.stddev
    return float(np.sum(-0.5 * LOG_2PI - np.log(dist.stddev) - 0.5 * z * z))


def kl_diag(q, p):
    """KL(q || p) between diagonal Gaussians; nonnegative."""
    if q.mean.shape != p.mean.shape:
        raise T.ShapeError("kl_diag: %s vs %s" % (q.mean.shape, p.mean.shape))
    var_ratio = (q.stddev / p.stddev) ** 2
    mean_term = ((q.mean - p.mean) / p.stddev) ** 2
    return float(np.sum(np.log(p.stddev) - np.log(q.stddev)
                        + 0.5 * (var_ratio + mean_term) - 0.5))


def log_likelihood_t(x, mean, stddev):
    """Tape version: ``x`` is a constant array, mean/stddev are Tensors."""
    x = np.asarray(x, dtype=np.float64)
    diff = T.sub(T.Tensor(x), mean)
    z2 = T.square(T.div(diff, stddev))
    per_dim = T.sub(T.shift(T.scale(z2, -0.5), -0.5 * LOG_2PI), T.log(stddev))
    return T.total(per_dim)


def kl_diag_t(mean_q, stddev_q, mean_p, stddev_p):
    """Tape version of kl_diag; all four arguments are Tensors."""
    log_ratio = T.sub(T.log(stddev_p), T.log(stddev_q))
    num = T.add(T.square(stddev_q), T.square(T.sub(mean_q, mean_p)))
    quad = T.div(num, T.scale(T.square(stddev_p), 2.0))
    return T.total(T.shift(T.add(log_ratio, quad), -0.5))
