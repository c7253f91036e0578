"""Adadelta optimizer (per-parameter running RMS of gradients and updates)."""

from __future__ import annotations

import numpy as np

from .tensor import NumericalError


class Adadelta:
    """Adadelta with accumulators E[g^2] and E[dx^2].

    Update rule per step:
        E[g^2]  <- rho * E[g^2] + (1 - rho) * g^2
        dx      = -(RMS(dx) / RMS(g)) * g
        E[dx^2] <- rho * E[dx^2] + (1 - rho) * dx^2
        param  += dx            (sign flipped when maximizing)

    where RMS(v) = sqrt(E[v^2] + eps).
    """

    def __init__(self, params, rho=0.95, eps=1e-6, maximize=False):
        if not 0.0 < rho < 1.0:
            raise ValueError("rho must be in (0, 1)")
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        self.params = list(params)
        self.rho = rho
        self.eps = eps
        self.maximize = maximize
        self.sq_grad = [np.zeros_like(p.value) for p in self.params]
        self.sq_delta = [np.zeros_like(p.value) for p in self.params]

    def step(self, grads):
        """Apply one update; rejects the whole step on non-finite gradients."""
        if len(grads) != len(self.params):
            raise ValueError("expected %d gradients, got %d"
                             % (len(self.params), len(grads)))
        for g in grads:
            if not np.all(np.isfinite(g)):
                raise NumericalError("non-finite gradient, step rejected")
        for p, g, eg2, ed2 in zip(self.params, grads,
                                  self.sq_grad, self.sq_delta):
            if g.shape != p.value.shape:
                raise ValueError("gradient shape %s does not match parameter %s"
                                 % (g.shape, p.value.shape))
            if self.maximize:
                g = -g
            eg2 *= self.rho
            eg2 += (1.0 - self.rho) * g * g
            delta = -np.sqrt((ed2 + self.eps) / (eg2 + self.eps)) * g
            ed2 *= self.rho
            ed2 += (1.0 - self.rho) * delta * delta
            p.value += delta
