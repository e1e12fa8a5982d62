"""Kernel density estimation on sorted data.

The estimator is the standard

    fhat(x) = (1 / (count * h)) * sum_i K((x - X_i) / h)

with a compactly supported kernel, so only data inside [x - h*s, x + h*s]
contribute; scalar evaluation exploits the sorted sample with a binary
search window, and array evaluation broadcasts in bounded-memory chunks.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .errors import NumericError, ParameterError
from .kernels import TRIWEIGHT, Kernel

__all__ = [
    "KdeEstimate",
    "kde_mean_var",
    "smoothed_bootstrap",
]

_CHUNK_ELEMENTS = 4_000_000  # cap on broadcast temporaries (doubles)


class KdeEstimate:
    """A fitted kernel density estimate.

    Parameters
    ----------
    data : array_like
        Observations; stored sorted.  Must be nonempty and finite.
    h : float
        Bandwidth, strictly positive.
    kernel : Kernel
        Smoothing kernel (triweight by default).
    """

    def __init__(self, data, h: float, kernel: Kernel = TRIWEIGHT):
        arr = np.asarray(data, dtype=float).ravel()
        if arr.size == 0:
            raise ParameterError("data must be nonempty")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("data must be finite")
        if not (np.isfinite(h) and h > 0):
            raise ParameterError("h must be positive")
        self.data = np.sort(arr)
        self.h = float(h)
        self.kernel = kernel
        self.count = int(arr.size)
        half = self.h * float(kernel.support_halfwidth)
        #: closed interval outside which the estimate is identically zero
        self.support = (float(self.data[0] - half), float(self.data[-1] + half))

    # ------------------------------------------------------------------
    def __call__(self, x):
        """Evaluate the estimate at scalar or array x."""
        if np.ndim(x) == 0:
            return self._eval_scalar(float(x))
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        flat_x = x.ravel()
        flat_out = out.ravel()
        step = max(1, _CHUNK_ELEMENTS // max(1, self.count))
        scale = 1.0 / (self.count * self.h)
        for start in range(0, flat_x.size, step):
            chunk = flat_x[start : start + step]
            u = (chunk[:, None] - self.data[None, :]) / self.h
            flat_out[start : start + step] = self.kernel(u).sum(axis=1) * scale
        return out

    def _eval_scalar(self, x: float) -> float:
        half = self.h * float(self.kernel.support_halfwidth)
        lo = np.searchsorted(self.data, x - half, side="left")
        hi = np.searchsorted(self.data, x + half, side="right")
        if hi <= lo:
            return 0.0
        u = (x - self.data[lo:hi]) / self.h
        return float(np.sum(self.kernel(u))) / (self.count * self.h)

    # ------------------------------------------------------------------
    def loo(self, i: int) -> float:
        """Leave-one-out value fhat_{-i}(X_i).

        Uses the identity count*h*fhat(X_i) = sum_j K((X_i-X_j)/h), so the
        left-out value is (that sum - K(0)) / ((count - 1) * h).
        """
        if not 0 <= i < self.count:
            raise ParameterError("index out of range")
        if self.count < 2:
            raise ParameterError("leave-one-out needs at least two points")
        xi = float(self.data[i])
        total = self._eval_scalar(xi) * self.count * self.h
        return (total - self.kernel.at_zero) / ((self.count - 1) * self.h)

    def loo_all(self) -> np.ndarray:
        """Leave-one-out values at every data point, in sorted-data order."""
        if self.count < 2:
            raise ParameterError("leave-one-out needs at least two points")
        totals = self(self.data) * self.count * self.h
        return (totals - self.kernel.at_zero) / ((self.count - 1) * self.h)

    def __repr__(self) -> str:
        return (
            f"KdeEstimate(count={self.count}, h={self.h:g}, "
            f"kernel={self.kernel.name!r})"
        )


def kde_mean_var(density, kernel: Kernel, h: float, count: int, y: float):
    """Exact mean and variance of a KDE at one point under a known density.

    E fhat(y)   = int K(t) f(y - h t) dt
    Var fhat(y) = (1/count) * [ (1/h) int K(t)^2 f(y - h t) dt - (E fhat(y))^2 ]

    both integrals over the kernel support [-s, s] by adaptive quadrature
    with absolute tolerance 1e-10.
    """
    if not (np.isfinite(h) and h > 0):
        raise ParameterError("h must be positive")
    if count < 1:
        raise ParameterError("count must be at least 1")
    s = float(kernel.support_halfwidth)

    def _quad(fn):
        val, err = quad(fn, -s, s, epsabs=1e-10, epsrel=1e-10, limit=200)
        if err > 1e-7:
            raise NumericError(f"quadrature error estimate {err:.2g} too large")
        return val

    mean = _quad(lambda t: kernel(t) * density.pdf(y - h * t))
    second = _quad(lambda t: kernel(t) ** 2 * density.pdf(y - h * t)) / h
    var = (second - mean * mean) / count
    return mean, var


def smoothed_bootstrap(est: KdeEstimate, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `size` points whose exact density is the fitted estimate.

    Each draw is data[J] + h * eps with J uniform on the data indices and
    eps a kernel draw (rejection sampled).
    """
    size = int(size)
    if size < 0:
        raise ParameterError("size must be nonnegative")
    idx = rng.integers(0, est.count, size=size)
    eps = est.kernel.sample(rng, size=size)
    return est.data[idx] + est.h * eps
