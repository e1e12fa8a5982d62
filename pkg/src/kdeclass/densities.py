"""Population densities, benchmark pairs, and crossing analysis.

A DensityPair bundles the two class densities (f for the first population,
g for the second) with the prior probability p of the first class.  The
weighted difference

    delta(x) = p f(x) - (1 - p) g(x)

drives everything downstream: the optimal rule classifies to the first
population where delta > 0, and the bandwidth theory is controlled by the
zeros of delta (the crossing points), the slope of delta there, and the
curvatures of f and g there.

Benchmark pairs
---------------
class1a   N(0,1) vs N(-1.2, 0.6^2)          opposite-sign curvatures
class1b   N(0,1) vs a skewed normal mixture  opposite-sign curvatures
class2a   N(0,1) vs N(1,1)                   equal curvatures, degenerate
class2b   N(0,1) vs standard Cauchy          same-sign curvatures
pareto    two Pareto tails on [1, inf)       for the tail-classification study
contrast  N(0,1) vs N(0, (1/3)^2)            light-tailed contrast case

All benchmark priors are 1/2.  The class1b mixture is
(1/5) N(1/2, 1) + (1/5) N(1, (2/3)^2) + (3/5) N(19/12, (5/9)^2); its
crossing with the standard normal sits at 0.70666 with curvatures
-0.1556 / +0.3271, and it crosses exactly once on [-4, 5].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri

from .errors import DegenerateCrossingError, ParameterError, ResolutionError

__all__ = [
    "Density",
    "Normal",
    "NormalMixture",
    "Cauchy",
    "Pareto",
    "CustomDensity",
    "DensityPair",
    "make_pair",
    "PAIR_IDS",
    "CrossingPoint",
    "CrossingSet",
    "crossings",
    "regime_detect",
    "density_deriv",
]

_SQRT_2PI = np.sqrt(2.0 * np.pi)
MAX_DERIV_ORDER = 4

# probabilist Hermite polynomials He_k, k = 0..4; phi^(k)(z) = (-1)^k He_k(z) phi(z)
_HERMITE = (
    lambda z: np.ones_like(z),
    lambda z: z,
    lambda z: z * z - 1.0,
    lambda z: z * (z * z - 3.0),
    lambda z: (z * z) * (z * z - 6.0) + 3.0,
)


def _check_order(order: int) -> int:
    if order != int(order) or not 0 <= int(order) <= MAX_DERIV_ORDER:
        raise ParameterError(
            f"derivative order must be an integer in [0, {MAX_DERIV_ORDER}], got {order!r}"
        )
    return int(order)


def _as_float_array(x):
    return np.asarray(x, dtype=float)


def _scalar_like(x, value):
    return float(value) if np.ndim(value) == 0 else value


class Density:
    """Interface shared by all population densities."""

    support: tuple[float, float] = (-np.inf, np.inf)

    def pdf(self, x):
        return self.deriv(0, x)

    def deriv(self, order, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def cdf(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def ppf(self, q):
        """Quantile function; numeric inversion of cdf by default."""
        return _ppf_numeric(self, q)

    def sample(self, n: int, rng: np.random.Generator):  # pragma: no cover - abstract
        raise NotImplementedError


def _ppf_numeric(density: Density, q) -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ParameterError("quantile level must lie strictly inside (0, 1)")
    lo, hi = -1.0, 1.0
    slo, shi = density.support
    lo = max(lo, slo) if np.isfinite(slo) else lo
    hi = min(hi, shi) if np.isfinite(shi) else hi
    if np.isfinite(slo):
        lo = slo
    for _ in range(200):
        if density.cdf(lo) < q:
            break
        lo = lo * 2 if lo < 0 else lo - max(1.0, abs(lo))
    for _ in range(200):
        if density.cdf(hi) > q:
            break
        hi = hi * 2 if hi > 0 else hi + max(1.0, abs(hi))
    return brentq(lambda x: density.cdf(x) - q, lo, hi, xtol=1e-12, rtol=1e-14)


class Normal(Density):
    """Normal density with mean mu and standard deviation sigma."""

    def __init__(self, mu: float, sigma: float):
        if sigma <= 0:
            raise ParameterError("sigma must be positive")
        self.mu = float(mu)
        self.sigma = float(sigma)

    def deriv(self, order, x):
        order = _check_order(order)
        x = _as_float_array(x)
        z = (x - self.mu) / self.sigma
        phi = np.exp(-0.5 * z * z) / _SQRT_2PI
        sign = -1.0 if order % 2 else 1.0
        val = sign * _HERMITE[order](z) * phi / self.sigma ** (order + 1)
        return _scalar_like(x, val)

    def cdf(self, x):
        x = _as_float_array(x)
        return _scalar_like(x, ndtr((x - self.mu) / self.sigma))

    def ppf(self, q):
        if not 0.0 < q < 1.0:
            raise ParameterError("quantile level must lie strictly inside (0, 1)")
        return self.mu + self.sigma * float(ndtri(q))

    def sample(self, n, rng):
        return rng.normal(self.mu, self.sigma, size=int(n))

    def __repr__(self):
        return f"Normal({self.mu:g}, {self.sigma:g})"


class NormalMixture(Density):
    """Finite mixture of normals given by weights, means, and sds."""

    def __init__(self, weights, means, sigmas):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or len(w) != len(means) or len(w) != len(sigmas):
            raise ParameterError("weights, means, sigmas must have equal length")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ParameterError("weights must be positive and sum to 1")
        self.weights = w
        self.components = tuple(Normal(m, s) for m, s in zip(means, sigmas))

    def deriv(self, order, x):
        order = _check_order(order)
        x = _as_float_array(x)
        val = sum(w * c.deriv(order, x) for w, c in zip(self.weights, self.components))
        return _scalar_like(x, val)

    def cdf(self, x):
        x = _as_float_array(x)
        val = sum(w * c.cdf(x) for w, c in zip(self.weights, self.components))
        return _scalar_like(x, val)

    def sample(self, n, rng):
        n = int(n)
        counts = rng.multinomial(n, self.weights)
        parts = [c.sample(k, rng) for c, k in zip(self.components, counts) if k > 0]
        out = np.concatenate(parts) if parts else np.empty(0)
        rng.shuffle(out)
        return out

    def __repr__(self):
        inner = " + ".join(
            f"{w:g}*{c!r}" for w, c in zip(self.weights, self.components)
        )
        return f"NormalMixture({inner})"


class Cauchy(Density):
    """Cauchy density with location loc and scale gamma (standard by default)."""

    def __init__(self, loc: float = 0.0, gamma: float = 1.0):
        if gamma <= 0:
            raise ParameterError("gamma must be positive")
        self.loc = float(loc)
        self.gamma = float(gamma)

    def deriv(self, order, x):
        order = _check_order(order)
        x = _as_float_array(x)
        z = (x - self.loc) / self.gamma
        w = 1.0 + z * z
        if order == 0:
            core = 1.0 / w
        elif order == 1:
            core = -2.0 * z / w**2
        elif order == 2:
            core = (6.0 * z * z - 2.0) / w**3
        elif order == 3:
            core = 24.0 * z * (1.0 - z * z) / w**4
        else:
            core = 24.0 * (5.0 * z**4 - 10.0 * z * z + 1.0) / w**5
        val = core / (np.pi * self.gamma ** (order + 1))
        return _scalar_like(x, val)

    def cdf(self, x):
        x = _as_float_array(x)
        val = 0.5 + np.arctan((x - self.loc) / self.gamma) / np.pi
        return _scalar_like(x, val)

    def ppf(self, q):
        if not 0.0 < q < 1.0:
            raise ParameterError("quantile level must lie strictly inside (0, 1)")
        return self.loc + self.gamma * np.tan(np.pi * (q - 0.5))

    def sample(self, n, rng):
        # quantile transform of uniforms
        u = rng.uniform(0.0, 1.0, size=int(n))
        return self.loc + self.gamma * np.tan(np.pi * (u - 0.5))

    def __repr__(self):
        return f"Cauchy({self.loc:g}, {self.gamma:g})"


class Pareto(Density):
    """Pareto density (alpha - 1) x**(-alpha) on [1, inf), alpha > 1.

    The exponent alpha is the density's decay rate, so the survival function
    is x**(1 - alpha); e.g. alpha = 2 gives P(X > 2) = 1/2.
    """

    def __init__(self, alpha: float):
        if alpha <= 1:
            raise ParameterError("alpha must exceed 1")
        self.alpha = float(alpha)
        self.support = (1.0, np.inf)

    def deriv(self, order, x):
        order = _check_order(order)
        x = _as_float_array(x)
        a = self.alpha
        coef = a - 1.0
        for i in range(order):
            coef *= -(a + i)
        inside = x >= 1.0
        xs = np.where(inside, x, 1.0)
        val = np.where(inside, coef * xs ** (-(a + order)), 0.0)
        return _scalar_like(x, val)

    def cdf(self, x):
        x = _as_float_array(x)
        inside = x >= 1.0
        xs = np.where(inside, x, 1.0)
        val = np.where(inside, 1.0 - xs ** (1.0 - self.alpha), 0.0)
        return _scalar_like(x, val)

    def ppf(self, q):
        if not 0.0 < q < 1.0:
            raise ParameterError("quantile level must lie strictly inside (0, 1)")
        return float((1.0 - q) ** (-1.0 / (self.alpha - 1.0)))

    def sample(self, n, rng):
        u = rng.uniform(0.0, 1.0, size=int(n))
        return (1.0 - u) ** (-1.0 / (self.alpha - 1.0))

    def __repr__(self):
        return f"Pareto({self.alpha:g})"


class CustomDensity(Density):
    """Adapter for user-supplied callables.

    Parameters
    ----------
    pdf : callable
        Vectorized density function.
    derivs : sequence of callables, optional
        derivs[k-1] evaluates the k-th derivative (k = 1..4).  Orders without
        a callable raise ParameterError when requested.
    cdf, ppf, sampler : callables, optional
        sampler(n, rng) must return an ndarray of n draws.
    """

    def __init__(self, pdf, derivs=(), cdf=None, ppf=None, sampler=None,
                 support=(-np.inf, np.inf)):
        self._pdf = pdf
        self._derivs = tuple(derivs)
        self._cdf = cdf
        self._ppf = ppf
        self._sampler = sampler
        self.support = (float(support[0]), float(support[1]))

    def deriv(self, order, x):
        order = _check_order(order)
        if order == 0:
            return self._pdf(x)
        if order > len(self._derivs) or self._derivs[order - 1] is None:
            raise ParameterError(f"custom density has no derivative of order {order}")
        return self._derivs[order - 1](x)

    def cdf(self, x):
        if self._cdf is None:
            raise ParameterError("custom density has no cdf")
        return self._cdf(x)

    def ppf(self, q):
        if self._ppf is not None:
            return self._ppf(q)
        if self._cdf is None:
            raise ParameterError("custom density has no cdf to invert")
        return _ppf_numeric(self, q)

    def sample(self, n, rng):
        if self._sampler is None:
            raise ParameterError("custom density has no sampler")
        return self._sampler(int(n), rng)


# ----------------------------------------------------------------------
# density pairs
# ----------------------------------------------------------------------
@dataclass
class DensityPair:
    """Two population densities plus the prior p of the first population."""

    f: Density
    g: Density
    p: float
    name: str = "custom"

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ParameterError("prior p must lie strictly inside (0, 1)")

    def delta(self, x):
        """p f(x) - (1 - p) g(x); positive where the first population wins."""
        return self.p * self.f.pdf(x) - (1.0 - self.p) * self.g.pdf(x)

    def delta_deriv(self, order, x):
        return self.p * self.f.deriv(order, x) - (1.0 - self.p) * self.g.deriv(order, x)

    def density(self, which: str) -> Density:
        if which == "f":
            return self.f
        if which == "g":
            return self.g
        raise ParameterError("which must be 'f' or 'g'")

    def pooled_cdf(self, x):
        return self.p * self.f.cdf(x) + (1.0 - self.p) * self.g.cdf(x)

    def pooled_ppf(self, q: float) -> float:
        q = float(q)
        if not 0.0 < q < 1.0:
            raise ParameterError("quantile level must lie strictly inside (0, 1)")
        lo = min(_finite_or(self.f.support[0], -1.0), _finite_or(self.g.support[0], -1.0))
        hi = max(_finite_or(self.f.support[1], 1.0), _finite_or(self.g.support[1], 1.0))
        for _ in range(300):
            if self.pooled_cdf(lo) < q:
                break
            lo = lo * 2 if lo < 0 else lo - max(1.0, abs(lo))
        for _ in range(300):
            if self.pooled_cdf(hi) > q:
                break
            hi = hi * 2 if hi > 0 else hi + max(1.0, abs(hi))
        return brentq(lambda x: self.pooled_cdf(x) - q, lo, hi, xtol=1e-12, rtol=1e-14)

    def sample(self, which: str, n: int, rng: np.random.Generator):
        return self.density(which).sample(n, rng)


def _finite_or(v: float, fallback: float) -> float:
    return float(v) if np.isfinite(v) else fallback


def density_deriv(pair: DensityPair, which: str, order: int, x):
    """Derivative of order `order` of one of the pair's densities at x."""
    return pair.density(which).deriv(order, x)


_MIX_WEIGHTS = (0.2, 0.2, 0.6)
_MIX_MEANS = (0.5, 1.0, 19.0 / 12.0)
_MIX_SIGMAS = (1.0, 2.0 / 3.0, 5.0 / 9.0)

PAIR_IDS = ("class1a", "class1b", "class2a", "class2b", "pareto", "contrast")


def make_pair(pair_id: str, *, alpha: float | None = None, beta: float | None = None,
              p: float = 0.5) -> DensityPair:
    """Construct a benchmark density pair by id.

    `pareto` requires alpha and beta with 1 < alpha < beta < alpha + 1 (the
    regime in which the heavier-tailed population should win far out, yet a
    fixed-bandwidth rule keeps misclassifying there).  Other ids take no
    shape parameters.  The prior is 1/2 for every benchmark.
    """
    pid = str(pair_id).lower()
    if pid == "class1a":
        return DensityPair(Normal(0.0, 1.0), Normal(-1.2, 0.6), 0.5, pid)
    if pid == "class1b":
        g = NormalMixture(_MIX_WEIGHTS, _MIX_MEANS, _MIX_SIGMAS)
        return DensityPair(Normal(0.0, 1.0), g, 0.5, pid)
    if pid == "class2a":
        return DensityPair(Normal(0.0, 1.0), Normal(1.0, 1.0), 0.5, pid)
    if pid == "class2b":
        return DensityPair(Normal(0.0, 1.0), Cauchy(), 0.5, pid)
    if pid == "pareto":
        if alpha is None or beta is None:
            raise ParameterError("pareto pair requires alpha and beta")
        if not (1.0 < alpha < beta < alpha + 1.0):
            raise ParameterError(
                "pareto pair requires 1 < alpha < beta < alpha + 1, got "
                f"alpha={alpha!r}, beta={beta!r}"
            )
        if not 0.0 < p < 1.0:
            raise ParameterError("prior p must lie strictly inside (0, 1)")
        return DensityPair(Pareto(alpha), Pareto(beta), p, pid)
    if pid == "contrast":
        return DensityPair(Normal(0.0, 1.0), Normal(0.0, 1.0 / 3.0), 0.5, pid)
    raise ParameterError(f"unknown pair id {pair_id!r}; choose from {PAIR_IDS}")


# ----------------------------------------------------------------------
# crossings
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CrossingPoint:
    """A zero of delta with the local quantities the expansions need."""

    y: float
    delta_prime: float
    f_value: float
    g_value: float
    f2: float
    g2: float
    f4: float
    g4: float


@dataclass(frozen=True)
class CrossingSet:
    """All crossings of delta on an interval plus the detected regime.

    regime is "class1" when no single curvature ratio can cancel the leading
    bias at every crossing, "class2" when the common ratio exists (same-sign
    curvatures, identical ratio across crossings).  For class2 sets, `ratio`
    holds R = p f''(y) / ((1-p) g''(y)) and `t_factor` holds
    p f''''(y) - R^2 (1-p) g''''(y); t_factor == 0 marks the degenerate
    subcase in which the second-order bias also cancels.
    """

    points: tuple[CrossingPoint, ...]
    interval: tuple[float, float]
    regime: str | None
    ratio: float | None = None
    t_factor: float | None = None

    @property
    def nu(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


_DELTA_TOL = 1e-12
_WIDTH_TOL = 1e-13
_SLOPE_TOL = 1e-6
_RATIO_RTOL = 1e-6
_CURV_TOL = 1e-12


def regime_detect(pair: DensityPair, points) -> tuple[str, float | None, float | None]:
    """Classify a crossing collection into the class1/class2 dichotomy.

    Returns (regime, ratio, t_factor); ratio and t_factor are None for
    class1.  Raises DegenerateCrossingError when both curvatures vanish at
    some crossing (neither regime's expansion applies there).
    """
    pts = tuple(points)
    if not pts:
        raise ParameterError("regime detection needs at least one crossing")
    p, q = pair.p, 1.0 - pair.p
    for pt in pts:
        if abs(pt.f2) <= _CURV_TOL and abs(pt.g2) <= _CURV_TOL:
            raise DegenerateCrossingError(
                f"both curvatures vanish at crossing {pt.y:.6g}; "
                "the bandwidth expansions do not cover this pair"
            )
    ratios = []
    for pt in pts:
        if pt.f2 * pt.g2 <= 0.0:
            return "class1", None, None
        ratios.append((p * pt.f2) / (q * pt.g2))
    r0 = ratios[0]
    for r in ratios[1:]:
        if abs(r - r0) > _RATIO_RTOL * abs(r0):
            return "class1", None, None
    t = p * pts[0].f4 - r0 * r0 * q * pts[0].g4
    return "class2", r0, t


def crossings(pair: DensityPair, interval: tuple[float, float] | None = None,
              grid_points: int = 4096) -> CrossingSet:
    """Locate all zeros of delta on an interval and classify the regime.

    The default interval runs between the 1e-4 and 1 - 1e-4 quantiles of the
    pooled mixture p F + (1-p) G.  A uniform scan with `grid_points` nodes
    brackets sign changes; each bracket is refined by bisection until
    |delta| <= 1e-12 or the bracket is narrower than 1e-13.  A refined root
    whose analytic slope disagrees with the bracket's endpoint signs means
    the cell hid additional roots and raises ResolutionError; a slope below
    1e-6 in absolute value raises DegenerateCrossingError.
    """
    if grid_points < 8:
        raise ParameterError("grid_points must be at least 8")
    if interval is None:
        interval = (pair.pooled_ppf(1e-4), pair.pooled_ppf(1.0 - 1e-4))
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ParameterError("interval must satisfy lo < hi")

    xs = np.linspace(lo, hi, int(grid_points))
    ds = pair.delta(xs)
    if not np.all(np.isfinite(ds)):
        raise ParameterError("delta is not finite on the scan interval")
    signs = np.sign(ds)

    brackets: list[tuple[float, float]] = []
    i = 0
    while i < len(xs) - 1:
        if signs[i] == 0.0:
            a = xs[i - 1] if i > 0 else xs[i]
            b = xs[i + 1]
            brackets.append((a, b))
            i += 1
            continue
        if signs[i] * signs[i + 1] < 0.0:
            brackets.append((xs[i], xs[i + 1]))
        i += 1
    if signs[-1] == 0.0:
        brackets.append((xs[-2], xs[-1]))

    roots: list[float] = []
    for a, b in brackets:
        fa, fb = pair.delta(a), pair.delta(b)
        if fa == 0.0:
            root = a
        elif fb == 0.0:
            root = b
        elif fa * fb > 0.0:
            # node zero with same-signed neighbours: a tangency the scan
            # cannot orient
            raise ResolutionError(
                f"tangent zero of delta near [{a:.6g}, {b:.6g}]; "
                "increase grid_points or shrink the interval"
            )
        else:
            root = _bisect(pair, a, b, fa)
        slope = float(pair.delta_deriv(1, root))
        if abs(slope) < _SLOPE_TOL:
            raise DegenerateCrossingError(
                f"|delta'| = {abs(slope):.3g} at crossing {root:.6g} is below "
                f"{_SLOPE_TOL:g}; expansions need a transversal crossing"
            )
        if np.sign(slope) != np.sign(fb - fa):
            raise ResolutionError(
                f"slope direction at {root:.6g} contradicts the bracketing "
                "cell; the cell likely hides multiple roots — increase grid_points"
            )
        if roots and abs(root - roots[-1]) < 1e-10 * max(1.0, abs(root)):
            continue
        roots.append(root)

    pts = tuple(
        CrossingPoint(
            y=r,
            delta_prime=float(pair.delta_deriv(1, r)),
            f_value=float(pair.f.pdf(r)),
            g_value=float(pair.g.pdf(r)),
            f2=float(pair.f.deriv(2, r)),
            g2=float(pair.g.deriv(2, r)),
            f4=float(pair.f.deriv(4, r)),
            g4=float(pair.g.deriv(4, r)),
        )
        for r in roots
    )
    if pts:
        regime, ratio, t_factor = regime_detect(pair, pts)
    else:
        regime, ratio, t_factor = None, None, None
    return CrossingSet(points=pts, interval=(lo, hi), regime=regime,
                       ratio=ratio, t_factor=t_factor)


def _bisect(pair: DensityPair, a: float, b: float, fa: float) -> float:
    """Bisect a sign-change bracket of delta to the module tolerances."""
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = pair.delta(mid)
        if abs(fm) <= _DELTA_TOL or (b - a) <= _WIDTH_TOL:
            return mid
        if (fm > 0.0) == (fa > 0.0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)
