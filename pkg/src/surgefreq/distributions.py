"""The four candidate annual-maximum distributions and their ML estimation.

Families: gamma, log_normal, gumbel, weibull. Each is two-parameter, so
every fitted model carries exactly two estimated parameters. The Gumbel
family uses the maximum convention: density (1/scale) exp(-z - exp(-z))
with z = (x - location)/scale, so large water levels sit in the upper
tail and the exceedance quantile is

    x_p = location - scale * ln(-ln(1 - p))

with p the annual exceedance probability. Exceedance quantiles of the
other families are found by numerical inversion of the fitted CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special
from scipy.optimize import brentq
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._special import digamma, trigamma
from ._validation import as_float_vector, check_exceedance_probability

__all__ = [
    "FAMILIES",
    "DistributionFitter",
    "FitError",
    "PlottingPosition",
    "plotting_positions",
]

FAMILIES = ("gamma", "log_normal", "gumbel", "weibull")

#: Families whose support is the positive half-line.
POSITIVE_SUPPORT = frozenset({"gamma", "log_normal", "weibull"})

_PARAM_NAMES = {
    "gamma": ("shape", "scale"),
    "log_normal": ("mu_log", "sigma_log"),
    "gumbel": ("location", "scale"),
    "weibull": ("shape", "scale"),
}


class FitError(RuntimeError):
    """Raised when maximum-likelihood estimation cannot produce a valid fit."""


# ---------------------------------------------------------------------------
# Family math. params is always the 2-tuple documented in _PARAM_NAMES.
# ---------------------------------------------------------------------------


def _gumbel_log_pdf(x, params):
    loc, scale = params
    z = (x - loc) / scale
    return -np.log(scale) - z - np.exp(-z)


def _gumbel_cdf(x, params):
    loc, scale = params
    return np.exp(-np.exp(-(x - loc) / scale))


def _gumbel_sf(x, params):
    loc, scale = params
    return -np.expm1(-np.exp(-(x - loc) / scale))


def _log_normal_log_pdf(x, params):
    mu, sigma = params
    lx = np.log(x)
    return -lx - np.log(sigma) - 0.5 * math.log(2.0 * math.pi) - (lx - mu) ** 2 / (2.0 * sigma**2)


def _log_normal_cdf(x, params):
    mu, sigma = params
    t = (np.log(x) - mu) / sigma
    return 0.5 * special.erfc(-t / math.sqrt(2.0))


def _log_normal_sf(x, params):
    mu, sigma = params
    t = (np.log(x) - mu) / sigma
    return 0.5 * special.erfc(t / math.sqrt(2.0))


def _gamma_log_pdf(x, params):
    shape, scale = params
    return (shape - 1.0) * np.log(x) - x / scale - special.gammaln(shape) - shape * np.log(scale)


def _gamma_cdf(x, params):
    shape, scale = params
    return special.gammainc(shape, x / scale)


def _gamma_sf(x, params):
    shape, scale = params
    return special.gammaincc(shape, x / scale)


def _weibull_log_pdf(x, params):
    shape, scale = params
    t = x / scale
    return np.log(shape / scale) + (shape - 1.0) * np.log(t) - t**shape


def _weibull_cdf(x, params):
    shape, scale = params
    return -np.expm1(-((x / scale) ** shape))


def _weibull_sf(x, params):
    shape, scale = params
    return np.exp(-((x / scale) ** shape))


_LOG_PDF = {
    "gamma": _gamma_log_pdf,
    "log_normal": _log_normal_log_pdf,
    "gumbel": _gumbel_log_pdf,
    "weibull": _weibull_log_pdf,
}
_CDF = {
    "gamma": _gamma_cdf,
    "log_normal": _log_normal_cdf,
    "gumbel": _gumbel_cdf,
    "weibull": _weibull_cdf,
}
_SF = {
    "gamma": _gamma_sf,
    "log_normal": _log_normal_sf,
    "gumbel": _gumbel_sf,
    "weibull": _weibull_sf,
}


def _check_family(family: str) -> str:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    return family


def _check_params(family: str, params) -> tuple[float, float]:
    p1, p2 = (float(params[0]), float(params[1]))
    if not (np.isfinite(p1) and np.isfinite(p2)):
        raise ValueError(f"{family}: non-finite parameters {params!r}")
    if p2 <= 0.0:
        raise ValueError(f"{family}: scale-like parameter must be > 0, got {p2}")
    if family in ("gamma", "weibull") and p1 <= 0.0:
        raise ValueError(f"{family}: shape parameter must be > 0, got {p1}")
    return p1, p2


def _check_support(family: str, x: np.ndarray) -> None:
    if family in POSITIVE_SUPPORT and np.any(x <= 0.0):
        raise ValueError(f"{family} is only defined for x > 0")


# ---------------------------------------------------------------------------
# Maximum-likelihood solvers. Each returns (params, converged, n_iter).
# ---------------------------------------------------------------------------


def _fit_log_normal(x, tol, max_iter):
    lx = np.log(x)
    mu = float(lx.mean())
    sigma = float(np.sqrt(np.mean((lx - mu) ** 2)))
    if sigma <= 0.0:
        raise FitError("log_normal: zero variance in log sample")
    return (mu, sigma), True, 0


def _fit_gumbel(x, tol, max_iter, fixed_scale=None):
    xbar = float(x.mean())
    shifted = x - x.min()
    if fixed_scale is not None:
        scale = float(fixed_scale)
        if scale <= 0.0:
            raise FitError(f"gumbel: fixed scale must be > 0, got {scale}")
        converged, n_iter = True, 0
    else:
        scale = float(x.std(ddof=1)) * math.sqrt(6.0) / math.pi
        if scale <= 0.0:
            raise FitError("gumbel: zero variance sample")
        converged = False
        n_iter = 0
        # Profile likelihood in the scale: solve
        #   scale = mean(x) - sum(x_i w_i),  w_i = softmax(-x_i/scale)
        # by Newton steps; the derivative is 1 + Var_w(x)/scale^2 > 1.
        for n_iter in range(1, max_iter + 1):
            weights = np.exp(-shifted / scale)
            weights /= weights.sum()
            weighted_mean = float(np.dot(weights, x))
            residual = scale - xbar + weighted_mean
            weighted_var = float(np.dot(weights, x * x)) - weighted_mean**2
            step = residual / (1.0 + weighted_var / scale**2)
            scale -= step
            if not np.isfinite(scale) or scale <= 0.0:
                raise FitError("gumbel: scale iteration left the parameter space")
            if abs(step) <= tol * max(1.0, abs(scale)):
                converged = True
                break
    location = float(x.min() - scale * np.log(np.mean(np.exp(-shifted / scale))))
    return (location, scale), converged, n_iter


def _fit_gamma(x, tol, max_iter):
    log_mean_gap = float(np.log(x.mean()) - np.mean(np.log(x)))
    if log_mean_gap <= 0.0:
        raise FitError("gamma: degenerate sample (zero variance)")
    # Moment-style starting value, then Newton on ln k - psi(k) = gap.
    shape = (3.0 - log_mean_gap + math.sqrt((log_mean_gap - 3.0) ** 2 + 24.0 * log_mean_gap)) / (
        12.0 * log_mean_gap
    )
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        h = math.log(shape) - digamma(shape) - log_mean_gap
        hp = 1.0 / shape - trigamma(shape)
        new = shape - h / hp
        if new <= 0.0 or not np.isfinite(new):
            new = shape / 2.0
        if abs(new - shape) <= tol * max(1.0, abs(new)):
            shape = new
            converged = True
            break
        shape = new
    return (float(shape), float(x.mean() / shape)), converged, n_iter


def _fit_weibull(x, tol, max_iter):
    log_x = np.log(x)
    sd_log = float(log_x.std(ddof=1))
    if sd_log <= 0.0:
        raise FitError("weibull: zero variance in log sample")
    mean_log = float(log_x.mean())
    # Work with y = x / max(x) so y**shape never overflows.
    scaled = x / x.max()
    log_scaled = np.log(np.where(scaled > 0.0, scaled, 1.0))
    log_max = float(np.log(x.max()))
    shape = math.pi / (sd_log * math.sqrt(6.0))
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        powered = scaled**shape
        total = float(powered.sum())
        first = float(np.dot(powered, log_scaled))
        second = float(np.dot(powered, log_scaled * log_scaled))
        g = first / total + log_max - 1.0 / shape - mean_log
        gp = (second * total - first * first) / (total * total) + 1.0 / shape**2
        new = shape - g / gp
        if new <= 0.0 or not np.isfinite(new):
            new = shape / 2.0
        if abs(new - shape) <= tol * max(1.0, abs(new)):
            shape = new
            converged = True
            break
        shape = new
    scale = float(x.max() * np.mean(scaled**shape) ** (1.0 / shape))
    return (float(shape), scale), converged, n_iter


# ---------------------------------------------------------------------------
# Estimator
# ---------------------------------------------------------------------------


class DistributionFitter(BaseEstimator):
    """Maximum-likelihood fit of one candidate family to an annual-max sample.

    Parameters
    ----------
    family : str, one of ``FAMILIES``
        Candidate distribution to fit.
    tol : float
        Relative parameter tolerance of the iterative solvers.
    max_iter : int
        Iteration cap; hitting it leaves ``converged_`` False.
    fixed_scale : float or None
        Gumbel only: hold the scale at this value and profile out the
        location in closed form. Used for constant-scale refits.

    Attributes
    ----------
    params_ : tuple of (float, float)
        Estimated parameters, named per family (see ``param_names``).
    log_likelihood_ : float
        Attained log-likelihood of the training sample.
    converged_ : bool
        Whether the solver met the tolerance within ``max_iter``.
    n_ : int
        Training sample size.
    n_iter_ : int
        Solver iterations used.
    """

    def __init__(self, family="gumbel", tol=1e-10, max_iter=200, fixed_scale=None):
        self.family = family
        self.tol = tol
        self.max_iter = max_iter
        self.fixed_scale = fixed_scale

    @property
    def param_names(self) -> tuple[str, str]:
        return _PARAM_NAMES[_check_family(self.family)]

    @classmethod
    def from_params(cls, family: str, params: Sequence[float]) -> "DistributionFitter":
        """An evaluation-only model at known parameters (no data attached)."""
        model = cls(family=_check_family(family))
        model.params_ = _check_params(family, params)
        model.converged_ = True
        model.n_ = 0
        model.n_iter_ = 0
        return model

    def fit(self, X, y=None):
        """Estimate the family parameters from a 1-D sample (cm)."""
        family = _check_family(self.family)
        x = as_float_vector(X, name="sample")
        if x.size < 10:
            raise ValueError(f"need at least 10 observations to fit, got {x.size}")
        if family in POSITIVE_SUPPORT and np.any(x <= 0.0):
            raise FitError(f"{family} requires strictly positive values")
        if float(x.max()) == float(x.min()):
            raise FitError("degenerate sample: all values identical")
        if self.fixed_scale is not None and family != "gumbel":
            raise ValueError("fixed_scale is only supported for the gumbel family")

        if family == "gumbel":
            params, converged, n_iter = _fit_gumbel(
                x, self.tol, self.max_iter, fixed_scale=self.fixed_scale
            )
        elif family == "log_normal":
            params, converged, n_iter = _fit_log_normal(x, self.tol, self.max_iter)
        elif family == "gamma":
            params, converged, n_iter = _fit_gamma(x, self.tol, self.max_iter)
        else:
            params, converged, n_iter = _fit_weibull(x, self.tol, self.max_iter)

        try:
            self.params_ = _check_params(family, params)
        except ValueError as exc:
            raise FitError(str(exc)) from exc
        self.converged_ = bool(converged)
        self.n_ = int(x.size)
        self.n_iter_ = int(n_iter)
        self.log_likelihood_ = float(np.sum(_LOG_PDF[family](x, self.params_)))
        if self.converged_ and not np.isfinite(self.log_likelihood_):
            raise FitError(f"{family}: non-finite log-likelihood at the fitted parameters")
        return self

    # -- evaluation ---------------------------------------------------------

    def _require_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError(
                "this DistributionFitter has no parameters yet; call fit() or from_params()"
            )

    def _eval_input(self, x):
        arr = as_float_vector(np.atleast_1d(x), name="x")
        _check_support(self.family, arr)
        return arr

    @staticmethod
    def _unwrap(result, x):
        return float(result[0]) if np.isscalar(x) or np.ndim(x) == 0 else result

    def log_pdf(self, x):
        """Log density at ``x``."""
        self._require_fitted()
        arr = self._eval_input(x)
        return self._unwrap(_LOG_PDF[self.family](arr, self.params_), x)

    def pdf(self, x):
        """Density at ``x``; zero only in the tails."""
        self._require_fitted()
        arr = self._eval_input(x)
        return self._unwrap(np.exp(_LOG_PDF[self.family](arr, self.params_)), x)

    def cdf(self, x):
        """P(X <= x) under the fitted model."""
        self._require_fitted()
        arr = self._eval_input(x)
        return self._unwrap(_CDF[self.family](arr, self.params_), x)

    def exceedance_probability(self, x):
        """P(X > x): the annual exceedance probability of level ``x``."""
        self._require_fitted()
        arr = self._eval_input(x)
        return self._unwrap(_SF[self.family](arr, self.params_), x)

    def exceedance_quantile(self, p):
        """Level exceeded with probability ``p`` in any one year.

        Closed form for the gumbel family; numerical inversion of the
        CDF for the others.
        """
        self._require_fitted()
        if np.isscalar(p) or np.ndim(p) == 0:
            return self._quantile_scalar(check_exceedance_probability(p))
        arr = as_float_vector(p, name="p")
        return np.array(
            [self._quantile_scalar(check_exceedance_probability(v)) for v in arr]
        )

    def _quantile_scalar(self, p: float) -> float:
        if self.family == "gumbel":
            loc, scale = self.params_
            return loc - scale * math.log(-math.log1p(-p))
        return self._invert_sf(p)

    def _invert_sf(self, p: float) -> float:
        sf = _SF[self.family]
        params = self.params_
        if self.family == "gamma":
            guess = params[0] * params[1]
        elif self.family == "log_normal":
            guess = math.exp(params[0])
        else:
            guess = params[1]
        lo = hi = guess
        for _ in range(600):
            if sf(lo, params) >= p:
                break
            lo /= 2.0
        else:
            raise FitError(f"{self.family}: failed to bracket quantile at p={p}")
        for _ in range(600):
            if sf(hi, params) <= p:
                break
            hi *= 2.0
        else:
            raise FitError(f"{self.family}: failed to bracket quantile at p={p}")
        if lo == hi:
            return float(lo)
        try:
            root = brentq(
                lambda v: sf(v, params) - p,
                lo,
                hi,
                xtol=1e-12,
                rtol=4.0 * np.finfo(float).eps,
                maxiter=200,
            )
        except (RuntimeError, ValueError) as exc:
            raise FitError(f"{self.family}: quantile inversion failed at p={p}") from exc
        return float(root)

    def score_samples(self, X):
        """Per-observation log density (sklearn density-estimator idiom)."""
        self._require_fitted()
        arr = self._eval_input(X)
        return _LOG_PDF[self.family](arr, self.params_)

    def score(self, X, y=None):
        """Total log-likelihood of ``X`` under the fitted model."""
        return float(np.sum(self.score_samples(X)))


# ---------------------------------------------------------------------------
# Plotting positions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlottingPosition:
    """Empirical exceedance probability m/(N+1) for the rank-m largest value."""

    value: float
    rank: int
    exceedance: float


def plotting_positions(sample) -> list[PlottingPosition]:
    """Assign m/(N+1) exceedance probabilities, ranks in non-ascending order.

    Ties keep their input order and receive consecutive ranks.
    """
    x = as_float_vector(sample, name="sample")
    if x.size == 0:
        raise ValueError("sample must not be empty")
    order = np.argsort(-x, kind="stable")
    n = x.size
    positions = []
    for rank_m, idx in enumerate(order, start=1):
        positions.append(
            PlottingPosition(
                value=float(x[idx]),
                rank=rank_m,
                exceedance=rank_m / (n + 1.0),
            )
        )
    return positions
