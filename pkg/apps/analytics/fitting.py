"""
Scaling fits (cubic polynomial, a e^{bx} + c) with delta-method confidence bands
"""
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import bisect, least_squares
from scipy.special import betainc

from utils.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

CUBIC = 'cubic'
EXPONENTIAL = 'exponential'
T_TOLERANCE = 1e-10


@dataclass(frozen=True)
class FitResult:
    model: str
    parameters: np.ndarray
    covariance: np.ndarray
    x: np.ndarray
    y: np.ndarray
    residuals: np.ndarray
    converged: bool = True
    degenerate: bool = False

    @property
    def dof(self) -> int:
        return self.x.size - self.parameters.size

    def predict(self, xs) -> np.ndarray:
        return _MODELS[self.model][0](self.parameters, np.asarray(xs, dtype=float))

    def jacobian(self, xs) -> np.ndarray:
        """d prediction / d parameters, one row per x"""
        return _MODELS[self.model][1](self.parameters, np.asarray(xs, dtype=float))

    def as_dict(self):
        return {
            'model': self.model,
            'parameters': self.parameters,
            'covariance': self.covariance,
            'dof': self.dof,
            'rss': float(self.residuals @ self.residuals),
            'converged': self.converged,
            'degenerate': self.degenerate,
        }


@dataclass(frozen=True)
class ConfidenceBand:
    x: np.ndarray
    fit: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


def _cubic_predict(p, x):
    return np.polyval(p, x)


def _cubic_jacobian(p, x):
    return np.vander(x, 4)


def _exp_predict(p, x):
    a, b, c = p
    return a * np.exp(b * x) + c


def _exp_jacobian(p, x):
    a, b, _ = p
    growth = np.exp(b * x)
    return np.column_stack([growth, a * x * growth, np.ones_like(x)])


_MODELS = {
    CUBIC: (_cubic_predict, _cubic_jacobian),
    EXPONENTIAL: (_exp_predict, _exp_jacobian),
}


def _points(x, y, parameters: int):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidArgumentError('x and y must be 1-D arrays of equal length')
    if x.size < parameters:
        raise InvalidArgumentError(f'Need at least {parameters} points, got {x.size}')
    return x, y


def _covariance(jacobian: np.ndarray, residuals: np.ndarray) -> np.ndarray:
    """sigma^2 (J^T J)^-1 with sigma^2 = RSS / (n - p); NaN without residual degrees of freedom"""
    n, p = jacobian.shape
    if n == p:
        return np.full((p, p), np.nan)
    sigma2 = float(residuals @ residuals) / (n - p)
    covariance = sigma2 * np.linalg.pinv(jacobian.T @ jacobian)
    return 0.5 * (covariance + covariance.T)


def fit_cubic(x: Sequence[float], y: Sequence[float]) -> FitResult:
    """Linear least squares on [x^3, x^2, x, 1] through a QR factorization"""
    x, y = _points(x, y, 4)
    design = np.vander(x, 4)
    q, r = np.linalg.qr(design)
    parameters = solve_triangular(r, q.T @ y)
    residuals = y - design @ parameters
    degenerate = np.linalg.matrix_rank(design) < 4
    return FitResult(CUBIC, parameters, _covariance(design, residuals), x, y, residuals, degenerate=degenerate)


def _initial_guesses(x: np.ndarray, y: np.ndarray, starts: int):
    """For each trial rate b, the (a, c) that best fit y given b"""
    span = max(float(np.ptp(x)), 1e-12)
    rates = np.linspace(-3.0, 3.0, starts) / span
    for b in rates[rates != 0]:
        design = np.column_stack([np.exp(b * x), np.ones_like(x)])
        (a, c), *_ = np.linalg.lstsq(design, y, rcond=None)
        yield np.array([a, b, c])


def fit_exponential(
    x: Sequence[float], y: Sequence[float], starts: int = 13, max_evaluations: int = 2000
) -> FitResult:
    """
    Levenberg-Marquardt on a e^{bx} + c from several starting rates; the best
    local solution wins. Constant data leave b unidentifiable and come back
    flagged ``degenerate``.
    """
    x, y = _points(x, y, 3)

    def residual(p):
        return _exp_predict(p, x) - y

    def jacobian(p):
        return _exp_jacobian(p, x)

    best = None
    for guess in _initial_guesses(x, y, starts):
        try:
            result = least_squares(residual, guess, jac=jacobian, method='lm', max_nfev=max_evaluations)
        except (ValueError, FloatingPointError) as exc:
            logger.debug(f'Exponential fit start {guess} failed: {exc}')
            continue
        if not np.all(np.isfinite(result.x)):
            continue
        if best is None or result.cost < best.cost:
            best = result
    if best is None:
        raise InvalidArgumentError('Exponential fit failed from every starting point')

    parameters = best.x
    residuals = y - _exp_predict(parameters, x)
    final_jacobian = _exp_jacobian(parameters, x)
    degenerate = bool(np.ptp(y) == 0 or np.linalg.matrix_rank(final_jacobian) < 3)
    covariance = np.full((3, 3), np.nan) if degenerate else _covariance(final_jacobian, residuals)
    if best.status <= 0:
        logger.warning(f'Exponential fit did not converge: {best.message}')
    return FitResult(
        EXPONENTIAL, parameters, covariance, x, y, residuals, converged=best.status > 0, degenerate=degenerate
    )


def t_cdf(t: float, df: float) -> float:
    """Student-t CDF through the regularized incomplete beta function"""
    tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + t * t))
    return 1.0 - tail if t >= 0 else tail


def t_quantile(probability: float, df: float) -> float:
    """Inverse of ``t_cdf`` by bisection to an absolute tolerance of 1e-10"""
    if not 0.0 < probability < 1.0:
        raise InvalidArgumentError(f'Probability must lie in (0, 1), got {probability}')
    if df <= 0:
        raise InvalidArgumentError(f'Degrees of freedom must be positive, got {df}')
    if probability == 0.5:
        return 0.0
    if probability < 0.5:
        return -t_quantile(1.0 - probability, df)
    high = 1.0
    while t_cdf(high, df) < probability:
        high *= 2.0
    return bisect(lambda t: t_cdf(t, df) - probability, 0.0, high, xtol=T_TOLERANCE, rtol=4 * np.finfo(float).eps)


def ci_delta_method(fit: FitResult, xs: Sequence[float], alpha: float = 0.05) -> ConfidenceBand:
    """y_hat(x) -/+ t_{n-p, 1-alpha/2} sqrt(J(x)^T Sigma J(x))"""
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f'alpha must lie in (0, 1), got {alpha}')
    xs = np.asarray(xs, dtype=float)
    prediction = fit.predict(xs)
    if fit.dof < 1 or not np.all(np.isfinite(fit.covariance)):
        half_width = np.full(xs.shape, np.nan)
    else:
        jacobian = fit.jacobian(xs)
        variance = np.einsum('ij,jk,ik->i', jacobian, fit.covariance, jacobian)
        half_width = t_quantile(1.0 - alpha / 2.0, fit.dof) * np.sqrt(np.clip(variance, 0.0, None))
    return ConfidenceBand(xs, prediction, prediction - half_width, prediction + half_width)
