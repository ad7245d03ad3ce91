"""Convolution-quadrature weight sequences for Caputo derivatives of order alpha.

Four families are generated here, all as Taylor coefficients of a generating
function evaluated by factored binomial series:

* ``sftr_weights`` -- omega_k of the shifted fractional trapezoidal rule,
  generated by  omega(z) = [(1-z) / (1/2 (1+z) + (theta/alpha)(1-z))]^alpha.
* ``varpi_weights`` -- the companion sequence varpi_k with
  varpi(z) * omega(z) = 1 - z, computed by a two-term recurrence.
* ``cumulative_weights`` -- partial sums a_j = sum_{k<=j} varpi_k, the kernel
  of the discrete fractional integral entering the discrete energy.
* ``fbdf2_weights`` -- weights of the fractional BDF-2 rule, generated by
  (3/2 - 2z + z^2/2)^alpha.

For theta in [alpha/2, 1/2] the companion sequence has a sign pattern
(varpi_0 > 0, varpi_k <= 0 for k >= 1) that makes a_j positive and
non-increasing; that structure is what the energy-decay argument of the
integrator rests on.  ``theta_gap`` and ``min_theta_gap_grid`` evaluate the
scan that certifies the sign pattern numerically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class WeightKind(enum.Enum):
    SFTR_OMEGA = "sftr_omega"
    VARPI = "varpi"
    CUMULATIVE_A = "cumulative_a"
    FBDF2 = "fbdf2"


@dataclass(frozen=True)
class SchemeParams:
    """Fractional order alpha in (0,1) and shift theta in (0, 1/2]."""

    alpha: float
    theta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(
                f"alpha={self.alpha} outside (0, 1); the fractional order of the "
                "Cole-Cole relaxation must be a proper fraction"
            )
        if not 0.0 < self.theta <= 0.5:
            raise ValueError(
                f"theta={self.theta} outside (0, 1/2]; the shifted trapezoidal "
                "generating function is defined only for 0 < theta <= 1/2"
            )

    @property
    def decay_guaranteed(self) -> bool:
        """True iff theta >= alpha/2, the hypothesis of the energy-decay theorem."""
        return self.theta >= 0.5 * self.alpha

    @property
    def shift_ratio(self) -> float:
        return self.theta / self.alpha


@dataclass(frozen=True)
class WeightSequence:
    """A finite prefix of one weight family; values[k] is the k-th coefficient."""

    kind: WeightKind
    alpha: float
    theta: float | None
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("values must be a non-empty 1-D array")
        if vals[0] <= 0.0:
            raise ValueError(f"leading weight must be positive, got {vals[0]}")

    def __len__(self) -> int:
        return len(self.values)


def binomial_series(gamma: float, scale: float, n: int) -> np.ndarray:
    """First n+1 Taylor coefficients of (1 + scale*z)**gamma.

    Uses the ratio recurrence c_k = c_{k-1} * scale * (gamma - k + 1) / k,
    with c_0 = 1.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return np.ones(1)
    k = np.arange(1, n + 1, dtype=float)
    ratios = scale * (gamma - k + 1.0) / k
    return np.concatenate(([1.0], np.cumprod(ratios)))


def _denominator_coeffs(params: SchemeParams) -> tuple[float, float]:
    # 1/2 (1+z) + (theta/alpha)(1-z) = d0 + d1 z, with d0 > 0 always.
    r = params.shift_ratio
    return 0.5 + r, 0.5 - r


def sftr_weights(params: SchemeParams, n: int) -> WeightSequence:
    """Shifted-fractional-trapezoidal weights omega_0..omega_n.

    omega(z) = [(1-z)/(d0 + d1 z)]^alpha with d0 = 1/2 + theta/alpha and
    d1 = 1/2 - theta/alpha, expanded as the convolution of the binomial
    series of (1-z)^alpha and (1 + (d1/d0) z)^(-alpha), scaled by d0^(-alpha).
    """
    a = params.alpha
    d0, d1 = _denominator_coeffs(params)
    num = binomial_series(a, -1.0, n)
    den = binomial_series(-a, d1 / d0, n)
    vals = d0 ** (-a) * np.convolve(num, den)[: n + 1]
    return WeightSequence(WeightKind.SFTR_OMEGA, a, params.theta, vals)


def varpi_weights(params: SchemeParams, n: int) -> WeightSequence:
    """Companion weights varpi_0..varpi_n with varpi(z) * omega(z) = 1 - z.

    Computed by the two-term recurrence obtained from the first-order ODE the
    generating function varpi(z) = (1-z)^(1-alpha) (d0 + d1 z)^alpha
    satisfies:

        varpi_0 = d0^alpha
        varpi_1 = (alpha - r - 1/2) / d0 * varpi_0
        varpi_k = [ (r (2k-3) + alpha - 1/2) varpi_{k-1}
                    + (r - 1/2)(3 - k) varpi_{k-2} ] / (d0 k),   k >= 2

    where r = theta/alpha and d0 = r + 1/2.
    """
    a = params.alpha
    r = params.shift_ratio
    d0 = r + 0.5
    vals = np.empty(n + 1)
    vals[0] = d0**a
    if n >= 1:
        vals[1] = (a - r - 0.5) / d0 * vals[0]
    for k in range(2, n + 1):
        vals[k] = (
            (r * (2 * k - 3) + a - 0.5) * vals[k - 1]
            + (r - 0.5) * (3 - k) * vals[k - 2]
        ) / (d0 * k)
    return WeightSequence(WeightKind.VARPI, a, params.theta, vals)


def varpi_weights_by_series(params: SchemeParams, n: int) -> np.ndarray:
    """varpi coefficients by direct binomial-series convolution (cross-check path)."""
    a = params.alpha
    d0, d1 = _denominator_coeffs(params)
    num = binomial_series(1.0 - a, -1.0, n)
    den = binomial_series(a, d1 / d0, n)
    return d0**a * np.convolve(num, den)[: n + 1]


def cumulative_weights(varpi: WeightSequence) -> WeightSequence:
    """Cumulative sums a_j = sum_{k<=j} varpi_k.

    The same numbers are the Taylor coefficients of
    (1-z)^(-alpha) (d0 + d1 z)^alpha = varpi(z)/(1-z); both evaluations are
    computed and must agree to 1e-12, which guards the recurrence path.
    """
    if varpi.kind is not WeightKind.VARPI:
        raise ValueError(f"expected a VARPI sequence, got {varpi.kind}")
    vals = np.cumsum(varpi.values)
    params = SchemeParams(varpi.alpha, varpi.theta)
    d0, d1 = _denominator_coeffs(params)
    n = len(varpi) - 1
    direct = d0**varpi.alpha * np.convolve(
        binomial_series(-varpi.alpha, -1.0, n),
        binomial_series(varpi.alpha, d1 / d0, n),
    )[: n + 1]
    defect = float(np.max(np.abs(vals - direct)))
    if defect > 1e-12:
        raise ArithmeticError(
            f"cumulative-weight cross-check failed: partial sums and series "
            f"expansion disagree by {defect:.3e}"
        )
    return WeightSequence(WeightKind.CUMULATIVE_A, varpi.alpha, varpi.theta, vals)


def fbdf2_weights(alpha: float, n: int) -> WeightSequence:
    """Fractional BDF-2 weights: coefficients of (3/2 - 2z + z^2/2)^alpha.

    The quadratic factors as (3/2)(1-z)(1-z/3), so the coefficients are the
    convolution of two binomial series scaled by (3/2)^alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha={alpha} outside (0, 1)")
    vals = (1.5**alpha) * np.convolve(
        binomial_series(alpha, -1.0, n), binomial_series(alpha, -1.0 / 3.0, n)
    )[: n + 1]
    return WeightSequence(WeightKind.FBDF2, alpha, None, vals)


def shift_combine(weights: WeightSequence | np.ndarray, theta: float) -> np.ndarray:
    """Combined kernel g_j = (1-theta) w_j + theta w_{j-1}, with w_{-1} = 0.

    Output has one extra entry (index len(w), equal to theta * w_{-1+len}),
    so the full shifted kernel is retained.
    """
    if not 0.0 <= theta <= 0.5:
        raise ValueError(f"theta={theta} outside [0, 1/2]")
    w = weights.values if isinstance(weights, WeightSequence) else np.asarray(weights, float)
    out = np.zeros(len(w) + 1)
    out[:-1] = (1.0 - theta) * w
    out[1:] += theta * w
    return out


class SymbolKind(enum.Enum):
    VARPI_SYMBOL = "varpi"
    A_SYMBOL = "a"


def symbol_residual(
    kind: SymbolKind, params: SchemeParams, tau: float, K: int | None = None
) -> float:
    """Defect of the second-order symbol identity at step size tau.

    For VARPI_SYMBOL the identity is
        tau^(alpha-1) e^((1/2-theta) tau) varpi(e^-tau) = 1 + O(tau^2),
    for A_SYMBOL it is
        tau^alpha e^(-theta tau) a(e^-tau) = 1 + O(tau^2);
    the returned value is |symbol - 1| with the series truncated after K
    terms (default ceil(60/tau), which pushes the tail far below tau^2).
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    if K is None:
        K = math.ceil(60.0 / tau)
    varpi = varpi_weights(params, K - 1)
    if kind is SymbolKind.VARPI_SYMBOL:
        seq = varpi.values
        prefactor = tau ** (params.alpha - 1.0) * math.exp((0.5 - params.theta) * tau)
    elif kind is SymbolKind.A_SYMBOL:
        seq = cumulative_weights(varpi).values
        prefactor = tau**params.alpha * math.exp(-params.theta * tau)
    else:
        raise ValueError(f"unknown symbol kind {kind!r}")

    damping = np.exp(-tau * np.arange(K))
    # Geometric tail bound from the last retained term; |seq| is eventually
    # decreasing for both families, so this dominates the dropped remainder.
    tail = prefactor * abs(seq[-1]) * damping[-1] * math.exp(-tau) / (1.0 - math.exp(-tau))
    if tail > 1e-3 * tau * tau:
        raise ValueError(
            f"K={K} too small: truncation tail bound {tail:.3e} exceeds "
            f"1e-3*tau^2 = {1e-3 * tau * tau:.3e}"
        )
    return abs(prefactor * float(np.dot(seq, damping)) - 1.0)


def _rho(alpha: float, theta: float, k: float) -> float:
    r = theta / alpha
    return (
        (r - 0.5)
        * (k - 2.0)
        / (r * (2.0 * k - 1.0) + alpha - 0.5)
        * (4.0 * theta / (2.0 * theta + alpha))
        * (1.0 + 1.0 / k)
    )


def _rho_tilde(alpha: float, theta: float, m: float) -> float:
    r = theta / alpha
    return (
        (r * (2.0 * m - 3.0) + alpha - 0.5)
        / ((r + 0.5) * m)
        * (1.0 + (2.0 * theta + alpha) / (4.0 * theta) * (m - 1.0) / m)
    )


def theta_gap(x: float, alpha: float, theta: float) -> float:
    """Gap rho_tilde - rho at m = 4/x, the quantity whose positivity closes
    the induction behind the companion-weight sign pattern.

    m = 4/x is used as a real number; the admissible region is x in (0, 1],
    alpha in (0, 1), theta in [alpha/2, 1/2].
    """
    if not 0.0 < x <= 1.0:
        raise ValueError(f"x={x} outside (0, 1]")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha={alpha} outside (0, 1)")
    if not 0.5 * alpha <= theta <= 0.5:
        raise ValueError(f"theta={theta} outside [alpha/2, 1/2] for alpha={alpha}")
    m = 4.0 / x
    return _rho_tilde(alpha, theta, m) - _rho(alpha, theta, m)


def min_theta_gap_grid(
    x_points: int, alpha_points: int, theta_samples: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """min over theta of the gap, scanned over a uniform (x, alpha) grid.

    x_i = i/x_points for i = 1..x_points covers (0, 1]; alpha_j =
    j/(alpha_points+1) for j = 1..alpha_points covers the interior of (0, 1).
    For each cell the minimum is taken over theta_samples uniform samples of
    [alpha/2, 1/2] (endpoints included).  Returns (x values, alpha values,
    grid) with grid shape (x_points, alpha_points).
    """
    if min(x_points, alpha_points, theta_samples) < 2:
        raise ValueError("all scan resolutions must be >= 2")
    xs = np.arange(1, x_points + 1) / x_points
    alphas = np.arange(1, alpha_points + 1) / (alpha_points + 1)
    m = (4.0 / xs)[:, None]  # broadcast over theta samples
    grid = np.empty((x_points, alpha_points))
    for j, a in enumerate(alphas):
        thetas = np.linspace(0.5 * a, 0.5, theta_samples)[None, :]
        r = thetas / a
        rho = (
            (r - 0.5)
            * (m - 2.0)
            / (r * (2.0 * m - 1.0) + a - 0.5)
            * (4.0 * thetas / (2.0 * thetas + a))
            * (1.0 + 1.0 / m)
        )
        rho_t = (
            (r * (2.0 * m - 3.0) + a - 0.5)
            / ((r + 0.5) * m)
            * (1.0 + (2.0 * thetas + a) / (4.0 * thetas) * (m - 1.0) / m)
        )
        grid[:, j] = np.min(rho_t - rho, axis=1)
    return xs, alphas, grid
