"""Implicit theta-scheme time integrator for the Cole-Cole Maxwell system.

Per step the scheme solves, with first differences d_tau u = (u^n - u^{n-1})/tau
and theta averages ub = (1-theta) u^n + theta u^{n-1}, all at t_{n-theta}:

    c_e d_tau E + d_tau P - curl_h Hb = f1
    c_m d_tau H + curl_e Eb          = f2
    tau0^alpha D^alpha P + Pb - c_p Eb = f3

where D^alpha P is a convolution quadrature for the Caputo derivative: the
shifted fractional trapezoidal kernel by default, or the theta-combined
fractional BDF-2 kernel.  The polarization equation is dof-local, so P^n is
eliminated as P^n = a E^n + g; substituting the H update then leaves one
symmetric positive definite system

    [(c_e + a)/tau I + (1-theta)^2 (tau/c_m) curl_h curl_e] E^n = rhs

solved matrix-free by conjugate gradients on the tangential-zero subspace.
H^n and P^n are recovered exactly afterwards, so the recorded per-step defect
of the three equations is the linear-solver residual alone.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .mesh import (
    GridSpec,
    ScalarField,
    VecField,
    combine_theta,
    curl_e,
    curl_h,
    inner_e,
    norm_e,
    norm_h,
)
from .weights import SchemeParams, WeightSequence, fbdf2_weights, sftr_weights, shift_combine


class Quadrature(enum.Enum):
    SFTR = "sftr"
    FBDF2 = "fbdf2"


@dataclass(frozen=True)
class MaterialParams:
    """Physical coefficients: c_e = eps0*eps_inf, c_m = mu0,
    c_p = eps0*(eps_s - eps_inf), relaxation time tau0, fractional order alpha."""

    c_e: float = 1.0
    c_m: float = 1.0
    c_p: float = 1.0
    tau0: float = 1.0
    alpha: float = 0.5

    def __post_init__(self) -> None:
        for name in ("c_e", "c_m", "c_p", "tau0"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha={self.alpha} outside (0, 1)")


@dataclass(frozen=True)
class SchemeConfig:
    theta: float
    tau: float
    n_steps: int
    quadrature: Quadrature = Quadrature.SFTR
    cg_tol: float = 1e-12
    cg_maxit: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.theta <= 0.5:
            raise ValueError(f"theta={self.theta} outside (0, 1/2]")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")

    @property
    def final_time(self) -> float:
        return self.tau * self.n_steps


@dataclass(frozen=True)
class SourceSet:
    """Vectorized evaluators; each takes coordinate arrays (x, y) and a time.

    f1(x, y, t) -> (f1x, f1y), f2(x, y, t) -> scalar array,
    f3(x, y, t) -> (f3x, f3y).  Components are sampled at the matching dof
    locations at t_{n-theta}.
    """

    f1: Callable[[np.ndarray, np.ndarray, float], tuple[np.ndarray, np.ndarray]]
    f2: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    f3: Callable[[np.ndarray, np.ndarray, float], tuple[np.ndarray, np.ndarray]]


def sample_vec(
    f: Callable[[np.ndarray, np.ndarray, float], tuple[np.ndarray, np.ndarray]],
    grid: GridSpec,
    t: float,
) -> VecField:
    """Sample a 2-vector function at the edge dofs."""
    xs, ys = grid.ex_coords()
    fx = np.broadcast_to(f(xs, ys, t)[0], xs.shape).astype(float)
    xs, ys = grid.ey_coords()
    fy = np.broadcast_to(f(xs, ys, t)[1], xs.shape).astype(float)
    return VecField(fx.copy(), fy.copy())


def sample_scalar(
    f: Callable[[np.ndarray, np.ndarray, float], np.ndarray], grid: GridSpec, t: float
) -> ScalarField:
    """Sample a scalar function at the cell centers."""
    xs, ys = grid.h_coords()
    return ScalarField(np.broadcast_to(f(xs, ys, t), xs.shape).astype(float).copy())


@dataclass
class SimState:
    """Integrator state after step n; advanced functionally by :func:`step`."""

    n: int
    e: VecField
    p: VecField
    h: ScalarField
    p_history: tuple[VecField, ...]
    s_norm_sq: tuple[float, ...]
    kernel: np.ndarray
    weights: WeightSequence
    grid: GridSpec
    material: MaterialParams
    config: SchemeConfig

    @property
    def time(self) -> float:
        return self.n * self.config.tau

    @property
    def cg_maxit(self) -> int:
        if self.config.cg_maxit is not None:
            return self.config.cg_maxit
        return 10 * (self.grid.nx + self.grid.ny)


def build_kernel(material: MaterialParams, config: SchemeConfig) -> tuple[np.ndarray, WeightSequence]:
    """Convolution kernel for the full run plus the base weight sequence.

    SFTR: the kernel is omega_0..omega_{n_steps-1} applied to history
    differences u^k - u^0, k = 1..n.  FBDF2: the kernel is the theta-combined
    sequence g_j = (1-theta) w~_j + theta w~_{j-1} applied to u^0..u^n, so it
    carries one extra entry for the k = 0 term at the final step.
    """
    if config.quadrature is Quadrature.SFTR:
        ws = sftr_weights(SchemeParams(material.alpha, config.theta), config.n_steps - 1)
        return ws.values, ws
    ws = fbdf2_weights(material.alpha, config.n_steps - 1)
    return shift_combine(ws, config.theta), ws


def init_state(
    grid: GridSpec,
    material: MaterialParams,
    config: SchemeConfig,
    e0: VecField,
    h0: ScalarField,
) -> SimState:
    """State at n = 0 with P^0 = 0 and weights precomputed for the whole run."""
    if e0.ex.shape != (grid.nx, grid.ny + 1) or h0.h.shape != (grid.nx, grid.ny):
        raise ValueError("initial data shapes do not match the grid")
    if not e0.is_pec_compliant():
        raise ValueError("initial electric field violates the tangential-zero boundary")
    kernel, ws = build_kernel(material, config)
    p0 = VecField.zeros(grid)
    return SimState(
        n=0,
        e=e0.copy().enforce_pec(),
        p=p0,
        h=h0.copy(),
        p_history=(p0,),
        s_norm_sq=(0.0,),
        kernel=kernel,
        weights=ws,
        grid=grid,
        material=material,
        config=config,
    )


def frac_deriv_current(state: SimState, p_new: VecField) -> VecField:
    """Quadrature value of the Caputo derivative of P at t_{n-theta}, where
    n = state.n + 1 and p_new is the candidate P^n.

    SFTR:  tau^-alpha sum_{k=1..n} omega_{n-k} (P^k - P^0)
    FBDF2: tau^-alpha sum_{k=0..n} g_{n-k} P^k
    """
    hist = state.p_history
    n = state.n + 1
    if len(hist) != n:
        raise ValueError(f"history length {len(hist)} does not match step index {n}")
    kern = state.kernel
    acc = VecField.zeros(state.grid)
    if state.config.quadrature is Quadrature.SFTR:
        p0 = hist[0]
        acc.ex += kern[0] * (p_new.ex - p0.ex)
        acc.ey += kern[0] * (p_new.ey - p0.ey)
        for k in range(1, n):
            w = kern[n - k]
            acc.ex += w * (hist[k].ex - p0.ex)
            acc.ey += w * (hist[k].ey - p0.ey)
    else:
        acc.ex += kern[0] * p_new.ex
        acc.ey += kern[0] * p_new.ey
        for k in range(0, n):
            w = kern[n - k]
            acc.ex += w * hist[k].ex
            acc.ey += w * hist[k].ey
    return state.config.tau ** (-state.material.alpha) * acc


def _history_term(state: SimState) -> VecField:
    """The part of the quadrature not involving P^n.

    Evaluating the quadrature at p_new = 0 isolates it exactly:
    D(p_new) = tau^-alpha w0 p_new + D(0) for both kernels.
    """
    return frac_deriv_current(state, VecField.zeros(state.grid))


def elimination_coefficients(
    material: MaterialParams, theta: float, tau: float, lead_weight: float
) -> tuple[float, float, float]:
    """(kappa, denom, a) of the dof-local elimination P^n = a E^n + g.

    kappa = tau0^alpha tau^-alpha w0 is the implicit coefficient of the
    quadrature's leading weight; denom = kappa + 1 - theta; a = c_p (1-theta)/denom.
    """
    kappa = material.tau0**material.alpha * tau ** (-material.alpha) * lead_weight
    denom = kappa + (1.0 - theta)
    return kappa, denom, material.c_p * (1.0 - theta) / denom


class SolverError(RuntimeError):
    """Conjugate gradient failed to reach the requested tolerance."""

    def __init__(self, message: str, residual: float, iterations: int) -> None:
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def solve_spd(
    apply_op: Callable[[VecField], VecField],
    rhs: VecField,
    grid: GridSpec,
    tol: float,
    maxit: int,
    x0: VecField | None = None,
) -> tuple[VecField, int]:
    """Conjugate gradients for an SPD operator on the tangential-zero subspace.

    Returns (solution, iterations); raises :class:`SolverError` if the
    relative residual does not fall below tol within maxit iterations.
    """
    rhs_norm = norm_e(rhs, grid)
    if rhs_norm == 0.0:
        return VecField.zeros(grid, pec=True), 0
    x = VecField.zeros(grid, pec=True) if x0 is None else x0.copy()
    r = rhs - apply_op(x)
    d = r.copy()
    rho = inner_e(r, r, grid)
    threshold = (tol * rhs_norm) ** 2
    if rho <= threshold:
        return x, 0
    for it in range(1, maxit + 1):
        ad = apply_op(d)
        alpha = rho / inner_e(d, ad, grid)
        x = x + alpha * d
        r = r - alpha * ad
        rho_new = inner_e(r, r, grid)
        if rho_new <= threshold:
            return x, it
        d = r + (rho_new / rho) * d
        rho = rho_new
    raise SolverError(
        f"conjugate gradients: relative residual {np.sqrt(rho) / rhs_norm:.3e} "
        f"after {maxit} iterations (tol {tol:.1e})",
        residual=float(np.sqrt(rho) / rhs_norm),
        iterations=maxit,
    )


def _zero_sources(grid: GridSpec) -> tuple[VecField, ScalarField, VecField]:
    return VecField.zeros(grid), ScalarField.zeros(grid), VecField.zeros(grid)


def step(state: SimState, sources: SourceSet | None = None) -> SimState:
    """Advance one step; returns the new state (the input is left untouched)."""
    cfg, mat, grid = state.config, state.material, state.grid
    n = state.n + 1
    if n > cfg.n_steps:
        raise ValueError(f"run is configured for {cfg.n_steps} steps, cannot advance to {n}")
    tau, theta = cfg.tau, cfg.theta
    t_mid = (n - theta) * tau

    if sources is None:
        f1, f2, f3 = _zero_sources(grid)
    else:
        f1 = sample_vec(sources.f1, grid, t_mid)
        f2 = sample_scalar(sources.f2, grid, t_mid)
        f3 = sample_vec(sources.f3, grid, t_mid)

    hist_d = _history_term(state)
    kappa, denom, a_coef = elimination_coefficients(mat, theta, tau, state.kernel[0])

    # Elimination of P^n from the dof-local polarization equation.
    g = (1.0 / denom) * (
        (mat.c_p * theta) * state.e - theta * state.p - (mat.tau0**mat.alpha) * hist_d + f3
    )

    one_m = 1.0 - theta
    curl_e_prev = curl_e(state.e, grid)
    rhs = (
        (mat.c_e / tau) * state.e
        + (1.0 / tau) * (state.p - g)
        + curl_h(state.h + (one_m * tau / mat.c_m) * f2, grid)
        - (one_m * theta * tau / mat.c_m) * curl_h(curl_e_prev, grid)
        + f1
    )
    rhs.enforce_pec()

    diag = (mat.c_e + a_coef) / tau
    curl_scale = one_m * one_m * tau / mat.c_m

    def apply_op(v: VecField) -> VecField:
        return diag * v + curl_scale * curl_h(curl_e(v, grid), grid)

    e_new, _ = solve_spd(apply_op, rhs, grid, cfg.cg_tol, state.cg_maxit, x0=state.e)
    p_new = a_coef * e_new + g
    h_new = (
        state.h
        - (tau / mat.c_m) * curl_e(combine_theta(e_new, state.e, theta), grid)
        + (tau / mat.c_m) * f2
    )
    d_new = frac_deriv_current(state, p_new)
    s_new = inner_e(d_new, d_new, grid)

    return replace(
        state,
        n=n,
        e=e_new,
        p=p_new,
        h=h_new,
        p_history=state.p_history + (p_new,),
        s_norm_sq=state.s_norm_sq + (s_new,),
    )


def scheme_residual(
    state_prev: SimState, state_new: SimState, sources: SourceSet | None = None
) -> tuple[float, float, float]:
    """Discrete L2 defects of the three scheme equations between two states.

    The electric-field defect is measured on the tangential-zero subspace,
    where the discrete equation lives (the boundary dofs carry the boundary
    condition instead).
    """
    if state_new.n != state_prev.n + 1:
        raise ValueError("states are not consecutive")
    cfg, mat, grid = state_new.config, state_new.material, state_new.grid
    tau, theta = cfg.tau, cfg.theta
    t_mid = (state_new.n - theta) * tau
    if sources is None:
        f1, f2, f3 = _zero_sources(grid)
    else:
        f1 = sample_vec(sources.f1, grid, t_mid)
        f2 = sample_scalar(sources.f2, grid, t_mid)
        f3 = sample_vec(sources.f3, grid, t_mid)

    e_bar = combine_theta(state_new.e, state_prev.e, theta)
    h_bar = combine_theta(state_new.h, state_prev.h, theta)
    p_bar = combine_theta(state_new.p, state_prev.p, theta)
    d_alpha = frac_deriv_current(state_prev, state_new.p)

    r1 = (
        (mat.c_e / tau) * (state_new.e - state_prev.e)
        + (1.0 / tau) * (state_new.p - state_prev.p)
        - curl_h(h_bar, grid)
        - f1
    )
    r1.enforce_pec()
    r2 = (mat.c_m / tau) * (state_new.h - state_prev.h) + curl_e(e_bar, grid) - f2
    r3 = (mat.tau0**mat.alpha) * d_alpha + p_bar - mat.c_p * e_bar - f3
    return norm_e(r1, grid), norm_h(r2, grid), norm_e(r3, grid)


def run(
    state: SimState,
    sources: SourceSet | None = None,
    observer: Callable[[SimState, SimState], None] | None = None,
) -> SimState:
    """Advance to the configured final step, optionally observing each pair."""
    while state.n < state.config.n_steps:
        new = step(state, sources)
        if observer is not None:
            observer(state, new)
        state = new
    return state


@dataclass
class UniformState:
    """Scalar (E, H, P) state of the spatially uniform reduction."""

    n: int
    e: float
    h: float
    p: float
    p_history: tuple[float, ...]


class UniformStepper:
    """Zero-dimensional reduction: the same per-step algebra with curls dropped.

    Shares the kernel construction and elimination coefficients with the field
    integrator, so it exercises the identical update formulas on scalars.
    """

    def __init__(self, material: MaterialParams, config: SchemeConfig):
        self.material = material
        self.config = config
        self.kernel, self.weights = build_kernel(material, config)

    def init(self, e0: float, h0: float) -> UniformState:
        return UniformState(0, e0, h0, 0.0, (0.0,))

    def frac_deriv(self, state: UniformState, p_new: float) -> float:
        cfg, mat = self.config, self.material
        n = state.n + 1
        kern = self.kernel
        if cfg.quadrature is Quadrature.SFTR:
            p0 = state.p_history[0]
            acc = kern[0] * (p_new - p0)
            for k in range(1, n):
                acc += kern[n - k] * (state.p_history[k] - p0)
        else:
            acc = kern[0] * p_new
            for k in range(0, n):
                acc += kern[n - k] * state.p_history[k]
        return cfg.tau ** (-mat.alpha) * acc

    def step(self, state: UniformState, f1: float = 0.0, f2: float = 0.0, f3: float = 0.0) -> UniformState:
        cfg, mat = self.config, self.material
        tau, theta = cfg.tau, cfg.theta
        hist_d = self.frac_deriv(state, 0.0)
        kappa, denom, a_coef = elimination_coefficients(mat, theta, tau, self.kernel[0])
        g = (mat.c_p * theta * state.e - theta * state.p - mat.tau0**mat.alpha * hist_d + f3) / denom
        e_new = ((mat.c_e / tau) * state.e + (state.p - g) / tau + f1) / ((mat.c_e + a_coef) / tau)
        p_new = a_coef * e_new + g
        h_new = state.h + (tau / mat.c_m) * f2
        return UniformState(state.n + 1, e_new, h_new, p_new, state.p_history + (p_new,))
