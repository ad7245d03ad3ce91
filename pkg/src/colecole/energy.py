"""Discrete energy functional and decay diagnostics.

The energy after step n is

    E~^n = tau0^alpha * tau^alpha * sum_{k=0..n} a_k s_{n-k}
           + ||P^n||^2 + c_p (c_e ||E^n||^2 + c_m ||H^n||^2)

with s_j = ||D^alpha P at t_{j-theta}||^2 (s_0 = 0) and a_k the cumulative
companion weights.  For the shifted-trapezoidal scheme with
theta in [alpha/2, 1/2] the sequence E~^n is non-increasing, with the
per-step bound

    (E~^n - E~^{n-1})/tau + tau0^alpha tau^(1-alpha)/varpi_0 ||d_tau P||^2 <= 0.

``dissipation_residual`` evaluates the left side; ``decay_report`` summarizes
monotonicity violations of a recorded trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import GridSpec, inner_e, inner_h
from .stepper import MaterialParams, Quadrature, SchemeConfig, SimState, init_state, step
from .weights import SchemeParams, WeightKind, WeightSequence, cumulative_weights, varpi_weights


@dataclass
class EnergyTrace:
    """Per-step energy record of one run."""

    steps: list[int] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    dissipations: list[float] = field(default_factory=list)
    violations: list[float] = field(default_factory=list)

    def append(self, n: int, t: float, energy: float, dissipation: float) -> None:
        if energy < 0.0:
            raise ValueError(f"discrete energy must be nonnegative, got {energy}")
        violation = 0.0
        if self.energies:
            violation = max(0.0, energy - self.energies[-1])
        self.steps.append(n)
        self.times.append(t)
        self.energies.append(energy)
        self.dissipations.append(dissipation)
        self.violations.append(violation)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class DecayReport:
    violation_count: int
    max_violation: float
    first_violation_step: int | None
    tolerance: float


def energy_tolerance(initial_energy: float) -> float:
    """Violation threshold 1e-10 * (1 + E~^0), scaled so rounding noise on
    large energies is not misread as a decay violation."""
    return 1e-10 * (1.0 + initial_energy)


def discrete_energy(state: SimState, a_seq: WeightSequence) -> float:
    """Energy functional E~^n for the given state.

    a_seq must be the cumulative companion sequence generated from the same
    (alpha, theta) as the run, with at least n+1 entries.
    """
    if a_seq.kind is not WeightKind.CUMULATIVE_A:
        raise ValueError(f"expected CUMULATIVE_A weights, got {a_seq.kind}")
    mat, cfg, grid = state.material, state.config, state.grid
    if a_seq.alpha != mat.alpha or a_seq.theta != cfg.theta:
        raise ValueError(
            f"weight parameters (alpha={a_seq.alpha}, theta={a_seq.theta}) do not "
            f"match the run (alpha={mat.alpha}, theta={cfg.theta})"
        )
    n = state.n
    if len(a_seq) < n + 1:
        raise ValueError(f"a_seq has {len(a_seq)} entries, need {n + 1}")
    s = np.asarray(state.s_norm_sq)
    memory = mat.tau0**mat.alpha * cfg.tau**mat.alpha * float(
        np.dot(a_seq.values[: n + 1], s[::-1])
    )
    return (
        memory
        + inner_e(state.p, state.p, grid)
        + mat.c_p
        * (mat.c_e * inner_e(state.e, state.e, grid) + mat.c_m * inner_h(state.h, state.h, grid))
    )


def dissipation_residual(
    state_prev: SimState,
    state_new: SimState,
    a_seq: WeightSequence,
    varpi0: float,
) -> float:
    """Left side of the per-step dissipation bound between consecutive states.

    Nonpositive (within :func:`energy_tolerance`) for source-free
    shifted-trapezoidal runs with theta in [alpha/2, 1/2]; recorded without a
    sign guarantee for the BDF-2 comparison kernel.
    """
    if state_new.n != state_prev.n + 1:
        raise ValueError("states are not consecutive")
    mat, cfg, grid = state_new.material, state_new.config, state_new.grid
    tau = cfg.tau
    e_prev = discrete_energy(state_prev, a_seq)
    e_new = discrete_energy(state_new, a_seq)
    dp = (1.0 / tau) * (state_new.p - state_prev.p)
    return (e_new - e_prev) / tau + (
        mat.tau0**mat.alpha * tau ** (1.0 - mat.alpha) / varpi0
    ) * inner_e(dp, dp, grid)


def decay_report(trace: EnergyTrace, tolerance: float | None = None) -> DecayReport:
    """Count energy increases beyond the tolerance in a completed trace."""
    if not trace.energies:
        raise ValueError("empty trace")
    tol = energy_tolerance(trace.energies[0]) if tolerance is None else tolerance
    count = 0
    max_violation = 0.0
    first: int | None = None
    for n, v in zip(trace.steps, trace.violations):
        if v > tol:
            count += 1
            if first is None:
                first = n
        max_violation = max(max_violation, v)
    return DecayReport(count, max_violation, first, tol)


def run_decay_experiment(
    alpha: float,
    theta: float,
    grid: GridSpec,
    tau: float,
    n_steps: int,
    quadrature: Quadrature = Quadrature.SFTR,
    cg_tol: float = 1e-12,
) -> tuple[SimState, EnergyTrace, DecayReport]:
    """Source-free decay run with unit material coefficients.

    Initial data is the standard experiment profile (polynomial-times-sine
    electric field, cubic-product magnetic field, zero polarization); the
    returned trace holds the energy and dissipation residual of every step.
    The BDF-2 kernel is monitored with the same functional, built from the
    trapezoidal companion weights at the run's (alpha, theta).
    """
    from .manufactured import decay_initial_data

    material = MaterialParams(alpha=alpha)
    config = SchemeConfig(theta=theta, tau=tau, n_steps=n_steps, quadrature=quadrature, cg_tol=cg_tol)
    e0, h0 = decay_initial_data(grid)
    state = init_state(grid, material, config, e0, h0)
    params = SchemeParams(alpha, theta)
    a_seq = cumulative_weights(varpi_weights(params, n_steps))
    varpi0 = float(varpi_weights(params, 0).values[0])
    trace = EnergyTrace()
    trace.append(0, 0.0, discrete_energy(state, a_seq), 0.0)
    while state.n < n_steps:
        new = step(state)
        r = dissipation_residual(state, new, a_seq, varpi0)
        trace.append(new.n, new.time, discrete_energy(new, a_seq), r)
        state = new
    return state, trace, decay_report(trace)
