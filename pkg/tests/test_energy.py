"""Discrete energy functional, dissipation bound, decay reporting."""

from dataclasses import replace

import numpy as np
import pytest

from colecole.energy import (
    DecayReport,
    EnergyTrace,
    decay_report,
    discrete_energy,
    dissipation_residual,
    energy_tolerance,
    run_decay_experiment,
)
from colecole.manufactured import decay_initial_data
from colecole.mesh import GridSpec, ScalarField, VecField, inner_e, inner_h
from colecole.stepper import (
    MaterialParams,
    Quadrature,
    SchemeConfig,
    init_state,
    step,
)
from colecole.weights import SchemeParams, cumulative_weights, sftr_weights, varpi_weights


def a_sequence(alpha, theta, n):
    return cumulative_weights(varpi_weights(SchemeParams(alpha, theta), n))


def fresh_state(grid, alpha=0.5, theta=0.5, tau=0.05, n_steps=8, quadrature=Quadrature.SFTR,
                e0=None, h0=None):
    material = MaterialParams(alpha=alpha)
    config = SchemeConfig(theta=theta, tau=tau, n_steps=n_steps, quadrature=quadrature)
    e0 = e0 if e0 is not None else VecField.zeros(grid, pec=True)
    h0 = h0 if h0 is not None else ScalarField.zeros(grid)
    return init_state(grid, material, config, e0, h0)


def test_energy_at_step_zero_is_field_energy():
    grid = GridSpec(8, 8)
    rng = np.random.default_rng(0)
    e0 = VecField(rng.standard_normal((8, 9)), rng.standard_normal((9, 8))).enforce_pec()
    h0 = ScalarField(rng.standard_normal((8, 8)))
    state = fresh_state(grid, e0=e0, h0=h0)
    mat = state.material
    expected = mat.c_p * (
        mat.c_e * inner_e(e0, e0, grid) + mat.c_m * inner_h(h0, h0, grid)
    )
    a_seq = a_sequence(0.5, 0.5, 8)
    assert discrete_energy(state, a_seq) == pytest.approx(expected, rel=1e-14)


def test_energy_zero_state():
    state = fresh_state(GridSpec(4, 4))
    assert discrete_energy(state, a_sequence(0.5, 0.5, 8)) == 0.0


def test_energy_parameter_mismatch():
    state = fresh_state(GridSpec(4, 4))
    with pytest.raises(ValueError):
        discrete_energy(state, a_sequence(0.3, 0.5, 8))
    with pytest.raises(ValueError):
        discrete_energy(state, a_sequence(0.5, 0.4, 8))
    with pytest.raises(ValueError):
        discrete_energy(state, sftr_weights(SchemeParams(0.5, 0.5), 8))
    with pytest.raises(ValueError):
        # too short for the step index
        discrete_energy(replace(state, n=9), a_sequence(0.5, 0.5, 8))


def test_energy_synthetic_history_direct_formula():
    # fabricate a short history and s-values; compare against the formula
    # tau0^a tau^a sum a_k s_{n-k} + ||P||^2 + c_p(c_e ||E||^2 + c_m ||H||^2)
    grid = GridSpec(4, 4)
    tau, alpha, theta = 0.25, 0.4, 0.3
    state = fresh_state(grid, alpha=alpha, theta=theta, tau=tau, n_steps=4)
    rng = np.random.default_rng(9)
    p2 = VecField(rng.standard_normal((4, 5)), rng.standard_normal((5, 4)))
    s_vals = (0.0, 0.7, 1.3)
    state = replace(
        state,
        n=2,
        p=p2,
        p_history=state.p_history + (VecField.zeros(grid), p2),
        s_norm_sq=s_vals,
    )
    a_seq = a_sequence(alpha, theta, 4)
    direct = sum(a_seq.values[k] * s_vals[2 - k] for k in range(3))
    direct *= state.material.tau0**alpha * tau**alpha
    direct += inner_e(p2, p2, grid)
    assert discrete_energy(state, a_seq) == pytest.approx(direct, rel=1e-14)


def test_memory_term_matches_brute_force_during_run():
    grid = GridSpec(10, 10)
    e0, h0 = decay_initial_data(grid)
    state = fresh_state(grid, alpha=0.7, theta=0.4, tau=0.1, n_steps=6, e0=e0, h0=h0)
    a_seq = a_sequence(0.7, 0.4, 6)
    mat = state.material
    while state.n < 6:
        state = step(state)
        total = discrete_energy(state, a_seq)
        brute = 0.0
        for k in range(state.n + 1):
            brute += a_seq.values[k] * state.s_norm_sq[state.n - k]
        brute *= mat.tau0**0.7 * 0.1**0.7
        brute += inner_e(state.p, state.p, grid) + mat.c_p * (
            mat.c_e * inner_e(state.e, state.e, grid)
            + mat.c_m * inner_h(state.h, state.h, grid)
        )
        assert total == pytest.approx(brute, rel=1e-12)
        assert total >= 0.0


def test_dissipation_zero_dynamics():
    state = fresh_state(GridSpec(4, 4))
    new = step(state)
    a_seq = a_sequence(0.5, 0.5, 8)
    varpi0 = varpi_weights(SchemeParams(0.5, 0.5), 0).values[0]
    assert dissipation_residual(state, new, a_seq, varpi0) == 0.0


@pytest.mark.parametrize("alpha,theta", [(0.5, 0.25), (0.5, 0.5), (0.2, 0.3)])
def test_dissipation_nonpositive_for_sftr_step(alpha, theta):
    grid = GridSpec(16, 16)
    e0, h0 = decay_initial_data(grid)
    state = fresh_state(grid, alpha=alpha, theta=theta, tau=0.02, n_steps=3, e0=e0, h0=h0)
    a_seq = a_sequence(alpha, theta, 3)
    varpi0 = varpi_weights(SchemeParams(alpha, theta), 0).values[0]
    tol = energy_tolerance(discrete_energy(state, a_seq))
    for _ in range(3):
        new = step(state)
        assert dissipation_residual(state, new, a_seq, varpi0) <= tol
        state = new


def test_dissipation_recorded_for_fbdf2():
    grid = GridSpec(12, 12)
    e0, h0 = decay_initial_data(grid)
    state = fresh_state(
        grid, alpha=0.8, theta=0.5, tau=0.05, n_steps=2, quadrature=Quadrature.FBDF2,
        e0=e0, h0=h0,
    )
    a_seq = a_sequence(0.8, 0.5, 2)
    varpi0 = varpi_weights(SchemeParams(0.8, 0.5), 0).values[0]
    new = step(state)
    r = dissipation_residual(state, new, a_seq, varpi0)
    assert np.isfinite(r)  # report-only: no sign contract


def test_trace_and_decay_report():
    trace = EnergyTrace()
    for n, e in enumerate([1.0, 0.9, 0.8]):
        trace.append(n, 0.1 * n, e, 0.0)
    rep = decay_report(trace)
    assert rep == DecayReport(0, 0.0, None, rep.tolerance)

    trace = EnergyTrace()
    for n, e in enumerate([1.0, 1.1, 0.9]):
        trace.append(n, 0.1 * n, e, 0.0)
    rep = decay_report(trace)
    assert rep.violation_count == 1
    assert rep.max_violation == pytest.approx(0.1, rel=1e-12)
    assert rep.first_violation_step == 1
    with pytest.raises(ValueError):
        decay_report(EnergyTrace())
    with pytest.raises(ValueError):
        trace.append(3, 0.3, -1.0, 0.0)


def test_run_decay_experiment_sftr_monotone():
    _, trace, rep = run_decay_experiment(0.5, 0.4, GridSpec(16, 16), 0.02, 25)
    assert rep.violation_count == 0
    assert all(r <= rep.tolerance for r in trace.dissipations)
    assert len(trace) == 26


def test_smaller_alpha_decays_faster_initially():
    # drop over the first five steps shrinks monotonically with alpha
    grid = GridSpec(20, 20)
    drops = []
    for alpha in (0.1, 0.5, 0.9):
        _, trace, _ = run_decay_experiment(alpha, 0.5, grid, 0.01, 5)
        drops.append(trace.energies[0] - trace.energies[-1])
    assert drops[0] > drops[1] > drops[2] > 0.0
