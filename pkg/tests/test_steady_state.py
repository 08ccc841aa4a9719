import numpy as np
import pytest

from stubborn_ghost.params import Strategy, SystemParams, derive_rates
from stubborn_ghost.simulator import simulate
from stubborn_ghost.state_space import FRESH, ChainState, StateSpace, enumerate_reachable
from stubborn_ghost.steady_state import (DisconnectedSpaceError, SolverError, build_generator,
                                         generator_from_rates, solve_stationary)


def _space(name="LFT", alpha=0.3, theta=0.1, delta_max=40):
    p = SystemParams(alpha, theta, Strategy.from_name(name))
    return enumerate_reachable(p.strategy, derive_rates(p), delta_max)


def test_two_state_toy():
    gen = generator_from_rates([[0.0, 1.0], [3.0, 0.0]])
    assert np.diag(gen.Q).tolist() == [-1.0, -3.0]
    pi = solve_stationary(gen).pi
    assert pi == pytest.approx([0.75, 0.25], abs=1e-15)


@pytest.mark.parametrize("name", ["S", "LT", "LFT"])
def test_generator_rows_sum_to_zero(name):
    Q = build_generator(_space(name)).Q
    assert np.abs(Q.sum(axis=1)).max() < 1e-14
    off = Q - np.diag(np.diag(Q))
    assert (off >= 0).all()


def test_selfish_dimension_matches_space():
    space = _space("S", delta_max=40)
    assert build_generator(space).Q.shape == (len(space), len(space))


def test_stationary_normalized_and_balanced():
    pi = solve_stationary(build_generator(_space()))
    assert pi.pi.sum() == pytest.approx(1.0, abs=1e-12)
    assert (pi.pi >= 0).all()
    assert pi.residual < 1e-10
    assert pi[FRESH] > 0.3


def test_rate_scaling_invariance():
    gen = build_generator(_space())
    a = solve_stationary(gen).pi
    b = solve_stationary(generator_from_rates(7.5 * (gen.Q - np.diag(np.diag(gen.Q))))).pi
    assert np.abs(a - b).max() < 1e-13


def test_power_iteration_fallback_agrees():
    gen = build_generator(_space(delta_max=12))
    direct = solve_stationary(gen).pi
    power = solve_stationary(gen, tol=1e-10, dense_limit=0).pi
    assert np.abs(direct - power).max() < 1e-9


def test_non_convergence_raises_with_residual():
    gen = build_generator(_space(delta_max=12))
    with pytest.raises(SolverError) as err:
        solve_stationary(gen, dense_limit=0, max_iter=3)
    assert err.value.residual > 0


def test_disconnected_space_detected():
    rates = derive_rates(SystemParams(0.3, 0.1))
    space = StateSpace((FRESH, ChainState(1, 0, 1)), ((), ()), Strategy(), 10, rates)
    with pytest.raises(DisconnectedSpaceError):
        build_generator(space)


def test_boundary_mass_at_default_truncation():
    space = _space("LFT", alpha=0.45, theta=0.2, delta_max=150)
    pi = solve_stationary(build_generator(space))
    edge = sum(p for s, p in zip(space.states, pi.pi) if s.delta == 150)
    assert edge < 1e-10


def test_truncation_drift_is_tail_sized():
    # drift between two truncations is of the order of the mass above the
    # smaller one, which decays like (alpha/beta)**delta
    a = _space("S", alpha=0.3, theta=0.05, delta_max=40)
    b = _space("S", alpha=0.3, theta=0.05, delta_max=80)
    pa = solve_stationary(build_generator(a))
    pb = solve_stationary(build_generator(b))
    drift = max(abs(pa[s] - pb[s]) for s in a.states)
    assert drift < 1e-10


def test_fresh_mass_matches_simulated_time_fraction():
    p = SystemParams(0.45, 0.2, Strategy.from_name("LFT"))
    space = enumerate_reachable(p.strategy, derive_rates(p), 150)
    pi = solve_stationary(build_generator(space))
    res = simulate(p, 200_000, seed=11)
    assert res.time_fractions()[FRESH] == pytest.approx(pi[FRESH], abs=0.005)


def test_pi_csv(tmp_path):
    pi = solve_stationary(build_generator(_space(delta_max=6)))
    out = tmp_path / "pi.csv"
    pi.to_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "state,probability" and len(lines) == len(pi.pi) + 1
