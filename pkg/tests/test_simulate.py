import numpy as np
import pytest

from infoflow import (
    LinearSDE,
    SimulationSpec,
    benchmark,
    euler_maruyama,
    regime_switch_panel,
    stationary_covariance,
)
from infoflow.errors import InstabilityError, UsageError, ValidationError


def decay_system(d=1):
    return LinearSDE(f=np.zeros(d), A=-np.eye(d), B=np.zeros((d, d)))


def test_noise_free_decay_is_exact():
    # with B = 0 the scheme is the exact geometric recursion x[m] = (1 - dt)^m;
    # compare bit-for-bit against the independently run recursion and to the
    # closed-form power up to round-off
    dt, n = 0.1, 50
    spec = SimulationSpec(system=decay_system(), n=n, dt=dt, seed=0, burn_in=0, x0=[1.0])
    panel = euler_maruyama(spec)
    recursion = np.empty(n)
    recursion[0] = 1.0
    for m in range(1, n):
        recursion[m] = recursion[m - 1] * (1 - dt)
    assert np.array_equal(panel.values[0], recursion)
    assert np.allclose(panel.values[0], (1 - dt) ** np.arange(n), rtol=1e-13)


def test_seeded_runs_are_bit_identical():
    sys = LinearSDE(f=[0.1, 0.0], A=[[-1.0, 0.5], [0.0, -1.0]], B=np.eye(2))
    spec = SimulationSpec(system=sys, n=500, dt=0.01, seed=123, burn_in=100)
    a = euler_maruyama(spec)
    b = euler_maruyama(spec)
    assert np.array_equal(a.values, b.values)
    assert a.labels == b.labels and a.dt == b.dt


def test_different_seeds_differ():
    sys = LinearSDE(f=[0.0], A=[[-1.0]], B=[[1.0]])
    a = euler_maruyama(SimulationSpec(system=sys, n=100, dt=0.01, seed=1, burn_in=0))
    b = euler_maruyama(SimulationSpec(system=sys, n=100, dt=0.01, seed=2, burn_in=0))
    assert not np.array_equal(a.values, b.values)


def test_ou_long_run_variance_near_analytic():
    sys = LinearSDE(f=[0.0], A=[[-1.0]], B=[[1.0]])
    spec = SimulationSpec(system=sys, n=200_000, dt=0.01, seed=5, burn_in=10_000)
    panel = euler_maruyama(spec)
    target = stationary_covariance(sys).matrix[0, 0]  # 0.5
    assert np.var(panel.values[0]) == pytest.approx(target, rel=0.05)


def test_exploding_trajectory_raises():
    sys = LinearSDE(f=[0.0], A=[[+5.0]], B=[[0.0]])
    spec = SimulationSpec(system=sys, n=5000, dt=1.0, seed=0, burn_in=0, x0=[1.0])
    with pytest.raises(InstabilityError, match="smaller dt"):
        euler_maruyama(spec)


def test_spec_validation():
    sys = decay_system()
    with pytest.raises(ValidationError):
        SimulationSpec(system=sys, n=0, dt=0.1, seed=0)
    with pytest.raises(ValidationError):
        SimulationSpec(system=sys, n=10, dt=-0.1, seed=0)
    with pytest.raises(ValidationError):
        SimulationSpec(system=sys, n=10, dt=0.1, seed=0, burn_in=-1)
    with pytest.raises(ValidationError):
        SimulationSpec(system=sys, n=10, dt=0.1, seed=0, x0=[1.0, 2.0])


def test_one_way_2d_descriptor():
    b = benchmark("one_way_2d", None, n=100, seed=0)
    assert b.panel.labels == ("x", "y")
    assert b.true_edges == ((1, 0),)
    assert b.true_edge_strings() == ["2->1"]
    assert b.system is not None and b.system.A[0, 1] == 0.5


def test_chain_and_confounder_descriptors():
    chain = benchmark("chain_3", None, n=50, seed=0)
    assert chain.true_edge_strings() == ["1->2", "2->3"]
    conf = benchmark("confounder_3", None, n=50, seed=0)
    assert conf.true_edge_strings() == ["3->1", "3->2"]


def test_independent_d_descriptor():
    b = benchmark("independent_d", {"d": 4}, n=50, seed=1)
    assert b.panel.d == 4
    assert b.true_edges == ()
    assert np.array_equal(b.system.A, -np.eye(4))


def test_henon_stays_bounded():
    b = benchmark("henon", None, n=10_000, seed=3)
    assert b.panel.dt == 1.0
    assert np.abs(b.panel.values).max() < 2.0
    assert b.true_edges == ((0, 1), (1, 0))


def test_henon_is_seed_deterministic():
    a = benchmark("henon", None, n=200, seed=9).panel
    b = benchmark("henon", None, n=200, seed=9).panel
    assert np.array_equal(a.values, b.values)


def test_unknown_benchmark_rejected():
    with pytest.raises(UsageError, match="unknown benchmark"):
        benchmark("lorenz", None, n=10, seed=0)


def test_unknown_benchmark_parameter_rejected():
    with pytest.raises(UsageError, match="parameter"):
        benchmark("one_way_2d", {"couplng": 1.0}, n=10, seed=0)


def test_benchmark_coupling_parameter_applied():
    b = benchmark("one_way_2d", {"coupling": 1.5}, n=50, seed=0)
    assert b.system.A[0, 1] == 1.5
    assert b.params["coupling"] == 1.5


def test_long_run_covariance_matches_lyapunov():
    b = benchmark("one_way_2d", None, n=200_000, seed=11)
    sample = np.cov(b.panel.values)
    S = stationary_covariance(b.system).matrix
    assert np.allclose(sample, S, rtol=0.08, atol=0.01)


def test_regime_switch_panel_shape_and_determinism():
    p1, switch = regime_switch_panel(5000, 2500, seed=4)
    p2, _ = regime_switch_panel(5000, 2500, seed=4)
    assert switch == 2500 and p1.n == 5000 and p1.labels == ("x", "y")
    assert np.array_equal(p1.values, p2.values)
    with pytest.raises(UsageError):
        regime_switch_panel(100, 100, seed=0)


def test_regime_switch_coupling_visible_in_second_half():
    panel, switch = regime_switch_panel(20_000, 10_000, coupling=2.0, dt=0.01, seed=0)
    first = np.corrcoef(panel.values[:, :switch])[0, 1]
    second = np.corrcoef(panel.values[:, switch:])[0, 1]
    assert abs(first) < 0.1
    assert second > 0.4
