"""Validation-data generators: Euler-Maruyama integration and benchmarks.

Simulation uses the same first-order scheme the estimator's forward
differencing assumes, which keeps estimator bias at O(dt) for fixed step.
All noise comes from numpy's PCG64 generator under an explicit seed, so a
given spec reproduces its panel bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analytic import LinearSDE
from .errors import InstabilityError, UsageError, ValidationError
from .panel import TimeSeriesPanel

RNG_ALGORITHM = "pcg64"

# Any |X| beyond this aborts the run as numerically exploded.
EXPLOSION_LIMIT = 1e12

DEFAULT_BURN_IN = 10_000

BENCHMARK_NAMES = ("one_way_2d", "chain_3", "confounder_3", "independent_d", "henon")


@dataclass(frozen=True, eq=False)
class SimulationSpec:
    """One seeded integration run of a linear SDE."""

    system: LinearSDE
    n: int
    dt: float
    seed: int
    burn_in: int = DEFAULT_BURN_IN
    x0: np.ndarray | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n <= 0:
            raise ValidationError(f"n must be positive, got {self.n}")
        if not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.burn_in < 0:
            raise ValidationError(f"burn_in must be nonnegative, got {self.burn_in}")
        x0 = np.zeros(self.system.d) if self.x0 is None else np.asarray(self.x0, float).reshape(-1)
        if x0.shape != (self.system.d,):
            raise ValidationError(f"x0 must have length {self.system.d}")
        object.__setattr__(self, "x0", x0)
        labels = self.labels or tuple(f"x{i + 1}" for i in range(self.system.d))
        if len(labels) != self.system.d:
            raise ValidationError("one label per component required")
        object.__setattr__(self, "labels", tuple(labels))


def euler_maruyama(spec: SimulationSpec) -> TimeSeriesPanel:
    """Integrate X[m+1] = X[m] + (f + A X[m]) dt + B sqrt(dt) xi[m].

    The first ``burn_in`` steps are discarded; the returned panel holds the
    next ``n`` states (the initial state itself when burn_in = 0). Identical
    seeds produce bit-identical panels.
    """
    sys, dt = spec.system, spec.dt
    d = sys.d
    total = spec.burn_in + spec.n
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    # drive[m] = f*dt + B*sqrt(dt)*xi[m]; combined up front so the hot loop
    # does one matvec and one add per step.
    drive = rng.standard_normal((total - 1, sys.m)) @ (sys.B.T * np.sqrt(dt)) + sys.f * dt
    step = np.eye(d) + sys.A * dt
    step_t = step.T.copy()

    traj = np.empty((total, d))
    x = spec.x0.copy()
    traj[0] = x
    # overflow is tolerated here and diagnosed below as an instability
    with np.errstate(over="ignore", invalid="ignore"):
        for m in range(1, total):
            x = x @ step_t + drive[m - 1]
            traj[m] = x

    if not np.isfinite(traj).all() or np.abs(traj).max() > EXPLOSION_LIMIT:
        raise InstabilityError(
            f"trajectory exploded beyond |X| = {EXPLOSION_LIMIT:g};"
            " try a smaller dt or a stabler system"
        )
    return TimeSeriesPanel(labels=spec.labels, values=traj[spec.burn_in :].T, dt=dt)


@dataclass(frozen=True, eq=False)
class BenchmarkResult:
    """Simulated panel plus the planted causal structure that generated it."""

    panel: TimeSeriesPanel
    name: str
    true_edges: tuple[tuple[int, int], ...]  # (source, target), 0-based
    system: LinearSDE | None
    params: dict = field(default_factory=dict)

    def true_edge_strings(self) -> list[str]:
        """Edges as 1-based 'j->i' strings, e.g. '2->1'."""
        return [f"{src + 1}->{tgt + 1}" for src, tgt in self.true_edges]


def _linear_benchmark(name, A, labels, true_edges, n, seed, dt, burn_in, noise, params):
    sys = LinearSDE(f=np.zeros(A.shape[0]), A=A, B=noise * np.eye(A.shape[0]))
    spec = SimulationSpec(system=sys, n=n, dt=dt, seed=seed, burn_in=burn_in, labels=labels)
    return BenchmarkResult(
        panel=euler_maruyama(spec),
        name=name,
        true_edges=true_edges,
        system=sys,
        params=params,
    )


def benchmark(name: str, params: dict | None = None, *, n: int, seed: int) -> BenchmarkResult:
    """Named generator with known causal structure.

    one_way_2d    y drives x (coupling in the first drift row), nothing back
    chain_3       x1 -> x2 -> x3
    confounder_3  x3 drives both x1 and x2; x1 and x2 are not coupled
    independent_d diagonal drift, no cross edges (params: d)
    henon         chaotic map x <- 1 - a x^2 + y, y <- b x, unit time step

    Linear benchmarks accept params coupling, noise, dt, burn_in.
    """
    params = dict(params or {})
    if name not in BENCHMARK_NAMES:
        raise UsageError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARK_NAMES)}")

    if name == "henon":
        a = float(params.pop("a", 1.4))
        b = float(params.pop("b", 0.3))
        burn_in = int(params.pop("burn_in", 100))
        _reject_unknown(params)
        rng = np.random.Generator(np.random.PCG64(seed))
        # Seed only jitters the initial point inside the attractor basin.
        x, y = 0.1 + 1e-3 * rng.standard_normal(2)
        total = burn_in + n
        traj = np.empty((total, 2))
        for m in range(total):
            traj[m] = (x, y)
            x, y = 1.0 - a * x * x + y, b * x
        if not np.isfinite(traj).all() or np.abs(traj).max() > EXPLOSION_LIMIT:
            raise InstabilityError("map trajectory left the attractor basin")
        panel = TimeSeriesPanel(labels=("x", "y"), values=traj[burn_in:].T, dt=1.0)
        return BenchmarkResult(
            panel=panel,
            name=name,
            true_edges=((0, 1), (1, 0)),
            system=None,
            params={"a": a, "b": b, "burn_in": burn_in},
        )

    coupling = float(params.pop("coupling", 0.5))
    noise = float(params.pop("noise", 1.0))
    dt = float(params.pop("dt", 0.01))
    burn_in = int(params.pop("burn_in", DEFAULT_BURN_IN))
    kept = {"coupling": coupling, "noise": noise, "dt": dt, "burn_in": burn_in}

    if name == "one_way_2d":
        _reject_unknown(params)
        A = np.array([[-1.0, coupling], [0.0, -1.0]])
        return _linear_benchmark(name, A, ("x", "y"), ((1, 0),), n, seed, dt, burn_in, noise, kept)
    if name == "chain_3":
        _reject_unknown(params)
        A = np.array([[-1.0, 0.0, 0.0], [coupling, -1.0, 0.0], [0.0, coupling, -1.0]])
        labels = ("x1", "x2", "x3")
        return _linear_benchmark(name, A, labels, ((0, 1), (1, 2)), n, seed, dt, burn_in, noise, kept)
    if name == "confounder_3":
        _reject_unknown(params)
        A = np.array([[-1.0, 0.0, coupling], [0.0, -1.0, coupling], [0.0, 0.0, -1.0]])
        labels = ("x1", "x2", "x3")
        return _linear_benchmark(name, A, labels, ((2, 0), (2, 1)), n, seed, dt, burn_in, noise, kept)
    # independent_d
    d = int(params.pop("d", 4))
    _reject_unknown(params)
    if d < 1:
        raise UsageError("independent_d needs d >= 1")
    kept["d"] = d
    A = -np.eye(d)
    labels = tuple(f"x{i + 1}" for i in range(d))
    return _linear_benchmark(name, A, labels, (), n, seed, dt, burn_in, noise, kept)


def _reject_unknown(params: dict) -> None:
    if params:
        raise UsageError(f"unknown benchmark parameter(s): {', '.join(sorted(params))}")


def regime_switch_panel(
    n: int,
    switch_at: int,
    *,
    coupling: float = 2.0,
    dt: float = 0.01,
    seed: int,
    noise: float = 1.0,
    burn_in: int = DEFAULT_BURN_IN,
) -> tuple[TimeSeriesPanel, int]:
    """Two-regime series: y is decoupled from x until ``switch_at``, then drives it.

    One continuous trajectory and noise stream; only the drift coupling of y
    into x switches on. Returns the panel and the switch sample index,
    the scenario behind windowed onset-detection studies.
    """
    if not 0 < switch_at < n:
        raise UsageError("switch_at must lie strictly inside the run")
    d = 2
    rng = np.random.Generator(np.random.PCG64(seed))
    total = burn_in + n
    drive = rng.standard_normal((total - 1, d)) * (noise * np.sqrt(dt))
    A_off = np.array([[-1.0, 0.0], [0.0, -1.0]])
    A_on = np.array([[-1.0, coupling], [0.0, -1.0]])
    step_off = (np.eye(d) + A_off * dt).T.copy()
    step_on = (np.eye(d) + A_on * dt).T.copy()

    traj = np.empty((total, d))
    x = np.zeros(d)
    traj[0] = x
    switch_global = burn_in + switch_at
    for m in range(1, total):
        step = step_off if m <= switch_global else step_on
        x = x @ step + drive[m - 1]
        traj[m] = x
    if not np.isfinite(traj).all() or np.abs(traj).max() > EXPLOSION_LIMIT:
        raise InstabilityError("regime-switch trajectory exploded; reduce dt or coupling")
    panel = TimeSeriesPanel(labels=("x", "y"), values=traj[burn_in:].T, dt=dt)
    return panel, switch_at
