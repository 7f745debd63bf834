"""Hill operators L(f) = f^(n) + a_2 f^(n-2) + ... + a_n f and the projective
curves [f_1 : ... : f_n] traced by their fundamental systems.

The missing f^(n-1) term makes the Wronskian constant (Abel), which is what
the integrator is audited against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StepTooLarge
from .flags import orthonormalize, subspace_distance
from .reports import CheckReport

MAX_ORDER = 10
MAX_STEPS = 1_000_000
DRIFT_FAIL = 1e-4
HILL_TOL = 1e-6


def _as_callable(c):
    if callable(c):
        return c
    value = float(c)
    return lambda x: np.full_like(np.asarray(x, dtype=float), value)


PRESETS = {
    # name: (order, coefficients a_2..a_n)
    "moment2": (2, [0.0]),
    "moment3": (3, [0.0, 0.0]),
    "moment4": (4, [0.0, 0.0, 0.0]),
    "exp2": (2, [-1.0]),
    "roots3": (3, [-1.0, 0.0]),              # λ^3 - λ: roots -1, 0, 1
    "roots4": (4, [-10.0, 0.0, 9.0]),        # (λ^2 - 1)(λ^2 - 9)
    "periodic3": (3, [lambda x: 0.5 * np.cos(2 * np.pi * x), lambda x: 0.2 * np.sin(2 * np.pi * x)]),
}


@dataclass(frozen=True, eq=False)
class HillSystem:
    """Fundamental system on a uniform grid.

    fundamental[k] is n x n with rows the solutions f_i and columns the
    derivatives 0..n-1 at grid[k].
    """

    order: int
    grid: np.ndarray
    coeffs: np.ndarray
    grid_step: float
    fundamental: np.ndarray

    @property
    def values(self) -> np.ndarray:
        """Curve points (f_1, ..., f_n)(x) as rows, one per node."""
        return self.fundamental[:, :, 0]

    @property
    def wronskian(self) -> np.ndarray:
        return np.linalg.det(self.fundamental)

    @property
    def wronskian_drift(self) -> float:
        w = self.wronskian
        return float(np.abs(w / w[0] - 1.0).max())

    def rows(self, derivatives: bool = False):
        n = self.order
        cols = range(n) if derivatives else range(1)
        out = []
        for x, f in zip(self.grid, self.fundamental):
            out.append([x] + [f[i, j] for j in cols for i in range(n)])
        return out

    def header(self, derivatives: bool = False):
        n = self.order
        cols = range(n) if derivatives else range(1)
        return ["x"] + [f"f{i + 1}" if j == 0 else f"f{i + 1}_d{j}" for j in cols for i in range(n)]


def _companion(order, a_vals):
    """A(x) with y' = A y, y = (f, f', ..., f^(n-1)); a_vals holds a_2..a_n at x."""
    n = order
    m = np.zeros((n, n))
    m[np.arange(n - 1), np.arange(1, n)] = 1.0
    for k in range(2, n + 1):
        m[n - 1, n - k] = -a_vals[k - 2]
    return m


def hill_solve(order: int, coeffs, interval=(0.0, 1.0), step: float = 1e-3, initial=None) -> HillSystem:
    """Classical RK4 for the companion system, started from `initial` derivative
    data (rows = solutions; identity by default)."""
    n = int(order)
    if not 2 <= n <= MAX_ORDER:
        raise ValueError(f"order must lie in 2..{MAX_ORDER}")
    coeffs = list(coeffs)
    if len(coeffs) != n - 1:
        raise ValueError(f"need {n - 1} coefficients a_2..a_{n}")
    if step <= 0:
        raise ValueError("step must be positive")
    x0, x1 = map(float, interval)
    steps = int(round((x1 - x0) / step))
    if steps < 1 or steps > MAX_STEPS:
        raise ValueError(f"{steps} steps outside 1..{MAX_STEPS}")
    h = (x1 - x0) / steps
    fns = [_as_callable(c) for c in coeffs]
    grid = x0 + h * np.arange(steps + 1)
    half = grid[:-1] + h / 2
    sampled = np.array([f(grid) for f in fns]).reshape(n - 1, -1)
    mid = np.array([f(half) for f in fns]).reshape(n - 1, -1)
    y = np.eye(n) if initial is None else np.asarray(initial, dtype=float).T.copy()
    out = np.empty((steps + 1, n, n))
    out[0] = y.T
    for k in range(steps):
        a0 = _companion(n, sampled[:, k])
        am = _companion(n, mid[:, k])
        a1 = _companion(n, sampled[:, k + 1])
        k1 = a0 @ y
        k2 = am @ (y + h / 2 * k1)
        k3 = am @ (y + h / 2 * k2)
        k4 = a1 @ (y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = y.T
    system = HillSystem(n, grid, sampled, h, out)
    drift = system.wronskian_drift
    if drift > DRIFT_FAIL:
        raise StepTooLarge(f"Wronskian drift {drift:.3e} exceeds {DRIFT_FAIL}")
    return system


def preset(name: str, interval=(0.0, 1.0), step: float = 1e-3, initial=None) -> HillSystem:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    order, coeffs = PRESETS[name]
    return hill_solve(order, coeffs, interval, step, initial)


def _tuples(num_nodes, arity, budget, seed, min_gap):
    rng = np.random.default_rng(seed)
    out, excluded = [], 0
    for _ in range(20 * budget):
        if len(out) >= budget:
            break
        pick = np.sort(rng.choice(num_nodes, size=arity, replace=False))
        if np.min(np.diff(pick)) < min_gap:
            excluded += 1
            continue
        out.append(pick)
    return out, excluded


def hyperconvex_determinants(sys: HillSystem, tuples) -> np.ndarray:
    """det of the n value vectors at each tuple of nodes (for projective-change tests)."""
    return np.array([np.linalg.det(sys.values[list(t)]) for t in tuples])


def hill_curve_check(sys: HillSystem, tuple_budget: int = 200, seed: int = 0, tol: float = HILL_TOL,
                     min_separation: float = 0.05, frenet_nodes: int = 5, frenet_limit: float = 1e-2) -> CheckReport:
    """Hyperconvexity of [f_1 : ... : f_n] on seeded node tuples, and agreement of
    derivative flags with the spans of nearby values.

    Tuples need node separation at least max(10 steps, min_separation); the
    margin is the directness margin of the unit value vectors.  Frenet distances
    are taken in the Frenet frame at each node, so the verdict does not depend
    on the choice of fundamental system.
    """
    n = sys.order
    num = len(sys.grid)
    span = sys.grid[-1] - sys.grid[0]
    min_gap = max(10, int(math.ceil(min_separation / sys.grid_step)))
    tuples, excluded = _tuples(num, n, tuple_budget, seed, min_gap)
    worst = 1.0
    for t in tuples:
        vecs = sys.values[t]
        unit = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
        worst = min(worst, float(np.linalg.svd(unit.T, compute_uv=False)[-1]))
    # Frenet: span of values at x, x+h, ..., x+(p-1)h against span of f, ..., f^(p-1) at x
    frenet = {}
    frenet_ok = True
    nodes = np.linspace(0.2 * num, 0.6 * num, frenet_nodes).astype(int)
    radii = [max(1, int(0.1 * span / sys.grid_step / 2 ** k)) for k in range(5)]
    for node in nodes:
        # coordinates in the Frenet frame at the node: the osculating p-span becomes
        # span(e_1..e_p), and a change of fundamental system cancels out
        frame_inv = np.linalg.inv(sys.fundamental[node])
        for p in range(2, n):
            osc = orthonormalize(np.eye(n)[:, :p])
            dists = []
            for r in radii:
                idx = [node + j * r for j in range(p)]
                local = frame_inv @ sys.values[idx].T
                dists.append(subspace_distance(orthonormalize(local), osc))
            ok = all(b <= 1.1 * a for a, b in zip(dists, dists[1:])) and dists[-1] < frenet_limit
            frenet[f"x={sys.grid[node]:.4f},p={p}"] = {"distances": dists, "pass": ok}
            frenet_ok = frenet_ok and ok
    details = {"excluded_tuples": excluded, "min_node_gap": min_gap, "frenet": frenet,
               "wronskian_drift": sys.wronskian_drift, "seed": seed}
    passed = bool(tuples) and worst > tol and frenet_ok
    return CheckReport("hill_hyperconvex", n, len(tuples), worst, tol, passed, details)
