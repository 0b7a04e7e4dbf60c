"""Semigroup evolution by iterated implicit Euler steps.

evolve() advances u' + A(u) = 0 on a uniform partition of [0, t_end],
recording L^1, L^2, L^inf norms and mass at every step and keeping at most
64 geometrically spaced state snapshots. exponential_formula_probe()
measures the Cauchy gaps of the n-fold resolvent representation, whose
first-order convergence shows up as gap ratios near 2 under doubling.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .measure import GridFunction, lq_norm, mass
from .operators import DiscreteOperator
from .resolvent import NonConvergenceError, resolvent_power, solve_resolvent

MAX_SNAPSHOTS = 64
EVOLVE_TOL = 1e-12  # per-step residual; keeps cumulative mass drift far below budget


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, t_end] into n_steps implicit Euler steps."""

    t_end: float
    n_steps: int
    snapshot_times: Optional[tuple] = None

    def __post_init__(self):
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must be positive and finite, got {self.t_end}")
        if int(self.n_steps) < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        object.__setattr__(self, "n_steps", int(self.n_steps))
        if self.snapshot_times is not None:
            object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))

    @property
    def dt(self):
        return self.t_end / self.n_steps

    def times(self):
        return np.linspace(0.0, self.t_end, self.n_steps + 1)

    def snapshot_indices(self, max_snapshots=MAX_SNAPSHOTS):
        """Step indices to snapshot: geometric in time, deduplicated,
        always including 0 and the final step."""
        if self.snapshot_times is not None:
            wanted = np.asarray(self.snapshot_times, dtype=float)
        else:
            wanted = np.geomspace(self.dt, self.t_end, max_snapshots - 1)
        idx = np.rint(wanted / self.dt).astype(int)
        idx = np.clip(idx, 0, self.n_steps)
        idx = np.unique(np.concatenate(([0], idx, [self.n_steps])))
        if idx.size > max_snapshots:
            keep = np.linspace(0, idx.size - 1, max_snapshots).round().astype(int)
            idx = idx[np.unique(keep)]
        return idx


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    norm_l1: np.ndarray
    norm_l2: np.ndarray
    norm_linf: np.ndarray
    mass: np.ndarray
    snapshot_times: tuple
    snapshots: tuple

    @property
    def final(self):
        return self.snapshots[-1]

    def norm_series(self, q):
        q = float(q)
        if q == 1.0:
            return self.norm_l1
        if q == 2.0:
            return self.norm_l2
        if math.isinf(q):
            return self.norm_linf
        raise ValueError(f"recorded norms are q in {{1, 2, inf}}, got {q}")


def evolve(spec, u0, time_grid, tol=EVOLVE_TOL, max_iter=200, op=None):
    """Advance the implicit Euler scheme across the whole time grid.

    Solver failures are re-raised with the failing step and time attached.
    """
    if op is None:
        op = DiscreteOperator(spec)
    dt = time_grid.dt
    n_steps = time_grid.n_steps
    times = time_grid.times()
    snap_idx = set(int(i) for i in time_grid.snapshot_indices())

    u = u0
    l1 = np.empty(n_steps + 1)
    l2 = np.empty(n_steps + 1)
    linf = np.empty(n_steps + 1)
    ms = np.empty(n_steps + 1)
    snapshots = []
    snapshot_times = []

    def record(k, v):
        l1[k] = lq_norm(v, 1)
        l2[k] = lq_norm(v, 2)
        linf[k] = lq_norm(v, float("inf"))
        ms[k] = mass(v)
        if k in snap_idx:
            snapshots.append(v)
            snapshot_times.append(times[k])

    record(0, u)
    for k in range(1, n_steps + 1):
        try:
            u = solve_resolvent(spec, dt, u, tol=tol, max_iter=max_iter, op=op).u
        except NonConvergenceError as exc:
            raise NonConvergenceError(
                f"step {k}/{n_steps} at t = {times[k]:g}: {exc}",
                residual=exc.residual,
                iterations=exc.iterations,
            ) from exc
        record(k, u)

    return Trajectory(
        times=times,
        norm_l1=l1,
        norm_l2=l2,
        norm_linf=linf,
        mass=ms,
        snapshot_times=tuple(snapshot_times),
        snapshots=tuple(snapshots),
    )


def trajectory_to_csv(traj, path):
    """Columns t, norm_l1, norm_l2, norm_linf, mass; one row per step."""
    with open(str(path), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "norm_l1", "norm_l2", "norm_linf", "mass"])
        for k in range(traj.times.size):
            writer.writerow(
                [
                    repr(float(traj.times[k])),
                    repr(float(traj.norm_l1[k])),
                    repr(float(traj.norm_l2[k])),
                    repr(float(traj.norm_linf[k])),
                    repr(float(traj.mass[k])),
                ]
            )


@dataclass(frozen=True)
class ProbeRecord:
    n: int
    u: GridFunction
    gap_l1: Optional[float]


def exponential_formula_probe(spec, u0, t, n_list=(8, 16, 32, 64), tol=1e-12, op=None):
    """Cauchy gaps of u_n = (I + (t/n) A)^{-n} u0 along a doubling ladder.

    Returns one record per n with the L^1 gap ||u_n - u_prev||_1 against the
    previous entry (None for the first). First-order convergence makes
    consecutive gaps shrink by about 2 when n doubles.
    """
    if not (t > 0.0 and math.isfinite(t)):
        raise ValueError(f"t must be positive and finite, got {t}")
    n_list = [int(n) for n in n_list]
    if any(n < 1 for n in n_list):
        raise ValueError(f"all n must be >= 1, got {n_list}")
    if op is None:
        op = DiscreteOperator(spec)
    records = []
    prev = None
    for n in n_list:
        u_n = resolvent_power(spec, t / n, u0, n, tol=tol, op=op).u
        gap = None if prev is None else lq_norm(u_n - prev, 1)
        records.append(ProbeRecord(n=n, u=u_n, gap_l1=gap))
        prev = u_n
    return records
