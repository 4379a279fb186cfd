"""Inertial and first-order Kuramoto systems, their symmetries, and residuals.

The second-order (inertial) system for phases theta_i on the real line is

    m * theta_i'' + theta_i' = nu_i + (kappa/N) * sum_j sin(theta_j - theta_i),

with initial data (theta_i(0), theta_i'(0)) = (theta0_i, omega0_i).  Setting
m = 0 gives the classical first-order model, which is treated as a separate
Cauchy problem (omega0 is then slaved to the phase configuration).

Phases are stored unwrapped on R; reduction mod 2*pi only ever happens
implicitly inside sin/cos.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._kernels import hermite_cell_integrals

__all__ = [
    "SystemParams",
    "PhaseState",
    "GalileanShift",
    "coupling_term",
    "rhs_second_order",
    "rhs_first_order",
    "duhamel_residual",
    "duhamel_residual_grid",
    "apply_galilean",
    "apply_dilation",
    "apply_reflection",
    "apply_permutation",
    "mean_phase_frequency",
]


def _freeze(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SystemParams:
    """Oscillator count, inertia m >= 0, coupling kappa > 0, natural frequencies."""

    n: int
    inertia_m: float
    coupling_kappa: float
    nat_freq: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nat_freq", _freeze(self.nat_freq))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.nat_freq.shape != (self.n,):
            raise ValueError("nat_freq must have exactly n entries")
        if not (self.coupling_kappa > 0.0 and math.isfinite(self.coupling_kappa)):
            raise ValueError("coupling_kappa must be positive and finite")
        if not (self.inertia_m >= 0.0 and math.isfinite(self.inertia_m)):
            raise ValueError("inertia_m must be nonnegative and finite")
        if not np.all(np.isfinite(self.nat_freq)):
            raise ValueError("nat_freq entries must be finite")

    @property
    def is_inertial(self) -> bool:
        return self.inertia_m > 0.0


@dataclass(frozen=True)
class PhaseState:
    """Time-stamped unwrapped phases and instantaneous frequencies."""

    t: float
    theta: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", _freeze(self.theta))
        object.__setattr__(self, "omega", _freeze(self.omega))
        if self.theta.shape != self.omega.shape or self.theta.ndim != 1:
            raise ValueError("theta and omega must be 1-d arrays of equal length")
        if self.t < 0.0 or not math.isfinite(self.t):
            raise ValueError("t must be a nonnegative finite time")

    @property
    def n(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class GalileanShift:
    """Constant shifts (nu, omega, theta) applied to the whole ensemble."""

    nu_shift: float
    omega_shift: float
    theta_shift: float

    def __post_init__(self):
        for v in (self.nu_shift, self.omega_shift, self.theta_shift):
            if not math.isfinite(v):
                raise ValueError("shift components must be finite")


def coupling_term(params: SystemParams, theta: np.ndarray) -> np.ndarray:
    """(kappa/N) * sum_j sin(theta_j - theta_i), one entry per oscillator."""
    th = np.asarray(theta, dtype=float)
    diff = th[None, :] - th[:, None]
    return (params.coupling_kappa / params.n) * np.sin(diff).sum(axis=1)


def rhs_second_order(params: SystemParams, state: PhaseState):
    """Right-hand side (dtheta, domega) of the inertial system; requires m > 0."""
    if not params.is_inertial:
        raise ValueError("rhs_second_order requires inertia_m > 0; use rhs_first_order")
    dtheta = np.array(state.omega, dtype=float)
    domega = (params.nat_freq - state.omega + coupling_term(params, state.theta)) / params.inertia_m
    return dtheta, domega


def rhs_first_order(params: SystemParams, theta: Sequence[float]) -> np.ndarray:
    """Right-hand side of the first-order model: nu + coupling."""
    return params.nat_freq + coupling_term(params, theta)


def _duhamel_integral_at_grid(params: SystemParams, traj) -> np.ndarray:
    """int_0^{t_k} exp(-(t_k-s)/m) * c_i(s) ds at every grid point t_k.

    c_i is the coupling term along the trajectory's dense output.  Each grid
    cell is subdivided below the kernel scale and the coupling is replaced by
    its cubic Hermite model there (values and exact time derivatives), so the
    quadrature error stays far below the certification threshold even for
    t >> m.  Accumulation uses the stable one-step recurrence
    I(t_{k+1}) = exp(-h_k/m) I(t_k) + local integral.
    """
    m = params.inertia_m
    kappa = params.coupling_kappa
    n = params.n
    grid = traj.grid
    ncell = len(grid) - 1
    dmax = m / 10.0

    # Sub-node layout over all cells at once (node count per cell, then flat).
    widths = np.diff(grid)
    counts = np.maximum(1, np.ceil(widths / dmax - 1e-12).astype(int))
    node_offsets = np.concatenate(([0], np.cumsum(counts + 1)))
    ts = np.empty(node_offsets[-1])
    for k in range(ncell):
        ts[node_offsets[k] : node_offsets[k + 1]] = np.linspace(
            grid[k], grid[k + 1], counts[k] + 1
        )

    theta, omega = traj.eval_many(ts)
    diff = theta[:, None, :] - theta[:, :, None]  # diff[q, i, l] = theta_l - theta_i
    wdiff = omega[:, None, :] - omega[:, :, None]
    g = (kappa / n) * np.sin(diff).sum(axis=2)  # (Q, n)
    dg = (kappa / n) * (np.cos(diff) * wdiff).sum(axis=2)

    # One flat Hermite-moment pass over every substep of every cell.
    left = np.concatenate(
        [np.arange(node_offsets[k], node_offsets[k + 1] - 1) for k in range(ncell)]
    )
    d = ts[left + 1] - ts[left]
    sub = hermite_cell_integrals(g[left], dg[left], g[left + 1], dg[left + 1], d, m)
    cell_of_sub = np.repeat(np.arange(ncell), counts)
    decay = np.exp(-(grid[cell_of_sub + 1] - ts[left + 1]) / m)
    sub = decay[:, None] * sub
    sub_offsets = np.concatenate(([0], np.cumsum(counts)))
    local = np.add.reduceat(sub, sub_offsets[:-1], axis=0)

    out = np.zeros((ncell + 1, n))
    acc = np.zeros(n)
    fade = np.exp(-widths / m)
    for k in range(ncell):
        acc = fade[k] * acc + local[k]
        out[k + 1] = acc
    return out


def duhamel_residual_grid(params: SystemParams, traj) -> np.ndarray:
    """Residual of the velocity integral representation at every grid point.

    residual_i(t) = omega_i(t) - [omega0_i e^{-t/m} + nu_i (1 - e^{-t/m})
                    + (1/m) int_0^t e^{-(t-s)/m} c_i(s) ds],

    which vanishes identically along exact solutions.  Returns (K, n).
    """
    if not params.is_inertial:
        raise ValueError("Duhamel residual is defined for m > 0 only")
    m = params.inertia_m
    grid = traj.grid
    omega0 = traj.omega_grid[0]
    decay = np.exp(-grid / m)[:, None]
    conv = _duhamel_integral_at_grid(params, traj) / m
    model = omega0[None, :] * decay + params.nat_freq[None, :] * (1.0 - decay) + conv
    return traj.omega_grid - model


def duhamel_residual(params: SystemParams, traj, t: float) -> np.ndarray:
    """Residual of the velocity integral representation at a single time."""
    if not params.is_inertial:
        raise ValueError("Duhamel residual is defined for m > 0 only")
    grid = traj.grid
    if t < grid[0] - 1e-12 or t > grid[-1] + 1e-12:
        raise ValueError("t outside the trajectory span")
    t = min(max(t, grid[0]), grid[-1])
    k = int(np.searchsorted(grid, t, side="right")) - 1
    k = min(max(k, 0), len(grid) - 2)

    sub = _SubTrajectory(traj, k, t)
    res = duhamel_residual_grid(params, sub)
    return res[-1]


class _SubTrajectory:
    """Dense view of a trajectory restricted to [0, t], grid-aligned up to t."""

    def __init__(self, traj, k: int, t: float):
        base = traj.grid[: k + 1]
        if t > base[-1] + 1e-15:
            self.grid = np.concatenate([base, [t]])
        else:
            self.grid = base
        th, om = traj.eval_many(self.grid)
        self.theta_grid = th
        self.omega_grid = om
        self._traj = traj

    def eval_many(self, ts):
        return self._traj.eval_many(ts)


def apply_galilean(params: SystemParams, init_state: PhaseState, shift: GalileanShift):
    """Shift frame by constants (nu, omega, theta); valid for m > 0.

    Returns transformed params/initial data plus a map sending states of the
    original solution to states of the transformed one:

        theta~(t) = theta(t) - theta_s - m*omega_s*(1-e^{-t/m})
                    - nu_s*(t - m + m e^{-t/m}),
        omega~(t) = omega(t) - omega_s e^{-t/m} - nu_s (1 - e^{-t/m}).
    """
    if not params.is_inertial:
        raise ValueError("the Galilean map is defined for m > 0")
    m = params.inertia_m
    new_params = SystemParams(
        params.n, m, params.coupling_kappa, params.nat_freq - shift.nu_shift
    )
    new_init = PhaseState(
        init_state.t,
        init_state.theta - shift.theta_shift,
        init_state.omega - shift.omega_shift,
    )

    def trajectory_map(state: PhaseState) -> PhaseState:
        t = state.t
        e = math.exp(-t / m)
        th = state.theta - shift.theta_shift - m * shift.omega_shift * (1.0 - e) \
            - shift.nu_shift * (t - m + m * e)
        om = state.omega - shift.omega_shift * e - shift.nu_shift * (1.0 - e)
        return PhaseState(t, th, om)

    return new_params, new_init, trajectory_map


def apply_dilation(params: SystemParams, init_state: PhaseState, alpha: float):
    """Speed time up by alpha: kappa' = a*kappa, nu' = a*nu, m' = m/a, omega0' = a*omega0.

    The returned time map sends new time t to old time alpha*t, i.e. the
    transformed solution satisfies theta'(t) = theta(alpha*t).
    """
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise ValueError("alpha must be positive and finite")
    new_params = SystemParams(
        params.n,
        params.inertia_m / alpha,
        alpha * params.coupling_kappa,
        alpha * params.nat_freq,
    )
    new_init = PhaseState(init_state.t, init_state.theta, alpha * init_state.omega)

    def time_map(t_new: float) -> float:
        return alpha * t_new

    return new_params, new_init, time_map


def apply_reflection(params: SystemParams, init_state: PhaseState):
    """Negate frequencies, phases, and velocities."""
    new_params = SystemParams(params.n, params.inertia_m, params.coupling_kappa, -params.nat_freq)
    new_init = PhaseState(init_state.t, -init_state.theta, -init_state.omega)
    return new_params, new_init


def apply_permutation(params: SystemParams, init_state: PhaseState, perm: Sequence[int]):
    """Relabel oscillators by a permutation of 0..n-1."""
    p = np.asarray(perm, dtype=int)
    if p.shape != (params.n,) or sorted(p.tolist()) != list(range(params.n)):
        raise ValueError("perm must be a permutation of range(n)")
    new_params = SystemParams(
        params.n, params.inertia_m, params.coupling_kappa, params.nat_freq[p]
    )
    new_init = PhaseState(init_state.t, init_state.theta[p], init_state.omega[p])
    return new_params, new_init


def mean_phase_frequency(params: SystemParams, init_state: PhaseState, t: float):
    """Closed-form ensemble means (theta_c(t), omega_c(t)) for m > 0.

    theta_c(t) = m*omega_c0*(1-e^{-t/m}) + nu_c*(t - m + m e^{-t/m}) + theta_c0,
    omega_c(t) = omega_c0 e^{-t/m} + nu_c (1 - e^{-t/m}).
    """
    if not params.is_inertial:
        raise ValueError("mean_phase_frequency requires m > 0")
    m = params.inertia_m
    nu_c = float(np.mean(params.nat_freq))
    th_c0 = float(np.mean(init_state.theta))
    om_c0 = float(np.mean(init_state.omega))
    e = math.exp(-t / m)
    theta_c = m * om_c0 * (1.0 - e) + nu_c * (t - m + m * e) + th_c0
    omega_c = om_c0 * e + nu_c * (1.0 - e)
    return theta_c, omega_c
