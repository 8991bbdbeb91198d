"""Dissipative Gaussian dynamics: one mode damped, the other along for the ride.

Mode 1 couples to a Markovian thermal reservoir (rate Gamma, occupation
mbar) while exchanging excitations with mode 2 through the rotational
coupling gamma.  For Gaussian states the whole evolution closes on the
first moments and the covariance matrix,

    d' = A d,        sigma' = A sigma + sigma A^T + D,

with A the Hamiltonian flow matrix plus -Gamma/2 on the mode-1 block and
D = Gamma (2 mbar + 1) on that block.  With gamma = 0 the damped mode
thermalizes in closed form, which doubles as the correctness oracle for
the fixed-step integrator used in the coupled case.

The interesting diagnostics live on the reduced mode-1 state: its
fidelity against the bath's asymptotic thermal state and its coherence.
Intervals where that fidelity decreases flag information flowing back
from the rest of the system, the standard witness of non-Markovian
behavior; with a strictly Markovian setup (gamma = 0) none occur.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock_dynamics import OscillatorParams
from .gaussian_states import (
    GaussianState,
    ThermalBath,
    UnphysicalStateError,
    coherence,
    fidelity,
    reduce_mode,
    symplectic_nu,
    thermal_state,
)

__all__ = [
    "EvolutionRecord",
    "backflow_intervals",
    "drift_and_diffusion",
    "evolve_coupled",
    "rising_intervals",
    "thermalize_closed_form",
]

STEP_TARGET = 0.01  # integrator step cap in units of 1/omega and 1/Gamma
PHYSICALITY_TOL = 1e-6


@dataclass(frozen=True)
class EvolutionRecord:
    """Time series of a coupled dissipative run.

    times are the requested grid; states hold the full two-mode Gaussian
    state at each time; the tracks hold the reduced mode-1 fidelity to the
    bath's asymptotic thermal state and the reduced mode-1 coherence;
    backflow_intervals lists the maximal stretches where that fidelity
    decreases.
    """

    times: np.ndarray
    states: list[GaussianState]
    fidelity_track: np.ndarray
    coherence_track: np.ndarray
    backflow_intervals: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "fidelity_track", np.asarray(self.fidelity_track, dtype=float))
        object.__setattr__(self, "coherence_track", np.asarray(self.coherence_track, dtype=float))
        if times.ndim != 1 or np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        n = times.size
        if len(self.states) != n or self.fidelity_track.size != n or self.coherence_track.size != n:
            raise ValueError("tracks and states must match the time grid length")


def thermalize_closed_form(state: GaussianState, bath: ThermalBath, t: float) -> GaussianState:
    """Exact single-mode thermalization under the bath alone.

    sigma(t) = e^{-Gamma t} sigma(0) + (1 - e^{-Gamma t})(2 mbar + 1) I and
    d(t) = e^{-Gamma t / 2} d(0); as t grows the state tends to the
    asymptotic thermal state of the reservoir.
    """
    if state.modes != 1:
        raise ValueError("closed-form thermalization is single-mode")
    if not (math.isfinite(t) and t >= 0):
        raise ValueError("time must be nonnegative")
    decay = math.exp(-bath.decay_rate * t)
    target = (2.0 * bath.mean_occupation + 1.0) * state.hbar * np.eye(2)
    return GaussianState(
        math.sqrt(decay) * state.mean,
        decay * state.cov + (1.0 - decay) * target,
        state.hbar,
    )


def drift_and_diffusion(params: OscillatorParams, bath: ThermalBath) -> tuple[np.ndarray, np.ndarray]:
    """Drift and diffusion matrices in the ordering (q1, p1, q2, p2).

    The Hamiltonian part follows q1' = 2 alpha^2 p1 + gamma q2,
    p1' = -2 beta^2 q1 + gamma p2 and the mode-2 mirror images with the
    opposite coupling sign; the bath damps and diffuses mode 1 only.
    """
    a2 = 2.0 * params.alpha**2
    b2 = 2.0 * params.beta**2
    g = params.gamma
    drift = np.array(
        [
            [0.0, a2, g, 0.0],
            [-b2, 0.0, 0.0, g],
            [-g, 0.0, 0.0, a2],
            [0.0, -g, -b2, 0.0],
        ]
    )
    rate = bath.decay_rate
    drift[0, 0] -= rate / 2.0
    drift[1, 1] -= rate / 2.0
    diffusion = np.zeros((4, 4))
    diffusion[0, 0] = diffusion[1, 1] = rate * (2.0 * bath.mean_occupation + 1.0) * params.hbar
    return drift, diffusion


def _max_step(params: OscillatorParams, bath: ThermalBath) -> float:
    candidates = [STEP_TARGET / params.omega]
    if bath.decay_rate > 0:
        candidates.append(STEP_TARGET / bath.decay_rate)
    return min(candidates)


def evolve_coupled(
    initial: GaussianState,
    params: OscillatorParams,
    bath: ThermalBath,
    t_grid,
    max_step: float | None = None,
) -> EvolutionRecord:
    """Integrate the coupled dissipative dynamics over the requested grid.

    Classical fourth-order fixed stepping; each grid interval is split
    into substeps no longer than min(0.01/omega, 0.01/Gamma).  At every
    grid time the two-mode state is recorded along with the reduced
    mode-1 fidelity to the reservoir's asymptotic thermal state and the
    reduced mode-1 coherence.  Aborts if either reduced mode dips below
    the vacuum uncertainty floor.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or t_grid[0] != 0.0:
        raise ValueError("t_grid must be one-dimensional and start at 0")
    if t_grid.size > 1 and np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if initial.modes != 2:
        raise ValueError("initial state must have two modes")
    if abs(initial.hbar - params.hbar) > 1e-12:
        raise ValueError("initial state and oscillator parameters disagree on hbar")
    allowed = _max_step(params, bath)
    if max_step is None:
        max_step = allowed
    elif max_step > allowed * (1.0 + 1e-12):
        raise ValueError(f"step {max_step} exceeds the stability target {allowed}")
    elif max_step <= 0:
        raise ValueError("max_step must be positive")

    drift, diffusion = drift_and_diffusion(params, bath)
    asymptote = thermal_state(bath.mean_occupation, initial.hbar)

    def derivative(d, sigma):
        return drift @ d, drift @ sigma + sigma @ drift.T + diffusion

    d = initial.mean.copy()
    sigma = initial.cov.copy()

    def record_point(t):
        state = GaussianState(d, sigma, initial.hbar)
        for mode in (1, 2):
            if symplectic_nu(state, mode) < initial.hbar * (1.0 - PHYSICALITY_TOL):
                raise UnphysicalStateError(f"mode {mode} unphysical at t = {t:.6g}")
        part = reduce_mode(state, 1)
        return state, fidelity(part, asymptote), coherence(part)

    states = []
    fid = np.empty(t_grid.size)
    coh = np.empty(t_grid.size)
    states_0, fid[0], coh[0] = record_point(t_grid[0])
    states.append(states_0)
    for idx in range(1, t_grid.size):
        span = t_grid[idx] - t_grid[idx - 1]
        substeps = max(1, math.ceil(span / max_step - 1e-12))
        h = span / substeps
        for _ in range(substeps):
            k1d, k1s = derivative(d, sigma)
            k2d, k2s = derivative(d + 0.5 * h * k1d, sigma + 0.5 * h * k1s)
            k3d, k3s = derivative(d + 0.5 * h * k2d, sigma + 0.5 * h * k2s)
            k4d, k4s = derivative(d + h * k3d, sigma + h * k3s)
            d = d + (h / 6.0) * (k1d + 2 * k2d + 2 * k3d + k4d)
            sigma = sigma + (h / 6.0) * (k1s + 2 * k2s + 2 * k3s + k4s)
        state, fid[idx], coh[idx] = record_point(t_grid[idx])
        states.append(state)
    return EvolutionRecord(
        times=t_grid,
        states=states,
        fidelity_track=fid,
        coherence_track=coh,
        backflow_intervals=backflow_intervals(t_grid, fid),
    )


def _monotone_violations(times, track, tol: float, rising: bool) -> list[tuple[float, float]]:
    times = np.asarray(times, dtype=float)
    track = np.asarray(track, dtype=float)
    if times.shape != track.shape:
        raise ValueError("times and track must have equal length")
    out: list[list[float]] = []
    open_interval = None
    for i in range(times.size - 1):
        step = track[i + 1] - track[i]
        hit = step > tol if rising else step < -tol
        if hit:
            if open_interval is None:
                open_interval = [times[i], times[i + 1]]
                out.append(open_interval)
            else:
                open_interval[1] = times[i + 1]
        else:
            open_interval = None
    return [(float(a), float(b)) for a, b in out]


def backflow_intervals(times, fidelity_track, tol: float = 1e-9) -> list[tuple[float, float]]:
    """Maximal intervals where the fidelity to the asymptote decreases.

    A sample-to-sample drop larger than tol opens an interval; adjacent
    drops merge.  Nonempty output witnesses information returning to the
    damped mode, i.e. dynamics that no memoryless reduction can produce.
    """
    return _monotone_violations(times, fidelity_track, tol, rising=False)


def rising_intervals(times, track, tol: float = 1e-9) -> list[tuple[float, float]]:
    """Maximal intervals where a track increases; used for coherence revivals."""
    return _monotone_violations(times, track, tol, rising=True)
