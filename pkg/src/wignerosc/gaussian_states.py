"""Gaussian states as first moments plus covariance matrix.

Conventions: the covariance is sigma_AB = <AB + BA> - 2<A><B>, so the
vacuum has sigma = hbar * identity and a pure single-mode state has
nu = sqrt(det sigma) = hbar.  The closed-form fidelity and coherence
below are written for hbar = 1 units and applied to sigma/hbar, which
keeps them valid for any hbar.  The Wigner evaluator integrates to one
with the (2 pi)^N sqrt(det sigma) normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GaussianState",
    "ThermalBath",
    "UnphysicalStateError",
    "coherence",
    "fidelity",
    "gaussian_wigner",
    "mean_photon",
    "reduce_mode",
    "state_from_record",
    "state_to_record",
    "symplectic_nu",
    "thermal_state",
]

PHYSICALITY_SLACK = 1e-9


class UnphysicalStateError(ValueError):
    """Covariance matrix below the vacuum uncertainty floor."""


@dataclass(frozen=True)
class GaussianState:
    """First-moments vector (q1, p1, ...) and 2N x 2N covariance matrix."""

    mean: np.ndarray
    cov: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.asarray(self.cov, dtype=float)
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if mean.ndim != 1 or mean.size not in (2, 4):
            raise ValueError("mean must have length 2 or 4")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"covariance shape {cov.shape} does not match mean length {mean.size}")
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise ValueError("moments must be finite")
        if np.max(np.abs(cov - cov.T)) > 1e-12 * max(1.0, np.max(np.abs(cov))):
            raise ValueError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance must be positive definite") from None
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        for mode in range(1, mean.size // 2 + 1):
            nu = symplectic_nu(self, mode)
            if nu < self.hbar * (1.0 - PHYSICALITY_SLACK):
                raise UnphysicalStateError(
                    f"mode {mode} has nu = {nu:.6g} < hbar = {self.hbar:.6g}"
                )

    @property
    def modes(self) -> int:
        return self.mean.size // 2


@dataclass(frozen=True)
class ThermalBath:
    """Markovian reservoir: decay rate and mean occupation of the environment.

    A zero decay rate is accepted and means the bath is switched off.
    """

    decay_rate: float
    mean_occupation: float

    def __post_init__(self):
        if not (math.isfinite(self.decay_rate) and self.decay_rate >= 0):
            raise ValueError("decay rate must be nonnegative and finite")
        if not (math.isfinite(self.mean_occupation) and self.mean_occupation >= 0):
            raise ValueError("mean occupation must be nonnegative and finite")


def symplectic_nu(state: GaussianState, mode: int = 1) -> float:
    """Single-mode invariant nu = sqrt(s_qq * s_pp - s_qp^2) of one 2x2 block."""
    cov = np.asarray(state.cov, dtype=float)
    if not 1 <= mode <= cov.shape[0] // 2:
        raise ValueError(f"invalid mode index {mode}")
    i = 2 * (mode - 1)
    block = cov[i : i + 2, i : i + 2]
    det = block[0, 0] * block[1, 1] - block[0, 1] * block[1, 0]
    return math.sqrt(max(det, 0.0))


def gaussian_wigner(state: GaussianState, *coords):
    """Normalized Gaussian Wigner function at (q1, p1[, q2, p2]).

    exp[-(1/2)(R-d)^T sigma^-1 (R-d)] / ((2 pi)^N sqrt(det sigma)); the
    phase-space integral is one.
    """
    if len(coords) != state.mean.size:
        raise ValueError(f"expected {state.mean.size} coordinates, got {len(coords)}")
    arrays = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords])
    stacked = np.stack(arrays, axis=-1)
    diff = stacked - state.mean
    det = np.linalg.det(state.cov)
    if det <= 0:
        raise ValueError("covariance must be nonsingular")
    inv = np.linalg.inv(state.cov)
    quad = np.einsum("...i,ij,...j->...", diff, inv, diff)
    norm = (2.0 * math.pi) ** state.modes * math.sqrt(det)
    out = np.exp(-0.5 * quad) / norm
    return float(out) if out.ndim == 0 else out


def thermal_state(nbar: float, hbar: float = 1.0) -> GaussianState:
    """Single-mode thermal state: zero mean, sigma = (2 nbar + 1) * hbar * I."""
    if nbar < 0:
        raise ValueError("mean photon number must be nonnegative")
    return GaussianState(np.zeros(2), (2.0 * nbar + 1.0) * hbar * np.eye(2), hbar)


def reduce_mode(state: GaussianState, mode: int) -> GaussianState:
    """Marginal over the other mode: keep one 2x2 diagonal block of sigma."""
    if state.modes != 2:
        raise ValueError("mode reduction needs a two-mode state")
    if mode not in (1, 2):
        raise ValueError("mode must be 1 or 2")
    i = 2 * (mode - 1)
    return GaussianState(state.mean[i : i + 2], state.cov[i : i + 2, i : i + 2], state.hbar)


def mean_photon(state: GaussianState) -> float:
    """(sigma_11 + sigma_22 + d1^2 + d2^2 - 2) / 4 in vacuum units."""
    if state.modes != 1:
        raise ValueError("mean photon number is defined for single-mode states")
    h = state.hbar
    s = state.cov / h
    d = state.mean / math.sqrt(h)
    value = 0.25 * (s[0, 0] + s[1, 1] + d[0] ** 2 + d[1] ** 2 - 2.0)
    return 0.0 if -1e-12 <= value < 0.0 else value


def fidelity(state1: GaussianState, state2: GaussianState) -> float:
    """Overlap of two single-mode Gaussian states, in [0, 1].

    F = 2 / (sqrt(Delta + delta) - sqrt(delta)) * exp(-d^T sigma_+^-1 d / 2)
    with Delta = det(sigma_1 + sigma_2), delta = (det sigma_1 - 1) *
    (det sigma_2 - 1), d the difference of the means and sigma_+ the sum
    of the covariances, everything in vacuum units.
    """
    if state1.modes != 1 or state2.modes != 1:
        raise ValueError("fidelity is implemented for single-mode states")
    if abs(state1.hbar - state2.hbar) > 1e-12:
        raise ValueError("states must share hbar")
    h = state1.hbar
    s1, s2 = state1.cov / h, state2.cov / h
    splus = s1 + s2
    big_delta = float(np.linalg.det(splus))
    small_delta = (float(np.linalg.det(s1)) - 1.0) * (float(np.linalg.det(s2)) - 1.0)
    small_delta = max(small_delta, 0.0)  # pure states hit 0 up to roundoff
    dd = (state1.mean - state2.mean) / math.sqrt(h)
    try:
        solved = np.linalg.solve(splus, dd)
    except np.linalg.LinAlgError:
        raise ValueError("sum of covariances must be nonsingular") from None
    value = 2.0 / (math.sqrt(big_delta + small_delta) - math.sqrt(small_delta))
    value *= math.exp(-0.5 * float(dd @ solved))
    return min(max(value, 0.0), 1.0)


def _xlog2x(value: float) -> float:
    return 0.0 if value <= 0.0 else value * math.log2(value)


def _thermal_entropy_bits(nbar: float) -> float:
    return _xlog2x(nbar + 1.0) - _xlog2x(nbar)


def coherence(state: GaussianState) -> float:
    """Distance in bits from the closest thermal state, S(rho_th) - S(rho).

    The thermal reference has the state's mean photon number; the state
    entropy depends only on nu.  Zero exactly for every thermal state and
    nonnegative in general.
    """
    if state.modes != 1:
        raise ValueError("coherence is implemented for single-mode states")
    nu = symplectic_nu(state) / state.hbar
    if nu < 1.0 - 1e-9:
        raise UnphysicalStateError(f"nu = {nu:.6g} < 1")
    nu = max(nu, 1.0)
    state_entropy = _xlog2x((nu + 1.0) / 2.0) - _xlog2x((nu - 1.0) / 2.0)
    value = _thermal_entropy_bits(mean_photon(state)) - state_entropy
    return max(value, 0.0)


def state_to_record(state: GaussianState) -> dict:
    """Flat serializable record {N, hbar, d, sigma}."""
    return {
        "N": state.modes,
        "hbar": state.hbar,
        "d": [float(v) for v in state.mean],
        "sigma": [[float(v) for v in row] for row in state.cov],
    }


def state_from_record(record: dict) -> GaussianState:
    """Rebuild a state from :func:`state_to_record` output."""
    state = GaussianState(
        np.asarray(record["d"], dtype=float),
        np.asarray(record["sigma"], dtype=float),
        float(record.get("hbar", 1.0)),
    )
    if state.modes != int(record["N"]):
        raise ValueError("record mode count does not match moment sizes")
    return state
