"""Integration kernels shared by the physics modules.

Two kinds of integrals occur throughout: Gaussian-weighted integrals of
polynomials (normalizations, purities, expectation values), which
Gauss-Hermite rules handle exactly, and integrals of |W| (negativity),
which are not polynomial-times-Gaussian and go through uniform trapezoid
grids with a refinement protocol.  Laguerre polynomials, the radial
profile of every number-state Wigner function, are evaluated here by the
stable three-term recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvergenceError",
    "GAUSS_HERMITE_MAX",
    "PhaseSpaceGrid",
    "QuadratureRule",
    "gauss_hermite",
    "integrate_grid",
    "laguerre",
]

GAUSS_HERMITE_MAX = 128


class ConvergenceError(RuntimeError):
    """Grid refinement hit its cap without meeting the tolerance."""


def laguerre(n: int, x):
    """Evaluate the Laguerre polynomial L_n(x).

    Uses the recurrence (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}, stable
    for the moderate orders needed here.  Vectorized in x; scalar input
    returns a float.
    """
    if n < 0:
        raise ValueError(f"polynomial order must be nonnegative, got {n}")
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("laguerre argument must be finite")
    prev = np.ones_like(arr)
    if n == 0:
        return float(prev) if arr.ndim == 0 else prev
    cur = 1.0 - arr
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - arr) * cur - k * prev) / (k + 1)
    return float(cur) if arr.ndim == 0 else cur


@dataclass(frozen=True)
class QuadratureRule:
    """Abscissae and weights of a one-dimensional quadrature rule."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "gauss-hermite"

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.nodes.ndim != 1 or self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if self.nodes.size > 1 and np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        if self.kind not in ("gauss-hermite", "uniform-trapezoid"):
            raise ValueError(f"unknown rule kind {self.kind!r}")

    def __len__(self) -> int:
        return self.nodes.size


def _hermite_columns(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal Hermite values p_0..p_n at x via the three-term recurrence."""
    values = np.empty((n + 1,) + x.shape)
    values[0] = math.pi**-0.25
    if n >= 1:
        values[1] = math.sqrt(2.0) * x * values[0]
    for k in range(1, n):
        values[k + 1] = (
            x * values[k] - math.sqrt(k / 2.0) * values[k - 1]
        ) / math.sqrt((k + 1) / 2.0)
    return values[n], values[:n]


def gauss_hermite(n: int) -> QuadratureRule:
    """Rule integrating f against the weight exp(-x^2) over the real line.

    Golub-Welsch eigen-decomposition of the symmetric tridiagonal Jacobi
    matrix seeds the nodes; two Newton steps on the orthonormal Hermite
    polynomial polish them, and the weights come from the Christoffel sum
    1/sum_k p_k(x_i)^2.  (The raw eigenvector-based weights lose relative
    accuracy at the extreme nodes, where the first eigenvector component
    drops below machine epsilon.)  Exact for polynomial degree <= 2n-1;
    the node set is symmetrized so odd integrands cancel to the last bit.
    """
    if not 1 <= n <= GAUSS_HERMITE_MAX:
        raise ValueError(f"node count must be in [1, {GAUSS_HERMITE_MAX}], got {n}")
    if n == 1:
        return QuadratureRule(np.zeros(1), np.array([math.sqrt(math.pi)]))
    off = np.sqrt(np.arange(1, n) / 2.0)
    jacobi = np.diag(off, 1) + np.diag(off, -1)
    nodes = np.linalg.eigvalsh(jacobi)
    for _ in range(2):
        top, lower = _hermite_columns(n, nodes)
        derivative = math.sqrt(2.0 * n) * lower[n - 1]
        nodes = nodes - top / derivative
    _, lower = _hermite_columns(n, nodes)
    weights = 1.0 / np.sum(lower**2, axis=0)
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return QuadratureRule(nodes, weights)


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform grid on [-extent, extent]^dim with an odd point count.

    Odd counts keep the phase-space origin on the grid, where the extrema
    of number-state Wigner functions sit; sampling it avoids a systematic
    bias in negativity integrals.
    """

    extent: float
    points: int
    dim: int = 2

    def __post_init__(self):
        if not (self.extent > 0 and math.isfinite(self.extent)):
            raise ValueError("extent must be positive and finite")
        if self.dim not in (2, 4):
            raise ValueError("grid dimension must be 2 or 4")
        if self.points < 3 or self.points % 2 == 0:
            raise ValueError("point count must be odd and >= 3")

    @property
    def step(self) -> float:
        return 2.0 * self.extent / (self.points - 1)

    @property
    def cell_volume(self) -> float:
        return self.step**self.dim

    def axis(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.points)

    def refined(self) -> "PhaseSpaceGrid":
        """Grid with halved spacing; the old nodes are a subset of the new."""
        return PhaseSpaceGrid(self.extent, 2 * self.points - 1, self.dim)


def integrate_grid(samples, grid: PhaseSpaceGrid) -> float:
    """Trapezoid-rule integral of samples laid out on grid.

    samples must have shape (points,)*dim in axis order matching
    meshgrid(..., indexing="ij") over grid.axis().
    """
    arr = np.asarray(samples, dtype=float)
    expected = (grid.points,) * grid.dim
    if arr.shape != expected:
        raise ValueError(f"samples shape {arr.shape} does not match grid {expected}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("samples must be finite")
    out = arr
    for _ in range(grid.dim):
        out = np.trapezoid(out, dx=grid.step, axis=-1)
    return float(out)
