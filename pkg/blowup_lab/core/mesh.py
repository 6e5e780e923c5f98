"""
Spatial discretization for the blow-up laboratory.
Uniform interval and radial grids, finite-difference operators and rho-weighted quadrature.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.special import gamma

from blowup_lab.utils.errors import (
    InvalidArgumentError,
    NanStateError,
    OutOfDomainError,
    UnsupportedMomentError,
)

INTERVAL = "interval"
RADIAL = "radial"

MIN_CELLS = 8
MAX_MOMENT = 6


def unit_sphere_area(N: int) -> float:
    """Surface area of the unit sphere in R^N (2 for N=1, 2*pi for N=2, 4*pi for N=3)."""
    return 2.0 * math.pi ** (N / 2.0) / gamma(N / 2.0)


def gaussian_weight(y: np.ndarray) -> np.ndarray:
    """The self-similar weight rho(y) = exp(-|y|^2 / 4)."""
    return np.exp(-0.25 * np.asarray(y, dtype=float) ** 2)


@dataclass(frozen=True, eq=False)
class Grid:
    """
    A uniform one-dimensional mesh.

    Interval grids are symmetric about 0 and carry the plain dx measure.
    Radial grids run from r=0 to R and carry the measure w_{N-1} r^{N-1} dr of
    a radially symmetric function on the ball of R^N.
    """

    kind: str
    N: int
    nodes: np.ndarray
    h: float

    @property
    def m(self) -> int:
        """Number of cells."""
        return len(self.nodes) - 1

    @property
    def extent(self) -> float:
        return float(self.nodes[-1])

    @property
    def is_radial(self) -> bool:
        return self.kind == RADIAL

    @property
    def stencil_factor(self) -> int:
        """
        Dimension factor of the discrete Laplacian; its spectral radius is
        bounded by 4 * stencil_factor / h^2.
        """
        return self.N if self.is_radial else 1

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        """True at Dirichlet boundary nodes."""
        mask = np.zeros(len(self.nodes), dtype=bool)
        mask[-1] = True
        if not self.is_radial:
            mask[0] = True
        mask.setflags(write=False)
        return mask

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid weights of the grid measure."""
        w = np.full(len(self.nodes), self.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        if self.is_radial:
            w *= unit_sphere_area(self.N) * self.nodes ** (self.N - 1)
        w.setflags(write=False)
        return w

    @cached_property
    def laplacian_matrix(self) -> sp.csr_matrix:
        """Sparse second-order Laplacian with zero rows at Dirichlet nodes."""
        n = len(self.nodes)
        inv_h2 = 1.0 / self.h ** 2
        main = np.full(n, -2.0 * inv_h2)
        upper = np.full(n - 1, inv_h2)
        lower = np.full(n - 1, inv_h2)

        if self.is_radial:
            r = self.nodes[1:-1]
            drift = (self.N - 1) / (2.0 * r * self.h)
            # Row i couples to i-1 through lower[i-1] and to i+1 through upper[i]
            lower[:-1] = inv_h2 - drift
            upper[1:] = inv_h2 + drift
            # Symmetry limit at r = 0: 2N (f_1 - f_0) / h^2
            main[0] = -2.0 * self.N * inv_h2
            upper[0] = 2.0 * self.N * inv_h2
        else:
            main[0] = 0.0
            upper[0] = 0.0

        main[-1] = 0.0
        lower[-1] = 0.0
        return sp.diags([lower, main, upper], [-1, 0, 1], format="csr")

    def contains(self, x: float) -> bool:
        """Whether x lies inside the grid extent (radial: 0 <= x <= R)."""
        tol = 1e-12 * self.h
        return bool(self.nodes[0] - tol <= x <= self.nodes[-1] + tol)

    def integrate(self, values: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
        """
        Trapezoid integral of nodal values against the grid measure.

        Args:
            values: Nodal values.
            mask: Optional boolean mask; nodes outside it contribute nothing.

        Returns:
            The integral.
        """
        terms = self.weights * np.asarray(values, dtype=float)
        if mask is not None:
            terms = np.where(mask, terms, 0.0)
        # np.sum is pairwise over a fixed length, so the order is fixed per grid
        return float(np.sum(terms))

    def field(self, values: Union[np.ndarray, float], time: float = 0.0) -> "Field":
        """Wrap nodal values (or a constant) as a Field on this grid."""
        if np.isscalar(values):
            values = np.full(len(self.nodes), float(values))
        return Field(self, np.asarray(values, dtype=float), time)

    def zeros(self, time: float = 0.0) -> "Field":
        return Field(self, np.zeros(len(self.nodes)), time)


@dataclass(frozen=True, eq=False)
class Field:
    """
    Nodal values of a spatial function at one simulation time.
    """

    grid: Grid
    values: np.ndarray
    time: float = 0.0
    dirichlet: bool = field(default=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise InvalidArgumentError(
                f"field has {values.size} values, grid has {self.grid.nodes.size} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise NanStateError(f"non-finite values in field at t={self.time}")
        if self.dirichlet and np.any(values[self.grid.boundary_mask] != 0.0):
            raise InvalidArgumentError("Dirichlet field has non-zero boundary values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def u_max(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def argmax(self) -> float:
        """Node coordinate of the maximum of |values| (first one on ties)."""
        return float(self.grid.nodes[int(np.argmax(np.abs(self.values)))])

    def with_values(self, values: np.ndarray, time: Optional[float] = None) -> "Field":
        return Field(self.grid, values, self.time if time is None else time, self.dirichlet)


def build_grid(kind: str, N: int, extent: float, m: int) -> Grid:
    """
    Build a uniform grid.

    Args:
        kind: ``interval`` (nodes on [-extent, extent]) or ``radial`` (nodes on [0, extent]).
        N: Dimension; the radial measure exponent. Interval grids are one-dimensional.
        extent: Half-length of the interval or radius of the ball.
        m: Number of cells, at least 8.

    Returns:
        The grid.

    Raises:
        InvalidArgumentError: For a non-positive extent, m < 8 or an unknown kind.
    """
    if kind not in (INTERVAL, RADIAL):
        raise InvalidArgumentError(f"unknown grid kind '{kind}'")
    if not (math.isfinite(extent) and extent > 0):
        raise InvalidArgumentError(f"extent must be positive, got {extent}")
    if int(m) != m or m < MIN_CELLS:
        raise InvalidArgumentError(f"need at least {MIN_CELLS} cells, got {m}")
    if N < 1:
        raise InvalidArgumentError(f"dimension must be >= 1, got {N}")
    if kind == INTERVAL and N != 1:
        raise InvalidArgumentError("interval grids are one-dimensional (N=1)")

    m = int(m)
    if kind == INTERVAL:
        h = 2.0 * extent / m
        # Offsets from the midpoint keep the nodes exactly symmetric
        nodes = h * (np.arange(m + 1) - 0.5 * m)
        nodes[0] = -extent
    else:
        h = extent / m
        nodes = h * np.arange(m + 1, dtype=float)
    nodes[-1] = extent
    if m % 2 == 0 and kind == INTERVAL:
        nodes[m // 2] = 0.0

    nodes.setflags(write=False)
    return Grid(kind=kind, N=int(N), nodes=nodes, h=h)


def laplacian(f: Field) -> Field:
    """
    Discrete Laplacian of a field.

    Interval grids use the central difference (f_{i-1} - 2 f_i + f_{i+1}) / h^2;
    radial grids add (N-1)/r times the central first difference and use the
    symmetry limit 2N (f_1 - f_0) / h^2 at r = 0. Boundary rows are 0.
    """
    return Field(f.grid, f.grid.laplacian_matrix @ f.values, f.time)


def gradient(f: Field) -> np.ndarray:
    """
    Discrete first derivative: central differences inside, second-order
    one-sided at the ends; 0 at r = 0 on radial grids.
    """
    du = np.gradient(f.values, f.grid.h, edge_order=2)
    if f.grid.is_radial:
        du[0] = 0.0
    return du


def gradient_sq(f: Field) -> Field:
    """Squared gradient |grad f|^2 as a field."""
    return Field(f.grid, gradient(f) ** 2, f.time)


def weighted_moment_integral(f: Field, k: int) -> float:
    """
    Evaluate the integral of f(y) |y|^{2k} rho(y) against the grid measure.

    Args:
        f: Field on a self-similar y-grid.
        k: Moment order, 0 <= k <= 6.

    Returns:
        The trapezoid quadrature of the weighted moment.

    Raises:
        UnsupportedMomentError: For k outside 0..6.
    """
    if k < 0 or k > MAX_MOMENT:
        raise UnsupportedMomentError(f"moment order {k} outside 0..{MAX_MOMENT}")
    y = f.grid.nodes
    return f.grid.integrate(f.values * y ** (2 * k) * gaussian_weight(y))


def interpolate(f: Field, x: float) -> float:
    """
    Piecewise-linear interpolation of a field.

    Args:
        f: The field.
        x: Coordinate (radial grids: radius).

    Returns:
        The interpolated value; exact at nodes.

    Raises:
        OutOfDomainError: When x lies outside the grid.
    """
    if not f.grid.contains(x):
        raise OutOfDomainError(f"x={x} outside [{f.grid.nodes[0]}, {f.grid.nodes[-1]}]")
    return float(np.interp(x, f.grid.nodes, f.values))


def interpolate_many(f: Field, xs: np.ndarray) -> np.ndarray:
    """Vectorized ``interpolate``; every entry of xs must lie in the grid."""
    xs = np.asarray(xs, dtype=float)
    tol = 1e-12 * f.grid.h
    if xs.size and (xs.min() < f.grid.nodes[0] - tol or xs.max() > f.grid.nodes[-1] + tol):
        raise OutOfDomainError("interpolation points outside the grid")
    return np.interp(xs, f.grid.nodes, f.values)
