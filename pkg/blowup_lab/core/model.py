"""
Problem specification for the blow-up laboratory.
Potential V, profile phi, exponent p and dimension N, their validation, and the closed-form reference quantities.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from blowup_lab.core.mesh import INTERVAL, RADIAL, Grid, build_grid
from blowup_lab.utils.errors import InvalidArgumentError, InvalidProblemError

logger = logging.getLogger(__name__)

CONSTANT = "constant"
GAUSSIAN_BUMP = "gaussian_bump"
COSINE_CAP = "cosine_cap"
TABLE = "table"

DOMAIN_INTERVAL = "interval"
DOMAIN_BALL = "ball"

THEOREM3_INAPPLICABLE = "theorem3_inapplicable"

_REQUIRED_PARAMS: Dict[str, Tuple[str, ...]] = {
    CONSTANT: ("value",),
    GAUSSIAN_BUMP: ("base", "amp", "center", "width"),
    COSINE_CAP: (),
    TABLE: ("nodes", "values"),
}
_OPTIONAL_PARAMS: Dict[str, Dict[str, Any]] = {
    COSINE_CAP: {"amp": 1.0},
}


@dataclass(frozen=True)
class FunctionSpec:
    """
    A closed-form scalar function of one coordinate.

    On radial domains the coordinate is the radius. ``cosine_cap`` is
    amp * cos(pi x / (2 L)) and needs the domain extent L at evaluation.
    """

    kind: str
    params: Tuple[Tuple[str, Any], ...] = ()

    @classmethod
    def from_params(cls, params: Dict[str, Any]) -> "FunctionSpec":
        """
        Build a function spec from a flat parameter mapping.

        Args:
            params: ``{"kind": ..., <param>: value}``.

        Returns:
            The function spec.

        Raises:
            InvalidProblemError: For unknown kinds, missing or unexpected parameters.
        """
        params = dict(params)
        kind = params.pop("kind", None)
        if kind not in _REQUIRED_PARAMS:
            raise InvalidProblemError(f"unknown function kind '{kind}'")

        allowed = set(_REQUIRED_PARAMS[kind]) | set(_OPTIONAL_PARAMS.get(kind, {}))
        missing = [name for name in _REQUIRED_PARAMS[kind] if name not in params]
        unexpected = [name for name in params if name not in allowed]
        if missing:
            raise InvalidProblemError(f"{kind} is missing parameters {missing}")
        if unexpected:
            raise InvalidProblemError(f"{kind} does not take parameters {unexpected}")

        merged = {**_OPTIONAL_PARAMS.get(kind, {}), **params}
        if kind == TABLE:
            nodes = tuple(float(v) for v in merged["nodes"])
            values = tuple(float(v) for v in merged["values"])
            if len(nodes) != len(values) or len(nodes) < 2:
                raise InvalidProblemError("table needs matching nodes/values with at least 2 entries")
            if any(b <= a for a, b in zip(nodes, nodes[1:])):
                raise InvalidProblemError("table nodes must be strictly increasing")
            merged["nodes"], merged["values"] = nodes, values
        if kind == GAUSSIAN_BUMP and merged["width"] <= 0:
            raise InvalidProblemError("gaussian_bump width must be positive")
        return cls(kind, tuple(sorted(merged.items())))

    @classmethod
    def constant(cls, value: float) -> "FunctionSpec":
        return cls.from_params({"kind": CONSTANT, "value": value})

    @classmethod
    def gaussian_bump(cls, base: float, amp: float, center: float, width: float) -> "FunctionSpec":
        return cls.from_params(
            {"kind": GAUSSIAN_BUMP, "base": base, "amp": amp, "center": center, "width": width}
        )

    @classmethod
    def cosine_cap(cls, amp: float = 1.0) -> "FunctionSpec":
        return cls.from_params({"kind": COSINE_CAP, "amp": amp})

    @classmethod
    def table(cls, nodes, values) -> "FunctionSpec":
        return cls.from_params({"kind": TABLE, "nodes": list(nodes), "values": list(values)})

    def to_params(self) -> Dict[str, Any]:
        params: Dict[str, Any] = {"kind": self.kind}
        for key, value in self.params:
            params[key] = list(value) if isinstance(value, tuple) else value
        return params

    @property
    def is_constant(self) -> bool:
        return self.kind == CONSTANT

    def _get(self, name: str) -> Any:
        return dict(self.params)[name]

    def evaluate(self, x, extent: float) -> np.ndarray:
        """
        Evaluate the function.

        Args:
            x: Coordinates (array or scalar).
            extent: Domain extent, used by ``cosine_cap``.

        Returns:
            Values with the shape of x.
        """
        x = np.asarray(x, dtype=float)
        if self.kind == CONSTANT:
            return np.full_like(x, self._get("value"))
        if self.kind == GAUSSIAN_BUMP:
            base, amp, center, width = (self._get(k) for k in ("base", "amp", "center", "width"))
            return base + amp * np.exp(-((x - center) ** 2) / width)
        if self.kind == COSINE_CAP:
            values = self._get("amp") * np.cos(0.5 * math.pi * x / extent)
            return np.where(np.abs(x) >= extent, 0.0, values)
        nodes, values = self._get("nodes"), self._get("values")
        return np.interp(x, nodes, values)

    def derivative(self, x, extent: float) -> np.ndarray:
        """Analytic first derivative (piecewise slope for tables)."""
        x = np.asarray(x, dtype=float)
        if self.kind == CONSTANT:
            return np.zeros_like(x)
        if self.kind == GAUSSIAN_BUMP:
            amp, center, width = (self._get(k) for k in ("amp", "center", "width"))
            return amp * np.exp(-((x - center) ** 2) / width) * (-2.0 * (x - center) / width)
        if self.kind == COSINE_CAP:
            scale = 0.5 * math.pi / extent
            return -self._get("amp") * scale * np.sin(scale * x)
        nodes = np.asarray(self._get("nodes"))
        values = np.asarray(self._get("values"))
        slopes = np.diff(values) / np.diff(nodes)
        index = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, len(slopes) - 1)
        return slopes[index]

    def covers(self, lo: float, hi: float) -> bool:
        """Whether a table spans [lo, hi]; analytic kinds always do."""
        if self.kind != TABLE:
            return True
        nodes = self._get("nodes")
        return nodes[0] <= lo and nodes[-1] >= hi


@dataclass(frozen=True)
class ProblemSpec:
    """
    The continuous problem u_t = Lap u + V(x) u^p on an interval or a ball,
    with zero Dirichlet data and initial data M * phi.
    """

    N: int
    p: float
    domain_kind: str
    extent: float
    potential: FunctionSpec
    profile: FunctionSpec
    potential_floor: float = 1e-6

    def __post_init__(self):
        if self.domain_kind not in (DOMAIN_INTERVAL, DOMAIN_BALL):
            raise InvalidProblemError(f"unknown domain kind '{self.domain_kind}'")
        if self.domain_kind == DOMAIN_INTERVAL and self.N != 1:
            raise InvalidProblemError("interval domains are one-dimensional (N=1)")
        if not self.extent > 0:
            raise InvalidProblemError("domain extent must be positive")
        if not self.potential_floor > 0:
            raise InvalidProblemError("potential floor must be positive")

    @property
    def beta(self) -> float:
        """Self-similar exponent 1/(p-1)."""
        return 1.0 / (self.p - 1.0)

    @property
    def grid_kind(self) -> str:
        return RADIAL if self.domain_kind == DOMAIN_BALL else INTERVAL

    @property
    def subcritical(self) -> bool:
        """1 < p < (N+2)/(N-2) for N >= 3; every p > 1 otherwise."""
        if self.N <= 2:
            return self.p > 1
        return 1 < self.p < (self.N + 2) / (self.N - 2)

    def V(self, x) -> np.ndarray:
        return self.potential.evaluate(x, self.extent)

    def dV(self, x) -> np.ndarray:
        return self.potential.derivative(x, self.extent)

    def phi(self, x) -> np.ndarray:
        return self.profile.evaluate(x, self.extent)

    def phi_V(self, x) -> np.ndarray:
        """phi^{p-1} V, the quantity whose maximum sets A."""
        return np.maximum(self.phi(x), 0.0) ** (self.p - 1.0) * self.V(x)

    def build_grid(self, m: int) -> Grid:
        return build_grid(self.grid_kind, self.N, self.extent, m)

    def initial_values(self, grid: Grid, M: float) -> np.ndarray:
        """M * phi sampled on the grid with the boundary set exactly to 0."""
        values = M * self.phi(grid.nodes)
        values[grid.boundary_mask] = 0.0
        return values


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    message: str = ""


@dataclass
class ValidationReport:
    """
    Pass/fail record of the problem hypotheses.
    """

    checks: List[HypothesisCheck] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def theorem3_applicable(self) -> bool:
        return THEOREM3_INAPPLICABLE not in self.warnings

    def as_dict(self) -> Dict[str, Any]:
        return {
            "checks": {check.name: check.passed for check in self.checks},
            "warnings": list(self.warnings),
        }


class Maximizer(NamedTuple):
    A: float
    xbar: float


def validate_spec(spec: ProblemSpec, grid: Grid) -> ValidationReport:
    """
    Check the problem hypotheses on a grid.

    Args:
        spec: The problem.
        grid: A grid matching the problem's domain.

    Returns:
        The report; a supercritical exponent only adds the
        ``theorem3_inapplicable`` warning.

    Raises:
        InvalidProblemError: When p <= 1, V dips below its floor or phi is
            not positive inside / zero on the boundary.
    """
    if grid.kind != spec.grid_kind or not math.isclose(grid.extent, spec.extent, rel_tol=1e-12):
        raise InvalidArgumentError("grid does not match the problem domain")

    report = ValidationReport()
    nodes = grid.nodes
    lo = -spec.extent if spec.domain_kind == DOMAIN_INTERVAL else 0.0

    report.checks.append(HypothesisCheck("p_above_one", spec.p > 1, f"p = {spec.p}"))

    covered = spec.potential.covers(lo, spec.extent) and spec.profile.covers(lo, spec.extent)
    report.checks.append(HypothesisCheck("tables_cover_domain", covered))

    v_min = float(np.min(spec.V(nodes)))
    report.checks.append(
        HypothesisCheck(
            "potential_floor",
            v_min >= spec.potential_floor,
            f"min V = {v_min:.6g}, floor c = {spec.potential_floor:.6g}",
        )
    )

    phi = spec.phi(nodes)
    interior = phi[~grid.boundary_mask]
    boundary = phi[grid.boundary_mask]
    scale = max(float(np.max(np.abs(phi))), 1.0)
    report.checks.append(
        HypothesisCheck("profile_positive", bool(np.all(interior > 0)), f"min interior phi = {interior.min():.6g}")
    )
    report.checks.append(
        HypothesisCheck(
            "profile_vanishes_on_boundary",
            bool(np.all(np.abs(boundary) <= 1e-12 * scale)),
            f"max boundary |phi| = {np.abs(boundary).max():.3g}",
        )
    )

    subcritical = spec.subcritical
    report.checks.append(HypothesisCheck("subcritical", True, f"p < (N+2)/(N-2): {subcritical}"))
    if not subcritical:
        report.warnings.append(THEOREM3_INAPPLICABLE)
        logger.warning("p=%s is not subcritical for N=%d; the concentration checks are skipped", spec.p, spec.N)

    failed = [check.name for check in report.checks if not check.passed]
    if failed:
        raise InvalidProblemError(f"hypotheses violated: {', '.join(failed)}", details=report.as_dict())
    return report


def compute_A(spec: ProblemSpec, grid: Grid, refine: int = 8) -> Maximizer:
    """
    A = 1 / max(phi^{p-1} V) by a dense scan.

    Args:
        spec: The problem.
        grid: The solver grid; the scan uses ``refine`` times its cells.
        refine: Refinement factor, at least 8.

    Returns:
        A and the maximizer (smallest coordinate on ties).
    """
    if refine < 8:
        raise InvalidArgumentError("the scan must refine the solver grid at least 8 times")
    fine = build_grid(spec.grid_kind, spec.N, spec.extent, refine * grid.m)
    return _scan_maximizer(spec, fine.nodes)


def dense_maximizer(spec: ProblemSpec, points: int = 100_001) -> Maximizer:
    """A and its maximizer from a uniform scan with the given number of points."""
    lo = -spec.extent if spec.domain_kind == DOMAIN_INTERVAL else 0.0
    return _scan_maximizer(spec, np.linspace(lo, spec.extent, points))


def _scan_maximizer(spec: ProblemSpec, nodes: np.ndarray) -> Maximizer:
    values = spec.phi_V(nodes)
    index = int(np.argmax(values))
    return Maximizer(A=1.0 / float(values[index]), xbar=float(nodes[index]))


def ode_reference_time(spec: ProblemSpec, M: float, A: Optional[float] = None) -> float:
    """
    Diffusionless blow-up time at the maximizer, A M^{1-p} / (p-1).

    Args:
        spec: The problem.
        M: Amplitude of the initial data, M > 0.
        A: Precomputed A; a dense scan is used when None.

    Returns:
        The reference blow-up time.
    """
    if not M > 0:
        raise InvalidArgumentError(f"amplitude must be positive, got {M}")
    if A is None:
        A = dense_maximizer(spec).A
    return A * M ** (1.0 - spec.p) / (spec.p - 1.0)


def limit_constant_k(spec: ProblemSpec, a: float) -> float:
    """The constant self-similar profile ((p-1) V(a))^{-1/(p-1)}."""
    return float(((spec.p - 1.0) * float(spec.V(a))) ** (-spec.beta))


def gaussian_mass(N: int) -> float:
    """Integral of rho over R^N, (4 pi)^{N/2}."""
    return (4.0 * math.pi) ** (N / 2.0)


def frozen_constant_energy(spec: ProblemSpec, a: float, b: float) -> float:
    """
    Energy of the constant profile b with V frozen at a.

    Equals Gamma * (beta b^2 / 2 - V(a) b^{p+1} / (p+1)) with Gamma the
    Gaussian mass; over b > 0 it is maximal at k(a).
    """
    v_a = float(spec.V(a))
    return gaussian_mass(spec.N) * (0.5 * spec.beta * b ** 2 - v_a * abs(b) ** (spec.p + 1) / (spec.p + 1))


def concentration_ratio(spec: ProblemSpec, a: float, A: float) -> float:
    """theta(a) = phi(a) V(a)^beta / max(phi V^beta), in (0, 1] for interior a."""
    return float(spec.phi(a) * spec.V(a) ** spec.beta * A ** spec.beta)
