"""
Self-similar diagnostics for the blow-up laboratory.
Provides the rescaled frames w(y, s), the weighted energies and the residuals of their evolution identities.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid
from typing_extensions import TypeAlias

from blowup_lab.core.mesh import (
    Field,
    Grid,
    build_grid,
    gaussian_weight,
    gradient,
    unit_sphere_area,
    weighted_moment_integral,
)
from blowup_lab.core.model import ProblemSpec, limit_constant_k
from blowup_lab.utils.errors import (
    InvalidArgumentError,
    InvalidTimeError,
    OutOfDomainError,
    UnsupportedMomentError,
)

logger = logging.getLogger(__name__)

MAX_ENERGY_MOMENT = 3
SPACING_TOL = 1e-9
TREND_SLACK = 0.2

VAR = "var"
DISSIPATION = "dissipation"
POHOZAEV = "pohozaev"
_WVAR = re.compile(r"^wvar_(\d+)$")
_WDISSIPATION = re.compile(r"^wdissipation_(\d+)$")

ENERGY_COLUMNS = [
    "s", "E", "E2", "E4", "E6", "tildeE2",
    "res_var", "res_wvar1", "res_dissipation", "res_pohozaev", "dev_core",
]


def build_y_grid(spec: ProblemSpec, y_max: float = 16.0, m_y: int = 1024) -> Grid:
    """The fixed self-similar grid: same kind as the domain, extent y_max."""
    return build_grid(spec.grid_kind, spec.N, y_max, m_y)


@dataclass(frozen=True, eq=False)
class SelfSimilarFrame:
    """
    w(y, s) = (T - t)^beta u(a + y sqrt(T - t), t) on a fixed y-grid.

    ``omega_bounds`` is the image of the domain, (lo, hi) along y; w is 0
    outside it.
    """

    s: float
    a: float
    T: float
    beta: float
    w: Field
    omega_bounds: Tuple[float, float]

    @property
    def y_grid(self) -> Grid:
        return self.w.grid

    @property
    def p(self) -> float:
        return 1.0 + 1.0 / self.beta

    @property
    def t(self) -> float:
        return self.T - math.exp(-self.s)

    @property
    def omega_s_radius(self) -> float:
        lo, hi = self.omega_bounds
        return hi if self.y_grid.is_radial else min(-lo, hi)

    @cached_property
    def mask(self) -> np.ndarray:
        """Nodes of the y-grid inside the rescaled domain."""
        y = self.y_grid.nodes
        lo, hi = self.omega_bounds
        return (y >= lo) & (y <= hi)

    @cached_property
    def grad(self) -> np.ndarray:
        return gradient(self.w)


def to_selfsimilar_frame(snapshot: Field, a: float, T: float, beta: float, y_grid: Grid) -> SelfSimilarFrame:
    """
    Rescale a snapshot around (a, T).

    Args:
        snapshot: Solution field at time t < T.
        a: Centre; must be 0 on radial grids.
        T: Blow-up time.
        beta: 1/(p-1).
        y_grid: Target grid, same kind as the snapshot grid.

    Returns:
        The frame at s = -log(T - t).

    Raises:
        InvalidTimeError: When t >= T.
        OutOfDomainError: When a lies outside the domain.
    """
    grid = snapshot.grid
    if snapshot.time >= T:
        raise InvalidTimeError(f"snapshot time {snapshot.time} is not before T={T}")
    if y_grid.kind != grid.kind:
        raise InvalidArgumentError("y-grid and solution grid differ in kind")
    if not grid.contains(a):
        raise OutOfDomainError(f"a={a} outside the domain")
    if grid.is_radial and a != 0.0:
        raise InvalidArgumentError("radial frames are centred at the origin")

    tau = T - snapshot.time
    scale = math.sqrt(tau)
    lo, hi = float(grid.nodes[0]), float(grid.nodes[-1])
    bounds = ((lo - a) / scale, (hi - a) / scale)

    x = a + y_grid.nodes * scale
    inside = (x >= lo) & (x <= hi)
    values = np.where(inside, tau ** beta * np.interp(x, grid.nodes, snapshot.values), 0.0)
    w = Field(y_grid, values, snapshot.time)
    return SelfSimilarFrame(s=-math.log(tau), a=a, T=T, beta=beta, w=w, omega_bounds=bounds)


@dataclass(frozen=True, eq=False)
class RescaledPotential:
    """
    V(a + y e^{-s/2}) and y . grad_y of it, sampled on a y-grid.

    The s-derivative of the rescaled potential is -1/2 times ``y_dot_grad``.
    """

    values: np.ndarray
    y_dot_grad: np.ndarray

    @classmethod
    def sample(cls, spec: ProblemSpec, frame: SelfSimilarFrame) -> "RescaledPotential":
        y = frame.y_grid.nodes
        shrink = math.exp(-0.5 * frame.s)
        lo = -spec.extent if not frame.y_grid.is_radial else 0.0
        x = np.clip(frame.a + y * shrink, lo, spec.extent)
        return cls(values=spec.V(x), y_dot_grad=y * spec.dV(x) * shrink)

    @classmethod
    def frozen(cls, grid: Grid, value: float) -> "RescaledPotential":
        """Constant potential, as for V frozen at the blow-up point."""
        n = len(grid.nodes)
        return cls(values=np.full(n, float(value)), y_dot_grad=np.zeros(n))


PotentialLike: TypeAlias = Union[RescaledPotential, Field, np.ndarray, float]


def _potential(Vbar: PotentialLike, grid: Grid) -> RescaledPotential:
    if isinstance(Vbar, RescaledPotential):
        return Vbar
    if isinstance(Vbar, Field):
        return RescaledPotential(np.asarray(Vbar.values), np.zeros(len(grid.nodes)))
    values = np.broadcast_to(np.asarray(Vbar, dtype=float), grid.nodes.shape)
    return RescaledPotential(np.array(values), np.zeros(len(grid.nodes)))


def _integral(frame: SelfSimilarFrame, values: np.ndarray, k: int = 0) -> float:
    """Integral of values |y|^{2k} rho over the rescaled domain."""
    y = frame.y_grid.nodes
    return frame.y_grid.integrate(values * y ** (2 * k) * gaussian_weight(y), frame.mask)


def energy_moment(frame: SelfSimilarFrame, Vbar: PotentialLike, k: int = 0) -> float:
    """
    Weighted energy E_{2k}[w]; k = 0 gives E[w].

    Args:
        frame: The frame.
        Vbar: Rescaled potential on the frame's y-grid.
        k: Moment order, 0..3.

    Returns:
        1/2 int (|grad w|^2 + beta w^2)|y|^{2k} rho - 1/(p+1) int Vbar |w|^{p+1} |y|^{2k} rho.

    Raises:
        UnsupportedMomentError: For k outside 0..3.
    """
    if k < 0 or k > MAX_ENERGY_MOMENT:
        raise UnsupportedMomentError(f"energy moment order {k} outside 0..{MAX_ENERGY_MOMENT}")
    V = _potential(Vbar, frame.y_grid).values
    w = frame.w.values
    p = frame.p
    density = 0.5 * (frame.grad ** 2 + frame.beta * w ** 2) - V * np.abs(w) ** (p + 1.0) / (p + 1.0)
    density = np.where(frame.mask, density, 0.0)
    return weighted_moment_integral(Field(frame.y_grid, density, frame.w.time), k)


def tilde_E2_correction(frame: SelfSimilarFrame) -> float:
    """1/2 int (|y|^2/2 - N) w^2 rho."""
    y = frame.y_grid.nodes
    return 0.5 * _integral(frame, (0.5 * y ** 2 - frame.y_grid.N) * frame.w.values ** 2)


def tilde_E2(frame: SelfSimilarFrame, Vbar: PotentialLike) -> float:
    """E_2[w] minus the Pohozaev correction 1/2 int (|y|^2/2 - N) w^2 rho."""
    return energy_moment(frame, Vbar, 1) - tilde_E2_correction(frame)


def frozen_energy(frame: SelfSimilarFrame, V_a: float) -> float:
    """E[w] with the potential frozen at V_a."""
    return energy_moment(frame, RescaledPotential.frozen(frame.y_grid, V_a), 0)


def weighted_l2_norm(frame: SelfSimilarFrame) -> float:
    """Squared weighted norm int w^2 rho over the rescaled domain."""
    return _integral(frame, frame.w.values ** 2)


@dataclass(frozen=True)
class CutoffSpec:
    """
    C^2 bump: 1 on B_R(center), 0 outside B_2R(center), quintic smoothstep between.
    """

    center: float = 0.0
    R: float = 2.0

    def __post_init__(self):
        if not self.R > 0:
            raise InvalidArgumentError(f"cutoff radius must be positive, got {self.R}")

    def _z(self, y: np.ndarray) -> np.ndarray:
        return np.clip((np.abs(y - self.center) - self.R) / self.R, 0.0, 1.0)

    def values(self, y: np.ndarray) -> np.ndarray:
        z = self._z(y)
        return 1.0 - z ** 3 * (10.0 - 15.0 * z + 6.0 * z ** 2)

    def gradient(self, y: np.ndarray) -> np.ndarray:
        z = self._z(y)
        return -30.0 * z ** 2 * (1.0 - z) ** 2 / self.R * np.sign(y - self.center)

    def reach(self, grid: Grid) -> float:
        """Largest distance from the centre to a grid node."""
        return float(np.max(np.abs(grid.nodes - self.center)))


class LocalEnergies(NamedTuple):
    E_psi: float
    script_E_psi: float
    bridge: float


def local_energies(frame: SelfSimilarFrame, Vbar: PotentialLike, cutoff: CutoffSpec) -> LocalEnergies:
    """
    The two localized energies and the bridge term between them.

    E_psi = 1/2 int (|grad(psi w)|^2 + (beta psi^2 - |grad psi|^2) w^2) rho - 1/(p+1) int Vbar psi^2 |w|^{p+1} rho,
    script_E_psi = 1/2 int psi^2 (|grad w|^2 + beta w^2) rho - 1/(p+1) int Vbar psi^2 |w|^{p+1} rho,
    and E_psi - script_E_psi = int psi w (grad psi . grad w) rho.

    Raises:
        InvalidArgumentError: When the cutoff is neither identically 1 on the
            grid nor supported inside it.
    """
    grid = frame.y_grid
    if grid.is_radial and cutoff.center != 0.0:
        raise InvalidArgumentError("radial cutoffs are centred at the origin")
    reach = cutoff.reach(grid)
    if cutoff.R < reach < 2.0 * cutoff.R:
        raise InvalidArgumentError(
            f"cutoff support B_{2 * cutoff.R:g} exceeds the y-grid (reach {reach:g})"
        )

    y = grid.nodes
    psi = cutoff.values(y)
    dpsi = cutoff.gradient(y)
    w = frame.w.values
    dw = frame.grad
    V = _potential(Vbar, grid).values
    p = frame.p

    potential_term = _integral(frame, V * psi ** 2 * np.abs(w) ** (p + 1.0)) / (p + 1.0)
    d_psi_w = psi * dw + w * dpsi
    E_psi = 0.5 * _integral(frame, d_psi_w ** 2 + (frame.beta * psi ** 2 - dpsi ** 2) * w ** 2) - potential_term
    script_E_psi = 0.5 * _integral(frame, psi ** 2 * (dw ** 2 + frame.beta * w ** 2)) - potential_term
    bridge = _integral(frame, psi * w * dpsi * dw)

    scale = max(abs(E_psi), abs(script_E_psi), abs(bridge), 1e-300)
    if abs(E_psi - script_E_psi - bridge) > 1e-8 * scale:
        logger.warning("local energy bridge identity off by %.3g", E_psi - script_E_psi - bridge)
    return LocalEnergies(E_psi, script_E_psi, bridge)


class IdentityBalance(NamedTuple):
    lhs: float
    rhs: float
    truncated: bool

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def _boundary_term(frame: SelfSimilarFrame, k: int = 0) -> Tuple[float, bool]:
    """
    Surface integral of |grad w|^2 (y . gamma) |y|^{2k} rho over the rescaled boundary.

    Boundary points beyond the y-grid are dropped and reported as truncated.
    """
    grid = frame.y_grid
    lo, hi = frame.omega_bounds
    truncated = False
    total = 0.0
    points = [hi] if grid.is_radial else [lo, hi]
    for point in points:
        if not grid.contains(point):
            truncated = True
            continue
        inside = frame.mask
        if np.count_nonzero(inside) < 3:
            continue
        # One-sided slope from the inside nodes nearest to the boundary point
        idx = np.nonzero(inside)[0]
        near = idx[-3:] if point == hi else idx[:3]
        slope = np.polyfit(grid.nodes[near], frame.w.values[near], 1)[0]
        y_gamma = abs(point)
        measure = unit_sphere_area(grid.N) * abs(point) ** (grid.N - 1) if grid.is_radial else 1.0
        total += slope ** 2 * y_gamma * point ** (2 * k) * float(gaussian_weight(point)) * measure
    return total, truncated


def _check_spacing(frames: Sequence[SelfSimilarFrame]) -> float:
    if len(frames) not in (2, 3):
        raise InvalidArgumentError("identity residuals take a pair or a triple of frames")
    steps = np.diff([f.s for f in frames])
    if np.any(steps <= 0):
        raise InvalidArgumentError("frames must be ordered by increasing s")
    if len(steps) == 2 and abs(steps[1] - steps[0]) > SPACING_TOL * max(steps):
        raise InvalidArgumentError(f"frames are not equally spaced in s: {steps[0]:.6g} vs {steps[1]:.6g}")
    if len({(f.y_grid.kind, f.y_grid.m, f.y_grid.extent) for f in frames}) != 1:
        raise InvalidArgumentError("frames live on different y-grids")
    return float(steps[0])


class _Stencil(NamedTuple):
    """Difference quotient of w and the mean of the per-frame pieces."""

    ds: float
    w_s: np.ndarray
    w: np.ndarray
    grad: np.ndarray
    mask: np.ndarray
    frames: Tuple[SelfSimilarFrame, ...]
    centre: Tuple[SelfSimilarFrame, ...]


def _stencil(frames: Sequence[SelfSimilarFrame]) -> _Stencil:
    ds = _check_spacing(frames)
    first, last = frames[0], frames[-1]
    span = ds * (len(frames) - 1)
    w_s = (last.w.values - first.w.values) / span
    if len(frames) == 3:
        centre: Tuple[SelfSimilarFrame, ...] = (frames[1],)
    else:
        centre = (first, last)
    w = np.mean([f.w.values for f in centre], axis=0)
    grad = np.mean([f.grad for f in centre], axis=0)
    mask = np.logical_or.reduce([f.mask for f in frames])
    return _Stencil(ds, w_s, w, grad, mask, tuple(frames), centre)


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values))


def _derivative(stencil: _Stencil, quantity) -> float:
    return (quantity(stencil.frames[-1]) - quantity(stencil.frames[0])) / (stencil.ds * (len(stencil.frames) - 1))


def _stencil_integral(stencil: _Stencil, values: np.ndarray, k: int = 0) -> float:
    grid = stencil.frames[0].y_grid
    y = grid.nodes
    return grid.integrate(values * y ** (2 * k) * gaussian_weight(y), stencil.mask)


def identity_balance(
    frames: Sequence[SelfSimilarFrame],
    potentials: Sequence[PotentialLike],
    identity_id: str,
    c2: Optional[float] = None,
) -> IdentityBalance:
    """
    Both sides of one evolution identity for the rescaled solution.

    Identities:
        ``var``: 1/2 d/ds int w^2 rho = -2E + (p-1)/(p+1) int Vbar |w|^{p+1} rho.
        ``wvar_k``: the same with weight |y|^{2k} plus
            k int (N + 2k - 2 - |y|^2/2) w^2 |y|^{2k-2} rho on the right.
        ``dissipation``: int w_s^2 rho = -dE/ds - 1/4 (boundary) + 1/(2(p+1)) int (y . grad Vbar) |w|^{p+1} rho.
        ``wdissipation_k``: the weighted version, with the extra
            -2k int (y . grad w) w_s |y|^{2k-2} rho term.
        ``pohozaev``: 1/2 d/ds int (|y|^2/2 - N) w^2 rho - (p+1) int (y . grad w) w_s rho
            = int |grad w|^2 (c2 + (p-1)|y|^2/4) rho - (p+1)/2 (boundary) + int (y . grad Vbar) |w|^{p+1} rho.

    Args:
        frames: A pair (forward difference) or an equally spaced triple
            (central difference at the middle frame).
        potentials: Rescaled potentials, one per frame.
        identity_id: Identity name.
        c2: Pohozaev constant; fitted on this stencil alone when None.

    Returns:
        Left side, right side and whether a boundary term was dropped.
    """
    if len(potentials) != len(frames):
        raise InvalidArgumentError("one rescaled potential per frame is required")
    stencil = _stencil(frames)
    pots = {id(f): _potential(v, f.y_grid) for f, v in zip(frames, potentials)}
    grid = frames[0].y_grid
    y = grid.nodes
    N = grid.N
    p = frames[0].p

    def centre_mean(fn) -> float:
        return _mean([fn(f) for f in stencil.centre])

    def power_term(f: SelfSimilarFrame, weight: np.ndarray, k: int) -> float:
        return _integral(f, weight * np.abs(f.w.values) ** (p + 1.0), k)

    def boundary(k: int) -> Tuple[float, bool]:
        parts = [_boundary_term(f, k) for f in stencil.centre]
        return _mean([value for value, _ in parts]), any(flag for _, flag in parts)

    match_wvar = _WVAR.match(identity_id)
    match_wdiss = _WDISSIPATION.match(identity_id)

    if identity_id == VAR or match_wvar:
        k = int(match_wvar.group(1)) if match_wvar else 0
        lhs = 0.5 * _derivative(stencil, lambda f: _integral(f, f.w.values ** 2, k))
        rhs = centre_mean(
            lambda f: -2.0 * energy_moment(f, pots[id(f)], k)
            + (p - 1.0) / (p + 1.0) * power_term(f, pots[id(f)].values, k)
        )
        if k > 0:
            rhs += centre_mean(
                lambda f: k * _integral(f, (N + 2 * k - 2 - 0.5 * y ** 2) * f.w.values ** 2 * y ** (2 * k - 2))
            )
        return IdentityBalance(lhs, rhs, False)

    if identity_id == DISSIPATION or match_wdiss:
        k = int(match_wdiss.group(1)) if match_wdiss else 0
        lhs = _stencil_integral(stencil, stencil.w_s ** 2, k)
        surface, truncated = boundary(k)
        rhs = (
            -_derivative(stencil, lambda f: energy_moment(f, pots[id(f)], k))
            - 0.25 * surface
            + centre_mean(lambda f: power_term(f, pots[id(f)].y_dot_grad, k)) / (2.0 * (p + 1.0))
        )
        if k > 0:
            rhs -= 2.0 * k * _stencil_integral(stencil, y * stencil.grad * stencil.w_s * y ** (2 * k - 2))
        return IdentityBalance(lhs, rhs, truncated)

    if identity_id == POHOZAEV:
        if not grid.is_radial:
            raise InvalidArgumentError("the Pohozaev identity is checked on radial frames only")
        terms = _pohozaev_terms(stencil, pots, p)
        if c2 is None:
            c2 = terms.c2_fit
        lhs = terms.lhs
        rhs = c2 * terms.gradient_mass + terms.rest
        return IdentityBalance(lhs, rhs, terms.truncated)

    raise InvalidArgumentError(f"unknown identity '{identity_id}'")


class _PohozaevTerms(NamedTuple):
    lhs: float
    gradient_mass: float
    rest: float
    truncated: bool

    @property
    def c2_fit(self) -> float:
        if self.gradient_mass == 0.0:
            return 0.0
        return (self.lhs - self.rest) / self.gradient_mass


def _pohozaev_terms(stencil: _Stencil, pots: Dict[int, RescaledPotential], p: float) -> _PohozaevTerms:
    grid = stencil.frames[0].y_grid
    y = grid.nodes
    lhs = 0.5 * _derivative(stencil, lambda f: _integral(f, (0.5 * y ** 2 - grid.N) * f.w.values ** 2))
    lhs -= (p + 1.0) * _stencil_integral(stencil, y * stencil.grad * stencil.w_s)

    gradient_mass = _mean([_integral(f, f.grad ** 2) for f in stencil.centre])
    parts = [_boundary_term(f) for f in stencil.centre]
    rest = _mean(
        [
            0.25 * (p - 1.0) * _integral(f, f.grad ** 2 * y ** 2)
            + _integral(f, pots[id(f)].y_dot_grad * np.abs(f.w.values) ** (p + 1.0))
            for f in stencil.centre
        ]
    )
    rest -= 0.5 * (p + 1.0) * _mean([value for value, _ in parts])
    return _PohozaevTerms(lhs, gradient_mass, rest, any(flag for _, flag in parts))


def identity_residual(
    frames: Sequence[SelfSimilarFrame],
    potentials: Sequence[PotentialLike],
    identity_id: str,
    c2: Optional[float] = None,
) -> float:
    """|LHS - RHS| of one identity; see ``identity_balance``."""
    return identity_balance(frames, potentials, identity_id, c2).residual


def fit_pohozaev_constant(frames: Sequence[SelfSimilarFrame], potentials: Sequence[PotentialLike]) -> float:
    """
    Least-squares Pohozaev constant over every consecutive triple.

    Returns 0 when no triple carries gradient mass.
    """
    if len(frames) < 3:
        raise InvalidArgumentError("fitting the Pohozaev constant needs at least 3 frames")
    numerator = 0.0
    denominator = 0.0
    for j in range(1, len(frames) - 1):
        triple = frames[j - 1 : j + 2]
        stencil = _stencil(triple)
        pots = {id(f): _potential(v, f.y_grid) for f, v in zip(triple, potentials[j - 1 : j + 2])}
        terms = _pohozaev_terms(stencil, pots, triple[0].p)
        numerator += terms.gradient_mass * (terms.lhs - terms.rest)
        denominator += terms.gradient_mass ** 2
    return numerator / denominator if denominator > 0 else 0.0


def monotonicity_defect(energies: Sequence[float]) -> float:
    """Largest increase between consecutive energies, 0 for a non-increasing sequence."""
    values = np.asarray(energies, dtype=float)
    if values.size < 2:
        return 0.0
    return float(max(0.0, np.max(np.diff(values))))


def core_deviation(frame: SelfSimilarFrame, k_a: float) -> float:
    """max over |y| <= 1 of |w - k(a)|."""
    core = np.abs(frame.y_grid.nodes) <= 1.0 + 1e-12
    return float(np.max(np.abs(frame.w.values[core] - k_a)))


def limit_convergence_check(
    frames: Sequence[SelfSimilarFrame], a: float, spec: ProblemSpec
) -> List[Tuple[float, float]]:
    """
    Deviation of each frame from the constant profile k(a) on |y| <= 1.

    Returns:
        (s, deviation) per frame.
    """
    k_a = limit_constant_k(spec, a)
    return [(frame.s, core_deviation(frame, k_a)) for frame in frames]


def deviation_trend_ok(series: Sequence[Tuple[float, float]], slack: float = TREND_SLACK) -> bool:
    """Whether the deviation is non-increasing over the last three entries, within the slack."""
    tail = [dev for _, dev in series[-3:]]
    return all(later <= (1.0 + slack) * earlier for earlier, later in zip(tail, tail[1:]))


@dataclass
class EnergyRow:
    s: float
    E: float
    E2k: Dict[int, float]
    tildeE2: float
    local: Dict[str, Tuple[float, float]]
    residuals: Dict[str, float]
    dev_core: float
    l2_norm: float = math.nan
    truncated: bool = False


@dataclass
class EnergyReport:
    """
    Per-frame energies and identity residuals of one run.

    ``c2`` is the fitted Pohozaev constant (None on interval frames) and
    ``cumulative_dissipation`` the trapezoid integral of int w_s^2 rho ds.
    The summary also lists the local energies of every row that has them.
    """

    rows: List[EnergyRow] = field(default_factory=list)
    c2: Optional[float] = None
    cumulative_dissipation: float = 0.0
    k_a: float = math.nan

    @property
    def energies(self) -> List[float]:
        return [row.E for row in self.rows]

    @property
    def max_l2_norm(self) -> float:
        return max((row.l2_norm for row in self.rows), default=math.nan)

    def table(self) -> List[Dict[str, float]]:
        """Rows keyed by the CSV columns; absent entries are NaN."""
        out = []
        for row in self.rows:
            out.append(
                {
                    "s": row.s,
                    "E": row.E,
                    "E2": row.E2k.get(1, math.nan),
                    "E4": row.E2k.get(2, math.nan),
                    "E6": row.E2k.get(3, math.nan),
                    "tildeE2": row.tildeE2,
                    "res_var": row.residuals.get(VAR, math.nan),
                    "res_wvar1": row.residuals.get("wvar_1", math.nan),
                    "res_dissipation": row.residuals.get(DISSIPATION, math.nan),
                    "res_pohozaev": row.residuals.get(POHOZAEV, math.nan),
                    "dev_core": row.dev_core,
                }
            )
        return out

    def summary(self) -> Dict[str, object]:
        return {
            "c2": self.c2,
            "cumulative_dissipation": self.cumulative_dissipation,
            "max_weighted_l2": self.max_l2_norm,
            "k_a": self.k_a,
            "frames": len(self.rows),
            "truncated_boundary": any(row.truncated for row in self.rows),
            "local_energies": [
                {"s": row.s, "cutoff": label, "E_psi": E_psi, "script_E_psi": script_E_psi}
                for row in self.rows
                for label, (E_psi, script_E_psi) in row.local.items()
            ],
        }


def monotonicity_check_constV(report: EnergyReport, spec: ProblemSpec) -> float:
    """
    Largest energy increase between consecutive frames for a constant potential.

    Raises:
        InvalidArgumentError: When V is not constant.
    """
    if not spec.potential.is_constant:
        raise InvalidArgumentError("the monotonicity check needs a constant potential")
    return monotonicity_defect(report.energies)


def frame_schedule(T: float, h: float, count: int, resolve_cells: float = 10.0) -> np.ndarray:
    """
    Equally spaced s-values from -log T up to the resolution limit.

    The last frame has T - t = (resolve_cells h)^2, so its peak still spans
    about resolve_cells grid cells.

    Args:
        T: Blow-up time.
        h: Spacing of the solution grid.
        count: Number of frames, at least 3.
        resolve_cells: Cells across the rescaled unit length at the last frame.

    Returns:
        The s-values.
    """
    if count < 3:
        raise InvalidArgumentError("at least 3 frames are needed")
    s0 = -math.log(T)
    s_hi = -2.0 * math.log(resolve_cells * h)
    if not s_hi > s0:
        raise InvalidArgumentError(
            f"no resolved self-similar range: s0={s0:.3g}, resolution limit {s_hi:.3g}"
        )
    return np.linspace(s0, s_hi, count)


def capture_times_for(T: float, s_values: Sequence[float]) -> List[float]:
    """Solution times t = T - e^{-s} of the given frames."""
    return [max(0.0, T - math.exp(-s)) for s in s_values]


def build_energy_report(
    frames: Sequence[SelfSimilarFrame],
    spec: ProblemSpec,
    k_list: Sequence[int] = (1, 2, 3),
    cutoff: Optional[CutoffSpec] = None,
) -> EnergyReport:
    """
    Energies of the interior frames and the identity residuals on each triple.

    Args:
        frames: Equally spaced frames; the first and last only feed the
            s-differences.
        spec: The problem.
        k_list: Energy moments to report.
        cutoff: Local-energy cutoff; skipped when None.

    Returns:
        The report.
    """
    if len(frames) < 3:
        raise InvalidArgumentError("an energy report needs at least 3 frames")
    potentials = [RescaledPotential.sample(spec, f) for f in frames]
    radial = frames[0].y_grid.is_radial
    c2 = fit_pohozaev_constant(frames, potentials) if radial else None
    k_a = limit_constant_k(spec, frames[0].a)
    identities = [VAR, "wvar_1", DISSIPATION, "wdissipation_1"] + ([POHOZAEV] if radial else [])

    report = EnergyReport(c2=c2, k_a=k_a)
    dissipation: List[Tuple[float, float]] = []
    for j in range(1, len(frames) - 1):
        frame, Vbar = frames[j], potentials[j]
        triple = frames[j - 1 : j + 2]
        pots = potentials[j - 1 : j + 2]

        residuals: Dict[str, float] = {}
        truncated = False
        for identity in identities:
            balance = identity_balance(triple, pots, identity, c2)
            residuals[identity] = balance.residual
            truncated = truncated or balance.truncated
            if identity == DISSIPATION:
                dissipation.append((frame.s, balance.lhs))

        local: Dict[str, Tuple[float, float]] = {}
        if cutoff is not None:
            energies = local_energies(frame, Vbar, cutoff)
            local[f"R={cutoff.R:g}"] = (energies.E_psi, energies.script_E_psi)

        report.rows.append(
            EnergyRow(
                s=frame.s,
                E=energy_moment(frame, Vbar, 0),
                E2k={k: energy_moment(frame, Vbar, k) for k in k_list},
                tildeE2=tilde_E2(frame, Vbar),
                local=local,
                residuals=residuals,
                dev_core=core_deviation(frame, k_a),
                l2_norm=weighted_l2_norm(frame),
                truncated=truncated,
            )
        )

    if len(dissipation) > 1:
        s, value = zip(*dissipation)
        report.cumulative_dissipation = float(trapezoid(value, s))
    logger.info("energy report: %d frames, c2=%s", len(report.rows), c2)
    return report
