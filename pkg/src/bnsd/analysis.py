"""Closed forms, settings optimization, critical times and nonlocality verdicts.

For a state of the generic class evolving under local dephasing, every
tripartite expression built from x-y plane observables sees only the
coherence between |000> and |111>, so

    <B>(t) = prefactor * |a0||a7| * exp(-3 Gamma t) * (p sin(th) + q cos(th))

with ``th = theta_B + theta_C + alpha``. The pairs ``(p, q)`` below were
obtained by expanding each operator term by term; the test suite checks
them against direct 8x8 traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect, minimize, minimize_scalar

from .channel import DephasingChannel, apply_mask
from .errors import EmptyGrid, InvalidParameters, NoClosedForm, NumericalFailure
from .linalg import hermitian_eigenvalues, validate_density_matrix
from .operators import (
    OPERATOR_NAMES,
    TRIPARTITE_TABLES,
    BlochSettings,
    InPlaneSettings,
    angles_to_directions,
    bell_value,
    bipartition_chsh_operator,
    build_operator,
    classical_bound,
    correlation_tensor,
    directions_to_angles,
)
from .states import as_generic, relative_phase, wrap_angle
from .wwzb import BOUND as WWZB_BOUND
from .wwzb import coefficient_matrix, enumerate_family

GRID_POINTS = 721
ANGLE_TOL = 1e-10
VIOLATION_TOL = 1e-12
BISECTION_TOL = 1e-10
DEFAULT_STARTS = 64
STATIONARITY_TOL = 1e-7

# name -> (prefactor, sin coefficient, cos coefficient)
_CLOSED_FORMS = {
    "svetlichny": (8.0, 1.0, -1.0),
    "svetlichny-prime": (8.0, 1.0, 1.0),
    "mabk-m": (8.0, 0.0, -1.0),
    "mabk-mprime": (8.0, 1.0, 0.0),
    "p1": (4.0, 1.0, 0.0),
    "p2": (2.0, -3.0, -1.0),
    "p3": (4.0, 1.0, -1.0),
    "p4": (4.0, 1.0, 0.0),
    "p5": (8.0, 0.0, -1.0),
    "chsh-bipartition": (4.0, -1.0, -1.0),
}


@dataclass(frozen=True)
class ClosedForm:
    operator_name: str
    amplitude_factor: float
    decay_exponent: float
    sin_coeff: float
    cos_coeff: float
    alpha: float = 0.0

    @property
    def shape_norm(self) -> float:
        """max over theta of |p sin + q cos|."""
        return math.hypot(self.sin_coeff, self.cos_coeff)

    @property
    def argmax(self) -> float:
        """theta_BC_alpha at which the signed value is largest."""
        return math.atan2(self.sin_coeff, self.cos_coeff)

    def shape(self, theta):
        return self.sin_coeff * np.sin(theta) + self.cos_coeff * np.cos(theta)

    def value(self, t, theta_bc_alpha):
        return self.amplitude_factor * np.exp(-self.decay_exponent * np.asarray(t)) * \
            self.shape(theta_bc_alpha)

    def max_abs(self, t: float) -> float:
        return self.amplitude_factor * math.exp(-self.decay_exponent * t) * self.shape_norm

    def critical_time(self, bound: float):
        """Time at which the optimized value reaches ``bound``; None if never above it."""
        peak = self.max_abs(0.0)
        if peak <= bound:
            return None
        return math.log(peak / bound) / self.decay_exponent


CLOSED_FORM_NAMES = tuple(_CLOSED_FORMS)


def closed_form(operator_name: str, state, gamma_rate: float) -> ClosedForm:
    if operator_name not in _CLOSED_FORMS:
        raise NoClosedForm(f"no closed form for {operator_name!r}")
    generic = as_generic(state)
    if generic is None:
        raise NoClosedForm("closed forms only exist for generic-class states")
    if not gamma_rate > 0:
        raise InvalidParameters("dephasing rate must be positive")
    prefactor, p, q = _CLOSED_FORMS[operator_name]
    m = generic.corner_product
    alpha = relative_phase(generic) if m > 0 else 0.0
    return ClosedForm(operator_name, prefactor * m, 3.0 * gamma_rate, p, q, alpha)


# -- optimization -------------------------------------------------------------

@dataclass
class OptimizationResult:
    operator_name: str
    settings: InPlaneSettings | BlochSettings
    value: float
    method: str
    theta_bc_alpha: float | None = None
    gradient_norm: float | None = None
    seed: int | None = None

    @property
    def max_abs(self) -> float:
        return abs(self.value)


# B and C directions are linear in u = (cos t, sin t): d^0 = L0 u, d^1 = L1 u
_LIFT = np.array([
    [[0.0, -1.0], [1.0, 0.0], [0.0, 0.0]],
    [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
])
_A_DIRECTIONS = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])


def in_plane_form(coeffs, tensor) -> np.ndarray:
    """2x2 matrix H with <B>(theta_B, theta_C) = u(theta_B)^T H u(theta_C)."""
    return np.einsum("abc,ijk,ai,bjp,ckq->pq", coeffs, tensor, _A_DIRECTIONS, _LIFT, _LIFT)


def _unit_circle(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def angle_grid(points: int = GRID_POINTS) -> np.ndarray:
    return np.linspace(-math.pi, math.pi, points)


def _refine_1d(func, center: float, half_width: float) -> tuple[float, float]:
    """Maximize ``func`` on [center - w, center + w]; returns (arg, value)."""
    res = minimize_scalar(lambda x: -func(x), bounds=(center - half_width, center + half_width),
                          method="bounded", options={"xatol": ANGLE_TOL})
    x, fx = float(res.x), -float(res.fun)
    fc = func(center)
    return (x, fx) if fx >= fc else (center, fc)


def _maximize_bilinear(h: np.ndarray, points: int = GRID_POINTS) -> tuple[float, float, float]:
    """Grid then coordinate refinement of |u(a)^T H u(b)|; returns (a, b, |value|)."""
    grid = angle_grid(points)
    u = _unit_circle(grid)
    vals = np.abs(u @ h @ u.T)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    a, b, best = float(grid[i]), float(grid[j]), float(vals[i, j])
    step = grid[1] - grid[0]
    for _ in range(50):
        a, _ = _refine_1d(lambda x: abs(_unit_circle(x) @ h @ _unit_circle(b)), a, step)
        b, val = _refine_1d(lambda y: abs(_unit_circle(a) @ h @ _unit_circle(y)), b, step)
        if val - best <= 1e-15 * max(1.0, best):
            best = max(best, val)
            break
        best = val
    return a, b, best


def _maximize_harmonic(v_cos: float, v_sin: float, points: int = GRID_POINTS):
    """Grid then refinement of |v_cos cos t + v_sin sin t| over one angle."""
    grid = angle_grid(points)
    func = lambda t: abs(v_cos * math.cos(t) + v_sin * math.sin(t))  # noqa: E731
    vals = np.abs(v_cos * np.cos(grid) + v_sin * np.sin(grid))
    i = int(np.argmax(vals))
    return _refine_1d(func, float(grid[i]), float(grid[1] - grid[0]))


def _alpha_of(state) -> float | None:
    generic = as_generic(state) if state is not None else None
    if generic is None or generic.corner_product == 0:
        return None
    return relative_phase(generic)


def _theta_label(settings: InPlaneSettings, alpha: float | None) -> float:
    return settings.theta_bc_alpha(alpha or 0.0)


def _result(name, rho, settings, method, alpha, **extra) -> OptimizationResult:
    """Report the value at ``settings`` through the full operator trace."""
    value = build_operator(name, settings).expectation(rho)
    theta = _theta_label(settings, alpha) if isinstance(settings, InPlaneSettings) else None
    return OptimizationResult(name, settings, value, method, theta, **extra)


def optimize_in_plane(operator_name: str, rho, state=None,
                      analytic: bool = True) -> OptimizationResult:
    """Maximize |<B>| over the two in-plane rotation angles.

    With ``state`` given and a closed form available the argmax is taken from
    the closed form; otherwise a grid search is refined numerically.
    """
    if operator_name not in OPERATOR_NAMES:
        raise InvalidParameters(f"unknown operator {operator_name!r}")
    alpha = _alpha_of(state)
    generic = as_generic(state) if state is not None else None
    if analytic and generic is not None and operator_name in _CLOSED_FORMS:
        if generic.corner_product == 0:
            return _result(operator_name, rho, InPlaneSettings(0.0, 0.0), "analytic", alpha)
        cf = closed_form(operator_name, generic, 1.0)
        settings = InPlaneSettings(cf.argmax - cf.alpha, 0.0)
        return _result(operator_name, rho, settings, "analytic", alpha)

    if operator_name == "chsh-bipartition":
        v_cos = bipartition_chsh_operator(0.0).expectation(rho)
        v_sin = bipartition_chsh_operator(math.pi / 2).expectation(rho)
        theta, _ = _maximize_harmonic(v_cos, v_sin)
        return _result(operator_name, rho, InPlaneSettings(theta, 0.0), "grid", alpha)

    h = in_plane_form(TRIPARTITE_TABLES[operator_name], correlation_tensor(rho))
    a, b, _ = _maximize_bilinear(h)
    return _result(operator_name, rho, InPlaneSettings(a, b), "grid", alpha)


def in_plane_exact_max(coeffs, rho) -> float:
    """Largest singular value of the in-plane form; an exact optimum used as a check."""
    return float(np.linalg.svd(in_plane_form(coeffs, correlation_tensor(rho)),
                               compute_uv=False)[0])


def _fix_gauge(d: np.ndarray) -> np.ndarray:
    # unit-norm guard against drift
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def _seesaw(coeffs, tensor, dirs, sign, max_sweeps=300, tol=1e-13):
    """Exact block maximization of sign * <B>, one direction at a time.

    ``dirs`` has shape (runs, 3, 2, 3). <B> is linear in each direction, so
    each block update is a normalized partial gradient.
    """
    subs = ("bc,ijk,rbj,rck->ri", "ac,ijk,rai,rck->rj", "ab,ijk,rai,rbj->rk")
    prev = sign * bell_value(coeffs, tensor, dirs)
    for _ in range(max_sweeps):
        for p in range(3):
            others = [q for q in range(3) if q != p]
            for s in range(2):
                c = np.take(coeffs, s, axis=p)
                g = np.einsum(subs[p], c, tensor, dirs[:, others[0]], dirs[:, others[1]])
                norm = np.linalg.norm(g, axis=-1, keepdims=True)
                safe = norm[:, 0] > 1e-300
                dirs[safe, p, s] = sign[safe, None] * g[safe] / norm[safe]
        cur = sign * bell_value(coeffs, tensor, dirs)
        if np.max(np.abs(cur - prev)) < tol:
            break
        prev = cur
    return _fix_gauge(dirs)


def _angle_gradient(func, x, h=1e-5) -> np.ndarray:
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (func(x + e) - func(x - e)) / (2 * h)
    return grad


def optimize_bloch(operator_name: str, rho, seed: int = 0,
                   starts: int = DEFAULT_STARTS, coeffs=None) -> OptimizationResult:
    """Multi-start search over general measurement directions.

    Each start is run for both signs of the expression, so ``2 * starts``
    local searches are performed. The best point is polished if needed and
    certified by a central-difference gradient in the 12 spherical angles.
    """
    if coeffs is None:
        if operator_name not in TRIPARTITE_TABLES:
            raise InvalidParameters(f"{operator_name!r} has no general-direction form")
        coeffs = TRIPARTITE_TABLES[operator_name]
    if starts < 1:
        raise InvalidParameters("need at least one start")
    rho = validate_density_matrix(rho)
    tensor = correlation_tensor(rho)
    rng = np.random.default_rng(seed)
    init = rng.normal(size=(starts, 3, 2, 3))
    dirs = _fix_gauge(np.concatenate([init, init.copy()]))
    sign = np.concatenate([np.ones(starts), -np.ones(starts)])
    dirs = _seesaw(coeffs, tensor, dirs, sign)
    vals = np.abs(bell_value(coeffs, tensor, dirs))
    best = int(np.argmax(vals))
    s = float(np.sign(bell_value(coeffs, tensor, dirs[best])) or 1.0)

    objective = lambda ang: -s * float(bell_value(coeffs, tensor, angles_to_directions(ang)))  # noqa: E731
    x = directions_to_angles(dirs[best])
    grad = _angle_gradient(objective, x)
    if np.linalg.norm(grad) >= STATIONARITY_TOL:
        res = minimize(objective, x, method="BFGS", options={"gtol": 1e-12, "maxiter": 2000})
        if res.fun <= objective(x):
            x = res.x
        grad = _angle_gradient(objective, x)
    settings = BlochSettings.from_angles(x)
    if operator_name in TRIPARTITE_TABLES:
        value = build_operator(operator_name, settings).expectation(rho)
    else:
        value = float(bell_value(coeffs, tensor, settings.directions))
    return OptimizationResult(operator_name, settings, value, "multistart",
                              gradient_norm=float(np.linalg.norm(grad)), seed=seed)


def optimize_settings(operator_name: str, rho, mode: str = "in-plane", state=None,
                      seed: int = 0, starts: int = DEFAULT_STARTS) -> OptimizationResult:
    rho = validate_density_matrix(rho)
    if mode == "in-plane":
        return optimize_in_plane(operator_name, rho, state)
    if mode == "bloch":
        return optimize_bloch(operator_name, rho, seed=seed, starts=starts)
    raise InvalidParameters(f"mode must be 'in-plane' or 'bloch', got {mode!r}")


# -- whole WWZB family ------------------------------------------------------------

@dataclass
class FamilyOptimum:
    max_abs: float
    index: int
    settings: InPlaneSettings
    violating_count: int


_FAMILY = None


def _family():
    global _FAMILY
    if _FAMILY is None:
        _FAMILY = enumerate_family()
    return _FAMILY


def optimize_family(rho) -> FamilyOptimum:
    """Maximize |<B_f>| over in-plane settings and over all 256 inequalities.

    ``violating_count`` counts inequalities whose own optimum exceeds 2.
    """
    tensor = correlation_tensor(rho)
    coeffs = coefficient_matrix(_family())
    forms = np.einsum("fabc,ijk,ai,bjp,ckq->fpq", coeffs, tensor, _A_DIRECTIONS, _LIFT, _LIFT)
    # the top singular value is the exact in-plane optimum of each form; use it
    # only to skip inequalities that cannot matter, then search the rest
    upper = np.linalg.svd(forms, compute_uv=False)[:, 0]
    candidates = np.flatnonzero((upper >= upper.max() - 1e-3) | (upper > WWZB_BOUND - 1e-9))
    best = (-1.0, 0, InPlaneSettings())
    count = 0
    for f in candidates:
        a, b, val = _maximize_bilinear(forms[f])
        count += val > WWZB_BOUND + VIOLATION_TOL
        if val > best[0]:
            best = (val, int(f), InPlaneSettings(a, b))
    return FamilyOptimum(best[0], best[1], best[2], int(count))


# -- time evolution ---------------------------------------------------------------

def evolve_checked(state, gamma_rate: float, t: float) -> np.ndarray:
    rho = apply_mask(DephasingChannel(gamma_rate, t), state)
    evals = hermitian_eigenvalues(rho)
    if evals[0] < -1e-10 or abs(np.trace(rho) - 1) > 1e-11:
        raise NumericalFailure(f"evolved state invalid at t={t}: min eig {evals[0]:.3e}")
    return rho


NEVER_VIOLATED = "never-violated"
NO_CLOSED_FORM = "no-closed-form"


@dataclass
class CriticalTimeReport:
    operator_name: str
    analytic_t: float | str
    numeric_t: float | str
    settings_policy: str = "optimized-each-t"


def numeric_max(operator_name: str, rho) -> float:
    """Optimized |<B>| through the grid path only (no closed form involved)."""
    return optimize_in_plane(operator_name, rho, state=None, analytic=False).max_abs


def critical_time(operator_name: str, state, gamma_rate: float) -> CriticalTimeReport:
    """Time after which the optimized in-plane value stays at or below the bound."""
    if not gamma_rate > 0:
        raise InvalidParameters("dephasing rate must be positive")
    bound = classical_bound(operator_name)
    try:
        t_analytic = closed_form(operator_name, state, gamma_rate).critical_time(bound)
        analytic = NEVER_VIOLATED if t_analytic is None else t_analytic
    except NoClosedForm:
        analytic = NO_CLOSED_FORM

    def excess(t):
        return numeric_max(operator_name, apply_mask(DephasingChannel(gamma_rate, t), state)) - bound

    if excess(0.0) <= VIOLATION_TOL:
        numeric = NEVER_VIOLATED
    else:
        numeric = bisect(excess, 0.0, 50.0 / gamma_rate, xtol=BISECTION_TOL)
    return CriticalTimeReport(operator_name, analytic, numeric)


@dataclass
class NonlocalityVerdict:
    generic: bool
    genuinely_tripartite: bool
    subsystem_bipartite: bool
    even_odd_bipartition: bool
    values: dict = field(default_factory=dict)

    def any(self) -> bool:
        return self.generic or self.genuinely_tripartite or self.even_odd_bipartition


def verdict(state, gamma_rate: float, t: float) -> NonlocalityVerdict:
    """The four notions of nonlocality at optimized in-plane settings.

    ``subsystem_bipartite`` follows the literal criterion (some WWZB inequality
    is violated) and so coincides with ``generic``.
    """
    if not (gamma_rate > 0 and t >= 0):
        raise InvalidParameters("need gamma_rate > 0 and t >= 0")
    rho = evolve_checked(state, gamma_rate, t)
    svet = optimize_in_plane("svetlichny", rho, state).max_abs
    chsh = optimize_in_plane("chsh-bipartition", rho, state).max_abs
    fam = optimize_family(rho)
    generic = bool(fam.max_abs > WWZB_BOUND + VIOLATION_TOL)
    return NonlocalityVerdict(
        generic=generic,
        genuinely_tripartite=bool(svet > 4.0 + VIOLATION_TOL),
        subsystem_bipartite=generic,
        even_odd_bipartition=bool(chsh > 2.0 + VIOLATION_TOL),
        values={"svetlichny": svet, "chsh-bipartition": chsh, "wwzb-max": fam.max_abs,
                "wwzb-violating": fam.violating_count},
    )


@dataclass
class SweepRow:
    t: float
    operator: str
    value: float
    bound: float
    violated: bool
    theta_bc_alpha: float | None


def sweep(state, gamma_rate: float, t_grid, operators, mode: str = "in-plane",
          seed: int = 0) -> list[SweepRow]:
    t_grid = [float(t) for t in t_grid]
    if not t_grid:
        raise EmptyGrid("time grid is empty")
    if any(t < 0 for t in t_grid) or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise InvalidParameters("time grid must be nonnegative and strictly increasing")
    rows = []
    for t in t_grid:
        rho = evolve_checked(state, gamma_rate, t)
        for name in sorted(operators):
            name_mode = "in-plane" if name == "chsh-bipartition" else mode
            res = optimize_settings(name, rho, name_mode, state, seed=seed)
            bound = classical_bound(name)
            rows.append(SweepRow(t, name, res.max_abs, bound, res.max_abs > bound + VIOLATION_TOL,
                                 res.theta_bc_alpha))
    return rows

