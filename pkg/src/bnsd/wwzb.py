"""The complete set of 256 full-correlation Bell inequalities for three qubits.

Each inequality comes from a sign function ``f`` on ``{0,1}^3`` through

    c(x) = 1/4 * sum_k f(k) (-1)^(k.x),      |sum_x c(x) E(x)| <= 2.

The five representatives P1..P5 from :mod:`bnsd.operators` all occur in the
set, one per symmetry class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidFamily
from .linalg import validate_density_matrix
from .operators import WWZB_REPRESENTATIVES, party_operators

SETTINGS_TUPLES = tuple(itertools.product((0, 1), repeat=3))
BOUND = 2.0

# (-1)^(k.x), rows k, columns x, both in SETTINGS_TUPLES order
_HADAMARD = np.array([[(-1) ** sum(a * b for a, b in zip(k, x)) for x in SETTINGS_TUPLES]
                      for k in SETTINGS_TUPLES], dtype=float)


@dataclass(frozen=True)
class SignFunction:
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != 8 or any(v not in (1, -1) for v in self.values):
            raise ValueError("a sign function has eight entries, each +1 or -1")

    def __call__(self, k) -> int:
        return self.values[SETTINGS_TUPLES.index(tuple(k))]


@dataclass
class WwzbInequality:
    sign_function: SignFunction
    coefficients: np.ndarray = field(repr=False)
    bound: float = BOUND
    class_id: int | None = None

    @property
    def key(self) -> tuple[float, ...]:
        return coefficient_key(self.coefficients)

    def value(self, correlators) -> float:
        return float(np.sum(self.coefficients * correlators))


def coefficient_key(coeffs) -> tuple[float, ...]:
    # entries sit on a grid of 1/2, so rounding to 2 decimals is exact
    return tuple(round(float(v), 2) + 0.0 for v in np.asarray(coeffs).reshape(8))


def coefficients_from_signs(f: SignFunction) -> np.ndarray:
    return (_HADAMARD @ np.array(f.values, dtype=float) / 4).reshape(2, 2, 2)


def signs_from_coefficients(coeffs) -> SignFunction:
    """Inverse transform; raises if ``coeffs`` is not in the family."""
    f = _HADAMARD @ np.asarray(coeffs, dtype=float).reshape(8) / 2
    rounded = np.rint(f)
    if np.max(np.abs(f - rounded)) > 1e-9 or np.any(np.abs(rounded) != 1):
        raise InvalidFamily("coefficients do not come from a sign function")
    return SignFunction(tuple(int(v) for v in rounded))


def enumerate_family() -> list[WwzbInequality]:
    """All 256 inequalities. Index i has f(k) = -1 exactly where bit k of i is set."""
    family = []
    for i in range(256):
        f = SignFunction(tuple(-1 if (i >> b) & 1 else 1 for b in range(8)))
        family.append(WwzbInequality(f, coefficients_from_signs(f)))
    return family


def deterministic_maximum(coeffs) -> float:
    """Max of sum_x c(x) a_A(x_A) a_B(x_B) a_C(x_C) over the 64 local +-1 strategies."""
    c = np.asarray(coeffs, dtype=float)
    best = -np.inf
    for s in itertools.product((1, -1), repeat=6):
        a, b, cc = np.array(s[0:2]), np.array(s[2:4]), np.array(s[4:6])
        best = max(best, float(np.einsum("abc,a,b,c->", c, a, b, cc)))
    return best


# -- symmetry group ------------------------------------------------------------

def swap_settings(coeffs, party: int) -> np.ndarray:
    """Relabel the two observables of one party."""
    return np.flip(np.asarray(coeffs), axis=party)


def flip_outcome(coeffs, party: int, setting: int) -> np.ndarray:
    """Rename the outcomes (+1 <-> -1) of one observable."""
    c = np.array(coeffs, dtype=float)
    index = [slice(None)] * 3
    index[party] = setting
    c[tuple(index)] *= -1
    return c


def permute_parties(coeffs, perm) -> np.ndarray:
    """New party i plays the role of old party perm[i]."""
    return np.transpose(np.asarray(coeffs), axes=perm)


def group_generators():
    gens = []
    for p in range(3):
        gens.append(lambda c, p=p: swap_settings(c, p))
        for s in range(2):
            gens.append(lambda c, p=p, s=s: flip_outcome(c, p, s))
    for perm in ((1, 0, 2), (0, 2, 1)):
        gens.append(lambda c, perm=perm: permute_parties(c, perm))
    return gens


def orbit(coeffs) -> set[tuple[float, ...]]:
    start = np.asarray(coeffs, dtype=float)
    seen = {coefficient_key(start)}
    stack = [start]
    gens = group_generators()
    while stack:
        c = stack.pop()
        for g in gens:
            image = g(c)
            key = coefficient_key(image)
            if key not in seen:
                seen.add(key)
                stack.append(image)
    return seen


def classify_orbits(family: list[WwzbInequality]) -> dict[int, list[int]]:
    """Partition family indices into symmetry classes, numbered by the P1..P5
    representative each class contains. Sets ``class_id`` on each inequality.
    """
    keys = [ineq.key for ineq in family]
    if len(family) != 256 or len(set(keys)) != 256:
        raise InvalidFamily("expected 256 distinct inequalities")
    index_of = {k: i for i, k in enumerate(keys)}
    classes: dict[int, list[int]] = {}
    assigned: set[int] = set()
    for class_id, rep in WWZB_REPRESENTATIVES.items():
        members = orbit(rep)
        missing = members - index_of.keys()
        if missing:
            raise InvalidFamily(f"class {class_id} orbit leaves the family")
        idx = sorted(index_of[k] for k in members)
        if assigned.intersection(idx):
            raise InvalidFamily(f"representative P{class_id} shares a class with another")
        classes[class_id] = idx
        assigned.update(idx)
    if len(assigned) != 256:
        raise InvalidFamily(f"{256 - len(assigned)} inequalities lie outside the five classes")
    for class_id, idx in classes.items():
        for i in idx:
            family[i].class_id = class_id
    return classes


def classified_family() -> list[WwzbInequality]:
    family = enumerate_family()
    classify_orbits(family)
    return family


def coefficient_matrix(family: list[WwzbInequality]) -> np.ndarray:
    """Shape (len(family), 2, 2, 2)."""
    return np.stack([ineq.coefficients for ineq in family])


# -- evaluation ------------------------------------------------------------------

@dataclass
class LocalityReport:
    values: np.ndarray = field(repr=False)
    max_value: float
    max_violation: float
    violating_count: int
    is_fully_local_at_settings: bool


def correlators(rho, settings) -> np.ndarray:
    """E[x_A, x_B, x_C] = tr(M_A^{x_A} M_B^{x_B} M_C^{x_C} rho) by direct tracing."""
    ops = party_operators(settings)
    out = np.empty((2, 2, 2))
    for x in SETTINGS_TUPLES:
        prod = ops[x[0]] @ ops[2 + x[1]] @ ops[4 + x[2]]
        out[x] = np.sum(prod * rho.T).real
    return out


def report_from_values(values, tol: float = 1e-12) -> LocalityReport:
    values = np.asarray(values, dtype=float)
    max_value = float(np.max(np.abs(values)))
    count = int(np.sum(np.abs(values) > BOUND + tol))
    return LocalityReport(values, max_value, max_value - BOUND, count, count == 0)


def locality_verdict(rho, settings, family=None) -> LocalityReport:
    """Evaluate every inequality at one choice of settings.

    A clean verdict here says nothing about other settings; see
    :func:`bnsd.analysis.optimize_family` for the maximization.
    """
    rho = validate_density_matrix(rho)
    family = family if family is not None else enumerate_family()
    corr = correlators(rho, settings)
    values = np.einsum("fabc,abc->f", coefficient_matrix(family), corr)
    return report_from_values(values)


def family_dump(family: list[WwzbInequality]) -> list[dict]:
    out = []
    for ineq in family:
        coeffs = {"".join(map(str, x)): float(ineq.coefficients[x]) for x in SETTINGS_TUPLES}
        out.append({"f": list(ineq.sign_function.values), "coeffs": coeffs,
                    "class": ineq.class_id})
    return out
