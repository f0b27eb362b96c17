"""Measurement settings and Bell-type operators for three qubits.

Every tripartite operator here is a full-correlation expression
``sum_x c[x] * M_A^{x_A} M_B^{x_B} M_C^{x_C}`` where ``x`` picks the
unprimed (0) or primed (1) observable of each party. The coefficient table
``c`` has shape ``(2, 2, 2)`` and is shared with the WWZB family module.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameters, UnknownClass, UnknownOperator
from .linalg import I2, PAULIS, SIGMA_X, SIGMA_Y, expectation, kron_all
from .states import wrap_angle

SQRT2 = math.sqrt(2)
UNIT_TOL = 1e-12


def _directions_readonly(d) -> np.ndarray:
    d = np.array(d, dtype=float)
    d.setflags(write=False)
    return d


@dataclass(frozen=True)
class InPlaneSettings:
    """Two rotation angles for parties B and C; A is fixed to (sigma_y, sigma_x).

    M_K = cos(t) sigma_y - sin(t) sigma_x and M_K' = sin(t) sigma_y + cos(t) sigma_x.
    """

    theta_b: float = 0.0
    theta_c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta_b", wrap_angle(self.theta_b))
        object.__setattr__(self, "theta_c", wrap_angle(self.theta_c))

    @property
    def theta_bc(self) -> float:
        return self.theta_b + self.theta_c

    def theta_bc_alpha(self, alpha: float = 0.0) -> float:
        return wrap_angle(self.theta_b + self.theta_c + alpha)

    @property
    def directions(self) -> np.ndarray:
        return in_plane_directions(self.theta_b, self.theta_c)

    def to_bloch(self) -> BlochSettings:
        return BlochSettings(self.directions)


def in_plane_directions(theta_b: float, theta_c: float) -> np.ndarray:
    """Bloch vectors indexed [party, setting, xyz]."""
    d = np.zeros((3, 2, 3))
    d[0, 0] = (0.0, 1.0, 0.0)
    d[0, 1] = (1.0, 0.0, 0.0)
    for party, th in ((1, theta_b), (2, theta_c)):
        d[party, 0] = (-math.sin(th), math.cos(th), 0.0)
        d[party, 1] = (math.cos(th), math.sin(th), 0.0)
    return d


@dataclass(frozen=True)
class BlochSettings:
    """Arbitrary measurement directions, array indexed [party, setting, xyz]."""

    directions: np.ndarray = field(compare=False)

    def __post_init__(self):
        d = np.array(self.directions, dtype=float)
        if d.shape != (3, 2, 3):
            raise InvalidParameters(f"directions must have shape (3, 2, 3), got {d.shape}")
        norms = np.linalg.norm(d, axis=-1)
        if np.max(np.abs(norms - 1)) > UNIT_TOL:
            raise InvalidParameters("measurement directions must be unit vectors")
        object.__setattr__(self, "directions", _directions_readonly(d))

    @classmethod
    def from_angles(cls, angles) -> BlochSettings:
        """12 spherical angles (polar, azimuth) in order A, A', B, B', C, C'."""
        return cls(angles_to_directions(angles))

    def to_angles(self) -> np.ndarray:
        return directions_to_angles(self.directions)

    def to_bloch(self) -> BlochSettings:
        return self


def angles_to_directions(angles) -> np.ndarray:
    a = np.asarray(angles, dtype=float).reshape(3, 2, 2)
    pol, azi = a[..., 0], a[..., 1]
    return np.stack(
        [np.sin(pol) * np.cos(azi), np.sin(pol) * np.sin(azi), np.cos(pol)], axis=-1
    )


def directions_to_angles(directions) -> np.ndarray:
    d = np.asarray(directions, dtype=float)
    pol = np.arccos(np.clip(d[..., 2], -1.0, 1.0))
    azi = np.arctan2(d[..., 1], d[..., 0])
    return np.stack([pol, azi], axis=-1).reshape(12)


def spin_observable(n) -> np.ndarray:
    """n_x sigma_x + n_y sigma_y + n_z sigma_z."""
    return sum(c * p for c, p in zip(n, PAULIS))


def _embed(single: np.ndarray, party: int) -> np.ndarray:
    factors = [I2, I2, I2]
    factors[party] = single
    return kron_all(*factors)


def party_operators(settings) -> tuple[np.ndarray, ...]:
    """(M_A, M_A', M_B, M_B', M_C, M_C') as 8x8 matrices."""
    d = settings.to_bloch().directions
    return tuple(_embed(spin_observable(d[p, s]), p) for p in range(3) for s in range(2))


# -- coefficient tables ---------------------------------------------------------

_TERM = re.compile(r"([ABC])('?)")


def coefficient_table(terms: dict[str, float], scale: float = 1.0) -> np.ndarray:
    """Table from terms like ``{"ABC'": 1, "A'B'C'": -1}``."""
    c = np.zeros((2, 2, 2))
    for term, value in terms.items():
        x = [None, None, None]
        for party, prime in _TERM.findall(term):
            x["ABC".index(party)] = 1 if prime else 0
        if None in x or len(term.replace("'", "")) != 3:
            raise ValueError(f"malformed term {term!r}")
        c[tuple(x)] += scale * value
    c.setflags(write=False)
    return c


SVETLICHNY = coefficient_table({
    "ABC": 1, "ABC'": 1, "AB'C": 1, "A'BC": 1,
    "A'B'C'": -1, "A'B'C": -1, "A'BC'": -1, "AB'C'": -1,
})
SVETLICHNY_PRIME = coefficient_table({
    "ABC": 1, "ABC'": -1, "AB'C": -1, "A'BC": -1,
    "A'B'C'": 1, "A'B'C": -1, "A'BC'": -1, "AB'C'": -1,
})
MABK_M = coefficient_table({"ABC'": 1, "AB'C": 1, "A'BC": 1, "A'B'C'": -1})
MABK_MPRIME = coefficient_table({"ABC": 1, "AB'C'": -1, "A'BC'": -1, "A'B'C": -1})

WWZB_REPRESENTATIVES = {
    1: coefficient_table({"ABC": 2}),
    # the ABC weight is -3/2; with -1/2 the expression reaches 3 classically
    2: coefficient_table({
        "ABC": -3, "ABC'": 1, "AB'C": 1, "AB'C'": 1,
        "A'BC": 1, "A'BC'": 1, "A'B'C": 1, "A'B'C'": 1,
    }, scale=0.5),
    3: coefficient_table({"ABC": 1, "AB'C": 1, "A'BC": 1, "A'B'C": -1}),
    4: coefficient_table({"ABC": 1, "ABC'": 1, "A'B'C": -1, "A'B'C'": 1}),
    5: MABK_M,
}


def bell_matrix(coeffs, settings) -> np.ndarray:
    """sum_x c[x] M_A^{x_A} M_B^{x_B} M_C^{x_C} as an 8x8 matrix."""
    ops = party_operators(settings)
    out = np.zeros((8, 8), dtype=complex)
    for x in np.ndindex(2, 2, 2):
        if coeffs[x] != 0:
            out += coeffs[x] * (ops[x[0]] @ ops[2 + x[1]] @ ops[4 + x[2]])
    return out


@dataclass(frozen=True)
class BellOperator:
    name: str
    matrix: np.ndarray = field(repr=False, compare=False)
    classical_bound: float
    quantum_bound: float | None
    coefficients: np.ndarray | None = field(default=None, repr=False, compare=False)

    def expectation(self, rho) -> float:
        """Signed real expectation value; the imaginary part is roundoff."""
        return expectation(self.matrix, rho).real

    def violated_by(self, value: float, tol: float = 1e-12) -> bool:
        return abs(value) > self.classical_bound + tol


def _tripartite(name, coeffs, settings, classical, quantum) -> BellOperator:
    return BellOperator(name, bell_matrix(coeffs, settings), classical, quantum, coeffs)


def svetlichny_operator(settings) -> BellOperator:
    return _tripartite("svetlichny", SVETLICHNY, settings, 4.0, 4 * SQRT2)


def svetlichny_prime_operator(settings) -> BellOperator:
    return _tripartite("svetlichny-prime", SVETLICHNY_PRIME, settings, 4.0, 4 * SQRT2)


def mabk_operators(settings) -> tuple[BellOperator, BellOperator]:
    return (
        _tripartite("mabk-m", MABK_M, settings, 2.0, 4.0),
        _tripartite("mabk-mprime", MABK_MPRIME, settings, 2.0, 4.0),
    )


_WWZB_QUANTUM = {1: 2.0, 2: None, 3: 2 * SQRT2, 4: 2 * SQRT2, 5: 4.0}


def wwzb_representative(class_id: int, settings) -> BellOperator:
    if class_id not in WWZB_REPRESENTATIVES:
        raise UnknownClass(f"WWZB class must be 1..5, got {class_id!r}")
    return _tripartite(f"p{class_id}", WWZB_REPRESENTATIVES[class_id], settings,
                       2.0, _WWZB_QUANTUM[class_id])


# -- even-odd bipartition A | BC ---------------------------------------------------

# Pauli analogues on span{|00>, |11>} of BC: tau1 = |00><11| + |11><00|,
# tau2 = i|11><00| - i|00><11|, realized as full two-qubit observables.
TAU_1 = np.kron(SIGMA_X, SIGMA_X)
TAU_2 = np.kron(SIGMA_Y, SIGMA_X)


def bipartition_directions(theta_bc: float):
    """Observables (M_A, M_A', M_BC, M_BC') for the A | BC split."""
    c, s = math.cos(theta_bc), math.sin(theta_bc)
    m_a = np.kron(SIGMA_Y, np.eye(4))
    m_a_p = np.kron(SIGMA_X, np.eye(4))
    m_bc = np.kron(I2, c * TAU_2 - s * TAU_1)
    m_bc_p = np.kron(I2, s * TAU_2 + c * TAU_1)
    return m_a, m_a_p, m_bc, m_bc_p


def bipartition_chsh_operator(theta_bc: float) -> BellOperator:
    a, ap, bc, bcp = bipartition_directions(theta_bc)
    matrix = a @ bc + a @ bcp + ap @ bc - ap @ bcp
    return BellOperator("chsh-bipartition", matrix, 2.0, 2 * SQRT2)


# -- name dispatch ---------------------------------------------------------------

TRIPARTITE_TABLES = {
    "svetlichny": SVETLICHNY,
    "svetlichny-prime": SVETLICHNY_PRIME,
    "mabk-m": MABK_M,
    "mabk-mprime": MABK_MPRIME,
    **{f"p{k}": v for k, v in WWZB_REPRESENTATIVES.items()},
}
OPERATOR_NAMES = tuple(TRIPARTITE_TABLES) + ("chsh-bipartition",)


def build_operator(name: str, settings) -> BellOperator:
    """Operator by CLI name. For the bipartition, theta_bc = theta_b + theta_c."""
    if name == "svetlichny":
        return svetlichny_operator(settings)
    if name == "svetlichny-prime":
        return svetlichny_prime_operator(settings)
    if name in ("mabk-m", "mabk-mprime"):
        m, mp = mabk_operators(settings)
        return m if name == "mabk-m" else mp
    if re.fullmatch(r"p[1-5]", name):
        return wwzb_representative(int(name[1]), settings)
    if name == "chsh-bipartition":
        if not isinstance(settings, InPlaneSettings):
            raise InvalidParameters("the bipartition operator only takes in-plane settings")
        return bipartition_chsh_operator(settings.theta_bc)
    raise UnknownOperator(f"unknown operator {name!r}; choose from {OPERATOR_NAMES}")


def classical_bound(name: str) -> float:
    if name not in OPERATOR_NAMES:
        raise UnknownOperator(f"unknown operator {name!r}")
    return 4.0 if name.startswith("svetlichny") else 2.0


# -- fast evaluation via the correlation tensor -------------------------------------

_PAULI_TRIPLES = np.array(
    [kron_all(a, b, c) for a in PAULIS for b in PAULIS for c in PAULIS]
)


def correlation_tensor(rho) -> np.ndarray:
    """T[i, j, k] = tr(sigma_i x sigma_j x sigma_k rho), real, shape (3, 3, 3)."""
    rho = np.asarray(rho, dtype=complex)
    vals = np.einsum("kij,ji->k", _PAULI_TRIPLES, rho)
    return vals.real.reshape(3, 3, 3)


def full_correlators(tensor, directions) -> np.ndarray:
    """E[x_A, x_B, x_C] for the given directions; broadcasts over leading axes."""
    d = np.asarray(directions)
    return np.einsum("ijk,...ai,...bj,...ck->...abc", tensor,
                     d[..., 0, :, :], d[..., 1, :, :], d[..., 2, :, :])


def bell_value(coeffs, tensor, directions) -> np.ndarray:
    return np.einsum("abc,...abc->...", coeffs, full_correlators(tensor, directions))
