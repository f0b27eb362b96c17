"""Multi-local pure phase noise acting identically on each of three qubits."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters
from .linalg import I2, kron_all, validate_density_matrix
from .states import density_matrix


@dataclass(frozen=True)
class DephasingChannel:
    """Local dephasing at rate ``gamma_rate`` evaluated at time ``t``."""

    gamma_rate: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma_rate) and self.gamma_rate > 0):
            raise InvalidParameters(f"dephasing rate must be positive, got {self.gamma_rate!r}")
        if not (math.isfinite(self.t) and self.t >= 0):
            raise InvalidParameters(f"time must be nonnegative, got {self.t!r}")

    @property
    def gamma(self) -> float:
        return math.exp(-self.gamma_rate * self.t)

    @property
    def omega(self) -> float:
        # -expm1 keeps precision for small rate * t
        return math.sqrt(-math.expm1(-2 * self.gamma_rate * self.t))


@dataclass(frozen=True)
class KrausSet:
    """Per-qubit factors: E acts on A, F on B, G on C."""

    E: tuple[np.ndarray, np.ndarray]
    F: tuple[np.ndarray, np.ndarray]
    G: tuple[np.ndarray, np.ndarray]

    def operators(self):
        """The eight composite operators G_k F_j E_i."""
        for i, j, k in itertools.product(range(2), repeat=3):
            yield self.G[k] @ self.F[j] @ self.E[i]

    def completeness(self) -> np.ndarray:
        return sum(d.conj().T @ d for d in self.operators())


def kraus_set(channel: DephasingChannel) -> KrausSet:
    g, w = channel.gamma, channel.omega
    keep = np.diag([1.0, g]).astype(complex)
    leak = np.diag([0.0, w]).astype(complex)
    return KrausSet(
        E=(kron_all(keep, I2, I2), kron_all(leak, I2, I2)),
        F=(kron_all(I2, keep, I2), kron_all(I2, leak, I2)),
        G=(kron_all(I2, I2, keep), kron_all(I2, I2, leak)),
    )


def apply_kraus(channel: DephasingChannel, rho0) -> np.ndarray:
    """Full eight-term operator sum; serves as the oracle for :func:`apply_mask`."""
    rho0 = validate_density_matrix(rho0)
    out = np.zeros((8, 8), dtype=complex)
    for d in kraus_set(channel).operators():
        out += d @ rho0 @ d.conj().T
    return out


def hamming_matrix() -> np.ndarray:
    """Number of qubits on which basis states i and j differ."""
    idx = np.arange(8)
    return np.array([[bin(i ^ j).count("1") for j in idx] for i in idx])


_HAMMING = hamming_matrix()


def decay_mask(channel: DephasingChannel) -> np.ndarray:
    """Element-wise factor gamma**(number of differing qubits)."""
    return channel.gamma ** _HAMMING


def apply_mask(channel: DephasingChannel, state) -> np.ndarray:
    """rho(t) obtained by damping each coherence of |psi><psi| analytically."""
    return decay_mask(channel) * density_matrix(state)


def evolve(state, gamma_rate: float, t: float) -> np.ndarray:
    return apply_mask(DephasingChannel(gamma_rate, t), state)
