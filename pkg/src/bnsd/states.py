"""Three-qubit pure states of the generic (GHZ) entanglement class and presets.

Basis convention: ``|abc>`` sits at index ``4a + 2b + c``, so ``|000>`` is 0
and ``|111>`` is 7. The generic state only populates indices 0, 4, 5, 6, 7.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParameters, InvalidState, NotNormalized, UndefinedPhase

NORM_TOL = 1e-8
GENERIC_INDICES = (0, 4, 5, 6, 7)
AMPLITUDE_KEYS = ("a0", "a4", "a5", "a6", "a7")


def _check_norm(vec: np.ndarray) -> None:
    norm2 = float(np.sum(np.abs(vec) ** 2))
    if abs(norm2 - 1.0) > NORM_TOL:
        raise NotNormalized(f"sum of |amplitude|^2 is {norm2!r}, expected 1")


@dataclass(frozen=True)
class GenericState:
    """a0|000> + a4|100> + a5|101> + a6|110> + a7|111>.

    The constructor rejects unnormalized input; use :meth:`normalized` to
    rescale explicitly.
    """

    a0: complex
    a4: complex = 0j
    a5: complex = 0j
    a6: complex = 0j
    a7: complex = 0j

    def __post_init__(self):
        for key in AMPLITUDE_KEYS:
            object.__setattr__(self, key, complex(getattr(self, key)))
        _check_norm(self.vector)

    @classmethod
    def normalized(cls, a0, a4=0j, a5=0j, a6=0j, a7=0j) -> GenericState:
        amps = np.array([a0, a4, a5, a6, a7], dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise NotNormalized("all amplitudes are zero")
        return cls(*(amps / norm))

    @property
    def amplitudes(self) -> tuple[complex, ...]:
        return tuple(getattr(self, k) for k in AMPLITUDE_KEYS)

    @property
    def vector(self) -> np.ndarray:
        vec = np.zeros(8, dtype=complex)
        vec[list(GENERIC_INDICES)] = self.amplitudes
        return vec

    @property
    def corner_product(self) -> float:
        """|a0| |a7|, the only amplitude combination the Bell expectations see."""
        return abs(self.a0) * abs(self.a7)


@dataclass(frozen=True)
class PresetState:
    tag: str
    amplitudes: tuple[complex, ...]

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=complex)

    def to_generic(self) -> GenericState:
        """Convert to the five-amplitude form; fails for states outside it (W)."""
        vec = self.vector
        outside = [i for i in range(8) if i not in GENERIC_INDICES and vec[i] != 0]
        if outside:
            raise InvalidState(f"preset {self.tag!r} populates basis indices {outside}")
        return GenericState(*vec[list(GENERIC_INDICES)])


def _preset(tag: str, indices, value: float) -> PresetState:
    amps = [0j] * 8
    for i in indices:
        amps[i] = complex(value)
    return PresetState(tag, tuple(amps))


GHZ = _preset("ghz", (0, 7), 1 / math.sqrt(2))
# |100>, |010>, |001> -> indices 4, 2, 1
W = _preset("w", (4, 2, 1), 1 / math.sqrt(3))
ALL_ZERO = _preset("zero", (0,), 1.0)
PRESETS = {"ghz": GHZ, "w": W, "zero": ALL_ZERO}


def preset(tag: str) -> PresetState:
    try:
        return PRESETS[tag.lower()]
    except KeyError:
        raise InvalidParameters(f"unknown preset {tag!r}; choose from {sorted(PRESETS)}") from None


def state_vector(state) -> np.ndarray:
    vec = np.asarray(state.vector if hasattr(state, "vector") else state, dtype=complex)
    if vec.shape != (8,):
        raise InvalidState(f"expected an 8-component state vector, got shape {vec.shape}")
    _check_norm(vec)
    return vec


def as_generic(state) -> GenericState | None:
    """The five-amplitude form of ``state``, or None when it has none."""
    if isinstance(state, GenericState):
        return state
    if isinstance(state, PresetState):
        try:
            return state.to_generic()
        except InvalidState:
            return None
    return None


def density_matrix(state) -> np.ndarray:
    """|psi><psi| for a GenericState, PresetState or raw 8-vector."""
    vec = state_vector(state)
    return np.outer(vec, vec.conj())


def relative_phase(state: GenericState) -> float:
    """alpha = arg(a0) - arg(a7), wrapped into (-pi, pi]."""
    if state.a0 == 0 or state.a7 == 0:
        raise UndefinedPhase("relative phase needs both a0 and a7 nonzero")
    return wrap_angle(np.angle(state.a0) - np.angle(state.a7))


def wrap_angle(theta: float) -> float:
    """Reduce an angle into (-pi, pi]."""
    wrapped = math.remainder(float(theta), 2 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
    return wrapped


# -- JSON state specification -------------------------------------------------

def state_from_spec(spec: dict):
    """Build a state from the JSON object form.

    ``{"a0": [re, im], ..., "a7": [re, im]}``; a ``"preset"`` key
    (``"ghz" | "w" | "zero"``) overrides the amplitudes.
    """
    if not isinstance(spec, dict):
        raise InvalidParameters("state spec must be a JSON object")
    if "preset" in spec:
        return preset(str(spec["preset"]))
    amps = []
    for key in AMPLITUDE_KEYS:
        pair = spec.get(key, [0.0, 0.0])
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise InvalidParameters(f"{key} must be a [re, im] pair")
        try:
            amps.append(complex(float(pair[0]), float(pair[1])))
        except (TypeError, ValueError) as exc:
            raise InvalidParameters(f"{key}: {exc}") from None
    return GenericState(*amps)


def state_to_spec(state) -> dict:
    spec: dict = {}
    if isinstance(state, PresetState):
        spec["preset"] = state.tag
        generic = as_generic(state)
        if generic is None:
            return spec
        state = generic
    for key, amp in zip(AMPLITUDE_KEYS, state.amplitudes):
        spec[key] = [amp.real, amp.imag]
    return spec


def load_state(source: str):
    """A preset tag or a path to a JSON state file."""
    if source.lower() in PRESETS:
        return preset(source)
    path = Path(source)
    if not path.is_file():
        raise InvalidParameters(f"{source!r} is neither a preset nor a readable file")
    try:
        spec = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidParameters(f"{source}: invalid JSON ({exc})") from None
    return state_from_spec(spec)
