import math

import numpy as np
import pytest
from hypothesis import strategies as st

from bnsd.states import GenericState

# lines collected by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def random_generic(rng: np.random.Generator) -> GenericState:
    z = rng.normal(size=5) + 1j * rng.normal(size=5)
    return GenericState.normalized(*z)


def generic_with_corner(m: float, alpha: float = 0.0, rest: float = 0.0,
                        rng: np.random.Generator | None = None) -> GenericState:
    """A generic state with |a0||a7| = m exactly; ``rest`` is the weight put on a4..a6."""
    assert 0 <= m <= (1 - rest) / 2
    s = 1 - rest
    # r0^2 + r7^2 = s, r0 r7 = m
    r0 = math.sqrt((s + math.sqrt(s * s - 4 * m * m)) / 2)
    r7 = m / r0 if r0 > 0 else 0.0
    if rest > 0:
        rng = rng or np.random.default_rng(0)
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        z *= math.sqrt(rest) / np.linalg.norm(z)
    else:
        z = np.zeros(3, dtype=complex)
    return GenericState(complex(r0 * np.exp(1j * alpha)), complex(z[0]), complex(z[1]),
                        complex(z[2]), complex(r7))


_component = st.floats(-1, 1, allow_nan=False)


@st.composite
def generic_states(draw):
    parts = [complex(draw(_component), draw(_component)) for _ in range(5)]
    if sum(abs(p) ** 2 for p in parts) < 1e-3:
        parts[0] = 1.0
    return GenericState.normalized(*parts)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
