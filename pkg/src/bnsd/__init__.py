"""Bell-nonlocality sudden death of three qubits under local phase noise."""

from .analysis import (
    ClosedForm,
    CriticalTimeReport,
    NonlocalityVerdict,
    closed_form,
    critical_time,
    optimize_settings,
    sweep,
    verdict,
)
from .channel import DephasingChannel, apply_kraus, apply_mask, kraus_set
from .operators import (
    BlochSettings,
    BellOperator,
    InPlaneSettings,
    bipartition_chsh_operator,
    build_operator,
    mabk_operators,
    party_operators,
    svetlichny_operator,
    svetlichny_prime_operator,
    wwzb_representative,
)
from .states import ALL_ZERO, GHZ, W, GenericState, PresetState, density_matrix, relative_phase
from .wwzb import classify_orbits, enumerate_family, locality_verdict

__version__ = "0.1.0"
