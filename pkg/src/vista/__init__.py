"""Variational estimation of Hamiltonian parameters with noisy GHZ probes.

A GHZ probe evolves under collective-rotation dynamics with optional
dephasing or amplitude-damping noise.  A parameterized twin state is compared
to the probe through a sampled swap test, and the resulting loss is minimized
with ADAM to recover the rotation angle (and, in the noisy modes, the decay
rate through a matched disentangling angle).  Closed-form states, a dense
Lindblad integrator, Fisher-information bounds, a cascaded scaling protocol,
and a Fourier-spectrum baseline round out the toolkit.
"""

from .config import RunConfig, from_dict, load_config
from .dynamics import (
    ChannelSpec,
    ClosedFormState,
    HamiltonianSpec,
    circuit_ansatz_state,
    evolve_closed_form,
    lindblad_rk4_oracle,
    trotter_evolve,
)
from .errors import (
    CalibrationError,
    ConfigError,
    DimensionError,
    DomainError,
    NoPeakError,
    NumericsError,
    UnsupportedModelError,
    VistaError,
)
from .measurement import (
    OverlapValue,
    ShotSampler,
    hs_overlap_closed,
    loss,
    parity_probability,
    parity_sample,
    quasi_normalize,
    swap_test_sample,
)
from .protocols import (
    run_baseline_fft,
    run_cascade,
    run_from_config,
    run_multiparam,
    run_vista,
)
from .results import RunResult, persist

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "ChannelSpec",
    "ClosedFormState",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "HamiltonianSpec",
    "NoPeakError",
    "NumericsError",
    "OverlapValue",
    "RunConfig",
    "RunResult",
    "ShotSampler",
    "UnsupportedModelError",
    "VistaError",
    "circuit_ansatz_state",
    "evolve_closed_form",
    "from_dict",
    "hs_overlap_closed",
    "lindblad_rk4_oracle",
    "load_config",
    "loss",
    "parity_probability",
    "parity_sample",
    "persist",
    "quasi_normalize",
    "run_baseline_fft",
    "run_cascade",
    "run_from_config",
    "run_multiparam",
    "run_vista",
    "swap_test_sample",
    "trotter_evolve",
    "__version__",
]
