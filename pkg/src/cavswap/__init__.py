"""Single-photon scattering off a Lambda atom in a leaky cavity: qubit swap and entangling."""

from .core import (
    AtomQubit,
    JointKState,
    MirrorSpec,
    ParameterError,
    PolarizationQubit,
    RabiPoles,
    SystemParams,
    kappa_from_mirror,
    swap_configuration,
    validate_params,
)
from .protocols import (
    bell_probability,
    entangle_frequencies,
    eta_overlap,
    min_swap_fidelity,
    sweep_fig2,
    swap_fidelity,
    swap_frequencies,
)
from .scattering import (
    apply_scattering,
    bright_dark_decompose,
    coupling_amplitude,
    interaction_strength,
    phase_factor,
    rabi_poles,
    resolvent_ee,
    transfer_matrix,
)
from .spectra import GaussianPacket, SampledPacket, gaussian_spectrum, packet_norm, xi_integral

__version__ = "0.1.0"
