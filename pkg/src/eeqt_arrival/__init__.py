"""Time-of-arrival statistics for a quantum particle and a point detector in
event-enhanced quantum theory."""

__version__ = "0.1.0"

from .analytic import (
    ArrivalDistribution,
    DetectorSpec,
    GaussianPacket,
    KernelParams,
    amplitude_via_laplace,
    arrival_amplitude,
    arrival_density,
    cumulative_and_efficiency,
    efficiency,
    free_packet_amplitude,
    wigner_density,
)
from .specfun import erfc_scaled_ray, faddeeva

__all__ = [
    "ArrivalDistribution",
    "DetectorSpec",
    "GaussianPacket",
    "KernelParams",
    "amplitude_via_laplace",
    "arrival_amplitude",
    "arrival_density",
    "cumulative_and_efficiency",
    "efficiency",
    "erfc_scaled_ray",
    "faddeeva",
    "free_packet_amplitude",
    "wigner_density",
]
