"""Monte Carlo simulation and timetag analysis for entangled-photon-pair
microwave links over dispersive fiber.

The pipeline mirrors a heralded single-photon RF link: a photon-pair source
(``source``), intensity modulation / dispersion / detection / TCSPC
quantization on the link (``link``), coincidence building and heralded
post-selection (``correlator``), waveform folding and spectral analysis
(``analysis``), plus closed-form reference curves (``theory``) and a CLI
(``cli``).
"""

from . import analysis, correlator, link, params, source, theory
from .kernels import BACKEND as KERNEL_BACKEND

__all__ = [
    "analysis",
    "correlator",
    "link",
    "params",
    "source",
    "theory",
    "KERNEL_BACKEND",
]

__version__ = "0.1.0"
