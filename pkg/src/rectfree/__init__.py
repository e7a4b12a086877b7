"""
rectfree: rectangular free convolution of symmetric probability measures.

Modules
-------
ncpart       non-crossing partition enumeration and the combinatorial
             moment/cumulant oracle
series       truncated power series and the cumulant/moment series engine
measure      measure representations, moments and Cauchy transforms
analytic     rectangular R-transform, its inversion and density recovery
conv         the convolution itself, through the series or analytic route
closedforms  closed-form families (Bernoulli, Gaussian, Cauchy, ...)
rmt          rectangular random-matrix Monte Carlo harness
cli          command-line front end
"""

__version__ = "0.1.0"

from rectfree.conv import convolve_analytic, convolve_moments  # noqa: E402
from rectfree.series import cumulants_from_moments, moments_from_cumulants  # noqa: E402

__all__ = [
    "__version__",
    "convolve_moments",
    "convolve_analytic",
    "cumulants_from_moments",
    "moments_from_cumulants",
]
