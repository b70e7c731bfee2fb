"""Circuit parameters, unit conventions, and closed-form double-well analytics.

Energies are stored in GHz (h * frequency) and fluxes in units of the flux
quantum Phi_0 = h/(2e).  With E_C = e^2/(2C) and E_L = Phi_0^2/(2L), the two
identities bridging to SI are

    hbar * omega      = (2/pi) * sqrt(E_L * E_C)          (LC level spacing, GHz)
    hbar / (2 C omega) = (1/2pi) * sqrt(E_C / E_L) Phi_0^2 (zero-point flux variance)

which follow from omega = 1/sqrt(LC) and Phi_0 = h/(2e).  All other results
are ratios of these, so no SI constants appear anywhere else.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigError

TWO_PI = 2.0 * math.pi
TWO_PI_SQ = 2.0 * math.pi**2

#: e_l/e_c and e_j/e_c must both exceed this for the harmonic (deep-well) regime.
DEEP_WELL_RATIO = 1e3


@dataclass(frozen=True)
class CircuitParams:
    """rf-SQUID circuit energies (GHz) and external bias flux (Phi_0).

    The potential is U(phi) = e_l*(phi - phi_x)**2 - e_j*cos(2*pi*phi); the
    Josephson term carries a minus sign so that phi_x = 1/2 frustrates the
    loop into a symmetric double well while phi_x = 0 leaves a deep single
    well (the classical reference regime).
    """

    e_c: float
    e_l: float
    e_j: float
    phi_x: float = 0.0

    def __post_init__(self):
        if not (self.e_c > 0.0):
            raise ConfigError(f"e_c must be positive, got {self.e_c}")
        if not (self.e_l > 0.0):
            raise ConfigError(f"e_l must be positive, got {self.e_l}")
        if self.e_j < 0.0:
            raise ConfigError(f"e_j must be non-negative, got {self.e_j}")

    @property
    def deep_well(self) -> bool:
        """True when both e_l/e_c and e_j/e_c exceed 10^3."""
        return (self.e_l / self.e_c > DEEP_WELL_RATIO
                and self.e_j / self.e_c > DEEP_WELL_RATIO)

    def with_phi_x(self, phi_x: float) -> "CircuitParams":
        return replace(self, phi_x=phi_x)


@dataclass(frozen=True)
class DerivedScales:
    """Unit-bridge quantities derived from a CircuitParams."""

    hbar_omega: float      # LC level spacing, GHz
    sigma0_sq: float       # zero-point flux variance of the bare LC ground state, Phi_0^2
    omega_cl_ratio: float  # effective trapping frequency over bare LC frequency


def derived_scales(params: CircuitParams) -> DerivedScales:
    hbar_omega = (2.0 / math.pi) * math.sqrt(params.e_l * params.e_c)
    sigma0_sq = (1.0 / TWO_PI) * math.sqrt(params.e_c / params.e_l)
    omega_cl_ratio = math.sqrt(1.0 + TWO_PI_SQ * params.e_j / params.e_l)
    return DerivedScales(hbar_omega, sigma0_sq, omega_cl_ratio)


@dataclass(frozen=True)
class ThreeJunctionParams:
    """Reduced description of a three-junction loop: e_j/e_c and the junction ratio alpha."""

    e_j_over_e_c: float
    alpha: float

    def __post_init__(self):
        if self.e_j_over_e_c <= 0.0:
            raise ConfigError("e_j_over_e_c must be positive")
        if not self.alpha > 0.5:
            raise ConfigError(f"alpha must exceed 1/2, got {self.alpha}")


def potential(params: CircuitParams, phi):
    """Double-well potential U(phi) in GHz; phi in Phi_0 units (scalar or array)."""
    phi = np.asarray(phi, dtype=float)
    u = params.e_l * (phi - params.phi_x) ** 2 - params.e_j * np.cos(TWO_PI * phi)
    return u if u.ndim else float(u)


class WellGeometry(NamedTuple):
    phi_left: float
    phi_right: float
    separation: float
    u_min: float
    phi_barrier: float
    u_barrier: float
    is_double_well: bool


def well_geometry(params: CircuitParams, xatol: float = 1e-10) -> WellGeometry:
    """Locate the potential minima around phi_x by bracketed 1-D minimization.

    Searches start from phi_x +/- 0.3.  For a single well both searches
    collapse onto the same point and is_double_well is False.
    """
    f = lambda p: potential(params, p)
    left = minimize_scalar(f, bounds=(params.phi_x - 0.6, params.phi_x),
                           method="bounded", options={"xatol": xatol})
    right = minimize_scalar(f, bounds=(params.phi_x, params.phi_x + 0.6),
                            method="bounded", options={"xatol": xatol})
    phi_l, phi_r = float(left.x), float(right.x)
    sep = phi_r - phi_l
    double = sep > 1e-6
    if double:
        barrier = minimize_scalar(lambda p: -potential(params, p),
                                  bounds=(phi_l, phi_r), method="bounded",
                                  options={"xatol": xatol})
        phi_b, u_b = float(barrier.x), float(-barrier.fun)
    else:
        phi_b = 0.5 * (phi_l + phi_r)
        u_b = potential(params, phi_b)
    u_min = min(float(left.fun), float(right.fun))
    return WellGeometry(phi_l, phi_r, sep if double else 0.0, u_min, phi_b, u_b, double)


def reference_variance(params: CircuitParams) -> float:
    """Flux variance of the single-well ground state in harmonic approximation.

    Equals hbar/(2 C omega_cl) = (1/2pi) sqrt(e_c / (e_l + 2 pi^2 e_j)) in
    Phi_0^2 units.  Accurate to better than 1% only in the deep-well regime.
    """
    if not params.deep_well:
        warnings.warn("harmonic reference variance requested outside the deep-well "
                      "regime (e_l/e_c and e_j/e_c should both exceed 1e3)",
                      stacklevel=2)
    return (1.0 / TWO_PI) * math.sqrt(params.e_c / (params.e_l + TWO_PI_SQ * params.e_j))


class EffectiveSize(NamedTuple):
    """Relative coherence of an ideal cat state, with the literature shorthand forms."""

    ratio: float               # cat_variance / reference_variance
    harmonic_approx: float     # 0.86*pi*sqrt((e_l + 2pi^2 e_j)/e_c)
    dominant_ej_approx: float  # 2*sqrt(2)*pi^2*sqrt(e_j/e_c)


def ideal_effective_size(params: CircuitParams, cat_variance: float) -> EffectiveSize:
    """Relative coherence of an ideal cat state of the given flux variance.

    The ratio is the defining quantity; the two closed-form approximations
    are evaluated separately and reported side by side, never substituted
    for the ratio.
    """
    if cat_variance <= 0.0:
        raise ConfigError("cat_variance must be positive")
    ratio = cat_variance / reference_variance(params)
    harmonic = 0.86 * math.pi * math.sqrt((params.e_l + TWO_PI_SQ * params.e_j) / params.e_c)
    dominant = 2.0 * math.sqrt(2.0) * math.pi**2 * math.sqrt(params.e_j / params.e_c)
    return EffectiveSize(ratio, harmonic, dominant)


def delft_effective_size(p: ThreeJunctionParams) -> float:
    """Closed-form effective size of the three-junction loop.

    4 * arccos^2(1/(2 alpha)) * sqrt(4 alpha + 2) * sqrt(e_j/e_c); scales as
    sqrt(e_j/e_c) and vanishes as alpha -> 1/2 from above.
    """
    return (4.0 * math.acos(1.0 / (2.0 * p.alpha)) ** 2
            * math.sqrt(4.0 * p.alpha + 2.0)
            * math.sqrt(p.e_j_over_e_c))


#: Built-in rf-SQUID presets.
#:
#: suny2000 is the Stony Brook rf-SQUID (E_C = 188 MHz, E_L = 13.48 THz,
#: E_J = 1.59 THz).  These values reproduce the published characterization of
#: that device: double-well minima separated by 0.655 Phi_0 at half-flux bias
#: and a target-state coherence about 194 times the single-well reference.
#: toy-deepwell is a synthetic deep double well (e_j/e_c = 1e4) used for
#: solver cross-checks.
PRESETS = {
    "suny2000": CircuitParams(e_c=0.188, e_l=13480.0, e_j=1590.0, phi_x=0.5),
    "toy-deepwell": CircuitParams(e_c=0.01, e_l=100.0, e_j=100.0, phi_x=0.5),
}

#: Three-junction presets; delft2000 uses the published e_j/e_c = 38, alpha = 0.8.
THREE_JUNCTION_PRESETS = {
    "delft2000": ThreeJunctionParams(e_j_over_e_c=38.0, alpha=0.8),
}
