"""Uniform flux grids: basis conversion, density matrices, and the independent
finite-difference eigensolver used to cross-check the oscillator-basis route.

All quadrature on the grid is trapezoidal with uniform spacing, which for the
states handled here (tails far below tolerance at the boundary) coincides
with a plain Riemann sum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .circuit import CircuitParams, derived_scales, potential
from .errors import (BoundaryLeakError, ConfigError, InvalidDensityError,
                     ResolutionError, TruncationLossError)
from .hobasis import HoBasisConfig

#: Boundary probability density must fall below this fraction of the peak.
TAIL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FluxGrid:
    """Uniform grid over [phi_min, phi_max] with n_points samples."""

    phi_min: float = -1.0
    phi_max: float = 2.0
    n_points: int = 2048

    def __post_init__(self):
        if self.n_points < 256:
            raise ConfigError(f"n_points must be at least 256, got {self.n_points}")
        if not self.phi_max > self.phi_min:
            raise ConfigError("phi_max must exceed phi_min")

    @property
    def dphi(self) -> float:
        return (self.phi_max - self.phi_min) / (self.n_points - 1)

    @property
    def phi(self) -> np.ndarray:
        return np.linspace(self.phi_min, self.phi_max, self.n_points)


@dataclass
class GridState:
    """Wavefunction (kind='pure') or density matrix kernel (kind='mixed') on a grid.

    Pure data is a real amplitude vector with sum |psi|^2 dphi = 1; mixed data
    is the real symmetric kernel rho(phi_i, phi_j) with sum rho_ii dphi = 1.
    """

    grid: FluxGrid
    kind: str
    data: np.ndarray

    def validate(self, trace_tol: float = 1e-10) -> None:
        if self.kind == "pure":
            if self.data.ndim != 1 or self.data.shape[0] != self.grid.n_points:
                raise InvalidDensityError("pure state shape does not match grid")
            norm = float(np.sum(self.data**2) * self.grid.dphi)
            if abs(norm - 1.0) > trace_tol:
                raise InvalidDensityError(f"pure state norm {norm} deviates from 1")
        elif self.kind == "mixed":
            n = self.grid.n_points
            if self.data.shape != (n, n):
                raise InvalidDensityError("density kernel shape does not match grid")
            tr = float(np.trace(self.data) * self.grid.dphi)
            if abs(tr - 1.0) > trace_tol:
                raise InvalidDensityError(f"density trace {tr} deviates from 1")
            if np.max(np.abs(self.data - self.data.T)) > 1e-10 * np.max(np.abs(self.data)):
                raise InvalidDensityError("density kernel is not symmetric")
        else:
            raise ConfigError(f"unknown state kind {self.kind!r}")

    def as_mixed(self) -> "GridState":
        """Promote a pure state to its rank-1 density kernel."""
        if self.kind == "mixed":
            return self
        return GridState(self.grid, "mixed", np.outer(self.data, self.data))

    def diagonal(self) -> np.ndarray:
        """Probability density on the grid."""
        return self.data**2 if self.kind == "pure" else np.diagonal(self.data).copy()

    def flux_moments(self) -> tuple[float, float]:
        """(mean, variance) of the flux distribution."""
        dens = self.diagonal()
        phi = self.grid.phi
        d = self.grid.dphi
        mean = float(np.sum(phi * dens) * d)
        var = float(np.sum((phi - mean) ** 2 * dens) * d)
        return mean, var


def hermite_basis(params: CircuitParams, config: HoBasisConfig, grid: FluxGrid) -> np.ndarray:
    """Orthonormal oscillator eigenfunctions sampled on the grid, row n = h_n.

    Evaluated with the normalized three-term recurrence in the scaled
    coordinate xi = (phi - center)/sqrt(2 sigma0^2); all intermediate values
    stay O(1), so the recurrence is stable for any practical dim.
    """
    scales = derived_scales(params)
    center = config.resolve_center(params)
    xi = (grid.phi - center) / math.sqrt(2.0 * scales.sigma0_sq)
    dim = config.dim
    table = np.zeros((dim, grid.n_points))
    with np.errstate(under="ignore"):
        table[0] = np.pi**-0.25 * np.exp(-0.5 * xi**2)
    if dim > 1:
        table[1] = math.sqrt(2.0) * xi * table[0]
    for n in range(1, dim - 1):
        table[n + 1] = (math.sqrt(2.0 / (n + 1)) * xi * table[n]
                        - math.sqrt(n / (n + 1.0)) * table[n - 1])
    table *= (2.0 * scales.sigma0_sq) ** -0.25
    return table


def _check_tail(density: np.ndarray) -> None:
    peak = float(np.max(density))
    edge = max(float(density[0]), float(density[-1]))
    if edge > TAIL_TOLERANCE * peak:
        raise BoundaryLeakError(
            f"boundary density {edge:.3e} exceeds {TAIL_TOLERANCE:.0e} of peak {peak:.3e}; "
            "enlarge the grid")


def to_grid(coeffs: np.ndarray, params: CircuitParams, config: HoBasisConfig,
            grid: FluxGrid, basis: np.ndarray | None = None) -> GridState:
    """Sample an HO-basis coefficient vector as a wavefunction on the grid.

    The result is renormalized on the grid and rejected if its tails have not
    decayed at the boundary.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if basis is None:
        basis = hermite_basis(params, config, grid)
    if coeffs.shape[0] != basis.shape[0]:
        raise ConfigError("coefficient length does not match basis dim")
    psi = coeffs @ basis
    _check_tail(psi**2)
    psi /= math.sqrt(np.sum(psi**2) * grid.dphi)
    return GridState(grid, "pure", psi)


def finite_difference_oracle(params: CircuitParams, grid: FluxGrid, n_levels: int,
                             vectors: bool = False):
    """Eigenpairs of the second-order tridiagonal discretization of the circuit.

    The kinetic prefactor e_c/pi^2 is fixed by requiring the e_j = 0 problem
    to reproduce the LC spectrum (2/pi) sqrt(e_l e_c) (k + 1/2).  Returns
    (energies, None) or (energies, wavefunction rows) with rows normalized on
    the grid.  Entirely independent of the oscillator-basis construction.
    """
    scales = derived_scales(params)
    sigma0 = math.sqrt(scales.sigma0_sq)
    if grid.dphi >= sigma0 / 8.0:
        raise ResolutionError(
            f"grid spacing {grid.dphi:.3e} too coarse; need < sigma0/8 = {sigma0 / 8:.3e}")
    if n_levels < 1 or n_levels > grid.n_points - 2:
        raise ConfigError("n_levels out of range for this grid")
    phi = grid.phi
    kin = params.e_c / math.pi**2
    diag = 2.0 * kin / grid.dphi**2 + potential(params, phi)
    off = np.full(grid.n_points - 1, -kin / grid.dphi**2)
    if not vectors:
        energies = eigh_tridiagonal(diag, off, select="i",
                                    select_range=(0, n_levels - 1), eigvals_only=True)
        return energies, None
    energies, vecs = eigh_tridiagonal(diag, off, select="i",
                                      select_range=(0, n_levels - 1))
    waves = vecs.T / math.sqrt(grid.dphi)
    waves /= np.sqrt(np.sum(waves**2, axis=1, keepdims=True) * grid.dphi)
    return energies, waves


def project_to_basis(state: GridState, params: CircuitParams, config: HoBasisConfig,
                     basis: np.ndarray | None = None,
                     max_loss: float = 1e-3) -> tuple[np.ndarray, float]:
    """Project a mixed grid state onto the truncated HO basis.

    Returns (rho_ho, discarded) where rho_ho is renormalized to unit trace and
    discarded is the trace weight lost to truncation.  Raises when the loss
    exceeds max_loss.
    """
    if state.kind != "mixed":
        raise ConfigError("project_to_basis expects a mixed state; use as_mixed()")
    if basis is None:
        basis = hermite_basis(params, config, grid=state.grid)
    rho_ho = (basis @ state.data @ basis.T) * state.grid.dphi**2
    rho_ho = 0.5 * (rho_ho + rho_ho.T)
    tr = float(np.trace(rho_ho))
    discarded = 1.0 - tr
    if abs(discarded) > max_loss:
        raise TruncationLossError(
            f"projection lost {discarded:.3e} trace weight (limit {max_loss:.0e})")
    rho_ho /= tr
    return rho_ho, discarded


def save_grid_state(state: GridState, path: str | Path) -> None:
    """Dump a grid state: CSV (phi, psi) for pure, raw row-major matrix plus a
    JSON sidecar for mixed."""
    path = Path(path)
    if state.kind == "pure":
        with open(path, "w", newline="") as fh:
            fh.write("phi,psi\n")
            for p, a in zip(state.grid.phi, state.data):
                fh.write(f"{p:.12g},{a:.12g}\n")
        return
    state.data.astype(np.float64).tofile(path)
    sidecar = {"phi_min": state.grid.phi_min, "phi_max": state.grid.phi_max,
               "n_points": state.grid.n_points}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, sort_keys=True))


def load_grid_state(path: str | Path) -> GridState:
    path = Path(path)
    sidecar = Path(str(path) + ".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        grid = FluxGrid(meta["phi_min"], meta["phi_max"], meta["n_points"])
        data = np.fromfile(path, dtype=np.float64).reshape(grid.n_points, grid.n_points)
        return GridState(grid, "mixed", data)
    rows = np.genfromtxt(path, delimiter=",", names=True)
    phi, psi = rows["phi"], rows["psi"]
    grid = FluxGrid(float(phi[0]), float(phi[-1]), len(phi))
    return GridState(grid, "pure", np.asarray(psi))
