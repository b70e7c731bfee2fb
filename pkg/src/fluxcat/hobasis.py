"""Circuit Hamiltonian in the truncated LC-oscillator basis.

The basis consists of eigenstates of the e_j = 0 circuit (an LC oscillator of
frequency omega) centered at `center`.  The quadratic inductive term is then
exact, and only the Josephson cosine needs matrix elements.  Those are taken
from the Cahill-Glauber closed form for displacement operators,

    <m|e^{i 2 pi phi}|n> = e^{i 2 pi c} e^{-lam^2/2} sqrt(n!/m!) (i lam)^{m-n}
                            L_n^{m-n}(lam^2)          (m >= n),

with lam = 2 pi sigma0 and L the associated Laguerre polynomial; the cosine
matrix is its Hermitian (real) part.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .circuit import TWO_PI, CircuitParams, derived_scales, well_geometry
from .errors import ConfigError, EigensolveError, NumericalError

MAX_DIM = 2000

# Rescaling bounds for the scaled diagonal recurrence.
_RESCALE_HI = 1e250
_RESCALE_LO = 1e-250


def displacement_table(lam: float, dim: int) -> np.ndarray:
    """Magnitude part of the oscillator displacement matrix elements.

    Returns the symmetric table

        R[m, n] = e^{-lam^2/2} lam^|m-n| sqrt(min(m,n)!/max(m,n)!)
                  L_{min(m,n)}^{|m-n|}(lam^2).

    Each diagonal (fixed k = |m-n|) is generated by an upward three-term
    recurrence on the *full product* above, which is bounded by 1, so the
    recurrence never overflows.  Seeds are formed in log space and carried
    with a per-diagonal shift so that diagonals whose seed underflows are
    still recovered once the entries grow back into range.
    """
    if dim < 1:
        raise ConfigError("dim must be positive")
    if lam < 0.0:
        raise ConfigError("lam must be non-negative")
    if lam == 0.0:
        return np.eye(dim)

    x = lam * lam
    R = np.zeros((dim, dim))
    k = np.arange(dim, dtype=float)

    # P~_n carries P_n^k * exp(-shift); start at n = 0 with P~_0 = 1.
    shift = -0.5 * x + k * math.log(lam) - 0.5 * gammaln(k + 1.0)
    p_prev = np.zeros(dim)
    p_cur = np.ones(dim)
    log1e250 = math.log(_RESCALE_HI)

    def emit(col: int, p: np.ndarray, sh: np.ndarray):
        count = dim - col
        vals = np.zeros(count)
        pc = p[:count]
        nz = pc != 0.0
        with np.errstate(under="ignore", over="ignore"):
            logmag = sh[:count][nz] + np.log(np.abs(pc[nz]))
            vals[nz] = np.sign(pc[nz]) * np.exp(logmag)
        R[col:, col] = vals

    emit(0, p_cur, shift)
    for n in range(dim - 1):
        nf = float(n)
        r1 = np.sqrt((nf + 1.0) / (nf + 1.0 + k))
        a = (2.0 * nf + 1.0 + k - x) * r1 / (nf + 1.0)
        if n > 0:
            r2 = np.sqrt((nf + 1.0) * nf / ((nf + 1.0 + k) * (nf + k)))
            b = (nf + k) * r2 / (nf + 1.0)
            p_new = a * p_cur - b * p_prev
        else:
            p_new = a * p_cur
        p_prev, p_cur = p_cur, p_new

        mag = np.abs(p_cur)
        big = mag > _RESCALE_HI
        if big.any():
            p_cur[big] *= _RESCALE_LO
            p_prev[big] *= _RESCALE_LO
            shift[big] += log1e250
        small = (mag < _RESCALE_LO) & (np.abs(p_prev) < _RESCALE_LO) & (shift > -1e4)
        if small.any():
            p_cur[small] *= _RESCALE_HI
            p_prev[small] *= _RESCALE_HI
            shift[small] -= log1e250

        emit(n + 1, p_cur, shift)

    iu = np.triu_indices(dim, 1)
    R[iu] = R.T[iu]
    return R


def cosine_matrix(lam: float, center: float, dim: int) -> np.ndarray:
    """Matrix of cos(2 pi phi) in the oscillator basis centered at `center`.

    Entry (m, n) is cos(2 pi center + |m-n| pi/2) times the displacement
    magnitude table; the quarter-period phases are looked up exactly so the
    parity structure at half-integer centers is preserved to rounding.
    """
    R = displacement_table(lam, dim)
    theta = TWO_PI * center
    quarter = np.array([math.cos(theta), -math.sin(theta),
                        -math.cos(theta), math.sin(theta)])
    idx = np.arange(dim)
    phase = quarter[np.abs(np.subtract.outer(idx, idx)) % 4]
    return phase * R


@dataclass(frozen=True)
class HoBasisConfig:
    """Truncation and expansion center of the oscillator basis."""

    dim: int = 512
    center: float | None = None  # None resolves to params.phi_x

    def __post_init__(self):
        if self.dim < 32:
            raise ConfigError(f"basis dim must be at least 32, got {self.dim}")
        if self.dim > MAX_DIM:
            raise ConfigError(f"basis dim must not exceed {MAX_DIM}, got {self.dim}")

    def resolve_center(self, params: CircuitParams) -> float:
        return params.phi_x if self.center is None else self.center


def build_hamiltonian(params: CircuitParams, config: HoBasisConfig) -> np.ndarray:
    """Dense symmetric circuit Hamiltonian in the truncated oscillator basis (GHz).

    With the basis centered at phi_x the inductive term is diagonal by
    construction; for a shifted center the exact linear and constant
    corrections are added.
    """
    scales = derived_scales(params)
    center = config.resolve_center(params)
    dim = config.dim
    lam = TWO_PI * math.sqrt(scales.sigma0_sq)

    n = np.arange(dim)
    h = np.diag(scales.hbar_omega * (n + 0.5))
    h -= params.e_j * cosine_matrix(lam, center, dim)

    offset = center - params.phi_x
    if offset != 0.0:
        h += params.e_l * offset**2 * np.eye(dim)
        ladder = np.sqrt(n[1:].astype(float))  # <n-1|(a + a^dag)|n>
        lin = 2.0 * params.e_l * offset * math.sqrt(scales.sigma0_sq)
        h += lin * (np.diag(ladder, 1) + np.diag(ladder, -1))
    return h


@dataclass
class SpectralResult:
    """Eigenvalues (ascending, GHz) and eigenvectors (columns) in the HO basis."""

    energies: np.ndarray
    states: np.ndarray
    params: CircuitParams
    config: HoBasisConfig


def eigensolve(h: np.ndarray,
               params: CircuitParams | None = None,
               config: HoBasisConfig | None = None,
               residual_rtol: float = 1e-9) -> SpectralResult:
    """Full symmetric eigendecomposition with verified invariants.

    Checks the input for symmetry, then verifies unit norms, mutual
    orthogonality and the per-pair reconstruction residual
    ||H v - E v|| <= residual_rtol * ||H||.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ConfigError("Hamiltonian must be a square matrix")
    scale = np.max(np.abs(h))
    if scale > 0 and np.max(np.abs(h - h.T)) > 1e-12 * scale:
        raise ConfigError("Hamiltonian must be symmetric to 1e-12 relative")
    try:
        energies, states = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure path
        raise EigensolveError(f"symmetric eigensolver did not converge: {exc}") from exc

    norms = np.linalg.norm(states, axis=0)
    worst = int(np.argmax(np.abs(norms - 1.0)))
    if abs(norms[worst] - 1.0) > 1e-12:
        raise EigensolveError("eigenvector norm deviates from 1", index=worst)
    gram = states.T @ states - np.eye(h.shape[0])
    if np.max(np.abs(gram)) > 1e-10:
        raise EigensolveError("eigenvectors not orthogonal to 1e-10",
                              index=int(np.unravel_index(np.argmax(np.abs(gram)), gram.shape)[0]))
    resid = np.linalg.norm(h @ states - states * energies, axis=0)
    worst = int(np.argmax(resid))
    hnorm = float(np.max(np.abs(energies)))  # spectral norm, exact after eigh
    if resid[worst] > residual_rtol * max(hnorm, 1e-300):
        raise EigensolveError(
            f"reconstruction residual {resid[worst]:.3e} exceeds bound", index=worst)
    return SpectralResult(energies, states, params, config)


def solve_circuit(params: CircuitParams, config: HoBasisConfig) -> SpectralResult:
    return eigensolve(build_hamiltonian(params, config), params, config)


def _sweep_point(args):
    params, config, phi_x, n_levels = args
    res = solve_circuit(params.with_phi_x(phi_x), HoBasisConfig(config.dim, None))
    return res.energies[:n_levels].copy()


def sweep_phi_x(params: CircuitParams,
                phi_x_values: Sequence[float],
                n_levels: int,
                config: HoBasisConfig | None = None,
                workers: int = 1) -> np.ndarray:
    """Lowest n_levels energies for each bias point; rows follow input order.

    The basis is re-centered at each phi_x.  Points are independent, so the
    sweep may fan out over a process pool; results are gathered by index.
    """
    if len(phi_x_values) == 0:
        raise ConfigError("sweep range must not be empty")
    config = config or HoBasisConfig()
    if n_levels < 1 or n_levels > config.dim:
        raise ConfigError("n_levels must lie in [1, dim]")
    jobs = [(params, config, float(p), n_levels) for p in phi_x_values]
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(_sweep_point, jobs))
        else:
            rows = [_sweep_point(j) for j in jobs]
    except NumericalError as exc:
        raise NumericalError(f"sweep failed: {exc}") from exc
    return np.vstack(rows)


#: Doublets split by less than this many hbar*omega are treated as unresolved.
SPLITTING_FLOOR = 1e-6


def find_target_states(result: SpectralResult) -> tuple[int, int]:
    """Indices of the sub-barrier doublet with the largest tunnel splitting.

    Candidate doublets are consecutive pairs (2k, 2k+1) whose mean energy
    lies inside [U_min, U_barrier) and whose splitting resolves above
    SPLITTING_FLOOR * hbar_omega.  Ties break toward the lower doublet.
    """
    params, config = result.params, result.config
    if params is None or config is None:
        raise ConfigError("target-state search needs params/config snapshots")
    geom = well_geometry(params)
    if not geom.is_double_well:
        raise NumericalError("no sub-barrier doublet: potential has a single well")
    hbar_omega = derived_scales(params).hbar_omega
    floor = SPLITTING_FLOOR * hbar_omega

    energies = result.energies
    best: tuple[int, int] | None = None
    best_split = -1.0
    for k in range(len(energies) // 2):
        e0, e1 = energies[2 * k], energies[2 * k + 1]
        mean = 0.5 * (e0 + e1)
        if mean >= geom.u_barrier:
            break
        split = e1 - e0
        if mean >= geom.u_min and split > floor and split > best_split:
            best, best_split = (2 * k, 2 * k + 1), split
    if best is None:
        raise NumericalError("no sub-barrier doublet with resolvable splitting")
    return best


def convergence_gap(params: CircuitParams, config: HoBasisConfig,
                    n_levels: int, dim_step: int = 32) -> float:
    """Max relative change of the lowest n_levels energies when dim grows by dim_step."""
    w0 = solve_circuit(params, config).energies[:n_levels]
    w1 = solve_circuit(params, HoBasisConfig(config.dim + dim_step, config.center)).energies[:n_levels]
    return float(np.max(np.abs(w1 - w0) / np.abs(w0)))
