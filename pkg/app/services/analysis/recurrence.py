from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel

from app.errors import DomainError
from app.services.spectral.eigen import Mode


class LinearFit(BaseModel):
    slope: float
    intercept: float
    max_abs_residual: float


def alpha_from_gamma(gamma: float, t: float = 1.0) -> float:
    """gamma^2/(2 t^2) - 1; alpha = 1 at gamma = 2t."""
    if t <= 0:
        raise DomainError(f"coupling t must be positive, got {t}")
    return gamma * gamma / (2.0 * t * t) - 1.0


def alpha_from_energy(energy: complex, v_a: complex, v_b: complex, t: float = 1.0) -> complex:
    """Sublattice recurrence coefficient at any energy: ((E - V_A)(E - V_B))/(2 t^2) - 1."""
    if t <= 0:
        raise DomainError(f"coupling t must be positive, got {t}")
    return (energy - v_a) * (energy - v_b) / (2.0 * t * t) - 1.0


def amplitudes(mode: Mode, sites: Sequence[int], first_site: int = 1) -> np.ndarray:
    positions = [s - first_site for s in sites]
    if positions and (min(positions) < 0 or max(positions) >= mode.vector.size):
        raise DomainError(f"sites {list(sites)} fall outside the mode's {mode.vector.size} components")
    return mode.vector[positions]


def sublattices(sites: Sequence[int]) -> Dict[str, List[int]]:
    """Split by label parity; even labels carry gain in the presets."""
    return {
        "even": [s for s in sites if s % 2 == 0],
        "odd": [s for s in sites if s % 2 == 1],
    }


def recurrence_residuals(mode: Mode, sites: Sequence[int], alpha: complex, first_site: int = 1) -> Dict[str, float]:
    """Per-sublattice max |psi_n - 2 alpha psi_{n-2} + psi_{n-4}| / max|psi| over the region."""
    sites = list(sites)
    if len(sites) < 5:
        raise DomainError(f"recurrence needs at least 5 sites, got {len(sites)}")
    members = set(sites)
    psi = dict(zip(sites, amplitudes(mode, sites, first_site)))
    scale = max(float(np.max(np.abs(list(psi.values())))), np.finfo(float).tiny)
    out: Dict[str, float] = {"even": 0.0, "odd": 0.0}
    for n in sites:
        if n - 2 in members and n - 4 in members:
            term = abs(psi[n] - 2 * alpha * psi[n - 2] + psi[n - 4]) / scale
            key = "even" if n % 2 == 0 else "odd"
            out[key] = max(out[key], float(term))
    return out


def recurrence_residual(mode: Mode, sites: Sequence[int], alpha: complex, first_site: int = 1) -> float:
    return max(recurrence_residuals(mode, sites, alpha, first_site).values())


def linear_fit(mode: Mode, sites: Sequence[int], first_site: int = 1) -> LinearFit:
    """Least-squares line of |psi_n| against n."""
    if len(sites) < 3:
        raise DomainError(f"linear fit needs at least 3 sites, got {len(sites)}")
    x = np.asarray(sites, dtype=float)
    y = np.abs(amplitudes(mode, sites, first_site))
    slope, intercept = np.polyfit(x, y, 1)
    peak = float(np.max(y))
    deviation = float(np.max(np.abs(y - (slope * x + intercept)))) / peak if peak > 0 else 0.0
    return LinearFit(slope=float(slope), intercept=float(intercept), max_abs_residual=deviation)


def sublattice_fits(mode: Mode, sites: Sequence[int], first_site: int = 1) -> Dict[str, LinearFit]:
    return {
        name: linear_fit(mode, members, first_site)
        for name, members in sublattices(sites).items()
        if len(members) >= 3
    }
