from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel
from scipy.stats import circmean, circstd

from app.config import settings
from app.errors import DomainError, PreconditionError
from app.services.analysis.recurrence import amplitudes, sublattices
from app.services.lattice.graph import LatticeGraph
from app.services.spectral.eigen import Mode


class IntensityStats(BaseModel):
    mean: float
    relative_std: float


class PhaseStats(BaseModel):
    circular_mean: float
    circular_spread: float


class ConstantIntensityMetrics(BaseModel):
    intensity: IntensityStats
    phases: Dict[str, PhaseStats]
    neighbor_phase_differences: List[float]
    gain_leads: bool

    def is_constant(self, tol: Optional[float] = None) -> bool:
        tol = settings.DIAGNOSTIC_TOL if tol is None else tol
        return self.intensity.relative_std <= tol and all(p.circular_spread <= tol for p in self.phases.values())


class PhaseWinding(BaseModel):
    sites: List[int]
    unwrapped: List[float]
    total: float
    monotonic: bool


def wrap_phase(angle: float) -> float:
    """Map to (-pi, pi]."""
    wrapped = float(np.angle(np.exp(1j * angle)))
    return np.pi if wrapped == -np.pi else wrapped


def constant_intensity_metrics(mode: Mode, sites: Sequence[int], first_site: int = 1) -> ConstantIntensityMetrics:
    sites = list(sites)
    if not sites:
        raise DomainError("constant-intensity metrics need a non-empty region")
    groups = sublattices(sites)
    for name, members in groups.items():
        if len(members) < 2:
            raise DomainError(f"sublattice '{name}' has {len(members)} sites; need at least 2")

    psi = amplitudes(mode, sites, first_site)
    intensity = np.abs(psi) ** 2
    mean = float(np.mean(intensity))
    relative_std = float(np.std(intensity) / mean) if mean > 0 else 0.0

    phases: Dict[str, PhaseStats] = {}
    for name, members in groups.items():
        angles = np.angle(amplitudes(mode, members, first_site))
        phases[name] = PhaseStats(
            circular_mean=float(circmean(angles, high=np.pi, low=-np.pi)),
            circular_spread=float(np.nan_to_num(circstd(angles, high=np.pi, low=-np.pi))),
        )

    differences: List[float] = []
    gain_leads = True
    for (n, a), (m, b) in zip(zip(sites, psi), zip(sites[1:], psi[1:])):
        step = wrap_phase(float(np.angle(b) - np.angle(a)))
        differences.append(step)
        gain, loss = (a, b) if n % 2 == 0 else (b, a)
        if wrap_phase(float(np.angle(gain) - np.angle(loss))) <= 0:
            gain_leads = False

    return ConstantIntensityMetrics(
        intensity=IntensityStats(mean=mean, relative_std=relative_std),
        phases=phases,
        neighbor_phase_differences=differences,
        gain_leads=gain_leads,
    )


def phase_winding(mode: Mode, sites: Sequence[int], first_site: int = 1, floor: float = 1e-6) -> PhaseWinding:
    """Unwrapped arg(psi) across `sites`, skipping components below floor * max|psi|."""
    psi = amplitudes(mode, sites, first_site)
    peak = float(np.max(np.abs(psi))) if len(psi) else 0.0
    kept = [(s, p) for s, p in zip(sites, psi) if peak > 0 and abs(p) >= floor * peak]
    if len(kept) < 2:
        raise DomainError("phase winding needs at least two populated sites")
    unwrapped = np.unwrap(np.angle([p for _, p in kept]))
    steps = np.diff(unwrapped)
    tol = settings.DIAGNOSTIC_TOL
    monotonic = bool(np.all(steps >= -tol) or np.all(steps <= tol))
    return PhaseWinding(
        sites=[s for s, _ in kept],
        unwrapped=[float(v) for v in unwrapped],
        total=float(unwrapped[-1] - unwrapped[0]),
        monotonic=monotonic,
    )


def weak_coupling_ratio(mode: Mode, lattice: LatticeGraph) -> float:
    """Mean reservoir intensity over peak intensity in the coupled systems."""
    reservoir = lattice.region_sites("reservoir")
    systems = [s for s in lattice.sites if lattice.region_of(s) != "reservoir"]
    if not reservoir or not systems:
        raise DomainError("weak-coupling ratio needs a reservoir and at least one system")
    peak = float(np.max(np.abs(amplitudes(mode, systems, lattice.first_site)) ** 2))
    mean = float(np.mean(np.abs(amplitudes(mode, reservoir, lattice.first_site)) ** 2))
    return mean / peak if peak > 0 else float("inf")


def reservoir_edge(lattice: LatticeGraph) -> tuple:
    """(first reservoir site, the system site bonded to it)."""
    reservoir = lattice.region_sites("reservoir")
    if not reservoir:
        raise DomainError("lattice has no reservoir region")
    edge = reservoir[0]
    partners = [m for m, _ in lattice.neighbors(edge) if lattice.region_of(m) != "reservoir"]
    if not partners:
        raise DomainError(f"reservoir edge site {edge} has no system neighbor")
    return edge, partners[0]


def edge_amplitude_ratio(mode: Mode, lattice: LatticeGraph, metrics: Optional[ConstantIntensityMetrics] = None) -> float:
    """|psi| at the reservoir's edge gain site over |psi| at the adjacent system site."""
    reservoir = lattice.region_sites("reservoir")
    metrics = metrics or constant_intensity_metrics(mode, reservoir, lattice.first_site)
    if not metrics.is_constant():
        raise PreconditionError(
            f"mode is not constant-intensity (relative std {metrics.intensity.relative_std:.2e})"
        )
    edge, system_site = reservoir_edge(lattice)
    psi = mode.vector
    denominator = abs(psi[lattice.position(system_site)])
    if denominator == 0:
        raise PreconditionError(f"system edge site {system_site} carries no amplitude")
    return float(abs(psi[lattice.position(edge)]) / denominator)
