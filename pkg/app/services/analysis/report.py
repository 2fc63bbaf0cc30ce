from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from app.errors import DomainError, LucasError
from app.services.analysis.flux import EdgeFlux, all_fluxes, continuity_check
from app.services.analysis.intensity import (
    IntensityStats,
    PhaseStats,
    constant_intensity_metrics,
    edge_amplitude_ratio,
    phase_winding,
    weak_coupling_ratio,
)
from app.services.analysis.recurrence import LinearFit, alpha_from_gamma, recurrence_residual, sublattice_fits
from app.services.lattice.graph import LatticeGraph, average_condition, is_mirror_symmetric
from app.services.spectral.eigen import Mode
from app.services.spectral.symmetry import classify_parity


class AnalysisReport(BaseModel):
    energy: List[float]
    alpha: float
    recurrence_residual: Optional[float] = None
    sublattice_fits: Dict[str, LinearFit] = Field(default_factory=dict)
    intensity_stats: Optional[IntensityStats] = None
    phase_stats: Dict[str, PhaseStats] = Field(default_factory=dict)
    neighbor_phase_differences: List[float] = Field(default_factory=list)
    gain_leads: Optional[bool] = None
    fluxes: List[EdgeFlux] = Field(default_factory=list)
    continuity_residuals: List[float] = Field(default_factory=list)
    max_continuity_residual: float = 0.0
    average_condition: Optional[float] = None
    weak_coupling_ratio: Optional[float] = None
    edge_amplitude_ratio: Optional[float] = None
    system1_phase_monotonic: Optional[bool] = None
    parity: Optional[str] = None


def reservoir_gamma(lattice: LatticeGraph) -> float:
    """Half the gain/loss contrast between the reservoir sublattices (shift invariant)."""
    sites = lattice.region_sites("reservoir")
    if not sites:
        raise DomainError("lattice has no reservoir region")
    even = np.mean([lattice.onsite_at(s).imag for s in sites if s % 2 == 0] or [0.0])
    odd = np.mean([lattice.onsite_at(s).imag for s in sites if s % 2 == 1] or [0.0])
    return float(abs(even - odd) / 2)


def _optional(fn, *args):
    try:
        return fn(*args)
    except LucasError:
        return None


def analyze_mode(mode: Mode, lattice: LatticeGraph, t: float = 1.0) -> AnalysisReport:
    """Every diagnostic that applies to the lattice's regions; inapplicable ones stay empty."""
    reservoir = lattice.region_sites("reservoir")
    first = lattice.first_site
    alpha = alpha_from_gamma(reservoir_gamma(lattice) if reservoir else 0.0, t)
    residuals = continuity_check(mode, lattice)

    report = AnalysisReport(
        energy=[mode.energy.real, mode.energy.imag],
        alpha=alpha,
        fluxes=all_fluxes(mode, lattice),
        continuity_residuals=[float(r) for r in residuals],
        max_continuity_residual=float(np.max(residuals)) if residuals.size else 0.0,
    )
    if reservoir:
        report.average_condition = _optional(average_condition, lattice)
        report.weak_coupling_ratio = _optional(weak_coupling_ratio, mode, lattice)

    if len(reservoir) >= 5:
        report.recurrence_residual = recurrence_residual(mode, reservoir, alpha, first)
    report.sublattice_fits = sublattice_fits(mode, reservoir, first)
    try:
        metrics = constant_intensity_metrics(mode, reservoir, first)
    except DomainError:
        metrics = None
    if metrics is not None:
        report.intensity_stats = metrics.intensity
        report.phase_stats = metrics.phases
        report.neighbor_phase_differences = metrics.neighbor_phase_differences
        report.gain_leads = metrics.gain_leads
        report.edge_amplitude_ratio = _optional(edge_amplitude_ratio, mode, lattice, metrics)

    system1 = lattice.region_sites("system1")
    if len(system1) >= 2:
        try:
            report.system1_phase_monotonic = phase_winding(mode, system1, first).monotonic
        except DomainError:
            pass
    if is_mirror_symmetric(lattice):
        report.parity = classify_parity(mode, lattice)
    return report
