from app.services.analysis.flux import EdgeFlux, all_fluxes, continuity_check, edge_flux
from app.services.analysis.intensity import (
    ConstantIntensityMetrics,
    constant_intensity_metrics,
    edge_amplitude_ratio,
    phase_winding,
    weak_coupling_ratio,
)
from app.services.analysis.recurrence import (
    LinearFit,
    alpha_from_energy,
    alpha_from_gamma,
    linear_fit,
    recurrence_residual,
    recurrence_residuals,
    sublattice_fits,
)
from app.services.analysis.report import AnalysisReport, analyze_mode
