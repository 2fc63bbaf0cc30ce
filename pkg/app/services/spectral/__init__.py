from app.services.spectral.eigen import Mode, closest_to, eigendecompose, energies, fix_gauge, overlap, residual
from app.services.spectral.roots import CoalescenceReport, certify_events, certify_pair, find_exceptional_point, find_zero_mode, minimize_gap
from app.services.spectral.sweep import SweepEvent, SweepTrajectory, make_grid, spectrum_at, sweep
from app.services.spectral.symmetry import PairingReport, check_nhph, classify_parity, shift_covariance

__all__ = [
    "CoalescenceReport",
    "Mode",
    "PairingReport",
    "SweepEvent",
    "SweepTrajectory",
    "certify_events",
    "certify_pair",
    "check_nhph",
    "classify_parity",
    "closest_to",
    "eigendecompose",
    "energies",
    "find_exceptional_point",
    "find_zero_mode",
    "fix_gauge",
    "make_grid",
    "minimize_gap",
    "overlap",
    "residual",
    "shift_covariance",
    "spectrum_at",
    "sweep",
]
