from dataclasses import dataclass, field
from typing import Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from app.config import settings
from app.errors import PreconditionError, SymmetryViolation
from app.services.lattice.graph import LatticeGraph, is_mirror_symmetric
from app.services.spectral.eigen import Mode, energies


Parity = Literal["symmetric", "antisymmetric", "none"]


@dataclass(frozen=True)
class PairingReport:
    pairs: List[Tuple[int, int, float]]
    zero_modes: List[int] = field(default_factory=list)
    max_deviation: float = 0.0


def check_nhph(modes: Sequence[Mode], tol: Optional[float] = None) -> PairingReport:
    """Match every E with some E' such that |E' + E*| <= tol (E -> -E* symmetry)."""
    tol = settings.NHPH_TOL if tol is None else tol
    values = energies(modes)
    cost = np.abs(values[:, None] + np.conj(values)[None, :])
    rows, cols = linear_sum_assignment(cost)
    deviations = cost[rows, cols]
    if deviations.size and float(deviations.max()) > tol:
        worst = np.argsort(deviations)[::-1][:5]
        offenders = [
            {"re_E": float(values[rows[k]].real), "im_E": float(values[rows[k]].imag), "deviation": float(deviations[k])}
            for k in worst
            if deviations[k] > tol
        ]
        raise SymmetryViolation(
            f"no (E, -E*) matching within {tol:.1e}; worst deviation {float(deviations.max()):.3e}", offenders
        )
    pairs = [(int(r), int(c), float(d)) for r, c, d in zip(rows, cols, deviations)]
    zero_modes = [k for k, e in enumerate(values) if abs(e.real) <= tol]
    return PairingReport(pairs=pairs, zero_modes=zero_modes, max_deviation=float(deviations.max()) if deviations.size else 0.0)


def classify_parity(mode: Mode, lattice: LatticeGraph, threshold: Optional[float] = None) -> Parity:
    if not is_mirror_symmetric(lattice):
        raise PreconditionError("lattice is not mirror-symmetric (P H P != H)")
    threshold = settings.PARITY_THRESHOLD if threshold is None else threshold
    vec = mode.vector / np.linalg.norm(mode.vector)
    image = np.vdot(vec, vec[::-1])
    if abs(image) < threshold:
        return "none"
    return "symmetric" if image.real > 0 else "antisymmetric"


def shift_covariance(modes: Sequence[Mode], shifted: Sequence[Mode], kappa: float) -> Tuple[float, float]:
    """(max |E_shifted - (E - i kappa)|, min matched eigenvector overlap) after optimal matching."""
    expected = energies(modes) - 1j * kappa
    cost = np.abs(energies(shifted)[None, :] - expected[:, None])
    rows, cols = linear_sum_assignment(cost)
    deviation = float(cost[rows, cols].max()) if rows.size else 0.0
    overlaps = [abs(np.vdot(modes[r].vector, shifted[c].vector)) for r, c in zip(rows, cols)]
    return deviation, float(min(overlaps, default=1.0))


def max_nhph_deviation(spectra: Iterable[Sequence[Mode]]) -> float:
    """Worst (E, -E*) matching error over many spectra, e.g. every point of a sweep."""
    return max((check_nhph(modes, tol=np.inf).max_deviation for modes in spectra), default=0.0)
