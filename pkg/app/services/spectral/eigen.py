from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from app.config import settings
from app.errors import DomainError, NumericalFailure


@dataclass(frozen=True)
class Mode:
    energy: complex
    vector: np.ndarray
    branch_id: Optional[int] = None

    def with_branch(self, branch_id: int) -> "Mode":
        return replace(self, branch_id=branch_id)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.vector) ** 2


def fix_gauge(vector: np.ndarray) -> np.ndarray:
    """Unit norm, largest component real and positive."""
    vec = np.asarray(vector, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    pivot = int(np.argmax(np.round(np.abs(vec), 12)))
    phase = vec[pivot] / abs(vec[pivot])
    return vec / phase


def overlap(u: np.ndarray, v: np.ndarray) -> float:
    return float(abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v)))


def residual(ham: np.ndarray, mode: Mode) -> float:
    return float(np.linalg.norm(ham @ mode.vector - mode.energy * mode.vector))


def eigendecompose(ham: np.ndarray) -> List[Mode]:
    """All right eigenpairs, ordered by (Im E, Re E).

    Raises NumericalFailure when LAPACK does not converge or the residual/trace contract fails.
    """
    ham = np.asarray(ham, dtype=complex)
    if ham.ndim != 2 or ham.shape[0] != ham.shape[1]:
        raise DomainError(f"Hamiltonian must be square, got shape {ham.shape}")
    if not np.all(np.isfinite(ham)):
        raise DomainError("Hamiltonian has non-finite entries")
    try:
        values, vectors = scipy.linalg.eig(ham)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}", shape=ham.shape) from exc

    order = np.lexsort((values.real, values.imag))
    modes = [Mode(energy=complex(values[k]), vector=fix_gauge(vectors[:, k])) for k in order]

    scale = float(np.linalg.norm(ham, "fro"))
    bound = settings.EIG_RESIDUAL_FACTOR * max(scale, np.finfo(float).tiny)
    worst = max((residual(ham, m) for m in modes), default=0.0)
    if worst > bound:
        raise NumericalFailure(f"eigen residual {worst:.3e} above {bound:.3e}", shape=ham.shape, residual=worst)
    drift = abs(complex(np.sum(values)) - complex(np.trace(ham)))
    if drift > bound:
        raise NumericalFailure(f"trace identity off by {drift:.3e}", shape=ham.shape, residual=drift)
    return modes


def energies(modes: Sequence[Mode]) -> np.ndarray:
    return np.array([m.energy for m in modes], dtype=complex)


def vectors(modes: Sequence[Mode]) -> np.ndarray:
    return np.column_stack([m.vector for m in modes])


def closest_to(modes: Sequence[Mode], target: complex, on_axis: bool = False) -> Mode:
    pool = [m for m in modes if not on_axis or abs(m.energy.real) <= settings.AXIS_TOL] or list(modes)
    return min(pool, key=lambda m: abs(m.energy - target))
