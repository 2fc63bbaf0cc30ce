from typing import List

import numpy as np
from pydantic import BaseModel

from app.errors import DomainError
from app.services.lattice.graph import LatticeGraph
from app.services.spectral.eigen import Mode


class EdgeFlux(BaseModel):
    n: int
    m: int
    J: float


def edge_flux(mode: Mode, lattice: LatticeGraph, n: int, m: int) -> float:
    """J_{n,m} = i t_nm psi_m* psi_n + c.c.; negative means power flows from n to m."""
    amplitude = lattice.bond_amplitude(n, m)
    if amplitude is None:
        raise DomainError(f"sites ({n}, {m}) are not joined by a bond")
    psi_n = mode.vector[lattice.position(n)]
    psi_m = mode.vector[lattice.position(m)]
    return float(2.0 * amplitude * np.imag(np.conj(psi_n) * psi_m))


def all_fluxes(mode: Mode, lattice: LatticeGraph) -> List[EdgeFlux]:
    return [EdgeFlux(n=b.i, m=b.j, J=edge_flux(mode, lattice, b.i, b.j)) for b in lattice.bonds]


def continuity_check(mode: Mode, lattice: LatticeGraph) -> np.ndarray:
    """|2 Im(E)|psi_n|^2 - 2 Im(V_n)|psi_n|^2 - sum_m J_{n,m}| for every site n."""
    intensity = mode.intensity
    out = np.zeros(lattice.n_sites)
    for k, label in enumerate(lattice.sites):
        outflow = sum(edge_flux(mode, lattice, label, m) for m, _ in lattice.neighbors(label))
        balance = 2 * mode.energy.imag * intensity[k] - 2 * lattice.onsite_at(label).imag * intensity[k] - outflow
        out[k] = abs(balance)
    return out
