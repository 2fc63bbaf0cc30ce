from typing import List

import numpy as np
import scipy.linalg

from app.errors import ConfigurationError, NumericalFailure
from app.services.lattice.graph import Bond, LatticeGraph, to_matrix


def build_ssh(n_sites: int, t_A: float, t_B: float, kappa0: float, start_index: int = 1, region: str = "system1") -> LatticeGraph:
    """SSH chain with uniform loss -i*kappa0.

    Bonds alternate t_B, t_A, t_B, ... from the left, so an odd chain ends on a t_A bond and,
    with t_A < t_B, hosts its edge mode at the right end.
    """
    if n_sites <= 0 or n_sites % 2 == 0:
        raise ConfigurationError(f"SSH chain needs an odd number of sites, got {n_sites}", key="n_system")
    if t_A <= 0 or t_B <= 0:
        raise ConfigurationError(f"SSH couplings must be positive (t_A={t_A}, t_B={t_B})", key="t_A")
    if kappa0 < 0:
        raise ConfigurationError(f"kappa0 must be nonnegative, got {kappa0}", key="kappa0")
    bonds: List[Bond] = []
    for k in range(1, n_sites):
        amp = t_B if k % 2 == 1 else t_A
        bonds.append(Bond(i=start_index + k - 1, j=start_index + k, amplitude=amp))
    return LatticeGraph(
        n_sites=n_sites,
        first_site=start_index,
        bonds=tuple(bonds),
        onsite=tuple(complex(0.0, -kappa0) for _ in range(n_sites)),
        region_tags=tuple(region for _ in range(n_sites)),
    )


def build_reservoir(n_sites: int, t: float, gamma: float, start_index: int) -> LatticeGraph:
    """Uniform chain; +i*gamma on even global labels (gain), -i*gamma on odd ones (loss)."""
    if n_sites <= 0:
        raise ConfigurationError(f"reservoir needs at least one site, got {n_sites}", key="n_reservoir")
    if t <= 0:
        raise ConfigurationError(f"reservoir coupling must be positive, got {t}", key="t")
    if gamma < 0:
        raise ConfigurationError(f"gamma must be nonnegative, got {gamma}", key="gamma")
    labels = range(start_index, start_index + n_sites)
    return LatticeGraph(
        n_sites=n_sites,
        first_site=start_index,
        bonds=tuple(Bond(i=s, j=s + 1, amplitude=t) for s in labels if s + 1 < start_index + n_sites),
        onsite=tuple(complex(0.0, gamma if s % 2 == 0 else -gamma) for s in labels),
        region_tags=tuple("reservoir" for _ in labels),
    )


def zero_space(g: LatticeGraph, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical null space of H."""
    return scipy.linalg.null_space(to_matrix(g), rcond=tol / max(1.0, float(np.linalg.norm(to_matrix(g), 2))))


def build_lieb_tail(n_sites: int = 11, t: float = 1.0, start_index: int = 1, region: str = "system2") -> LatticeGraph:
    """Quasi-1D Lieb termination: corner/stub pairs alternating with single backbone sites.

    Layout (local labels, contact = 1):

        2       5       8      11
        |       |       |       |
        1 - 3 - 4 - 6 - 7 - 9 - 10

    Corners form the minority sublattice, so the E=0 space has dimension pairs-1 and vanishes
    on every corner, the contact included. The default 11 sites give three dark zero modes.
    """
    if t <= 0:
        raise ConfigurationError(f"Lieb coupling must be positive, got {t}", key="t")
    if n_sites < 5 or (n_sites + 1) % 3 != 0:
        raise ConfigurationError(f"Lieb tail needs 3k-1 sites (k >= 2), got {n_sites}", key="n_tail")
    pairs = (n_sites + 1) // 3
    corners = [start_index + 3 * k for k in range(pairs)]
    bonds: List[Bond] = []
    for k, corner in enumerate(corners):
        bonds.append(Bond(i=corner, j=corner + 1, amplitude=t))
        if k + 1 < pairs:
            bonds.append(Bond(i=corner, j=corner + 2, amplitude=t))
            bonds.append(Bond(i=corner + 2, j=corner + 3, amplitude=t))
    g = LatticeGraph(
        n_sites=n_sites,
        first_site=start_index,
        bonds=tuple(bonds),
        onsite=tuple(0j for _ in range(n_sites)),
        region_tags=tuple(region for _ in range(n_sites)),
    )

    basis = zero_space(g)
    expected = pairs - 1
    if basis.shape[1] != expected:
        raise NumericalFailure(f"Lieb tail has {basis.shape[1]} zero modes, expected {expected}", shape=(n_sites, n_sites))
    dark = float(np.max(np.abs(basis[g.position(start_index), :]))) if expected else 0.0
    if dark > 1e-10:
        raise NumericalFailure(f"Lieb zero modes are not dark at the contact (max {dark:.3e})", residual=dark)
    return g


def build_three_site_tail(t: float = 1.0, start_index: int = 1, region: str = "system2") -> LatticeGraph:
    """Uniform 3-site chain; isolated zero mode (1, 0, -1)/sqrt(2), spectrum {0, +-sqrt(2) t}."""
    if t <= 0:
        raise ConfigurationError(f"three-site coupling must be positive, got {t}", key="t")
    return LatticeGraph(
        n_sites=3,
        first_site=start_index,
        bonds=(Bond(i=start_index, j=start_index + 1, amplitude=t), Bond(i=start_index + 1, j=start_index + 2, amplitude=t)),
        onsite=(0j, 0j, 0j),
        region_tags=(region, region, region),
    )
