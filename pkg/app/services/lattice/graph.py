from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.errors import ConfigurationError


Region = Literal["system1", "reservoir", "system2"]
REGIONS: Tuple[str, ...] = ("system1", "reservoir", "system2")


class Bond(BaseModel):
    model_config = ConfigDict(frozen=True)

    i: int
    j: int
    amplitude: float


class LatticeGraph(BaseModel):
    """Sites first_site..first_site+n_sites-1 with real bonds and imaginary on-site potentials.

    Labels are global (1-based in the presets) so the parity of a label decides the
    gain/loss sublattice without translation.
    """

    model_config = ConfigDict(frozen=True)

    n_sites: int = Field(gt=0)
    first_site: int = 1
    bonds: Tuple[Bond, ...] = ()
    onsite: Tuple[complex, ...]
    region_tags: Tuple[Region, ...]

    @model_validator(mode="after")
    def _validate(self) -> "LatticeGraph":
        if len(self.onsite) != self.n_sites or len(self.region_tags) != self.n_sites:
            raise ConfigurationError(
                f"onsite/region lengths ({len(self.onsite)}, {len(self.region_tags)}) do not match n_sites={self.n_sites}"
            )
        for label, value in zip(self.sites, self.onsite):
            if complex(value).real != 0.0:
                raise ConfigurationError(f"site {label} has a real on-site part {complex(value).real}", key="onsite")
        seen = set()
        for bond in self.bonds:
            if bond.i == bond.j:
                raise ConfigurationError(f"self-coupling at site {bond.i}", key="bonds")
            for label in (bond.i, bond.j):
                if not self.contains(label):
                    raise ConfigurationError(f"bond ({bond.i}, {bond.j}) references unknown site {label}", key="bonds")
            edge = (min(bond.i, bond.j), max(bond.i, bond.j))
            if edge in seen:
                raise ConfigurationError(f"duplicate bond {edge}", key="bonds")
            seen.add(edge)
        return self

    @property
    def last_site(self) -> int:
        return self.first_site + self.n_sites - 1

    @property
    def sites(self) -> List[int]:
        return list(range(self.first_site, self.first_site + self.n_sites))

    def contains(self, label: int) -> bool:
        return self.first_site <= label <= self.last_site

    def position(self, label: int) -> int:
        if not self.contains(label):
            raise ConfigurationError(f"site {label} is not in [{self.first_site}, {self.last_site}]")
        return label - self.first_site

    def onsite_at(self, label: int) -> complex:
        return complex(self.onsite[self.position(label)])

    def region_of(self, label: int) -> str:
        return self.region_tags[self.position(label)]

    def region_sites(self, region: str) -> List[int]:
        return [s for s, tag in zip(self.sites, self.region_tags) if tag == region]

    def neighbors(self, label: int) -> List[Tuple[int, float]]:
        out: List[Tuple[int, float]] = []
        for bond in self.bonds:
            if bond.i == label:
                out.append((bond.j, bond.amplitude))
            elif bond.j == label:
                out.append((bond.i, bond.amplitude))
        return sorted(out)

    def bond_amplitude(self, i: int, j: int) -> Optional[float]:
        for bond in self.bonds:
            if (bond.i, bond.j) in ((i, j), (j, i)):
                return bond.amplitude
        return None

    def with_bond(self, i: int, j: int, amplitude: float) -> "LatticeGraph":
        return self.model_copy(update={"bonds": self.bonds + (Bond(i=i, j=j, amplitude=amplitude),)}).revalidate()

    def relabel(self, first_site: int) -> "LatticeGraph":
        shift = first_site - self.first_site
        bonds = tuple(Bond(i=b.i + shift, j=b.j + shift, amplitude=b.amplitude) for b in self.bonds)
        return LatticeGraph(
            n_sites=self.n_sites,
            first_site=first_site,
            bonds=bonds,
            onsite=self.onsite,
            region_tags=self.region_tags,
        )

    def revalidate(self) -> "LatticeGraph":
        return LatticeGraph.model_validate(self.model_dump())


def to_matrix(g: LatticeGraph) -> np.ndarray:
    """Dense H with H_nn = onsite(n) and H_ij = H_ji = amplitude on every bond."""
    ham = np.zeros((g.n_sites, g.n_sites), dtype=complex)
    ham[np.diag_indices(g.n_sites)] = np.asarray(g.onsite, dtype=complex)
    for bond in g.bonds:
        p, q = g.position(bond.i), g.position(bond.j)
        ham[p, q] = bond.amplitude
        ham[q, p] = bond.amplitude
    return ham


def join(a: LatticeGraph, b: LatticeGraph, site_a: int, site_b: int, t_prime: float) -> LatticeGraph:
    """Disjoint union plus bond (site_a, site_b); b's labels continue after a's last site.

    `site_b` is given in b's own labels.
    """
    if not a.contains(site_a):
        raise ConfigurationError(f"join: site {site_a} not in the left graph", key="site_a")
    if not b.contains(site_b):
        raise ConfigurationError(f"join: site {site_b} not in the right graph", key="site_b")
    shifted = b.relabel(a.last_site + 1)
    target = site_b - b.first_site + shifted.first_site
    return LatticeGraph(
        n_sites=a.n_sites + b.n_sites,
        first_site=a.first_site,
        bonds=a.bonds + shifted.bonds + (Bond(i=site_a, j=target, amplitude=t_prime),),
        onsite=a.onsite + shifted.onsite,
        region_tags=a.region_tags + shifted.region_tags,
    )


def add_uniform_shift(g: LatticeGraph, kappa: float) -> LatticeGraph:
    """Copy of g with every on-site potential decreased by i*kappa (uniform extra loss)."""
    if kappa == 0:
        return g
    onsite = tuple(complex(0.0, complex(v).imag - kappa) for v in g.onsite)
    return g.model_copy(update={"onsite": onsite})


def passive_shift(g: LatticeGraph) -> LatticeGraph:
    """Smallest uniform loss that leaves no site with gain."""
    top = max(complex(v).imag for v in g.onsite)
    return add_uniform_shift(g, max(top, 0.0))


def mirror_reflect(g: LatticeGraph) -> LatticeGraph:
    """Reverse site order (k -> first+last-k); couplings, potentials and tags move along.

    Bond order and orientation are kept, so reflecting twice gives back the same graph.
    """
    total = g.first_site + g.last_site
    return LatticeGraph(
        n_sites=g.n_sites,
        first_site=g.first_site,
        bonds=tuple(Bond(i=total - b.i, j=total - b.j, amplitude=b.amplitude) for b in g.bonds),
        onsite=tuple(reversed(g.onsite)),
        region_tags=tuple(reversed(g.region_tags)),
    )


def reversal_permutation(n: int) -> np.ndarray:
    return np.eye(n)[::-1]


def is_mirror_symmetric(g: LatticeGraph, tol: float = 1e-12) -> bool:
    ham = to_matrix(g)
    perm = reversal_permutation(g.n_sites)
    return bool(np.max(np.abs(perm @ ham @ perm - ham)) <= tol)


def average_condition(g: LatticeGraph) -> float:
    """(Im V_B + Im V_A)/2 over the reservoir's even and odd sublattices."""
    sites = g.region_sites("reservoir")
    if not sites:
        raise ConfigurationError("lattice has no reservoir region", key="region_tags")
    even = [g.onsite_at(s).imag for s in sites if s % 2 == 0]
    odd = [g.onsite_at(s).imag for s in sites if s % 2 == 1]
    if not even or not odd:
        raise ConfigurationError("reservoir needs sites on both sublattices", key="region_tags")
    return float((np.mean(even) + np.mean(odd)) / 2)


def graph_to_dict(g: LatticeGraph) -> Dict[str, object]:
    return {
        "first_site": g.first_site,
        "sites": [
            {"index": s, "region": tag, "onsite_imag": complex(v).imag}
            for s, tag, v in zip(g.sites, g.region_tags, g.onsite)
        ],
        "bonds": [{"i": b.i, "j": b.j, "amplitude": b.amplitude} for b in g.bonds],
    }


def graph_from_sites(sites: Sequence[Dict[str, object]], bonds: Sequence[Tuple[int, int, float]]) -> LatticeGraph:
    ordered = sorted(sites, key=lambda s: int(s["index"]))
    labels = [int(s["index"]) for s in ordered]
    if labels != list(range(labels[0], labels[0] + len(labels))):
        raise ConfigurationError("custom graph site indices must be contiguous", key="graph.sites")
    return LatticeGraph(
        n_sites=len(ordered),
        first_site=labels[0],
        bonds=tuple(Bond(i=i, j=j, amplitude=amp) for i, j, amp in bonds),
        onsite=tuple(complex(0.0, float(s["onsite_imag"])) for s in ordered),
        region_tags=tuple(str(s["region"]) for s in ordered),
    )
