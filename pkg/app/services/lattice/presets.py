from enum import Enum
from typing import Callable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.errors import ConfigurationError
from app.services.lattice.builders import build_lieb_tail, build_reservoir, build_ssh, build_three_site_tail
from app.services.lattice.graph import LatticeGraph, add_uniform_shift, graph_from_sites, join, mirror_reflect


LatticeFamily = Callable[[float], LatticeGraph]

T_PRIME = "t_prime"


class Variant(str, Enum):
    SINGLE_SYSTEM_RESERVOIR = "single_system_reservoir"
    RESERVOIR_LIEB = "reservoir_lieb"
    RESERVOIR_THREE_SITE = "reservoir_three_site"
    MIRROR_BRIDGE = "mirror_bridge"
    CUSTOM = "custom"


class PhysicalParameters(BaseModel):
    """Reference defaults, in units of t."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    t: float = Field(1.0, gt=0)
    t_A: float = Field(0.2, gt=0)
    t_B: float = Field(1.0, gt=0)
    kappa0: float = Field(1.0, ge=0)
    gamma: float = Field(2.0, ge=0)
    t_prime: float = 1.0
    n_system: int = Field(9, gt=0)
    n_reservoir: Optional[int] = Field(None, gt=0)
    n_tail: int = Field(11, gt=0)
    system2_loss: bool = False
    uniform_loss: float = Field(0.0, ge=0)

    def reservoir_sites(self, variant: Variant) -> int:
        if self.n_reservoir is not None:
            return self.n_reservoir
        return 11 if variant == Variant.MIRROR_BRIDGE else 10


class CustomBond(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    i: int
    j: int
    amplitude: float | str

    def resolve(self, t_prime: float) -> float:
        if isinstance(self.amplitude, str):
            if self.amplitude != T_PRIME:
                raise ConfigurationError(f"bond amplitude must be a number or '{T_PRIME}'", key="graph.bonds.amplitude")
            return t_prime
        return float(self.amplitude)


class CustomSite(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    index: int
    region: str
    onsite_imag: float


class CustomGraph(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    sites: List[CustomSite] = Field(min_length=1)
    bonds: List[CustomBond] = Field(default_factory=list)

    def build(self, t_prime: float) -> LatticeGraph:
        return graph_from_sites(
            [s.model_dump() for s in self.sites],
            [(b.i, b.j, b.resolve(t_prime)) for b in self.bonds],
        )


class ConfigPreset(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    variant: Variant
    parameters: PhysicalParameters = Field(default_factory=PhysicalParameters)
    graph: Optional[CustomGraph] = None

    def family(self) -> LatticeFamily:
        return lambda t_prime: self.build(t_prime)

    def build(self, t_prime: Optional[float] = None) -> LatticeGraph:
        p = self.parameters
        tp = (p.t_prime if t_prime is None else t_prime) / p.t
        if self.variant == Variant.CUSTOM:
            if self.graph is None:
                raise ConfigurationError("custom preset requires a graph", key="graph")
            g = self.graph.build(tp)
        else:
            g = self._build_preset(tp)
        return add_uniform_shift(g, p.uniform_loss / p.t)

    def _system1_and_reservoir(self, t_prime: float) -> Tuple[LatticeGraph, int]:
        p = self.parameters
        system = build_ssh(p.n_system, p.t_A / p.t, p.t_B / p.t, p.kappa0 / p.t)
        n_res = p.reservoir_sites(self.variant)
        reservoir = build_reservoir(n_res, 1.0, p.gamma / p.t, start_index=system.last_site + 1)
        return join(system, reservoir, system.last_site, reservoir.first_site, t_prime), system.last_site + n_res

    def _build_preset(self, t_prime: float) -> LatticeGraph:
        p = self.parameters
        left, edge = self._system1_and_reservoir(t_prime)
        if self.variant == Variant.SINGLE_SYSTEM_RESERVOIR:
            return left
        if self.variant == Variant.MIRROR_BRIDGE:
            right = mirror_reflect(build_ssh(p.n_system, p.t_A / p.t, p.t_B / p.t, p.kappa0 / p.t, region="system2"))
            return join(left, right, edge, right.first_site, t_prime)
        kappa2 = p.kappa0 / p.t if p.system2_loss else 0.0
        if self.variant == Variant.RESERVOIR_LIEB:
            tail = add_uniform_shift(build_lieb_tail(p.n_tail, 1.0), kappa2)
            return join(left, tail, edge, tail.first_site, 1.0)
        if self.variant == Variant.RESERVOIR_THREE_SITE:
            tail = add_uniform_shift(build_three_site_tail(1.0), kappa2)
            g = join(left, tail, edge, tail.first_site, 1.0)
            # the far end of the tail also touches the last reservoir site
            return g.with_bond(edge, edge + 3, 1.0)
        raise ConfigurationError(f"unknown variant {self.variant}", key="preset")


PRESETS = {
    "fig1": ConfigPreset(variant=Variant.SINGLE_SYSTEM_RESERVOIR),
    "fig2a": ConfigPreset(variant=Variant.RESERVOIR_LIEB),
    "fig2c": ConfigPreset(variant=Variant.RESERVOIR_THREE_SITE),
    "fig3": ConfigPreset(variant=Variant.MIRROR_BRIDGE),
    "fig4": ConfigPreset(variant=Variant.MIRROR_BRIDGE),
}


def preset_for(name: str, **overrides) -> ConfigPreset:
    """Preset by variant value or figure key, with parameter overrides."""
    base = PRESETS.get(name)
    if base is None:
        try:
            base = ConfigPreset(variant=Variant(name))
        except ValueError:
            raise ConfigurationError(f"unknown preset '{name}'", key="preset")
    if not overrides:
        return base
    params = base.parameters.model_copy(update=overrides)
    return base.model_copy(update={"parameters": PhysicalParameters.model_validate(params.model_dump())})
