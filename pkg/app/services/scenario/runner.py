from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from app.config import overridden, settings
from app.errors import ConfigurationError
from app.services.analysis.report import analyze_mode
from app.services.lattice.graph import to_matrix
from app.services.scenario.payloads import events_payload, report_payload
from app.services.scenario.reproduce import reproduce
from app.services.scenario.schema import ScenarioConfig
from app.services.spectral.eigen import closest_to, eigendecompose
from app.services.spectral.roots import certify_events, find_zero_mode
from app.services.spectral.sweep import sweep
from app.services.spectral.symmetry import check_nhph, max_nhph_deviation
from app.store.files import OutputWriter
from app.utils.progress import emit_process


@dataclass
class RunResult:
    out_dir: Path
    files: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)


def _spectrum(config: ScenarioConfig, writer: OutputWriter, summary: Dict[str, Any]):
    t_prime = config.t_prime
    lattice = config.lattice(t_prime)
    modes = eigendecompose(to_matrix(lattice))
    if config.graph is None:
        summary["nhph_max_deviation"] = check_nhph(modes).max_deviation
    writer.spectrum(t_prime, modes)
    summary["n_modes"] = len(modes)


def _sweep(config: ScenarioConfig, writer: OutputWriter, summary: Dict[str, Any]):
    family = config.to_preset().family()
    traj = sweep(family, config.grid())
    certified = certify_events(family, traj)
    writer.sweep(traj)
    writer.events(events_payload(traj, certified))
    summary["events"] = len(traj.events)
    if config.graph is None:
        summary["nhph_max_deviation"] = max_nhph_deviation(traj.spectrum(k) for k in range(len(traj.grid)))


def _find_zero(config: ScenarioConfig, writer: OutputWriter, summary: Dict[str, Any]):
    if config.bracket is None:
        raise ConfigurationError("find-zero needs a bracket [lo, hi]", key="bracket")
    preset = config.to_preset()
    t_star, mode = find_zero_mode(preset.family(), config.bracket)
    lattice = preset.build(t_star)
    writer.mode("0", mode, lattice)
    writer.lattice("0", lattice)
    writer.report("0", report_payload(analyze_mode(mode, lattice), t_star, "0", "find-zero"))
    summary["t_star"] = t_star
    emit_process({"message": "zero mode", "t_prime": t_star, "abs_E": abs(mode.energy)})


def _analyze(config: ScenarioConfig, writer: OutputWriter, summary: Dict[str, Any]):
    t_prime = config.t_prime
    lattice = config.lattice(t_prime)
    mode = closest_to(eigendecompose(to_matrix(lattice)), config.target)
    writer.mode("1", mode, lattice)
    writer.lattice("1", lattice)
    writer.report("1", report_payload(analyze_mode(mode, lattice), t_prime, "1", "analyze"))
    summary["analyzed_energy"] = [mode.energy.real, mode.energy.imag]


STEPS = {
    "spectrum": _spectrum,
    "sweep": _sweep,
    "find-zero": _find_zero,
    "analyze": _analyze,
}


def run_scenario(config: ScenarioConfig, out_dir: Optional[str] = None, tol: Optional[float] = None) -> RunResult:
    """Run every requested analysis in order; files go to out_dir (or the config's / settings' default)."""
    writer = OutputWriter(out_dir or config.output_dir or settings.OUTPUT_DIR)
    summary: Dict[str, Any] = {}
    with overridden(**config.tolerances.settings_values()), overridden(ZERO_TOL=tol):
        for name in config.analyses:
            print(f"[Runner] {name}")
            emit_process({"message": f"running {name}", "step": name})
            if name == "reproduce":
                summary["acceptance"] = reproduce(config.figure, writer, config)
            else:
                STEPS[name](config, writer, summary)
    return RunResult(out_dir=writer.out_dir, files=writer.manifest(), summary=summary)
