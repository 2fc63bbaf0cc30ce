from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np
import orjson
import pandas as pd

from app.errors import ConfigurationError, DomainError
from app.services.lattice.graph import LatticeGraph, graph_from_sites, graph_to_dict, to_matrix
from app.services.spectral.eigen import Mode, fix_gauge
from app.services.spectral.sweep import SweepTrajectory


SPECTRUM_COLUMNS = ["t_prime", "branch_id", "re_E", "im_E"]
MODE_COLUMNS = ["site", "region", "re_psi", "im_psi", "abs_psi", "phase"]
FLOAT_FORMAT = "%.17g"


def dump_json(payload: Any) -> bytes:
    return orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY) + b"\n"


def read_json(path: Path) -> Any:
    try:
        return orjson.loads(Path(path).read_bytes())
    except orjson.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc.msg}", line=exc.lineno, column=exc.colno) from exc


def spectrum_frame(t_prime: float, modes: Sequence[Mode]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "t_prime": [float(t_prime)] * len(modes),
            "branch_id": [m.branch_id if m.branch_id is not None else k for k, m in enumerate(modes)],
            "re_E": [m.energy.real for m in modes],
            "im_E": [m.energy.imag for m in modes],
        },
        columns=SPECTRUM_COLUMNS,
    )


def sweep_frame(traj: SweepTrajectory) -> pd.DataFrame:
    frames = [
        pd.DataFrame(
            {
                "t_prime": traj.grid,
                "branch_id": b,
                "re_E": traj.branch_energies(b).real,
                "im_E": traj.branch_energies(b).imag,
            },
            columns=SPECTRUM_COLUMNS,
        )
        for b in traj.branch_ids
    ]
    return pd.concat(frames, ignore_index=True).sort_values(["t_prime", "branch_id"], kind="stable")


def mode_frame(mode: Mode, lattice: LatticeGraph) -> pd.DataFrame:
    psi = np.asarray(mode.vector, dtype=complex)
    if psi.size != lattice.n_sites:
        raise DomainError(f"mode has {psi.size} components, lattice has {lattice.n_sites} sites")
    return pd.DataFrame(
        {
            "site": lattice.sites,
            "region": list(lattice.region_tags),
            "re_psi": psi.real,
            "im_psi": psi.imag,
            "abs_psi": np.abs(psi),
            "phase": np.angle(psi),
        },
        columns=MODE_COLUMNS,
    )


def read_mode(path: Path, lattice: LatticeGraph) -> Mode:
    """Mode profile back from CSV; energy is the Rayleigh quotient on `lattice`."""
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [c for c in MODE_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigurationError(f"{path}: missing columns {missing}")
    if list(frame["site"]) != lattice.sites:
        raise ConfigurationError(f"{path}: site labels do not match the lattice")
    psi = frame["re_psi"].to_numpy(dtype=float) + 1j * frame["im_psi"].to_numpy(dtype=float)
    energy = complex(np.vdot(psi, to_matrix(lattice) @ psi) / np.vdot(psi, psi))
    return Mode(energy=energy, vector=fix_gauge(psi))


def read_lattice(path: Path) -> LatticeGraph:
    """Lattice written next to a mode profile, so `read_mode` needs no preset."""
    data = read_json(path)
    try:
        bonds = [(int(b["i"]), int(b["j"]), float(b["amplitude"])) for b in data["bonds"]]
        return graph_from_sites(data["sites"], bonds)
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"{path}: not a lattice document ({exc})") from exc


class OutputWriter:
    """Sequential writer into one output directory; the directory is created on first write."""

    def __init__(self, out_dir: Path | str):
        self.out_dir = Path(out_dir)
        self.written: List[Path] = []

    def _target(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        self.written.append(path)
        return path

    def csv(self, name: str, frame: pd.DataFrame) -> Path:
        path = self._target(name)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        print(f"[Store] wrote {path}")
        return path

    def json(self, name: str, payload: Any) -> Path:
        path = self._target(name)
        path.write_bytes(dump_json(payload))
        print(f"[Store] wrote {path}")
        return path

    def spectrum(self, t_prime: float, modes: Sequence[Mode], name: str = "spectrum.csv") -> Path:
        return self.csv(name, spectrum_frame(t_prime, modes))

    def sweep(self, traj: SweepTrajectory, name: str = "sweep.csv") -> Path:
        return self.csv(name, sweep_frame(traj))

    def mode(self, mode_id: str, mode: Mode, lattice: LatticeGraph) -> Path:
        return self.csv(f"mode_{mode_id}.csv", mode_frame(mode, lattice))

    def lattice(self, mode_id: str, lattice: LatticeGraph) -> Path:
        return self.json(f"lattice_{mode_id}.json", graph_to_dict(lattice))

    def report(self, mode_id: str, payload: Dict[str, Any]) -> Path:
        return self.json(f"report_{mode_id}.json", payload)

    def events(self, payload: Dict[str, Any], name: str = "events.json") -> Path:
        return self.json(name, payload)

    def manifest(self) -> List[str]:
        return sorted({p.name for p in self.written})