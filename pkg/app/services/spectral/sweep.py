from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from app.config import settings
from app.errors import PreconditionError, TrackingAmbiguityError
from app.services.lattice.graph import to_matrix
from app.services.lattice.presets import LatticeFamily
from app.services.spectral.eigen import Mode, eigendecompose, energies, fix_gauge, overlap, vectors


EventType = Literal["zero_crossing", "exceptional_point", "avoided_crossing"]


@dataclass(frozen=True)
class SweepEvent:
    type: EventType
    parameter: float
    branch_ids: Tuple[int, ...]
    interval: Tuple[float, float]
    gap: Optional[float] = None
    overlap: Optional[float] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "type": self.type,
            "parameter": self.parameter,
            "branch_ids": list(self.branch_ids),
            "interval": list(self.interval),
            "gap": self.gap,
            "overlap": self.overlap,
        }


@dataclass
class SweepTrajectory:
    parameter: str
    grid: np.ndarray
    branches: Dict[int, List[Mode]]
    events: List[SweepEvent] = field(default_factory=list)

    @property
    def branch_ids(self) -> List[int]:
        return sorted(self.branches)

    def energy_table(self) -> np.ndarray:
        """(grid, branch) complex energies."""
        return np.array([[m.energy for m in self.branches[b]] for b in self.branch_ids], dtype=complex).T

    def branch_energies(self, branch_id: int) -> np.ndarray:
        return np.array([m.energy for m in self.branches[branch_id]], dtype=complex)

    def index_of(self, value: float) -> int:
        return int(np.argmin(np.abs(self.grid - value)))

    def events_of(self, kind: EventType, branch_id: Optional[int] = None) -> List[SweepEvent]:
        return [e for e in self.events if e.type == kind and (branch_id is None or branch_id in e.branch_ids)]

    def spectrum(self, index: int) -> List[Mode]:
        """All tracked modes at one grid point, in branch order."""
        return [self.branches[b][index] for b in self.branch_ids]

    def branch_starting_at(self, energy: complex, tol: float) -> Optional[int]:
        starts = {b: abs(self.branches[b][0].energy - energy) for b in self.branch_ids}
        best = min(starts, key=starts.get)
        return best if starts[best] <= tol else None


def make_grid(lo: Optional[float] = None, hi: Optional[float] = None, step: Optional[float] = None) -> np.ndarray:
    lo = settings.SWEEP_LO if lo is None else lo
    hi = settings.SWEEP_HI if hi is None else hi
    step = settings.SWEEP_STEP if step is None else step
    if step <= 0 or hi <= lo:
        raise PreconditionError(f"grid needs lo < hi and step > 0 (got {lo}, {hi}, {step})")
    # last point never passes hi
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


def spectrum_at(family: LatticeFamily, value: float) -> List[Mode]:
    return eigendecompose(to_matrix(family(float(value))))


def evaluate_grid(family: LatticeFamily, grid: Sequence[float], workers: Optional[int] = None) -> List[List[Mode]]:
    """Independent eigendecompositions; order of results follows the grid."""
    workers = workers or settings.MAX_WORKERS
    if workers <= 1:
        return [spectrum_at(family, x) for x in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda x: spectrum_at(family, x), grid))


def _clusters(modes: Sequence[Mode], tol: float) -> List[List[int]]:
    values = energies(modes)
    seen: set = set()
    out: List[List[int]] = []
    for k in range(len(values)):
        if k in seen:
            continue
        group = [j for j in range(len(values)) if j not in seen and abs(values[j] - values[k]) <= tol]
        seen.update(group)
        if len(group) > 1:
            out.append(group)
    return out


def align_degenerate(previous: Sequence[Mode], current: Sequence[Mode], tol: Optional[float] = None) -> List[Mode]:
    """Rotate exactly degenerate eigenvectors onto the previous point's vectors."""
    tol = settings.DEGENERACY_TOL if tol is None else tol
    out = list(current)
    prev_vecs = vectors(previous)
    for group in _clusters(current, tol):
        block = np.column_stack([current[k].vector for k in group])
        basis = scipy.linalg.orth(block)
        if basis.shape[1] < len(group):
            # coalesced (defective) cluster; nothing to rotate
            continue
        weights = np.linalg.norm(basis.conj().T @ prev_vecs, axis=0)
        chosen = np.argsort(-weights, kind="stable")[: len(group)]
        u, _, vh = np.linalg.svd(basis.conj().T @ prev_vecs[:, chosen])
        rotated = basis @ (u @ vh)
        for col, k in enumerate(group):
            vec = rotated[:, col]
            out[k] = Mode(energy=current[k].energy, vector=vec / np.linalg.norm(vec))
    return out


def align_split(previous: Sequence[Mode], current: Sequence[Mode], tol: Optional[float] = None) -> List[Mode]:
    """Re-pick the basis of the previous point's degenerate clusters along the vectors they split into."""
    tol = settings.DEGENERACY_TOL if tol is None else tol
    out = list(previous)
    cur_vecs = vectors(current)
    for group in _clusters(previous, tol):
        basis = scipy.linalg.orth(np.column_stack([previous[k].vector for k in group]))
        if basis.shape[1] < len(group):
            continue
        weights = np.linalg.norm(basis.conj().T @ cur_vecs, axis=0)
        chosen = np.argsort(-weights, kind="stable")[: len(group)]
        projected = basis @ (basis.conj().T @ cur_vecs[:, chosen])
        projected = projected / np.linalg.norm(projected, axis=0)
        # projections must still span the cluster
        if np.linalg.svd(projected, compute_uv=False)[-1] < 1e-3:
            continue
        for col, k in enumerate(group):
            out[k] = Mode(energy=previous[k].energy, vector=fix_gauge(projected[:, col]), branch_id=previous[k].branch_id)
    return out


def greedy_assign(previous: Sequence[Mode], current: Sequence[Mode]) -> Tuple[List[int], float]:
    """current index for each previous branch; largest overlap first, ties by |dE|."""
    ov = np.abs(vectors(previous).conj().T @ vectors(current))
    dist = np.abs(energies(previous)[:, None] - energies(current)[None, :])
    order = np.lexsort((dist.ravel(), -np.round(ov.ravel(), 9)))
    n = len(previous)
    assigned = [-1] * n
    taken = set()
    worst = 1.0
    for flat in order:
        i, j = divmod(int(flat), len(current))
        if assigned[i] >= 0 or j in taken:
            continue
        assigned[i] = j
        taken.add(j)
        worst = min(worst, float(ov[i, j]))
        if len(taken) == n:
            break
    return assigned, worst


def track(grid: Sequence[float], spectra: Sequence[Sequence[Mode]]) -> Dict[int, List[Mode]]:
    branches: Dict[int, List[Mode]] = {b: [m.with_branch(b)] for b, m in enumerate(spectra[0])}
    previous = [branches[b][0] for b in sorted(branches)]
    for k in range(1, len(grid)):
        current = align_degenerate(previous, spectra[k])
        previous = align_split(previous, current)
        for b, mode in enumerate(previous):
            branches[b][-1] = mode
        assigned, worst = greedy_assign(previous, current)
        if worst < settings.TRACK_OVERLAP_FLOOR:
            raise TrackingAmbiguityError(
                f"branch overlap {worst:.3f} below {settings.TRACK_OVERLAP_FLOOR} in [{grid[k - 1]}, {grid[k]}]; refine the grid",
                interval=(float(grid[k - 1]), float(grid[k])),
                overlap=worst,
            )
        previous = []
        for b, j in enumerate(assigned):
            mode = current[j].with_branch(b)
            branches[b].append(mode)
            previous.append(mode)
    return branches


def follow_branch(family: LatticeFamily, reference: Mode, start: float, stop: float, steps: int) -> List[Tuple[float, Mode]]:
    """Single-branch continuation by maximal overlap from `start` to `stop`."""
    path: List[Tuple[float, Mode]] = []
    ref = reference
    for x in np.linspace(start, stop, steps + 1)[1:]:
        modes = spectrum_at(family, x)
        best = max(modes, key=lambda m: (round(overlap(ref.vector, m.vector), 9), -abs(m.energy - ref.energy)))
        path.append((float(x), best))
        ref = best
    return path


def pair_near(modes: Sequence[Mode], reference: complex) -> Tuple[Mode, Mode]:
    ranked = sorted(modes, key=lambda m: abs(m.energy - reference))
    return ranked[0], ranked[1]


def _sign(values: np.ndarray, tol: float) -> np.ndarray:
    out = np.sign(values)
    out[np.abs(values) <= tol] = 0
    return out


def detect_zero_crossings(traj: SweepTrajectory) -> List[SweepEvent]:
    table = traj.energy_table()
    grid = traj.grid
    on_axis = np.abs(table.real) <= settings.AXIS_TOL
    out: List[SweepEvent] = []
    for col, b in enumerate(traj.branch_ids):
        im = table[:, col].imag
        if np.all(np.abs(table[:, col]) <= settings.ZERO_TOL):
            continue  # pinned at E=0 for every t'
        signs = _sign(im, settings.ZERO_TOL)
        for k in range(len(grid) - 1):
            if not (on_axis[k, col] and on_axis[k + 1, col]):
                continue
            if signs[k] * signs[k + 1] < 0:
                x = grid[k] + (grid[k + 1] - grid[k]) * im[k] / (im[k] - im[k + 1])
                out.append(SweepEvent("zero_crossing", float(x), (b,), (float(grid[k]), float(grid[k + 1]))))
            elif signs[k + 1] == 0 and 0 < k + 1 < len(grid) - 1 and signs[k] * signs[k + 2] < 0:
                out.append(SweepEvent("zero_crossing", float(grid[k + 1]), (b,), (float(grid[k]), float(grid[k + 2]))))
    return out


def detect_pair_events(traj: SweepTrajectory) -> List[SweepEvent]:
    table = traj.energy_table()
    grid = traj.grid
    ids = traj.branch_ids
    on_axis = np.abs(table.real) <= settings.AXIS_TOL
    pinned = np.all(np.abs(table) <= settings.ZERO_TOL, axis=0)
    out: List[SweepEvent] = []
    for p in range(len(ids)):
        for q in range(p + 1, len(ids)):
            if pinned[p] or pinned[q]:
                continue
            gap = np.abs(table[:, p] - table[:, q])
            both_on = on_axis[:, p] & on_axis[:, q]
            ep_intervals = set()
            for k in range(len(grid) - 1):
                leaving = both_on[k] and not on_axis[k + 1, p] and not on_axis[k + 1, q]
                entering = both_on[k + 1] and not on_axis[k, p] and not on_axis[k, q]
                off = k + 1 if leaving else k
                if (leaving or entering) and abs(table[off, p] + np.conj(table[off, q])) <= 1e3 * settings.NHPH_TOL:
                    edge = k if leaving else k + 1
                    out.append(SweepEvent(
                        "exceptional_point", float(grid[edge]), (ids[p], ids[q]),
                        (float(grid[max(k - 1, 0)]), float(grid[min(k + 2, len(grid) - 1)])),
                        gap=float(gap[edge]),
                    ))
                    ep_intervals.update({k, k + 1})
            for k in range(1, len(grid) - 1):
                if not (both_on[k - 1] and both_on[k] and both_on[k + 1]) or k in ep_intervals:
                    continue
                if gap[k] < gap[k - 1] and gap[k] <= gap[k + 1] and gap[k] <= settings.AVOIDED_WINDOW:
                    out.append(SweepEvent(
                        "avoided_crossing", float(grid[k]), (ids[p], ids[q]),
                        (float(grid[k - 1]), float(grid[k + 1])), gap=float(gap[k]),
                    ))
    return out


def pair_gap_minimum(
    traj: SweepTrajectory, a: int, b: int, lo: float = -np.inf, hi: float = np.inf
) -> Optional[SweepEvent]:
    """Deepest interior minimum of |E_a - E_b| in [lo, hi] while both branches stay on the imaginary axis."""
    ea, eb = traj.branch_energies(a), traj.branch_energies(b)
    gap = np.abs(ea - eb)
    on = (np.abs(ea.real) <= settings.AXIS_TOL) & (np.abs(eb.real) <= settings.AXIS_TOL)
    best: Optional[int] = None
    for k in range(1, len(traj.grid) - 1):
        if not (on[k - 1] and on[k] and on[k + 1]) or not lo <= traj.grid[k] <= hi:
            continue
        if gap[k] < gap[k - 1] and gap[k] <= gap[k + 1] and (best is None or gap[k] < gap[best]):
            best = k
    if best is None:
        return None
    grid = traj.grid
    return SweepEvent(
        "avoided_crossing", float(grid[best]), (a, b), (float(grid[best - 1]), float(grid[best + 1])), gap=float(gap[best]),
    )


def refine_zero_crossing(family: LatticeFamily, traj: SweepTrajectory, event: SweepEvent, factor: int) -> SweepEvent:
    lo, hi = event.interval
    start = traj.branches[event.branch_ids[0]][traj.index_of(lo)]
    path = [(lo, start)] + follow_branch(family, start, lo, hi, factor)
    for (x0, m0), (x1, m1) in zip(path, path[1:]):
        y0, y1 = m0.energy.imag, m1.energy.imag
        if y0 == 0.0:
            return SweepEvent("zero_crossing", x0, event.branch_ids, (x0, x1))
        if y0 * y1 < 0:
            x = x0 + (x1 - x0) * y0 / (y0 - y1)
            return SweepEvent("zero_crossing", float(x), event.branch_ids, (x0, x1))
    return event


def refine_pair_event(family: LatticeFamily, traj: SweepTrajectory, event: SweepEvent, factor: int) -> SweepEvent:
    lo, hi = event.interval
    k = traj.index_of(event.parameter)
    a, b = (traj.branches[i][k].energy for i in event.branch_ids)
    reference = (a + b) / 2
    best = (np.inf, event.parameter)
    for x in np.linspace(lo, hi, 2 * factor + 1):
        m1, m2 = pair_near(spectrum_at(family, x), reference)
        gap = abs(m1.energy - m2.energy)
        if gap < best[0]:
            best = (gap, float(x))
    return SweepEvent(event.type, best[1], event.branch_ids, event.interval, gap=float(best[0]), overlap=event.overlap)


def sweep(
    family: LatticeFamily,
    grid: Sequence[float],
    parameter: str = "t_prime",
    refine: Optional[int] = None,
    workers: Optional[int] = None,
) -> SweepTrajectory:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise PreconditionError("sweep grid needs at least two points")
    if np.any(np.diff(grid) <= 0):
        raise PreconditionError("sweep grid must be strictly increasing")
    print(f"[Sweep] {grid.size} points over [{grid[0]}, {grid[-1]}]")
    spectra = evaluate_grid(family, grid, workers)
    traj = SweepTrajectory(parameter=parameter, grid=grid, branches=track(grid, spectra))

    events = detect_zero_crossings(traj) + detect_pair_events(traj)
    factor = settings.SWEEP_REFINE if refine is None else refine
    if factor > 1:
        events = [
            refine_zero_crossing(family, traj, e, factor) if e.type == "zero_crossing" else refine_pair_event(family, traj, e, factor)
            for e in events
        ]
    traj.events = sorted(events, key=lambda e: (e.parameter, e.type, e.branch_ids))
    print(f"[Sweep] tracked {len(traj.branches)} branches, {len(traj.events)} events")
    return traj
