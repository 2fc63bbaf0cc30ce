from dataclasses import dataclass
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import golden

from app.config import settings
from app.errors import BracketError, EPInterferenceError, NumericalFailure, PreconditionError
from app.services.lattice.graph import to_matrix
from app.services.lattice.presets import LatticeFamily
from app.services.spectral.eigen import Mode, fix_gauge, overlap
from app.services.spectral.sweep import SweepEvent, SweepTrajectory, evaluate_grid, pair_near, spectrum_at, track


@dataclass(frozen=True)
class CoalescenceReport:
    kind: Literal["exceptional_point", "avoided_crossing"]
    parameter: float
    gap: float
    overlap: float
    re_split: float
    energies: Tuple[complex, complex]

    @property
    def is_exceptional(self) -> bool:
        return self.kind == "exceptional_point"

    def to_dict(self) -> Dict[str, object]:
        return {
            "type": self.kind,
            "parameter": self.parameter,
            "gap": self.gap,
            "overlap": self.overlap,
            "re_split": self.re_split,
            "energies": [[e.real, e.imag] for e in self.energies],
        }


def _check_bracket(bracket: Sequence[float]) -> Tuple[float, float]:
    if len(bracket) != 2:
        raise PreconditionError(f"bracket needs two values, got {list(bracket)}")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise PreconditionError(f"bracket must satisfy lo < hi, got [{lo}, {hi}]")
    return lo, hi


def pinned_basis(family: LatticeFamily, lo: float, hi: float, modes: Sequence[Mode], tol: float) -> np.ndarray:
    """Orthonormal basis of zero modes that stay eigenvectors across the whole bracket."""
    ham_hi = to_matrix(family(hi))
    scale = max(1.0, float(np.linalg.norm(ham_hi, "fro")))
    kept = [
        m.vector for m in modes
        if abs(m.energy) <= tol and np.linalg.norm(ham_hi @ m.vector) <= tol * scale
    ]
    if not kept:
        return np.zeros((len(modes), 0), dtype=complex)
    return scipy.linalg.orth(np.column_stack(kept))


def _complement(vec: np.ndarray, pinned: np.ndarray) -> np.ndarray:
    if pinned.shape[1] == 0:
        return vec
    return vec - pinned @ (pinned.conj().T @ vec)


def _follow(modes: Sequence[Mode], reference: Mode, pinned: np.ndarray) -> Mode:
    ref = _complement(reference.vector, pinned)

    def score(m: Mode) -> Tuple[float, float]:
        projected = _complement(m.vector, pinned)
        norm = np.linalg.norm(projected)
        ov = 0.0 if norm < 1e-12 else overlap(ref, projected)
        return round(ov, 9), -abs(m.energy - reference.energy)

    return max(modes, key=score)


def _first_crossing(
    grid: np.ndarray, branches: Dict[int, List[Mode]], tol_E: float
) -> Tuple[Optional[Tuple[int, int]], Optional[Tuple[float, float]]]:
    """(branch, step) of the earliest on-axis Im E sign change, plus the first axis departure seen."""
    crossing: Optional[Tuple[int, int]] = None
    departure: Optional[Tuple[float, float]] = None
    for b, path in branches.items():
        values = np.array([m.energy for m in path], dtype=complex)
        if abs(values[0].real) > tol_E or np.all(np.abs(values) <= tol_E):
            continue
        for k in range(len(grid) - 1):
            if abs(values[k + 1].real) > tol_E:
                if departure is None or grid[k + 1] < departure[0]:
                    departure = (float(grid[k + 1]), float(values[k + 1].real))
                break
            if values[k].imag == 0.0 or values[k].imag * values[k + 1].imag < 0:
                if crossing is None or k < crossing[1] or (k == crossing[1] and abs(values[0].imag) < abs(branches[crossing[0]][0].energy.imag)):
                    crossing = (b, k)
                break
    return crossing, departure


def isolate_tuned_mode(modes: Sequence[Mode], selected: Mode, pinned: np.ndarray, ham: np.ndarray) -> Mode:
    """Remove the t'-independent dark subspace from the zero-energy cluster around `selected`."""
    if pinned.shape[1] == 0:
        return selected
    window = max(settings.DEGENERACY_TOL, 10 * abs(selected.energy))
    cluster = [m.vector for m in modes if abs(m.energy - selected.energy) <= window]
    block = _complement(np.column_stack(cluster), pinned)
    u, s, _ = np.linalg.svd(block, full_matrices=False)
    if s.size == 0 or s[0] < 1e-12:
        return selected
    vec = fix_gauge(u[:, 0])
    return Mode(energy=complex(np.vdot(vec, ham @ vec)), vector=vec, branch_id=selected.branch_id)


def find_zero_mode(family: LatticeFamily, bracket: Sequence[float], tol_E: Optional[float] = None) -> Tuple[float, Mode]:
    """Bisect on Im E of the tracked on-axis branch that crosses zero inside the bracket."""
    lo, hi = _check_bracket(bracket)
    tol_E = settings.ZERO_TOL if tol_E is None else tol_E

    grid = np.linspace(lo, hi, settings.SEED_SUBSTEPS + 1)
    spectra = evaluate_grid(family, grid)
    pinned = pinned_basis(family, lo, hi, spectra[0], tol_E)
    branches = track(grid, spectra)

    crossing, departure = _first_crossing(grid, branches, tol_E)
    if crossing is None:
        if departure is not None:
            raise EPInterferenceError(
                f"tracked branch leaves the imaginary axis at t'={departure[0]:.6g} before Im E changes sign",
                parameter=departure[0], re_energy=departure[1],
            )
        raise BracketError(f"no on-axis Im E sign change in [{lo}, {hi}]")

    b, k = crossing
    a, ma = float(grid[k]), branches[b][k]
    c, mc = float(grid[k + 1]), branches[b][k + 1]
    if ma.energy.imag == 0.0:
        c, mc = a, ma

    for _ in range(settings.BISECT_MAX_ITER):
        if c - a <= settings.BISECT_XTOL or abs(mc.energy.imag) <= 1e-3 * tol_E:
            break
        mid = 0.5 * (a + c)
        mm = _follow(spectrum_at(family, mid), ma, pinned)
        if abs(mm.energy.real) > tol_E:
            raise EPInterferenceError(
                f"branch left the imaginary axis at t'={mid:.12g} (Re E={mm.energy.real:.3e})",
                parameter=mid, re_energy=float(mm.energy.real),
            )
        if mm.energy.imag == 0.0 or np.sign(mm.energy.imag) != np.sign(ma.energy.imag):
            c, mc = mid, mm
        else:
            a, ma = mid, mm

    t_star, chosen = (a, ma) if abs(ma.energy.imag) < abs(mc.energy.imag) else (c, mc)
    modes = spectrum_at(family, t_star)
    chosen = _follow(modes, chosen, pinned)
    mode = isolate_tuned_mode(modes, chosen, pinned, to_matrix(family(t_star)))
    if abs(mode.energy) > tol_E:
        raise NumericalFailure(f"root at t'={t_star:.12g} leaves |E|={abs(mode.energy):.3e} above {tol_E:.1e}", residual=abs(mode.energy))
    print(f"[Roots] zero mode at t'={t_star:.12g}, |E|={abs(mode.energy):.2e}, {pinned.shape[1]} pinned")
    return t_star, mode


def minimize_gap(gap: Callable[[float], float], lo: float, hi: float, samples: int = 41) -> float:
    """Sampled minimum of `gap` refined by golden section; a minimum on the bracket edge is not a minimum."""
    xs = np.linspace(lo, hi, samples)
    values = np.array([gap(float(x)) for x in xs])
    k = int(np.argmin(values))
    if k == 0 or k == samples - 1:
        raise BracketError(f"pair gap is smallest at the bracket edge t'={xs[k]:.6g}; widen [{lo}, {hi}]")
    if values[k] < values[k - 1] and values[k] < values[k + 1]:
        return float(golden(
            lambda x: gap(float(x)),
            brack=(float(xs[k - 1]), float(xs[k]), float(xs[k + 1])),
            tol=settings.GOLDEN_TOL,
        ))
    return float(xs[k])


def _pair_gap(family: LatticeFamily, x: float, reference: complex) -> Tuple[float, Mode, Mode]:
    m1, m2 = pair_near(spectrum_at(family, x), reference)
    return abs(m1.energy - m2.energy), m1, m2


def _tracked_pair(family: LatticeFamily, x: float, refs: Sequence[Mode]) -> Tuple[float, Mode, Mode]:
    """The two modes at `x` that continue the reference branches, matched by overlap."""
    modes = spectrum_at(family, x)
    first = max(range(len(modes)), key=lambda k: overlap(refs[0].vector, modes[k].vector))
    rest = [k for k in range(len(modes)) if k != first]
    second = max(rest, key=lambda k: overlap(refs[1].vector, modes[k].vector))
    m1, m2 = modes[first], modes[second]
    return abs(m1.energy - m2.energy), m1, m2


def _closest_pair_reference(modes: Sequence[Mode]) -> complex:
    values = np.array([m.energy for m in modes], dtype=complex)
    live = [k for k, e in enumerate(values) if abs(e) > settings.ZERO_TOL]
    best = (np.inf, 0j)
    for i in live:
        for j in live:
            if i < j and abs(values[i] - values[j]) < best[0]:
                best = (abs(values[i] - values[j]), (values[i] + values[j]) / 2)
    return best[1]


def _classify(x_min: float, pair_at: Callable[[float], Tuple[float, Mode, Mode]], ends: Sequence[float]) -> CoalescenceReport:
    gap, m1, m2 = pair_at(x_min)
    ov = overlap(m1.vector, m2.vector)
    split = max(abs(e1.energy.real - e2.energy.real) / 2 for _, e1, e2 in (pair_at(end) for end in ends))
    kind = "exceptional_point" if gap <= settings.EP_GAP_TOL and ov >= settings.EP_OVERLAP_MIN else "avoided_crossing"
    print(f"[Roots] {kind} at t'={x_min:.10g}: gap {gap:.2e}, overlap {ov:.4f}")
    return CoalescenceReport(
        kind=kind, parameter=x_min, gap=float(gap), overlap=float(ov), re_split=float(split),
        energies=(m1.energy, m2.energy),
    )


def find_exceptional_point(
    family: LatticeFamily, bracket: Sequence[float], reference: Optional[complex] = None, samples: int = 41
) -> CoalescenceReport:
    """Golden-section minimum of the gap of the pair nearest `reference`, certified by gap and eigenvector alignment.

    Raises BracketError when the gap keeps falling toward either end of the bracket.
    """
    lo, hi = _check_bracket(bracket)
    if reference is None:
        reference = _closest_pair_reference(spectrum_at(family, 0.5 * (lo + hi)))

    def pair_at(x: float) -> Tuple[float, Mode, Mode]:
        return _pair_gap(family, x, reference)

    x_min = minimize_gap(lambda x: pair_at(x)[0], lo, hi, samples)
    return _classify(x_min, pair_at, (lo, hi))


def certify_pair(family: LatticeFamily, traj: SweepTrajectory, event: SweepEvent, samples: int = 21) -> CoalescenceReport:
    """Certify a pair event on the two tracked branches it names, not on whichever pair sits closest."""
    lo, hi = _check_bracket(event.interval)
    k = traj.index_of(event.parameter)
    refs = [traj.branches[b][k] for b in event.branch_ids[:2]]

    def pair_at(x: float) -> Tuple[float, Mode, Mode]:
        return _tracked_pair(family, x, refs)

    x_min = minimize_gap(lambda x: pair_at(x)[0], lo, hi, samples)
    return _classify(x_min, pair_at, (lo, hi))


def certify_events(family: LatticeFamily, traj: SweepTrajectory) -> List[Tuple[SweepEvent, CoalescenceReport]]:
    """Golden-section certification of every pair event found by a sweep."""
    out: List[Tuple[SweepEvent, CoalescenceReport]] = []
    for event in traj.events:
        if event.type == "zero_crossing":
            continue
        try:
            report = certify_pair(family, traj, event)
        except BracketError as exc:
            print(f"[Roots] skipping {event.type} near t'={event.parameter:.6g}: {exc}")
            continue
        out.append((event, report))
    return out
