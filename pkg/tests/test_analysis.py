import numpy as np
import pytest

from app.errors import DomainError, PreconditionError
from app.services.analysis import (
    alpha_from_energy,
    alpha_from_gamma,
    analyze_mode,
    constant_intensity_metrics,
    continuity_check,
    edge_amplitude_ratio,
    edge_flux,
    linear_fit,
    phase_winding,
    recurrence_residual,
    recurrence_residuals,
    weak_coupling_ratio,
)
from app.services.analysis.recurrence import sublattices
from app.services.lattice import build_reservoir, preset_for, to_matrix
from app.services.lattice.graph import passive_shift
from app.services.spectral import Mode, closest_to, eigendecompose


def _mode(values):
    return Mode(energy=0j, vector=np.asarray(values, dtype=complex))


@pytest.mark.parametrize("gamma, expected", [(2.0, 1.0), (0.0, -1.0), (np.sqrt(2.0), 0.0)])
def test_alpha_from_gamma(gamma, expected):
    assert alpha_from_gamma(gamma, 1.0) == pytest.approx(expected)


def test_alpha_needs_positive_coupling():
    with pytest.raises(DomainError):
        alpha_from_gamma(2.0, 0.0)


def test_alpha_from_energy_reduces_at_zero_energy():
    assert alpha_from_energy(0j, -2j, 2j, 1.0) == pytest.approx(1.0)
    assert alpha_from_energy(0.5j, -2j, 2j, 1.0) != pytest.approx(1.0)


def test_linear_sequence_satisfies_recurrence():
    sites = list(range(1, 11))
    values = [n if n % 2 == 0 else (-1) ** n * 3.7 * n * n for n in sites]
    residuals = recurrence_residuals(_mode(values), sites, 1.0)
    assert residuals["even"] == pytest.approx(0.0, abs=1e-15)
    assert residuals["odd"] > 0


def test_recurrence_needs_five_sites():
    with pytest.raises(DomainError):
        recurrence_residual(_mode([1, 2, 3, 4]), [1, 2, 3, 4], 1.0)


def test_linear_fit_of_constant_vector():
    fit = linear_fit(_mode([0.5] * 6), [1, 3, 5])
    assert fit.slope == pytest.approx(0.0, abs=1e-12)
    assert fit.max_abs_residual == pytest.approx(0.0, abs=1e-12)


def test_linear_fit_needs_three_sites():
    with pytest.raises(DomainError):
        linear_fit(_mode([1, 2]), [1, 2])


def test_fig1_zero_mode_is_linearly_localized(fig1_zero):
    _, mode, lattice = fig1_zero
    report = analyze_mode(mode, lattice)
    assert report.alpha == pytest.approx(1.0)
    assert report.recurrence_residual <= 1e-6
    assert set(report.sublattice_fits) == {"even", "odd"}
    for fit in report.sublattice_fits.values():
        assert fit.max_abs_residual <= 1e-6


def test_recurrence_fails_away_from_zero_energy(fig1_zero):
    _, _, lattice = fig1_zero
    reservoir = lattice.region_sites("reservoir")
    generic = max(eigendecompose(to_matrix(lattice)), key=lambda m: abs(m.energy))
    assert recurrence_residual(generic, reservoir, 1.0) > 1e-3


def test_passive_lattice_keeps_linear_localization(fig1_zero):
    _, mode, lattice = fig1_zero
    passive = passive_shift(lattice)
    shifted = closest_to(eigendecompose(to_matrix(passive)), mode.energy - 2j)
    report = analyze_mode(shifted, passive)
    assert report.recurrence_residual <= 1e-6
    for fit in report.sublattice_fits.values():
        assert fit.max_abs_residual <= 1e-6


def test_antisymmetric_mode_linear_on_each_half(mirror_antisymmetric_zero):
    _, mode, lattice = mirror_antisymmetric_zero
    reservoir = lattice.region_sites("reservoir")
    for half in ([s for s in reservoir if s <= 15], [s for s in reservoir if s >= 15]):
        for members in sublattices(half).values():
            assert linear_fit(mode, members).max_abs_residual <= 1e-6


def test_constant_intensity_mode(mirror_symmetric_zero):
    t_star, mode, lattice = mirror_symmetric_zero
    reservoir = lattice.region_sites("reservoir")
    metrics = constant_intensity_metrics(mode, reservoir)
    assert metrics.intensity.relative_std <= 1e-6
    for stats in metrics.phases.values():
        assert stats.circular_spread <= 1e-6
    for step in metrics.neighbor_phase_differences:
        assert abs(abs(step) - np.pi / 2) <= 1e-6
    assert metrics.gain_leads

    i_c = metrics.intensity.mean
    for site in (12, 14, 16, 18):
        for neighbor in (site - 1, site + 1):
            assert edge_flux(mode, lattice, site, neighbor) == pytest.approx(-2.0 * i_c, rel=1e-6)
    assert edge_flux(mode, lattice, 10, 9) == pytest.approx(-2.0 * i_c, rel=1e-6)
    assert edge_amplitude_ratio(mode, lattice, metrics) == pytest.approx(t_star, abs=1e-3)


def test_symmetric_mode_phase_winds_monotonically_in_systems(mirror_symmetric_zero):
    _, mode, lattice = mirror_symmetric_zero
    for region in ("system1", "system2"):
        winding = phase_winding(mode, lattice.region_sites(region), lattice.first_site)
        assert winding.monotonic, region


def test_edge_ratio_needs_constant_intensity(mirror_antisymmetric_zero):
    _, mode, lattice = mirror_antisymmetric_zero
    with pytest.raises(PreconditionError):
        edge_amplitude_ratio(mode, lattice)


def test_constant_intensity_needs_sites():
    with pytest.raises(DomainError):
        constant_intensity_metrics(_mode([1, 1]), [])


def test_flux_vanishes_for_real_vectors_and_is_antisymmetric(fig1):
    lattice = fig1.build(1.0)
    real = _mode(np.linspace(1.0, 2.0, 19))
    assert edge_flux(real, lattice, 9, 10) == 0.0
    mode = eigendecompose(to_matrix(lattice))[3]
    for bond in lattice.bonds:
        assert edge_flux(mode, lattice, bond.i, bond.j) == pytest.approx(-edge_flux(mode, lattice, bond.j, bond.i), abs=1e-15)


def test_flux_needs_an_edge(fig1):
    with pytest.raises(DomainError):
        edge_flux(_mode(np.ones(19)), fig1.build(1.0), 1, 5)


@pytest.mark.parametrize("name", ["fig1", "fig2a", "fig2c", "fig3"])
def test_continuity_identity_for_every_mode(name):
    family = preset_for(name).family()
    rng = np.random.default_rng(7)
    for t_prime in rng.uniform(0.1, 1.3, 5):
        lattice = family(float(t_prime))
        for mode in eigendecompose(to_matrix(lattice)):
            assert continuity_check(mode, lattice).max() <= 1e-9 * mode.intensity.max()


def test_zero_mode_balances_gain_and_flux(fig1_zero):
    _, mode, lattice = fig1_zero
    intensity = mode.intensity
    for k, site in enumerate(lattice.sites):
        outflow = sum(edge_flux(mode, lattice, site, m) for m, _ in lattice.neighbors(site))
        assert 2 * lattice.onsite_at(site).imag * intensity[k] + outflow == pytest.approx(0.0, abs=1e-7)


def test_phase_winding_on_synthetic_profile():
    sites = [1, 2, 3, 4, 5]
    mode = _mode([np.exp(0.4j * n) for n in sites])
    winding = phase_winding(mode, sites)
    assert winding.monotonic
    assert winding.total == pytest.approx(1.6)
    zigzag = _mode([np.exp(0.4j * (-1) ** n) for n in sites])
    assert not phase_winding(zigzag, sites).monotonic


def test_weak_coupling_ratio(fig1):
    lattice = fig1.build(0.2)
    psi = np.zeros(19, dtype=complex)
    psi[8] = 1.0
    psi[9:] = 0.1j
    assert weak_coupling_ratio(_mode(psi), lattice) == pytest.approx(0.01)


def test_uniform_reservoir_report_without_systems():
    lattice = build_reservoir(10, 1.0, 2.0, start_index=1)
    mode = eigendecompose(to_matrix(lattice))[0]
    report = analyze_mode(mode, lattice)
    assert report.weak_coupling_ratio is None
    assert report.max_continuity_residual <= 1e-9
