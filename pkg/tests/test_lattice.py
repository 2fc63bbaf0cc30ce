import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from app.errors import ConfigurationError
from app.services.lattice import (
    Bond,
    LatticeGraph,
    add_uniform_shift,
    average_condition,
    build_lieb_tail,
    build_reservoir,
    build_ssh,
    build_three_site_tail,
    is_mirror_symmetric,
    join,
    mirror_reflect,
    passive_shift,
    preset_for,
    to_matrix,
    zero_space,
)
from app.services.lattice.graph import graph_to_dict
from app.services.lattice.presets import CustomGraph


def test_ssh_bonds_and_loss():
    g = build_ssh(9, 0.2, 1.0, 1.0)
    assert [b.amplitude for b in g.bonds] == [1.0, 0.2, 1.0, 0.2, 1.0, 0.2, 1.0, 0.2]
    assert all(v == -1j for v in g.onsite)
    assert g.region_sites("system1") == list(range(1, 10))


@pytest.mark.parametrize("n", [0, 8, -3])
def test_ssh_rejects_even_or_empty_chains(n):
    with pytest.raises(ConfigurationError):
        build_ssh(n, 0.2, 1.0, 1.0)


def test_reservoir_gain_on_even_labels():
    g = build_reservoir(10, 1.0, 2.0, start_index=10)
    assert g.onsite_at(10) == 2j
    assert g.onsite_at(11) == -2j
    assert g.last_site == 19
    assert len(g.bonds) == 9


def test_reservoir_rejects_negative_gamma():
    with pytest.raises(ConfigurationError):
        build_reservoir(10, 1.0, -0.5, start_index=10)


def test_single_system_preset(fig1):
    g = fig1.build(1.3)
    assert g.n_sites == 19
    assert g.bond_amplitude(9, 10) == 1.3
    assert g.region_of(9) == "system1"
    assert g.region_of(10) == "reservoir"
    ham = to_matrix(g)
    assert ham[8, 9] == ham[9, 8] == 1.3


def test_mirror_bridge_is_symmetric(mirror):
    g = mirror.build(1.05)
    assert g.n_sites == 29
    assert g.region_sites("reservoir") == list(range(10, 21))
    assert g.bond_amplitude(20, 21) == 1.05
    assert is_mirror_symmetric(g)


def test_single_system_is_not_mirror_symmetric(fig1):
    assert not is_mirror_symmetric(fig1.build(1.0))


def test_lieb_tail_dark_zero_modes():
    tail = build_lieb_tail(11)
    basis = zero_space(tail)
    assert basis.shape[1] == 3
    assert np.max(np.abs(basis[0, :])) <= 1e-10
    modes = np.linalg.eigvals(to_matrix(tail))
    assert np.sum(np.abs(modes) <= 1e-9) == 3


def test_lieb_tail_size_must_fit_columns():
    with pytest.raises(ConfigurationError):
        build_lieb_tail(10)


def test_three_site_tail_spectrum():
    values = np.sort(np.linalg.eigvals(to_matrix(build_three_site_tail())).real)
    assert values == pytest.approx([-np.sqrt(2), 0.0, np.sqrt(2)], abs=1e-12)


def test_terminated_presets_wiring():
    lieb = preset_for("fig2a").build(1.0)
    assert lieb.n_sites == 30
    assert lieb.bond_amplitude(19, 20) == 1.0
    assert lieb.region_of(20) == "system2"
    three = preset_for("fig2c").build(1.0)
    assert three.n_sites == 22
    for edge in ((19, 20), (19, 22), (20, 21), (21, 22)):
        assert three.bond_amplitude(*edge) == 1.0
    assert all(three.onsite_at(s) == 0 for s in (20, 21, 22))


def test_system2_loss_flag():
    lossy = preset_for("fig2c", system2_loss=True).build(1.0)
    assert lossy.onsite_at(21) == -1j


def test_duplicate_bond_rejected():
    g = build_ssh(3, 0.2, 1.0, 0.0)
    with pytest.raises(ConfigurationError):
        g.with_bond(2, 1, 0.5)


def test_real_onsite_rejected():
    with pytest.raises(ConfigurationError):
        LatticeGraph(n_sites=2, bonds=(Bond(i=1, j=2, amplitude=1.0),), onsite=(1 + 0j, 0j), region_tags=("system1", "system1"))


def test_unknown_site_rejected():
    with pytest.raises(ConfigurationError):
        LatticeGraph(n_sites=2, bonds=(Bond(i=1, j=3, amplitude=1.0),), onsite=(0j, 0j), region_tags=("system1", "system1"))


def test_join_relabels_right_graph():
    left = build_ssh(3, 0.2, 1.0, 1.0)
    right = build_ssh(3, 0.2, 1.0, 1.0, region="system2")
    g = join(left, right, 3, 1, 0.7)
    assert g.n_sites == 6
    assert g.bond_amplitude(3, 4) == 0.7
    assert g.region_of(6) == "system2"


def test_mirror_reflect_reverses_sites():
    g = build_reservoir(4, 1.0, 2.0, start_index=1)
    flipped = mirror_reflect(g)
    assert flipped.onsite == tuple(reversed(g.onsite))
    assert {tuple(sorted((b.i, b.j))) for b in flipped.bonds} == {(1, 2), (2, 3), (3, 4)}
    assert to_matrix(flipped) == pytest.approx(to_matrix(g)[::-1, ::-1])


@pytest.mark.parametrize("name", ["fig1", "fig3", "fig2a"])
def test_mirror_reflect_twice_is_identity(name):
    g = preset_for(name).build()
    assert mirror_reflect(mirror_reflect(g)) == g


def test_decoupled_join_keeps_both_spectra():
    system = build_ssh(9, 0.2, 1.0, 1.0)
    reservoir = build_reservoir(10, 1.0, 2.0, start_index=1)
    joined = join(system, reservoir, 9, 1, 0.0)
    combined = np.linalg.eigvals(to_matrix(joined))
    parts = np.concatenate([np.linalg.eigvals(to_matrix(system)), np.linalg.eigvals(to_matrix(reservoir))])
    rows, cols = linear_sum_assignment(np.abs(combined[:, None] - parts[None, :]))
    assert np.max(np.abs(combined[rows] - parts[cols])) <= 1e-10


def test_uniform_shift_and_average_condition(fig1):
    g = fig1.build(1.0)
    assert average_condition(g) == pytest.approx(0.0)
    shifted = add_uniform_shift(g, 0.5)
    assert average_condition(shifted) == pytest.approx(-0.5)
    assert to_matrix(shifted) == pytest.approx(to_matrix(g) - 0.5j * np.eye(19))
    assert add_uniform_shift(g, 0.0) is g


def test_passive_shift_removes_gain(fig1):
    passive = passive_shift(fig1.build(1.0))
    assert max(v.imag for v in passive.onsite) == pytest.approx(0.0)
    assert min(v.imag for v in passive.onsite) == pytest.approx(-4.0)


def test_parameters_are_in_units_of_t():
    doubled = preset_for("fig1", t=2.0, t_A=0.4, t_B=2.0, kappa0=2.0, gamma=4.0).build(2.0)
    assert to_matrix(doubled) == pytest.approx(to_matrix(preset_for("fig1").build(1.0)))


def test_custom_graph_with_symbolic_coupling():
    graph = CustomGraph.model_validate({
        "sites": [
            {"index": 1, "region": "system1", "onsite_imag": -1.0},
            {"index": 2, "region": "reservoir", "onsite_imag": 2.0},
            {"index": 3, "region": "reservoir", "onsite_imag": -2.0},
        ],
        "bonds": [{"i": 1, "j": 2, "amplitude": "t_prime"}, {"i": 2, "j": 3, "amplitude": 1.0}],
    })
    g = graph.build(0.9)
    assert g.bond_amplitude(1, 2) == 0.9
    assert graph_to_dict(g)["sites"][1] == {"index": 2, "region": "reservoir", "onsite_imag": 2.0}
