import pytest

from app.config import settings
from app.services.lattice.presets import preset_for
from app.services.spectral.roots import find_zero_mode
from app.services.spectral.sweep import make_grid, sweep


@pytest.fixture(scope="session")
def fig1():
    return preset_for("fig1")


@pytest.fixture(scope="session")
def mirror():
    return preset_for("fig3")


@pytest.fixture(scope="session")
def fig1_sweep(fig1):
    return sweep(fig1.family(), make_grid())


@pytest.fixture(scope="session")
def fig1_zero(fig1):
    t_star, mode = find_zero_mode(fig1.family(), (1.0, 1.1))
    return t_star, mode, fig1.build(t_star)


@pytest.fixture(scope="session")
def mirror_symmetric_zero(mirror):
    t_star, mode = find_zero_mode(mirror.family(), (0.95, 1.05))
    return t_star, mode, mirror.build(t_star)


@pytest.fixture(scope="session")
def mirror_antisymmetric_zero(mirror):
    t_star, mode = find_zero_mode(mirror.family(), (1.05, 1.2))
    return t_star, mode, mirror.build(t_star)


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"


@pytest.fixture
def tuned_settings():
    """Settings that tests may mutate; every field is restored afterwards."""
    snapshot = settings.model_dump()
    yield settings
    for key, value in snapshot.items():
        setattr(settings, key, value)
