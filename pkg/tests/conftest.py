import numpy as np
import pytest

from fluxcat import (FluxGrid, HoBasisConfig, PRESETS, find_target_states,
                     hermite_basis, solve_circuit, to_grid)

_ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, ok: bool, detail: str) -> None:
    _ACCEPTANCE_LINES.append((name, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE_LINES:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  [{detail}]")


@pytest.fixture(scope="session")
def suny():
    return PRESETS["suny2000"]


@pytest.fixture(scope="session")
def toy():
    return PRESETS["toy-deepwell"]


@pytest.fixture(scope="session")
def basis_cfg():
    return HoBasisConfig(dim=512)


@pytest.fixture(scope="session")
def suny_result(suny, basis_cfg):
    return solve_circuit(suny, basis_cfg)


@pytest.fixture(scope="session")
def suny_targets(suny_result):
    return find_target_states(suny_result)


@pytest.fixture(scope="session")
def default_grid():
    return FluxGrid(-1.0, 2.0, 2048)


@pytest.fixture(scope="session")
def suny_basis_table(suny, basis_cfg, default_grid):
    return hermite_basis(suny, basis_cfg, default_grid)


@pytest.fixture(scope="session")
def target_states(suny, basis_cfg, suny_result, suny_targets, default_grid, suny_basis_table):
    i0, i1 = suny_targets
    s0 = to_grid(suny_result.states[:, i0], suny, basis_cfg, default_grid,
                 basis=suny_basis_table)
    s1 = to_grid(suny_result.states[:, i1], suny, basis_cfg, default_grid,
                 basis=suny_basis_table)
    return s0, s1


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
