import pytest

from tiqflash import devices, synthesis


@pytest.fixture(scope="session")
def default_params():
    return devices.load_preset("generic-0.25u")


@pytest.fixture(scope="session")
def default_bank(default_params):
    """The reference 6-bit bank: vdd 2.5 V, |Av| 38.70, balanced center,
    default width grid. Built once; several suites read from it."""
    spec = synthesis.centered_ladder_spec(6, 2.5, 38.70, default_params)
    ladder = synthesis.compute_ladder(spec, default_params)
    cands = synthesis.enumerate_candidates(synthesis.DEFAULT_GRID, default_params, 2.5)
    return synthesis.size_comparators(ladder, cands)
