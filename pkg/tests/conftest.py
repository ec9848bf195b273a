import logging
from pathlib import Path

import pytest
from rsxml import Logger

from pypalette.classes.config import PaletteSolverConfig, SatisfactionBudget, SolverConfig

DATA_DIR = Path(__file__).resolve().parent.parent / 'pypalette' / 'data'


@pytest.fixture(scope='session', autouse=True)
def test_log(tmp_path_factory):
    log = Logger('Tests')
    log.setup(log_path=str(tmp_path_factory.mktemp('logs') / 'pytest.log'), log_level=logging.DEBUG)
    return log


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def quick_solver() -> SolverConfig:
    return SolverConfig(starts=30, seed=11)


@pytest.fixture
def quick_palette_solver() -> PaletteSolverConfig:
    return PaletteSolverConfig(solver=SolverConfig(starts=30, seed=11), restarts_per_support=6)


@pytest.fixture
def small_budget() -> SatisfactionBudget:
    return SatisfactionBudget(max_n=8, max_nodes=500_000)
