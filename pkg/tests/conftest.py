from __future__ import annotations

import numpy as np
import pytest

from volumenes.contact import NormalFormSpec, build_normal_frame, derive, heisenberg_frame
from volumenes.db import create_engine_from_url, init_db, make_session_factory
from volumenes.settings import Settings


def normal_structure(gamma: str, beta: str = "0", name: str = "nf"):
    return derive(build_normal_frame(NormalFormSpec.parse(beta, gamma), name=name))


@pytest.fixture(scope="session")
def heis():
    return derive(heisenberg_frame())


@pytest.fixture(scope="session")
def nf_radial():
    """γ = x² + y²: a = c = 1, κ = 12, κ_vol = 4."""
    return normal_structure("x^2 + y^2", name="nf-radial")


@pytest.fixture(scope="session")
def nf_traceless():
    """γ = x² − y²: κ = 0, χ = 4."""
    return normal_structure("x^2 - y^2", name="nf-traceless")


@pytest.fixture(scope="session")
def nf_general():
    return normal_structure("x^2 + y^2 + x^2*z + y^3", beta="x + y*z", name="nf-general")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def settings(tmp_path, monkeypatch):
    monkeypatch.delenv("DATABASE_URL", raising=False)
    return Settings(INSTANCE_DIR=tmp_path / "instance")


@pytest.fixture
def session_factory(tmp_path):
    engine = create_engine_from_url(f"sqlite:///{(tmp_path / 'runs.sqlite').as_posix()}")
    init_db(engine)
    yield make_session_factory(engine)
    engine.dispose()
