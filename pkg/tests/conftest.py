"""
Fixtures pytest partagées : instances de référence, configuration isolée
et exécution de la ligne de commande en mémoire.
"""

import io
import json

import pytest
from hypothesis import HealthCheck, settings

from stoqverify.config import Config, config
from stoqverify.main import dispatch
from stoqverify.utils.fixtures import fixtures

# isolated_config est une fixture de fonction autouse
settings.register_profile("stoqverify", deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("stoqverify")


@pytest.fixture(autouse=True)
def isolated_config():
    """Chaque test part des valeurs par défaut"""
    saved = dict(config.values)
    config.values = dict(Config.DEFAULTS)
    yield config
    config.values = saved


@pytest.fixture(scope="session")
def library():
    return fixtures


@pytest.fixture
def e1():
    return fixtures.load("E1")


@pytest.fixture
def e2():
    return fixtures.load("E2")


@pytest.fixture
def e3():
    return fixtures.load("E3")


@pytest.fixture
def e4():
    return fixtures.load("E4")


@pytest.fixture
def e5():
    return fixtures.load("E5")


@pytest.fixture
def e6():
    return fixtures.load("E6")


@pytest.fixture
def e7():
    return fixtures.load("E7")


@pytest.fixture
def run_cli():
    """Exécute `stoqverify argv...` et renvoie (code, rapport JSON)"""

    def run(*argv):
        out = io.StringIO()
        code = dispatch(list(argv), stream=out)
        text = out.getvalue()
        return code, (json.loads(text) if text.strip() else None)

    return run
