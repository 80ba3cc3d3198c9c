import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

import fixtures


@pytest.fixture(scope="session")
def oracle_suite_store():
    return fixtures.oracle_store()


@pytest.fixture()
def subject_image():
    return fixtures.subject_image_store()


@pytest.fixture()
def service():
    return fixtures.make_service()
