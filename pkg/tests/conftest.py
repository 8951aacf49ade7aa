import pathlib

import pytest

TEST_DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def test_data_dir() -> pathlib.Path:
    return TEST_DATA
