from __future__ import annotations

import pytest

from nashimpl.reproduce import load_fixture


@pytest.fixture(scope="session")
def table1():
    return load_fixture()
