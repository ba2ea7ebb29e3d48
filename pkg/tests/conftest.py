import pathlib
import sys

# allow running the suite from a fresh checkout without installing
_src = pathlib.Path(__file__).resolve().parent.parent / "src"
if str(_src) not in sys.path:
    try:
        import ksums  # noqa: F401
    except ImportError:
        sys.path.insert(0, str(_src))

import pytest

import ksums


@pytest.fixture(scope="session")
def table_small():
    return ksums.sieve(5000)


@pytest.fixture(scope="session")
def table_mid():
    return ksums.sieve(210_000)
