import pytest

from scalolab.wavelet import build_bank


@pytest.fixture(scope="session")
def bank_db2():
    """Shared db2 bank, deep enough for limit-constant evaluation."""
    return build_bank("db2", jmax=11)


@pytest.fixture(scope="session")
def bank_haar():
    return build_bank("haar", jmax=8)
