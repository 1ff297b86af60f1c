import warnings

import pytest

from primeavg.tables import build_tables


@pytest.fixture(scope="session")
def tables():
    return build_tables(1 << 20)


@pytest.fixture(autouse=True)
def _quiet_desk_scale_warnings():
    # desk-scale parameter overrides warn by design; tests assert them explicitly
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        yield
