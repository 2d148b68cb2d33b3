import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def cache_root(tmp_path_factory):
    path = tmp_path_factory.mktemp("zero-cache")
    os.environ["NATBOUND_CACHE_DIR"] = str(path)
    return path


@pytest.fixture(scope="session")
def zeros_200(cache_root):
    from natbound.cache import get_zero_table

    return get_zero_table(200.0, cache_root)


@pytest.fixture(scope="session")
def zeros_1210(cache_root):
    from natbound.cache import get_zero_table

    return get_zero_table(1210.0, cache_root)


@pytest.fixture(scope="session")
def z6_report(zeros_200):
    from natbound.explicit import default_grid, explicit_report
    from natbound.presets import get_preset

    preset = get_preset("polarised-z6")
    return explicit_report(preset.spec, zeros_200.ordinates, default_grid(), 50, reference_residues=preset.reference_residues)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, 11):
        if k in RESULTS:
            ok, detail = RESULTS[k]
            terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d}: NOT RUN")
