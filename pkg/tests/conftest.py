import warnings

import pytest

from optomech_lc.params import SystemParams, WeakDampingWarning


@pytest.fixture(autouse=True)
def _quiet_weak_damping():
    # several oracles deliberately use gamma_m close to gamma_c
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WeakDampingWarning)
        yield


FIG1A = SystemParams(omega_m=1.0, g=0.4, gamma_m=5e-5, delta=0.75, omega_drive=0.05)
FIG2 = SystemParams(omega_m=5.0, g=2.0, gamma_m=3e-5, delta=5.0, omega_drive=0.05)
FIG3 = SystemParams(omega_m=5.0, g=1.5, gamma_m=3e-5, delta=5.0, omega_drive=0.05)


def pytest_terminal_summary(terminalreporter):
    import sys
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.summary_lines():
        terminalreporter.write_line(line)
