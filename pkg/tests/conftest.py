import numpy as np
import pytest

from mkdv_ut import spectral as sp
from mkdv_ut.contour import build_grid
from mkdv_ut.core import BoundaryProfile, InitialProfile, SechCurve

ETA, X0 = 0.5, -1.0


def soliton_exact(x, t, dx=0):
    """eta sech(eta (x - x0) + eta^3 t) and its first two x-derivatives."""
    z = ETA * (np.asarray(x) - X0) + ETA**3 * np.asarray(t)
    s, th = 1 / np.cosh(z), np.tanh(z)
    return [ETA * s, -ETA**2 * s * th, ETA**3 * s * (2 * th**2 - 1)][dx]


def soliton_profiles():
    p = InitialProfile(-1, SechCurve(ETA, ETA, -ETA * X0, 0))
    q = BoundaryProfile(-1, *[SechCurve(ETA ** (j + 1), ETA**3, -ETA * X0, j) for j in range(3)])
    return p, q


@pytest.fixture(scope="session")
def soliton_data():
    """Spectral data for the focusing soliton on the standard grid, with its regularizer."""
    p, q = soliton_profiles()
    sd = sp.compute_spectral(p, q, build_grid(24, 16, 60.0, 1.35))
    sp.derive_cdhr(sd)
    hs = sp.expand_h_coeffs(sd)
    return sd, sp.build_ha(sd.h0, hs)


CRITERIA = {}


@pytest.fixture()
def criterion():
    """Record one acceptance line: criterion(number, passed, text)."""
    def record(number, passed, text):
        CRITERIA[number] = (bool(passed), text)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, text = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")
