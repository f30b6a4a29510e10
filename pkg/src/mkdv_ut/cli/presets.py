"""Compatible initial/boundary data with a known solution."""

from dataclasses import dataclass

import numpy as np

from ..core import BoundaryProfile, InitialProfile, MkdvError, SechCurve, sech_derivative


class PresetUnavailable(MkdvError):
    pass


@dataclass(frozen=True)
class SolitonFocusing:
    """u(x, t) = eta sech(eta (x - x0) + eta^3 t), a solution of
    u_t - 6 u^2 u_x - u_xxx = 0 travelling to the left with speed eta^2."""

    eta: float = 0.5
    x0: float = -1.0
    lam: int = -1

    def phase(self, x, t):
        return self.eta * (np.asarray(x) - self.x0) + self.eta**3 * np.asarray(t)

    def __call__(self, x, t, dx=0, dt=0):
        """d^dx/dx^dx d^dt/dt^dt u at (x, t)."""
        e = self.eta
        return e ** (1 + dx + 3 * dt) * sech_derivative(self.phase(x, t), dx + dt)

    def pde_residual(self, x, t):
        u = self(x, t)
        return self(x, t, dt=1) + 6 * self.lam * u**2 * self(x, t, dx=1) - self(x, t, dx=3)

    @property
    def initial(self):
        return InitialProfile(self.lam, SechCurve(self.eta, self.eta, -self.eta * self.x0, 0),
                              name="soliton-focusing")

    @property
    def boundary(self):
        e = self.eta
        # g_j(t) = d^j/dx^j u(0, t) = e^(j+1) sech^(j)(e^3 t - e x0)
        return BoundaryProfile(self.lam, *[SechCurve(e ** (j + 1), e**3, -e * self.x0, j) for j in range(3)],
                               name="soliton-focusing")


def verify_preset(sol, samples=100, seed=0, tol=1e-12):
    """Substitute the closed form into the equation at random points."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 5, samples)
    t = rng.uniform(0, 2, samples)
    res = float(np.max(np.abs(sol.pde_residual(x, t))))
    if not res <= tol:
        raise PresetUnavailable(f"closed form fails the equation: residual {res:.3g}")
    return res


PRESETS = {"soliton-focusing": SolitonFocusing}


def compatible_preset(name, **params):
    """Preset bundle: .initial, .boundary, .lam and a callable exact solution."""
    if name not in PRESETS:
        raise PresetUnavailable(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    try:
        sol = PRESETS[name](**params)
    except TypeError as exc:
        raise PresetUnavailable(f"bad parameters for {name!r}: {exc}") from None
    if sol.lam != -1:
        raise PresetUnavailable("the soliton family exists for lambda = -1 only")
    if not sol.eta > 0:
        raise PresetUnavailable("eta must be positive")
    verify_preset(sol)
    return sol
