"""Sampled runs of small ODE systems with the Fortran DOP853 driver in scipy.

Phase-like components should get ``rtol = 0``: their size grows without bound
on running orbits, and a relative tolerance would loosen their absolute
accuracy in proportion.
"""
import numpy as np
from scipy.integrate import ode

from .errors import IntegrationError


def sample(f, y0, t_eval, rtol, atol, stop=None):
    """Integrate ``y' = f(t, y)`` and return ``(t, y)`` at the points of ``t_eval``.

    ``stop(y)`` is checked after every accepted step; when it returns True
    the run ends and the samples up to that step are returned together with
    the stop time as a third value (None otherwise).
    """
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.ndim != 1 or t_eval.size == 0 or t_eval[0] < 0 or np.any(np.diff(t_eval) <= 0):
        raise ValueError("sample times must be a non-empty increasing array starting at >= 0")
    hit = []
    solver = ode(f).set_integrator("dop853", rtol=rtol, atol=atol, nsteps=10 ** 9)
    if stop is not None:
        def solout(t, y):
            if stop(y):
                hit.append(t)
                return -1
            return 0
        solver.set_solout(solout)
    solver.set_initial_value(np.asarray(y0, dtype=float), 0.0)
    out = np.empty((t_eval.size, len(y0)))
    for i, t in enumerate(t_eval):
        out[i] = y0 if t == 0 else solver.integrate(t)
        if hit:
            return t_eval[:i], out[:i], hit[0]
        if not solver.successful():
            raise IntegrationError(f"DOP853 failed with code {solver.get_return_code()} "
                                   f"at t = {solver.t:.6g}")
    return t_eval, out, None
