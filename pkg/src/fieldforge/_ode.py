"""Shared unitary integration helpers for time-dependent Hamiltonians."""

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationFailure


def propagate_state(h_func, psi0, t0, t1, rtol=1e-10, atol=1e-12, method="RK45"):
    """Integrate i dpsi/dt = H(t) psi from t0 to t1."""
    psi0 = np.asarray(psi0, dtype=complex)

    def rhs(t, y):
        return -1j * (h_func(t) @ y)

    sol = solve_ivp(rhs, (t0, t1), psi0, method=method, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationFailure(sol.message)
    return sol.y[:, -1]


def propagate_unitary(h_func, dim, t0, t1, rtol=1e-10, atol=1e-12, method="DOP853"):
    """Time-ordered exponential of -i H(t), column by column."""
    cols = []
    for k in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[k] = 1.0
        cols.append(propagate_state(h_func, e, t0, t1, rtol=rtol, atol=atol,
                                    method=method))
    return np.column_stack(cols)
