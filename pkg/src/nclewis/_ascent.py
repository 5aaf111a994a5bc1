"""L-BFGS on complex variables through their real embedding.

Gradients follow the convention ``df = Re <G, dz> = Re sum(conj(G) * dz)``,
i.e. ``G = df/dRe(z) + 1j * df/dIm(z)``.
"""
import numpy as np
from scipy.optimize import minimize


def _split(z):
    z = np.asarray(z, dtype=np.complex128).ravel()
    return np.concatenate([z.real, z.imag])


def _join(x, shape):
    n = x.size // 2
    return (x[:n] + 1j * x[n:]).reshape(shape)


def maximize(fun_grad, z0, maxiter=500, gtol=1e-10, ftol=1e-13):
    """Local maximization of a real function of complex arguments.

    Parameters
    ----------
    fun_grad : callable
        ``z -> (value, grad)`` with ``grad`` shaped like ``z``.
    z0 : ndarray
        Complex starting point.

    Returns
    -------
    value, z : float, ndarray
        Best value seen and its argument; never worse than the start.
    """
    z0 = np.asarray(z0, dtype=np.complex128)
    shape = z0.shape
    best = {"value": -np.inf, "z": z0}

    def neg(x):
        z = _join(x, shape)
        value, grad = fun_grad(z)
        if not np.isfinite(value):
            return 1e300, np.zeros_like(x)
        if value > best["value"]:
            best["value"], best["z"] = value, z
        return -value, -_split(grad)

    minimize(neg, _split(z0), jac=True, method="L-BFGS-B",
             options={"maxiter": maxiter, "gtol": gtol, "ftol": ftol, "maxcor": 20})
    return float(best["value"]), best["z"]


def minimize_complex(fun_grad, z0, maxiter=5000, gtol=1e-12, ftol=1e-15):
    """Counterpart of :func:`maximize`; returns ``(value, z, scipy_result)``."""
    z0 = np.asarray(z0, dtype=np.complex128)
    shape = z0.shape

    def f(x):
        value, grad = fun_grad(_join(x, shape))
        return value, _split(grad)

    res = minimize(f, _split(z0), jac=True, method="L-BFGS-B",
                   options={"maxiter": maxiter, "gtol": gtol, "ftol": ftol, "maxcor": 30})
    return float(res.fun), _join(res.x, shape), res
