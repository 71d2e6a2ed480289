"""
Central finite differences for scalar and vector fields on R^n.

The step for coordinate i is h_i = max(1e-5, 1e-7 * |x_i|).
"""

import logging

from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)

MIN_STEP = 1e-5
RELATIVE_STEP = 1e-7


def fd_steps(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.maximum(MIN_STEP, RELATIVE_STEP * np.abs(x))


def central_gradient(func: Callable[[np.ndarray], float], x: np.ndarray, step=None) -> np.ndarray:
    """Gradient of a scalar function by central differences"""
    x0 = np.asarray(x, dtype=float)
    steps = fd_steps(x0) if step is None else np.broadcast_to(np.asarray(step, dtype=float), x0.shape)
    grad = np.zeros(x0.size)
    for j in range(x0.size):
        x = np.copy(x0)
        x[j] = x0[j] + steps[j]
        fplus = func(x)
        x[j] = x0[j] - steps[j]
        fminus = func(x)
        grad[j] = (fplus - fminus) / (2 * steps[j])
    return grad


def central_jacobian(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray, step=None) -> np.ndarray:
    """Jacobian d func_i / d x_j of a vector function, shape (m, n)"""
    x0 = np.asarray(x, dtype=float)
    steps = fd_steps(x0) if step is None else np.broadcast_to(np.asarray(step, dtype=float), x0.shape)
    columns = []
    for j in range(x0.size):
        x = np.copy(x0)
        x[j] = x0[j] + steps[j]
        fplus = np.asarray(func(x), dtype=float)
        x[j] = x0[j] - steps[j]
        fminus = np.asarray(func(x), dtype=float)
        columns.append((fplus - fminus) / (2 * steps[j]))
    return np.stack(columns, axis=-1)


def central_hessian(func: Callable[[np.ndarray], float], x: np.ndarray) -> np.ndarray:
    """Hessian of a scalar function from function values only"""
    x0 = np.asarray(x, dtype=float)
    h = fd_steps(x0)
    n = x0.size
    hess = np.zeros((n, n))
    f0 = func(x0)
    for i in range(n):
        e_i = np.zeros(n)
        e_i[i] = h[i]
        hess[i, i] = (func(x0 + e_i) - 2.0 * f0 + func(x0 - e_i)) / h[i] ** 2
        for j in range(i + 1, n):
            e_j = np.zeros(n)
            e_j[j] = h[j]
            value = (
                func(x0 + e_i + e_j)
                - func(x0 + e_i - e_j)
                - func(x0 - e_i + e_j)
                + func(x0 - e_i - e_j)
            ) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = value
    return hess


def relative_error(analytic: np.ndarray, approximate: np.ndarray) -> float:
    """max |a - b| / max(|a|_inf, |b|_inf, tiny)"""
    a = np.asarray(analytic, dtype=float)
    b = np.asarray(approximate, dtype=float)
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0), 1e-300)
    return float(np.max(np.abs(a - b), initial=0.0) / scale)


def check_gradient(func, grad, x: np.ndarray, step=None) -> float:
    """Relative error between a user-supplied gradient and central differences"""
    analytic = np.asarray(grad(x), dtype=float)
    approximate = central_gradient(func, x, step=step)
    err = relative_error(analytic, approximate)
    logger.debug("gradient check at %s: relative error %.3e", x, err)
    return err
