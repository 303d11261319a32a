"""Cached Gauss-Legendre rules and adaptive panel quadrature.

These helpers serve the hot loops (Matsubara-term integrals, weak-limit
substitutions).  Rules are cached per node count; adaptivity is by node
doubling on a fixed interval with a relative stopping test, which suits
the smooth integrands produced by the variable substitutions used
throughout: geometric convergence, no subdivision bookkeeping.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ConvergenceError


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the n-point rule on [-1, 1], cached."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def fixed_gl(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int) -> float:
    """n-point Gauss-Legendre approximation of the integral of f on [a, b]."""
    x, w = gauss_legendre(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(np.dot(w, f(mid + half * x)))


def adaptive_gl(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float,
    n0: int = 32,
    n_max: int = 4096,
    floor: float = 0.0,
) -> tuple[float, float, int]:
    """Node-doubling Gauss-Legendre on [a, b].

    Stops when successive estimates agree to tol relative to
    max(|estimate|, floor); the floor lets near-zero tail panels converge
    against the scale of the surrounding integral instead of chasing
    relative accuracy on a value that is essentially zero.

    Returns (value, error_estimate, function_evaluations).
    """
    prev = fixed_gl(f, a, b, n0)
    evals = n0
    n = 2 * n0
    while n <= n_max:
        cur = fixed_gl(f, a, b, n)
        evals += n
        err = abs(cur - prev)
        if err <= tol * max(abs(cur), floor):
            return cur, err, evals
        prev = cur
        n *= 2
    raise ConvergenceError(
        f"quadrature did not reach tol={tol:g} on [{a:g}, {b:g}] with n <= {n_max}"
    )


def geometric_panels(inner: float, outer: float, ratio: float = 2.0) -> list[tuple[float, float]]:
    """Panel edges from `inner` out to `outer` growing by `ratio`.

    Used to resolve integrable endpoint features (log singularities,
    mollifier cores) whose natural scale is `inner`.
    """
    if not (0.0 < inner < outer):
        raise ValueError(f"need 0 < inner < outer, got {inner}, {outer}")
    edges = [0.0, inner]
    while edges[-1] < outer:
        edges.append(min(edges[-1] * ratio, outer))
    return list(zip(edges[:-1], edges[1:]))
