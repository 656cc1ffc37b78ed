"""Small fitting helpers shared by the certificate checks."""

from __future__ import annotations

import numpy as np
from scipy import optimize


def upper_envelope(features: np.ndarray, target: np.ndarray, nonneg: tuple[bool, ...]) -> np.ndarray:
    """Coefficients theta minimizing sum(features @ theta - target) with features @ theta >= target.

    This is the tightest linear upper bound of ``target`` in the span of the
    feature columns. ``nonneg[k]`` constrains theta[k] >= 0.
    """
    features = np.asarray(features, dtype=float)
    target = np.asarray(target, dtype=float)
    res = optimize.linprog(
        c=features.sum(axis=0),
        A_ub=-features,
        b_ub=-target,
        bounds=[(0, None) if nn else (None, None) for nn in nonneg],
    )
    if not res.success:
        raise RuntimeError(f"envelope fit failed: {res.message}")
    theta = res.x
    # absorb solver tolerance into the free intercept (column 0)
    theta[0] += max(0.0, float(np.max(target - features @ theta)))
    return theta


def slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of y against x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
