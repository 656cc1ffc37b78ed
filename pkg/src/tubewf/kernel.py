"""The sphere profile I, its radial form I0 and the tube kernel K.

    I(xi)  = integral over |omega| = 1 of exp(-<omega, xi>) d omega
    I0(rho) = c_{d-1} * integral_{-1}^{1} (1 - t^2)^((d-3)/2) exp(t rho) dt,  I(xi) = I0(|xi|)
    K(z)   = (2 pi)^(-d) * integral exp(i <z, xi>) / I(xi) d xi,   |Im z| < 1

``c_{d-1}`` is the area of the unit sphere S^{d-2}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from scipy import special

from ._fit import upper_envelope

__all__ = [
    "KernelConfig",
    "TubePoint",
    "TubeGuardError",
    "sphere_area",
    "eval_I",
    "eval_I0",
    "eval_I0_scaled",
    "I0_asymptote",
    "inv_I_radial",
    "inv_I_scaled",
    "eval_K",
    "eval_K_spectral",
    "blowup_constant",
    "decay_bound_check",
    "DecayBound",
    "kernel_derivative_bound_check",
    "DerivativeBound",
    "fit_I0_bound",
    "AsymptoteCheck",
    "asymptote_check",
]

Y_GUARD = 1e-4


class TubeGuardError(ValueError):
    """Evaluation point too close to the boundary of the tube."""


def sphere_area(d: int) -> float:
    """Area of the unit sphere S^{d-1} in R^d (2 for d = 1)."""
    return 2.0 * np.pi ** (d / 2) / special.gamma(d / 2)


@dataclass(frozen=True)
class TubePoint:
    """A point z = x + i y of the tube |y| < 1."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        y = tuple(float(v) for v in np.atleast_1d(self.y))
        if len(x) != len(y):
            raise ValueError("x and y must have the same dimension")
        if sum(v * v for v in y) >= 1.0:
            raise ValueError("|Im z| must be < 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def dim(self) -> int:
        return len(self.x)

    @property
    def abs_y(self) -> float:
        return float(np.sqrt(sum(v * v for v in self.y)))

    @property
    def z(self) -> np.ndarray:
        return np.asarray(self.x) + 1j * np.asarray(self.y)


@dataclass(frozen=True)
class KernelConfig:
    """Discretization of the spectral integral defining K."""

    dim: int = 1
    truncation_radius: float = 40.0
    quadrature_order: int = 64

    def __post_init__(self):
        if self.truncation_radius < 40:
            raise ValueError("truncation_radius must be >= 40")
        if self.quadrature_order < 64:
            raise ValueError("quadrature_order must be >= 64")

    def radius_for(self, abs_y: float) -> float:
        """Per-evaluation spectral cutoff max(R, 40 / (1 - |y|))."""
        return max(self.truncation_radius, 40.0 / (1.0 - abs_y))


# ---------------------------------------------------------------------------
# I and I0


@lru_cache(maxsize=64)
def _jacobi_rule(n: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    a = (d - 3) / 2.0
    t, w = special.roots_jacobi(n, a, a)
    return t, w


def _jacobi_order(rho: np.ndarray) -> int:
    big = float(np.max(np.abs(rho), initial=0.0))
    return int(min(4096, max(64, np.ceil(0.75 * big + 8 * np.sqrt(big) + 32))))


def eval_I0_scaled(d: int, rho) -> np.ndarray:
    """exp(-|Re rho|) * I0(rho), by Gauss-Jacobi quadrature in t."""
    if d < 2:
        raise ValueError("I0 is defined for d >= 2")
    rho = np.asarray(rho, dtype=complex)
    t, w = _jacobi_rule(_jacobi_order(rho), d)
    flat = rho.ravel()
    shift = np.abs(flat.real)
    out = np.empty(flat.shape, dtype=complex)
    for i in range(0, flat.size, 2048):
        r = flat[i : i + 2048, None]
        out[i : i + 2048] = np.exp(t[None, :] * r - shift[i : i + 2048, None]) @ w
    return (sphere_area(d - 1) * out).reshape(rho.shape)


def eval_I0(d: int, rho) -> np.ndarray:
    """Radial profile I0 for d >= 2 (complex argument allowed)."""
    rho = np.asarray(rho, dtype=complex)
    return eval_I0_scaled(d, rho) * np.exp(np.abs(rho.real))


def eval_I(d: int, xi) -> np.ndarray:
    """I(xi) for xi in R^d; ``xi`` has trailing axis of length d (or is scalar for d = 1)."""
    xi = np.asarray(xi, dtype=float)
    if d == 1:
        return 2.0 * np.cosh(xi if xi.ndim == 0 or xi.shape[-1] != 1 else xi[..., 0])
    rho = np.sqrt(np.sum(xi**2, axis=-1))
    return eval_I0(d, rho).real


def I0_asymptote(d: int, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    return (2 * np.pi) ** ((d - 1) / 2) * np.exp(rho) * rho ** (-(d - 1) / 2)


def inv_I_scaled(d: int, rho) -> np.ndarray:
    """exp(rho) / I0(rho) for real rho >= 0, without overflow.

    d = 1 and 3 use the elementary closed forms, d = 2 the exponentially
    scaled modified Bessel function, other d the Gauss-Jacobi rule.
    """
    rho = np.abs(np.asarray(rho, dtype=float))
    if d == 1:
        return 1.0 / (1.0 + np.exp(-2 * rho))
    if d == 2:
        return 1.0 / (2 * np.pi * special.ive(0, rho))
    if d == 3:
        small = rho < 1e-8
        r = np.where(small, 1.0, rho)
        return np.where(small, 1 / (4 * np.pi), r / (2 * np.pi * (1 - np.exp(-2 * r))))
    return 1.0 / eval_I0_scaled(d, rho).real


def inv_I_radial(d: int, rho) -> np.ndarray:
    """1 / I0(rho) for real rho >= 0."""
    rho = np.abs(np.asarray(rho, dtype=float))
    return np.exp(-rho) * inv_I_scaled(d, rho)


# ---------------------------------------------------------------------------
# K


def _guard(abs_y: float):
    if abs_y > 1.0 - Y_GUARD:
        raise TubeGuardError(
            f"|Im z| = {abs_y:.6g} exceeds the attainable radius {1 - Y_GUARD:.6g}"
        )


def _sech_kernel(z):
    w = np.pi * np.asarray(z, dtype=complex) / 2
    # 1/cosh(w) = 2 e^{-w} / (1 + e^{-2w}), flipped for Re w < 0 to avoid overflow
    s = np.where(w.real >= 0, 1.0, -1.0)
    e = np.exp(-s * w)
    return 2.0 * e / (1.0 + e * e)


@lru_cache(maxsize=8)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


def _panels(R: float, period: float, order: int = 16):
    """Composite Gauss-Legendre nodes and weights on [0, R].

    Panels grow geometrically (the integrands are smooth on the scale of
    their argument) but never exceed ``period``, the oscillation length.
    """
    edges = [0.0]
    while edges[-1] < R:
        edges.append(min(R, edges[-1] + min(period, max(1.0, 0.25 * edges[-1]))))
    edges = np.asarray(edges)
    t, w = _gl(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    return (mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()


def _period(freq: float) -> float:
    return np.inf if abs(freq) < 1e-12 else 2 * np.pi / abs(freq)


def eval_K_spectral(d: int, x, y, cfg: KernelConfig | None = None) -> complex:
    """K(x + i y) by direct quadrature of the defining spectral integral.

    d = 1 integrates exp(i z xi) / (2 cosh xi) over the truncated line; d = 2
    integrates the angular mean analytically (a Bessel J0 of the complex
    radius sqrt(<z, z>)) and the radius numerically.
    """
    cfg = cfg or KernelConfig(dim=d)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    ay = float(np.sqrt(np.sum(y**2)))
    _guard(ay)
    R = cfg.radius_for(ay)
    if d == 1:
        xi, w = _panels(R, _period(x[0]))
        xi = np.concatenate([-xi[::-1], xi])
        w = np.concatenate([w[::-1], w])
        vals = np.exp(1j * x[0] * xi - y[0] * xi - np.abs(xi)) * inv_I_scaled(1, xi)
        return complex(np.sum(w * vals) / (2 * np.pi))
    if d == 2:
        zz = complex(np.sum((x + 1j * y) ** 2))
        s = np.sqrt(zz)
        if s.real < 0:
            s = -s
        rho, w = _panels(R, _period(s.real))
        # J0(rho s) = jve(0, rho s) exp(rho |Im s|), with |Im s| <= |y|
        scale = np.exp(rho * (abs(s.imag) - 1.0)) / (2 * np.pi * special.ive(0, rho))
        vals = rho * special.jve(0, rho * s) * scale
        return complex(np.sum(w * vals) / (2 * np.pi) ** 2 * (2 * np.pi))
    raise ValueError("K is implemented for d = 1 and d = 2")


def eval_K(d: int, z: TubePoint | tuple, cfg: KernelConfig | None = None) -> complex:
    """Tube kernel K(z): closed form sech(pi z / 2) / 4 in d = 1, radial quadrature in d = 2."""
    if not isinstance(z, TubePoint):
        z = TubePoint(*z)
    if z.dim != d:
        raise ValueError("point dimension does not match d")
    _guard(z.abs_y)
    if d == 1:
        return complex(_sech_kernel(z.z[0]) / 4.0)
    return eval_K_spectral(d, z.x, z.y, cfg)


def blowup_constant(d: int) -> float:
    """Limit of K(i y) (1 - |y|)^d as |y| -> 1."""
    return factorial(d - 1) * (2 * np.pi) ** (-d)


# ---------------------------------------------------------------------------
# Certified bounds


def fit_I0_bound(d: int, rho) -> float:
    """Smallest C with |I0(rho)| <= C (1 + |rho|)^(-(d-1)/2) exp(|Re rho|) on the samples."""
    rho = np.asarray(rho, dtype=complex)
    ratio = np.abs(eval_I0_scaled(d, rho)) * (1 + np.abs(rho)) ** ((d - 1) / 2)
    return float(ratio.max())


_ROUNDING = 1e-12


@dataclass(frozen=True)
class AsymptoteCheck:
    """Ratios I0(rho) / asymptote and the fitted C in |ratio - 1| <= C / rho."""

    dim: int
    rho: tuple[float, ...]
    ratios: tuple[float, ...]
    C: float
    monotone: bool


def asymptote_check(d: int, rho=(20.0, 30.0, 50.0)) -> AsymptoteCheck:
    """Compare I0 with its large-rho asymptote at increasing radii.

    The approach is monotone when |ratio - 1| does not increase with rho;
    deviations at the quadrature's rounding level (below ``_ROUNDING``)
    count as converged.
    """
    r = np.sort(np.asarray(rho, dtype=float))
    ratio = eval_I0_scaled(d, r).real * np.exp(r) / I0_asymptote(d, r)
    dev = np.abs(ratio - 1.0)
    dev = np.where(dev < _ROUNDING, 0.0, dev)
    return AsymptoteCheck(d, tuple(r.tolist()), tuple(ratio.tolist()), float(np.max(r * dev)),
                          bool(np.all(np.diff(dev) <= 0)))


@dataclass(frozen=True)
class DecayBound:
    """Result of :func:`decay_bound_check`."""

    dim: int
    constant: float
    argmax_radius: float
    grid_max_radius: float
    interior: bool


def decay_bound_check(d: int, radii=None) -> DecayBound:
    """Sweep q(r) = e^r (1 + r)^(-(d-1)/2) / I0(r) over radii up to 50.

    I is radial, so the sweep over |xi| covers the whole xi-grid. The
    maximizer counts as interior when it is not the last grid radius.
    """
    if d not in (1, 2, 3):
        raise ValueError("decay_bound_check supports d in {1, 2, 3}")
    r = np.linspace(0.0, 50.0, 5001) if radii is None else np.asarray(radii, dtype=float)
    if d == 1:
        inv_scaled = 1.0 / (1.0 + np.exp(-2 * r))
    else:
        inv_scaled = 1.0 / eval_I0_scaled(d, r).real
    q = inv_scaled * (1 + r) ** (-(d - 1) / 2)
    k = int(np.argmax(q))
    return DecayBound(d, float(q[k]), float(r[k]), float(r[-1]), k < len(r) - 1)


@dataclass(frozen=True)
class DerivativeBound:
    """Fitted |D^beta K(x + i y)| <= C (1 - |y|)^(-d-|beta|) exp(-c |x|)."""

    dim: int
    beta: tuple[int, ...]
    c: float
    log_C: float
    validation_excess: float
    passed: bool


def _finite_difference(d: int, beta: tuple[int, ...], x: np.ndarray, y: np.ndarray, h: float) -> complex:
    """Central differences in Re z of order beta."""
    stencils = {0: ((0.0, 1.0),), 1: ((-1.0, -0.5), (1.0, 0.5)), 2: ((-1.0, 1.0), (0.0, -2.0), (1.0, 1.0))}
    total = 0.0 + 0.0j
    grids = [stencils[b] for b in beta]
    for combo in np.ndindex(*[len(g) for g in grids]):
        shift = np.array([grids[k][i][0] for k, i in enumerate(combo)]) * h
        coef = np.prod([grids[k][i][1] for k, i in enumerate(combo)])
        total += coef * eval_K(d, TubePoint(tuple(x + shift), tuple(y)))
    return total / h ** sum(beta)


def kernel_derivative_bound_check(
    d: int,
    beta: tuple[int, ...] = (0,),
    xs=None,
    gaps=None,
    h: float = 1e-4,
    slack: float = 1.25,
) -> DerivativeBound:
    """Fit (c, C_beta) on half of a (x, 1 - |y|) lattice and validate on the rest.

    x runs along the first axis and y along the first axis direction. The
    pair (log C, c) is the tightest line above log|D^beta K| + (d + |beta|)
    log(1 - |y|) as a function of |x| on the training half (a small LP). The
    check passes if no validation sample exceeds the fitted bound by more
    than ``slack``.
    """
    beta = tuple(int(b) for b in beta)
    if len(beta) != d or sum(beta) > 2:
        raise ValueError("beta must be a multi-index of length d with |beta| <= 2")
    xs = np.linspace(0.0, 8.0, 17) if xs is None else np.asarray(xs, dtype=float)
    gaps = np.logspace(-3, -0.3, 8) if gaps is None else np.asarray(gaps, dtype=float)
    rows = []
    for g in gaps:
        for x0 in xs:
            x = np.zeros(d)
            x[0] = x0
            y = np.zeros(d)
            y[0] = 1.0 - g
            val = abs(_finite_difference(d, beta, x, y, h))
            if val > 0:
                rows.append((abs(x0), g, np.log(val) + (d + sum(beta)) * np.log(g)))
    data = np.array(rows)
    train, valid = data[0::2], data[1::2]
    # tightest line log C - c |x| lying above every training sample
    theta = upper_envelope(np.column_stack([np.ones(len(train)), -train[:, 0]]), train[:, 2], (False, True))
    log_C, c = float(theta[0]), float(theta[1])
    excess = float(np.max(valid[:, 2] + c * valid[:, 0]) - log_C)
    return DerivativeBound(d, beta, c, log_C, excess, excess <= np.log(slack))
