"""Analytic representatives F = K * f in the tube |Im z| < 1 and their boundary values.

The transform of F(. + i y) is ``kappa * exp(-<y, xi>) f^(xi) / I(xi)``;
``kappa = 1`` makes the representative of the Dirac mass equal to K.

Two evaluation routes exist. Catalog entries in d = 1 are evaluated by
quadrature of the exact transform, with the point mass and the principal
value or finite part at xi = 0 treated analytically. Grid signals (typically
localized, compactly supported samples) use their discrete spectrum, so
boundary values and pairings are exact discrete identities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._fit import slope, upper_envelope
from .kernel import KernelConfig, TubeGuardError, Y_GUARD, inv_I_scaled
from .signals import GridError, GridSignal, Localizer, ModelDistribution, inverse_spectrum, localize, spectrum

__all__ = [
    "AnalyticRep",
    "DirectionSet",
    "GrowthCertificate",
    "RestrictedRep",
    "SphereMeasure",
    "SpectralGrowthError",
    "average_over_sphere",
    "blowup_exponent",
    "boundary_multiplier",
    "fit_growth",
    "half_tube_split",
    "make_analytic_rep",
    "reconstruct",
    "sphere_nodes",
]

KAPPA = 1.0


class SpectralGrowthError(ValueError):
    """Source without a usable polynomially bounded spectral representation."""


def boundary_multiplier(d: int, y: np.ndarray, coords: Sequence[np.ndarray]) -> np.ndarray:
    """exp(-<y, xi>) / I(xi) on frequency coordinates, overflow-free for |y| <= 1."""
    rho = np.sqrt(sum(c**2 for c in coords))
    dot = sum(yk * c for yk, c in zip(y, coords))
    return np.exp(-dot - rho) * inv_I_scaled(d, rho)


# ---------------------------------------------------------------------------
# Sphere quadrature and measures


def sphere_nodes(d: int, n_nodes: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Directions on S^{d-1} and weights summing to its area.

    d = 1 uses the two points +-1 with unit mass, d = 2 the uniform
    trapezoid rule in angle.
    """
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        if n_nodes < 256:
            raise ValueError("angular quadrature needs at least 256 nodes")
        t = 2 * np.pi * np.arange(n_nodes) / n_nodes
        return np.column_stack([np.cos(t), np.sin(t)]), np.full(n_nodes, 2 * np.pi / n_nodes)
    raise ValueError("sphere quadrature is implemented for d = 1, 2")


def bin_of(directions: np.ndarray, D: int) -> np.ndarray:
    """Index of the direction bin containing each unit vector.

    d = 1: bin 0 is +1, bin 1 is -1. d = 2: bin k is the arc of width 2 pi / D
    centered at angle 2 pi k / D.
    """
    directions = np.atleast_2d(directions)
    if directions.shape[1] == 1:
        return np.where(directions[:, 0] > 0, 0, 1)
    ang = np.arctan2(directions[:, 1], directions[:, 0])
    return np.mod(np.round(ang / (2 * np.pi / D)).astype(int), D)


@dataclass(frozen=True)
class DirectionSet:
    """Finite union of direction bins on S^{d-1}."""

    dim: int
    bins: frozenset[int]
    D: int = 2

    def __post_init__(self):
        object.__setattr__(self, "bins", frozenset(int(b) for b in self.bins))
        if self.dim == 1:
            object.__setattr__(self, "D", 2)
        if any(not 0 <= b < self.D for b in self.bins):
            raise ValueError("bin index out of range")

    def contains(self, directions: np.ndarray) -> np.ndarray:
        return np.isin(bin_of(directions, self.D), sorted(self.bins))

    @property
    def is_empty(self) -> bool:
        return not self.bins

    @property
    def is_full(self) -> bool:
        return len(self.bins) == self.D


@dataclass(frozen=True)
class SphereMeasure:
    """Discrete measure sum_j w_j delta_{omega_j} on S^{d-1}.

    Point masses are stored directly; densities are stored through their
    trapezoid discretization.
    """

    dim: int
    directions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        dirs = np.asarray(self.directions, dtype=float).reshape(-1, self.dim)
        w = np.asarray(self.weights, dtype=float).ravel()
        if len(dirs) != len(w):
            raise ValueError("one weight per direction")
        if not np.all(np.isfinite(w)):
            raise ValueError("total mass must be finite")
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "weights", w)

    @classmethod
    def point(cls, direction, mass: float = 1.0) -> "SphereMeasure":
        u = np.atleast_1d(np.asarray(direction, dtype=float))
        return cls(len(u), u[None, :] / np.linalg.norm(u), [mass])

    @classmethod
    def uniform(cls, d: int, n_nodes: int = 256) -> "SphereMeasure":
        return cls(d, *sphere_nodes(d, n_nodes))

    @classmethod
    def on_bins(cls, d: int, bins: DirectionSet, n_nodes: int = 256) -> "SphereMeasure":
        """Surface measure restricted to a union of bins (piecewise constant density)."""
        dirs, w = sphere_nodes(d, n_nodes)
        return cls(d, dirs, np.where(bins.contains(dirs), w, 0.0))

    @classmethod
    def zero(cls, d: int) -> "SphereMeasure":
        return cls(d, np.zeros((0, d)), np.zeros(0))

    @property
    def total_mass(self) -> float:
        return float(np.abs(self.weights).sum())

    def support_bins(self, D: int) -> frozenset[int]:
        live = self.weights != 0
        return frozenset(int(b) for b in bin_of(self.directions[live], D)) if live.any() else frozenset()


# ---------------------------------------------------------------------------
# Analytic representative


@dataclass(frozen=True)
class GrowthCertificate:
    """|F(z)| <= C (1 + |z|)^a (1 - |Im z|)^(-b) on the fitted lattice."""

    C: float
    a: float
    b: float
    validation_excess: float = 0.0

    def bound(self, z: np.ndarray, abs_y: np.ndarray) -> np.ndarray:
        return self.C * (1 + np.abs(z)) ** self.a * (1 - abs_y) ** (-self.b)


def _gl_panels(R: float, period: float, order: int = 16):
    t, w = np.polynomial.legendre.leggauss(order)
    edges = [0.0]
    while edges[-1] < R:
        edges.append(min(R, edges[-1] + min(period, max(1.0, 0.25 * edges[-1]))))
    edges = np.asarray(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    return (mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()


def _model_integral(model: ModelDistribution, h, R: float, period: float) -> complex:
    """Integral of f^ h over the line for a d = 1 catalog entry.

    ``h`` must be smooth. The point mass contributes atom * h(0); fold 1 is a
    principal value (symmetric pairing of xi and -xi); fold 2 is the finite
    part of fold_coeff / xi^2, i.e. the h(0) term is subtracted and its tail
    beyond R added back analytically.
    """
    xi, w = _gl_panels(R, period)
    vals = model.fourier(xi) * h(xi) + model.fourier(-xi) * h(-xi)
    total = complex(model.atom) * h(np.zeros(1))[0]
    if model.fold == 2:
        h0 = h(np.zeros(1))[0]
        vals = vals - 2 * model.fold_coeff * h0 / xi**2
        total += -2 * model.fold_coeff * h0 / R
    return total + complex(np.sum(w * vals))


@dataclass(frozen=True, eq=False)
class AnalyticRep:
    """The representative F = kappa * K * f of a source f."""

    dim: int
    model: Optional[ModelDistribution] = None
    source: Optional[GridSignal] = None
    kappa: float = KAPPA
    cfg: KernelConfig = field(default_factory=KernelConfig)
    _spec: Optional[GridSignal] = field(default=None, repr=False)

    @property
    def on_grid(self) -> bool:
        return self.source is not None

    @property
    def spec(self) -> GridSignal:
        if self._spec is None:
            raise GridError("this representative has no grid; build it from a GridSignal")
        return self._spec

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, x, y) -> complex:
        """F(x + i y) for a single tube point."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        ay = float(np.sqrt(np.sum(y**2)))
        if ay > 1 - Y_GUARD:
            raise TubeGuardError(f"|Im z| = {ay:.6g} exceeds the attainable radius {1 - Y_GUARD:.6g}")
        if self.on_grid:
            g = self.spec
            coords = g.coords()
            mult = boundary_multiplier(self.dim, y, coords)
            phase = np.exp(1j * sum(xk * c for xk, c in zip(x, coords)))
            total = np.sum(g.samples * mult * phase) * g.cell
            return complex(self.kappa * total / (2 * np.pi) ** (self.dim / 2))
        if self.dim != 1:
            raise GridError("pointwise catalog evaluation is implemented for d = 1; sample on a grid")
        R = self.cfg.radius_for(ay)
        h = lambda xi: np.exp(1j * x[0] * xi) * boundary_multiplier(1, y, (xi,))
        period = np.inf if x[0] == 0 else 2 * np.pi / abs(x[0])
        return self.kappa * _model_integral(self.model, h, R, period) / np.sqrt(2 * np.pi)

    def evaluate_many(self, xs, ys) -> np.ndarray:
        """F on paired arrays of points (shape (m, d) each, or (m,) in d = 1)."""
        xs = np.asarray(xs, dtype=float).reshape(-1, self.dim)
        ys = np.asarray(ys, dtype=float).reshape(-1, self.dim)
        return np.array([self.evaluate(a, b) for a, b in zip(xs, ys)])

    # -- grid route ---------------------------------------------------------

    def boundary_spectrum(self, y) -> GridSignal:
        """Transform of x -> F(x + i y) on the source's frequency grid (|y| <= 1 allowed)."""
        g = self.spec
        y = np.broadcast_to(np.asarray(y, dtype=float), (self.dim,))
        return g.with_samples(self.kappa * g.samples * boundary_multiplier(self.dim, y, g.coords()))

    def boundary(self, y) -> GridSignal:
        """x -> F(x + i y) sampled on the source grid."""
        return inverse_spectrum(self.boundary_spectrum(y), self.source.origin)

    def pairing(self, y, phi: GridSignal) -> complex:
        """<F(. + i y), phi> = integral F(x + i y) phi(x) dx (bilinear)."""
        y = np.broadcast_to(np.asarray(y, dtype=float), (self.dim,))
        if self.on_grid:
            _check_same_grid(self.source, phi)
            return complex(np.sum(self.boundary(y).samples * phi.samples) * phi.cell)
        return self._model_pairing(lambda xi: boundary_multiplier(1, y, (xi,)) * self.kappa, phi)

    def source_pairing(self, phi: GridSignal) -> complex:
        """<f, phi>, the limit that reconstruction must reach."""
        if self.on_grid:
            _check_same_grid(self.source, phi)
            return complex(np.sum(self.source.samples * phi.samples) * phi.cell)
        return self._model_pairing(lambda xi: np.ones_like(xi), phi)

    def _model_pairing(self, mult, phi: GridSignal) -> complex:
        # <u, phi> = integral u^(xi) phi^(-xi) d xi with phi^ summed directly from its samples
        if self.dim != 1 or phi.dim != 1:
            raise GridError("catalog pairings are implemented for d = 1")
        x = phi.axis(0)
        live = np.abs(phi.samples) > 1e-15 * np.abs(phi.samples).max()
        reach = max(1.0, float(np.abs(x[live]).max()))
        weights = phi.samples * phi.spacing / np.sqrt(2 * np.pi)

        def h(xi):
            xi = np.atleast_1d(xi)
            out = np.empty(xi.shape, dtype=complex)
            for i in range(0, xi.size, 1024):
                out[i : i + 1024] = np.exp(1j * np.outer(xi[i : i + 1024], x)) @ weights
            return out * mult(xi)

        return _model_integral(self.model, h, np.pi / phi.spacing, 2 * np.pi / reach)


def _check_same_grid(a: GridSignal, b: GridSignal):
    if a.dim != b.dim or a.n != b.n or not np.isclose(a.spacing, b.spacing) or not np.allclose(a.origin, b.origin):
        raise GridError("test function must live on the source grid")


def make_analytic_rep(f: ModelDistribution | GridSignal, kappa: float = KAPPA,
                      cfg: KernelConfig | None = None) -> AnalyticRep:
    """Representative F = K * f of a catalog entry or a grid signal."""
    if isinstance(f, GridSignal):
        if f.domain != "space":
            raise GridError("make_analytic_rep expects space-domain samples")
        return AnalyticRep(f.dim, None, f, kappa, cfg or KernelConfig(dim=f.dim), spectrum(f))
    if f.fourier is None or f.poly_bound is None:
        raise SpectralGrowthError(f"{f.name} has no polynomially bounded transform; sample it on a grid")
    return AnalyticRep(f.dim, f, None, kappa, cfg or KernelConfig(dim=f.dim))


# ---------------------------------------------------------------------------
# Growth certificate and blow-up rates


def fit_growth(rep: AnalyticRep, xs=None, gaps=None) -> GrowthCertificate:
    """Fit (C, a, b) on alternate points of a log-spaced tube lattice, validate on the rest.

    The lattice approaches both boundary components y -> +-1 along the first
    coordinate; (log C, a, b) is the tightest envelope of log|F| with a, b >= 0.
    """
    d = rep.dim
    xs = np.concatenate([[0.0], np.logspace(-1, 1, 6), -np.logspace(-1, 1, 6)]) if xs is None else np.asarray(xs)
    gaps = np.logspace(-3, -0.3, 6) if gaps is None else np.asarray(gaps)
    rows = []
    for g in gaps:
        for sgn in (1.0, -1.0):
            for x0 in xs:
                x = np.zeros(d)
                x[0] = x0
                y = np.zeros(d)
                y[0] = sgn * (1 - g)
                val = abs(rep.evaluate(x, y))
                if val > 0:
                    rows.append((np.log1p(np.hypot(np.linalg.norm(x), 1 - g)), -np.log(g), np.log(val)))
    data = np.array(rows)
    train, valid = data[0::2], data[1::2]
    feats = lambda a: np.column_stack([np.ones(len(a)), a[:, 0], a[:, 1]])
    theta = upper_envelope(feats(train), train[:, 2], (False, True, True))
    excess = float(np.max(valid[:, 2] - feats(valid) @ theta))
    return GrowthCertificate(float(np.exp(theta[0])), float(theta[1]), float(theta[2]), excess)


def blowup_exponent(rep: AnalyticRep, x, direction, gaps=None) -> float:
    """Least-squares slope of log|F(x + i(1 - g) direction)| against -log g."""
    gaps = np.logspace(-3, -1, 7) if gaps is None else np.asarray(gaps)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(direction, dtype=float))
    u = u / np.linalg.norm(u)
    vals = [abs(rep.evaluate(x, (1 - g) * u)) for g in gaps]
    return slope(-np.log(gaps), np.log(vals))


# ---------------------------------------------------------------------------
# Reconstruction from boundary values


def _check_eps(eps: float, rep: AnalyticRep):
    lo_ok = eps >= 0 if rep.on_grid else eps > 0
    if not (lo_ok and eps < 0.5):
        raise ValueError(f"eps must lie in {'[0' if rep.on_grid else '(0'}, 0.5), got {eps}")


def reconstruct(F: AnalyticRep, phi: GridSignal, eps: float, n_nodes: int = 256) -> complex:
    """Sphere quadrature of <F(. + i (1 - eps) omega), phi>; tends to <f, phi> as eps -> 0.

    Grid representatives accept eps = 0, the exact band-limited boundary value.
    """
    _check_eps(eps, F)
    dirs, w = sphere_nodes(F.dim, n_nodes)
    if F.on_grid:
        _check_same_grid(F.source, phi)
        mult = sum(wj * boundary_multiplier(F.dim, (1 - eps) * u, F.spec.coords()) for u, wj in zip(dirs, w))
        spec = F.spec.with_samples(F.kappa * F.spec.samples * mult)
        vals = inverse_spectrum(spec, F.source.origin).samples
        return complex(np.sum(vals * phi.samples) * phi.cell)
    return complex(sum(wj * F.pairing((1 - eps) * u, phi) for u, wj in zip(dirs, w)))


def average_over_sphere(F: AnalyticRep, mu: SphereMeasure, eps: float) -> GridSignal:
    """F_mu(x) = integral F(x + i (1 - eps) xi) d mu(xi) on the source grid."""
    _check_eps(eps, F)
    if mu.dim != F.dim:
        raise ValueError("measure and representative dimensions differ")
    coords = F.spec.coords()
    mult = np.zeros(F.spec.samples.shape)
    for u, wj in zip(mu.directions, mu.weights):
        if wj != 0:
            mult = mult + wj * boundary_multiplier(F.dim, (1 - eps) * u, coords)
    spec = F.spec.with_samples(F.kappa * F.spec.samples * mult)
    return inverse_spectrum(spec, F.source.origin)


@dataclass(frozen=True, eq=False)
class RestrictedRep:
    """F_part(z) = sum over nodes with -omega in M of w V(z + i (1 - eps) omega)."""

    base: AnalyticRep
    measure: SphereMeasure
    eps: float

    def boundary(self) -> GridSignal:
        """Boundary value on the real grid."""
        return average_over_sphere(self.base, self.measure, self.eps)

    def evaluate(self, x, y) -> complex:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return complex(sum(
            w * self.base.evaluate(x, y + (1 - self.eps) * u)
            for u, w in zip(self.measure.directions, self.measure.weights) if w != 0
        ))


@dataclass(frozen=True)
class SplitResult:
    v1: GridSignal
    F_part: RestrictedRep
    localized: GridSignal
    degenerate: Optional[str] = None


def half_tube_split(f: GridSignal, chi: Localizer, M: DirectionSet, eps: float = 0.0,
                    n_nodes: int = 256) -> SplitResult:
    """Split chi f into v1 (directions with -omega outside M) and the tube part F_part.

    With V = K * (chi f), v1 = sum over -omega not in M of w V(. + i (1 - eps) omega)
    and F_part collects the remaining nodes, so v1 + F_part|boundary equals the
    eps-reconstruction of chi f (chi f itself when eps = 0).
    """
    u = localize(f, chi)
    V = make_analytic_rep(u)
    dirs, w = sphere_nodes(f.dim, n_nodes)
    in_M = M.contains(-dirs)
    mu1 = SphereMeasure(f.dim, dirs, np.where(in_M, 0.0, w))
    mu2 = SphereMeasure(f.dim, dirs, np.where(in_M, w, 0.0))
    flag = "M empty: v1 carries everything" if M.is_empty else ("M full: v1 = 0" if M.is_full else None)
    return SplitResult(average_over_sphere(V, mu1, eps), RestrictedRep(V, mu2, eps), u, flag)
