"""Grid-sampled and symbolic distributions under the unitary Fourier convention.

The transform used everywhere is

    f^(xi) = (2 pi)^(-d/2) * integral f(x) exp(-i <x, xi>) dx,

discretized on a uniform grid ``x_k = origin + k * spacing`` so that the
discrete transform is exactly unitary with Riemann-sum weights
``spacing**d`` (space) and ``(2 pi / (n spacing))**d`` (frequency).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

__all__ = [
    "GridError",
    "GridSignal",
    "Localizer",
    "ModelDistribution",
    "Singularity",
    "UnknownSourceError",
    "CATALOG",
    "catalog_names",
    "get_model",
    "frequency_axes",
    "inverse_spectrum",
    "localize",
    "local_grid",
    "sample",
    "spectrum",
    "spectral_taper",
]

SQRT2PI = np.sqrt(2.0 * np.pi)


class GridError(ValueError):
    """Invalid grid geometry (shape, spacing, support)."""


class UnknownSourceError(KeyError):
    pass


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class GridSignal:
    """Samples of a function on a uniform square grid in d = 1 or 2.

    ``domain`` is ``"space"`` for samples of f and ``"frequency"`` for
    samples of f^ on the centered frequency grid produced by :func:`spectrum`.
    """

    dim: int
    samples: np.ndarray
    spacing: float
    origin: np.ndarray
    domain: str = "space"

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        if self.dim not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        if samples.ndim != self.dim or len(set(samples.shape)) != 1:
            raise GridError(f"samples of shape {samples.shape} do not form a square {self.dim}-d grid")
        if not _is_pow2(samples.shape[0]):
            raise GridError(f"grid size {samples.shape[0]} is not a power of two")
        if not self.spacing > 0:
            raise GridError("spacing must be positive")
        if origin.shape != (self.dim,):
            raise GridError(f"origin must have {self.dim} components")
        if self.domain not in ("space", "frequency"):
            raise GridError(f"unknown domain {self.domain!r}")
        samples.setflags(write=False)
        origin.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def extent(self) -> float:
        return self.n * self.spacing

    @property
    def cell(self) -> float:
        """Riemann-sum weight of one sample."""
        return self.spacing**self.dim

    def axis(self, k: int = 0) -> np.ndarray:
        return self.origin[k] + self.spacing * np.arange(self.n)

    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays broadcastable against ``samples``."""
        if self.dim == 1:
            return (self.axis(0),)
        return tuple(np.meshgrid(self.axis(0), self.axis(1), indexing="ij"))

    def radius(self, center: Sequence[float] | float = 0.0) -> np.ndarray:
        c = np.broadcast_to(np.asarray(center, dtype=float), (self.dim,))
        return np.sqrt(sum((x - ci) ** 2 for x, ci in zip(self.coords(), c)))

    def with_samples(self, samples: np.ndarray) -> "GridSignal":
        return replace(self, samples=samples)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.cell))

    def contains_ball(self, center, radius: float) -> bool:
        c = np.broadcast_to(np.asarray(center, dtype=float), (self.dim,))
        lo = self.origin
        hi = self.origin + (self.n - 1) * self.spacing
        return bool(np.all(c - radius >= lo) and np.all(c + radius <= hi))


def frequency_axes(grid: GridSignal) -> tuple[np.ndarray, ...]:
    """Centered frequency coordinates matching :func:`spectrum` output."""
    dxi = 2.0 * np.pi / grid.extent
    ax = dxi * (np.arange(grid.n) - grid.n // 2)
    if grid.dim == 1:
        return (ax,)
    return tuple(np.meshgrid(ax, ax, indexing="ij"))


def spectrum(f: GridSignal) -> GridSignal:
    """Samples of f^ on the centered frequency grid (unitary, Parseval-exact)."""
    if f.domain != "space":
        raise GridError("spectrum expects a space-domain signal")
    n, d = f.n, f.dim
    dxi = 2.0 * np.pi / f.extent
    axes = tuple(range(d))
    raw = np.fft.fftshift(np.fft.fftn(f.samples, axes=axes), axes=axes)
    phase = 1.0
    for k, xi in enumerate(frequency_axes(f)):
        phase = phase * np.exp(-1j * f.origin[k] * xi)
    vals = raw * phase * (f.cell / (2.0 * np.pi) ** (d / 2))
    return GridSignal(d, vals, dxi, np.full(d, -dxi * (n // 2)), domain="frequency")


def inverse_spectrum(fh: GridSignal, origin: Sequence[float] | float) -> GridSignal:
    """Inverse of :func:`spectrum` for a space grid starting at ``origin``."""
    if fh.domain != "frequency":
        raise GridError("inverse_spectrum expects a frequency-domain signal")
    n, d = fh.n, fh.dim
    dx = 2.0 * np.pi / (n * fh.spacing)
    org = np.broadcast_to(np.asarray(origin, dtype=float), (d,)).copy()
    probe = GridSignal(d, np.zeros((n,) * d), dx, org)
    phase = 1.0
    for k, xi in enumerate(frequency_axes(probe)):
        phase = phase * np.exp(1j * org[k] * xi)
    axes = tuple(range(d))
    raw = np.fft.ifftn(np.fft.ifftshift(fh.samples * phase, axes=axes), axes=axes)
    vals = raw * ((2.0 * np.pi) ** (d / 2) / probe.cell)
    return GridSignal(d, vals, dx, org)


# ---------------------------------------------------------------------------
# Localizers


def _smooth_step(t: np.ndarray, profile: str) -> np.ndarray:
    """C-infinity transition equal to 1 for t <= 0 and 0 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    if profile == "ratio":
        with np.errstate(divide="ignore", over="ignore"):
            a = np.where(t < 1, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
            b = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        return a / (a + b)
    if profile == "bump":
        # normalized primitive of exp(-1/(1-u^2)) on [-1, 1], reflected
        out = np.where(t <= 0, 1.0, 0.0)
        mid = (t > 0) & (t < 1)
        out[mid] = 1.0 - _bump_cdf(2.0 * t[mid] - 1.0)
        return out
    raise ValueError(f"unknown localizer profile {profile!r}")


_BUMP_NODES, _BUMP_WEIGHTS = np.polynomial.legendre.leggauss(48)


def _bump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


_BUMP_MASS = float(np.sum(_BUMP_WEIGHTS * _bump(_BUMP_NODES)))


def _bump_cdf(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    flat = u.ravel()
    # Gauss-Legendre on [-1, u] for every u at once
    half = 0.5 * (flat + 1.0)
    pts = -1.0 + half[:, None] * (_BUMP_NODES[None, :] + 1.0)
    vals = (half[:, None] * _BUMP_WEIGHTS[None, :] * _bump(pts)).sum(axis=1)
    return np.clip(vals / _BUMP_MASS, 0.0, 1.0).reshape(u.shape)


PROFILES = ("bump", "ratio")


@dataclass(frozen=True)
class Localizer:
    """Radial cutoff: 1 on |x - center| <= inner_radius, 0 beyond outer_radius."""

    center: tuple[float, ...]
    inner_radius: float
    outer_radius: float
    profile: str = "bump"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not 0 < self.inner_radius < self.outer_radius:
            raise ValueError("localizer needs 0 < inner_radius < outer_radius")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown localizer profile {self.profile!r}")

    @property
    def dim(self) -> int:
        return len(self.center)

    def __call__(self, *coords: np.ndarray) -> np.ndarray:
        rho = np.sqrt(sum((x - c) ** 2 for x, c in zip(coords, self.center)))
        t = (rho - self.inner_radius) / (self.outer_radius - self.inner_radius)
        return _smooth_step(t, self.profile)

    def on(self, grid: GridSignal) -> np.ndarray:
        return self(*grid.coords())

    def scaled(self, factor: float) -> "Localizer":
        return replace(self, inner_radius=self.inner_radius * factor, outer_radius=self.outer_radius * factor)


def localize(f: GridSignal, w: Localizer) -> GridSignal:
    """Pointwise product with the cutoff; the cutoff must fit inside the grid."""
    if w.dim != f.dim:
        raise GridError("localizer and signal dimensions differ")
    if not f.contains_ball(w.center, w.outer_radius):
        raise GridError(
            f"localizer support (center {w.center}, radius {w.outer_radius}) exceeds the grid window"
        )
    return f.with_samples(f.samples * w.on(f))


# ---------------------------------------------------------------------------
# Catalog


@dataclass(frozen=True)
class Singularity:
    """Known local spectral behaviour: |(phi f)^| ~ |xi|^exponent near ``direction``.

    ``locus`` is a callable returning, for an array of points, whether the
    singularity is present there (points on an edge, a single point, ...).
    ``exponent`` is the isotropic-equivalent decay rate, i.e. the weighted
    FL^p norm over a cone around ``direction`` is finite iff
    ``exponent < -(s + d/p)``.
    """

    locus: Callable[[np.ndarray], bool]
    direction: tuple[float, ...]
    exponent: float


@dataclass(frozen=True)
class ModelDistribution:
    """Catalog entry with an exact transform (regular part) and sampling rule.

    The transform is ``fourier`` off the origin, plus ``atom * delta(xi)``;
    ``poly_bound = (C, M)`` bounds |fourier(xi)| by C (1 + |xi|)^M for
    |xi| >= 1, the origin being described by ``atom`` and ``fold``.
    ``fold`` records how the regular part must be integrated at xi = 0:
    0 (integrable), 1 (principal value), 2 (finite part of a ``fold_coeff/xi^2``
    term).
    """

    name: str
    dim: int
    fourier: Optional[Callable[..., np.ndarray]]
    poly_bound: Optional[tuple[float, float]]
    spatial: Optional[Callable[..., np.ndarray]] = None
    spectral_sampling: bool = False
    atom: complex = 0.0
    fold: int = 0
    fold_coeff: complex = 0.0
    band_limited: bool = True
    compact: bool = False
    singularities: tuple[Singularity, ...] = ()
    provenance: str = "analytic"
    description: str = ""

    def wf_exponent(self, point, direction) -> float:
        """Known exponent at (point, direction); -inf where f is regular."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        direction = np.atleast_1d(np.asarray(direction, dtype=float))
        best = -np.inf
        for sing in self.singularities:
            if sing.locus(point) and np.allclose(sing.direction, direction, atol=1e-9):
                best = max(best, sing.exponent)
        return best

    def singular_points(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        return np.array([any(s.locus(p) for s in self.singularities) for p in pts])


def _at(point):
    point = np.asarray(point, dtype=float)
    return lambda x: bool(np.allclose(np.atleast_1d(x), point, atol=1e-12))


def _bump_profile(x, a=1.0):
    return _bump(np.asarray(x, dtype=float) / a)


def _chirp_fourier(xi):
    """Transform of exp(i x^2) * bump(x / 1.5) by composite Gauss-Legendre."""
    xi = np.asarray(xi, dtype=float)
    a = 1.5
    edges = np.linspace(-a, a, 61)
    nodes, weights = np.polynomial.legendre.leggauss(32)
    mids = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mids[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    g = np.exp(1j * x**2) * _bump_profile(x, a) * w
    flat = xi.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for i in range(0, flat.size, 4096):
        chunk = flat[i : i + 4096]
        out[i : i + 4096] = np.exp(-1j * np.outer(chunk, x)) @ g
    return (out / SQRT2PI).reshape(xi.shape)


def _one_d(x):
    return lambda p: np.atleast_1d(p).shape == (1,)


def _build_catalog() -> dict[str, ModelDistribution]:
    c = 1.0 / SQRT2PI
    at0 = _at([0.0])
    pm = lambda e: (Singularity(at0, (1.0,), e), Singularity(at0, (-1.0,), e))
    entries = [
        ModelDistribution(
            "delta", 1, lambda xi: np.full(np.shape(xi), c, dtype=complex), (c, 0.0),
            spectral_sampling=True, band_limited=False, compact=True, singularities=pm(0.0),
            description="Dirac mass at 0",
        ),
        ModelDistribution(
            "delta_prime", 1, lambda xi: 1j * c * np.asarray(xi, dtype=complex), (c, 1.0),
            spectral_sampling=True, band_limited=False, compact=True, singularities=pm(1.0),
            description="derivative of the Dirac mass at 0",
        ),
        ModelDistribution(
            "heaviside", 1, lambda xi: -1j * c / np.asarray(xi, dtype=complex), (c, 0.0),
            spatial=lambda x: np.where(x > 0, 1.0, np.where(x < 0, 0.0, 0.5)),
            atom=np.pi * c, fold=1, band_limited=False, singularities=pm(-1.0),
            description="step function H(x), H(0) = 1/2",
        ),
        ModelDistribution(
            "sign", 1, lambda xi: -2j * c / np.asarray(xi, dtype=complex), (2 * c, 0.0),
            spatial=np.sign, fold=1, band_limited=False, singularities=pm(-1.0),
            description="sign(x)",
        ),
        ModelDistribution(
            "pv_inv", 1, lambda xi: -1j * np.pi * c * np.sign(xi).astype(complex), (np.pi * c, 0.0),
            spectral_sampling=True, band_limited=False, singularities=pm(0.0),
            description="principal value 1/x",
        ),
        ModelDistribution(
            "inv_x_plus_i0", 1,
            lambda xi: -2j * np.pi * c * np.where(np.asarray(xi) > 0, 1.0, np.where(np.asarray(xi) < 0, 0.0, 0.5)),
            (2 * np.pi * c, 0.0), spectral_sampling=True, band_limited=False,
            singularities=(Singularity(at0, (1.0,), 0.0),),
            description="1/(x + i0), boundary value of 1/z from Im z > 0",
        ),
        ModelDistribution(
            "abs_x", 1, lambda xi: -2.0 * c / np.asarray(xi, dtype=complex) ** 2, (2 * c, 0.0),
            spatial=np.abs, fold=2, fold_coeff=-2.0 * c, band_limited=False, singularities=pm(-2.0),
            description="|x|",
        ),
        ModelDistribution(
            "chirp", 1, _chirp_fourier, (1.0, 0.0),
            spatial=lambda x: np.exp(1j * x**2) * _bump_profile(x, 1.5),
            compact=True, provenance="oracle",
            description="exp(i x^2) times a standard bump on |x| < 1.5",
        ),
        ModelDistribution(
            "gaussian", 1, lambda xi: np.exp(-np.asarray(xi) ** 2 / 2).astype(complex), (1.0, 0.0),
            spatial=lambda x: np.exp(-x**2 / 2),
            description="exp(-x^2/2)",
        ),
    ]

    e1, e2 = (1.0, 0.0), (0.0, 1.0)
    on_x1_axis = lambda p: abs(p[0]) < 1e-12
    edge_a = lambda p: abs(p[0]) < 1e-12 and p[1] > -1e-12
    edge_b = lambda p: abs(p[1]) < 1e-12 and p[0] > -1e-12
    entries += [
        ModelDistribution(
            "half_plane", 2, None, None,
            spatial=lambda x, y: np.where(x > 0, 1.0, np.where(x < 0, 0.0, 0.5)),
            band_limited=False,
            singularities=(Singularity(on_x1_axis, e1, -1.5), Singularity(on_x1_axis, (-1.0, 0.0), -1.5)),
            description="indicator of {x1 > 0}; conormal directions +-e1",
        ),
        ModelDistribution(
            "quadrant", 2, None, None,
            spatial=lambda x, y: (np.where(x > 0, 1.0, np.where(x < 0, 0.0, 0.5))
                                  * np.where(y > 0, 1.0, np.where(y < 0, 0.0, 0.5))),
            band_limited=False,
            singularities=(
                Singularity(edge_a, e1, -1.5), Singularity(edge_a, (-1.0, 0.0), -1.5),
                Singularity(edge_b, e2, -1.5), Singularity(edge_b, (0.0, -1.0), -1.5),
            ),
            description="indicator of {x1 > 0, x2 > 0}",
        ),
        ModelDistribution(
            "disk", 2,
            lambda x, y: _disk_fourier(np.hypot(x, y)), (0.5, 0.0),
            spatial=lambda x, y: np.where(np.hypot(x, y) < DISK_RADIUS, 1.0, 0.0),
            compact=True, band_limited=False,
            description=f"indicator of the disk of radius {DISK_RADIUS}",
        ),
        ModelDistribution(
            "line_delta", 2, None, None,
            band_limited=False,
            singularities=(Singularity(on_x1_axis, e1, -0.5), Singularity(on_x1_axis, (-1.0, 0.0), -0.5)),
            description="delta(x1) (x) 1, the surface measure of the x2-axis",
        ),
        ModelDistribution(
            "tensor_gaussian", 2,
            lambda x, y: np.exp(-(x**2 + y**2) / 2).astype(complex), (1.0, 0.0),
            spatial=lambda x, y: np.exp(-(x**2 + y**2) / 2),
            description="exp(-|x|^2/2)",
        ),
    ]
    return {e.name: e for e in entries}


DISK_RADIUS = 0.5


def _disk_fourier(rho):
    rho = np.asarray(rho, dtype=float)
    r = DISK_RADIUS
    safe = np.where(rho == 0, 1.0, rho)
    return np.where(rho == 0, r**2 / 2, r * special.j1(r * safe) / safe).astype(complex)




def catalog_names(dim: Optional[int] = None) -> list[str]:
    return [k for k, v in CATALOG.items() if dim is None or v.dim == dim]


def get_model(name: str) -> ModelDistribution:
    try:
        return CATALOG[name]
    except KeyError:
        raise UnknownSourceError(f"unknown source {name!r}; known: {', '.join(CATALOG)}") from None


# ---------------------------------------------------------------------------
# Sampling


def local_grid(dim: int, n: int, spacing: float, center) -> np.ndarray:
    """Lattice-aligned origin placing ``center`` within half a step of the grid middle."""
    c = np.broadcast_to(np.asarray(center, dtype=float), (dim,))
    return np.round(c / spacing - n // 2) * spacing


def spectral_taper(xi, cutoff: float) -> np.ndarray:
    """Smooth low-pass: 1 for |xi| <= cutoff / 2, 0 for |xi| >= cutoff."""
    t = 2.0 * np.abs(np.asarray(xi, dtype=float)) / cutoff - 1.0
    return _smooth_step(t, "bump")


TAPER_FRACTION = 0.95
_PERIODIC_CACHE: dict = {}


def _spectral_line_samples(model: ModelDistribution, spacing: float, m_lo: int, count: int) -> np.ndarray:
    """Samples at x = m * spacing, m_lo <= m < m_lo + count, of the tapered inverse transform.

    f^ is multiplied by :func:`spectral_taper` with cutoff at 95% of the
    Nyquist frequency and inverted on a periodic lattice whose period keeps
    every image of the origin at least 8 units away from the requested
    points. The taper removes the jump of f^ at the Nyquist frequency that a
    sharp band limit would turn into a slowly decaying alternating tail.
    """
    reach = max(abs(m_lo), abs(m_lo + count)) * spacing
    period = 2.0 * (reach + 8.0)
    N = 1 << int(np.ceil(np.log2(period / spacing)))
    key = (model.name, float(spacing), N)
    vals = _PERIODIC_CACHE.get(key)
    if vals is None:
        dxi = 2.0 * np.pi / (N * spacing)
        xi = dxi * np.fft.fftfreq(N, d=1.0 / N)
        fh = model.fourier(xi) * spectral_taper(xi, TAPER_FRACTION * np.pi / spacing)
        # x_m = m * spacing with m taken modulo N
        vals = np.fft.ifft(fh) * N * dxi / np.sqrt(2.0 * np.pi)
        vals.setflags(write=False)
        if len(_PERIODIC_CACHE) > 32:
            _PERIODIC_CACHE.clear()
        _PERIODIC_CACHE[key] = vals
    return vals[np.mod(np.arange(m_lo, m_lo + count), N)]


def _line_delta_samples(n, spacing, origin):
    x = origin[0] + spacing * np.arange(n)
    col = np.where(np.abs(x) < 0.5 * spacing, 1.0 / spacing, 0.0)
    return np.repeat(col[:, None], n, axis=1).astype(complex)


def sample(model: ModelDistribution, n: int, spacing: float, origin=None) -> GridSignal:
    """Sample a catalog entry on a grid of n (or n x n) points.

    Entries with a spatial formula are evaluated pointwise. Distributions
    without one (delta, delta', 1/x, 1/(x+i0)) are synthesized from their
    exact transform, smoothly band-limited below the grid's Nyquist
    frequency, on a long periodic lattice; the origin must then be a
    multiple of the spacing (see :func:`local_grid`).
    """
    if not _is_pow2(n):
        raise GridError(f"grid size {n} is not a power of two")
    if origin is None:
        origin = np.full(model.dim, -(n // 2) * spacing)
    origin = np.atleast_1d(np.asarray(origin, dtype=float))
    if origin.shape != (model.dim,):
        raise GridError(f"{model.name} is {model.dim}-dimensional but the grid origin has {origin.size} components")
    if model.name == "line_delta":
        vals = _line_delta_samples(n, spacing, origin)
    elif model.spectral_sampling:
        m_lo = origin[0] / spacing
        if abs(m_lo - round(m_lo)) > 1e-6:
            raise GridError(f"{model.name} is sampled spectrally and needs a lattice-aligned origin")
        vals = _spectral_line_samples(model, spacing, int(round(m_lo)), n)
    elif model.spatial is not None:
        probe = GridSignal(model.dim, np.zeros((n,) * model.dim), spacing, origin)
        vals = np.asarray(model.spatial(*probe.coords()), dtype=complex)
    else:
        raise GridError(f"{model.name} has no sampling rule")
    return GridSignal(model.dim, vals, spacing, origin)


CATALOG: dict[str, ModelDistribution] = _build_catalog()
