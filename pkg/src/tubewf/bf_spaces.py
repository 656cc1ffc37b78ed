"""Weighted and mixed Lebesgue spaces used as Fourier BF-spaces.

A space FL^p(omega) (or FL^{p,q}(omega) in d = 2) holds f when
``|| f^ omega ||_{L^p}`` is finite, with the polynomial weight
``omega(xi) = <xi>^s = (1 + |xi|^2)^(s/2)``. Discrete norms use Riemann sums
so they converge to the continuum values as grids are refined.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal as sps

from .signals import GridError, GridSignal, spectrum

__all__ = [
    "DescriptorError",
    "Weight",
    "SpaceDescriptor",
    "parse_space",
    "japanese",
    "lebesgue_norm",
    "weighted_norm",
    "ModerateResult",
    "moderate_check",
    "young_convolution_check",
    "product_module_check",
    "random_estimate_suite",
]


class DescriptorError(ValueError):
    """Malformed space descriptor string."""


def japanese(xi) -> np.ndarray:
    """<xi> = sqrt(1 + |xi|^2); ``xi`` is a tuple of coordinate arrays."""
    if isinstance(xi, (tuple, list)):
        return np.sqrt(1.0 + sum(np.asarray(c, dtype=float) ** 2 for c in xi))
    return np.sqrt(1.0 + np.asarray(xi, dtype=float) ** 2)


@dataclass(frozen=True)
class Weight:
    """Polynomial weight <.>^s with a moderateness certificate (C, N).

    The certificate claims omega(x + y) <= C omega(x) v(y) with v = <.>^N.
    The default is Peetre's (2^|s|, |s|).
    """

    s: float = 0.0
    C: Optional[float] = None
    N: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        if self.C is None:
            object.__setattr__(self, "C", 2.0 ** abs(self.s))
        if self.N is None:
            object.__setattr__(self, "N", abs(self.s))

    def __call__(self, xi) -> np.ndarray:
        return japanese(xi) ** self.s

    def v(self, xi) -> np.ndarray:
        return japanese(xi) ** self.N


@dataclass(frozen=True)
class SpaceDescriptor:
    """FL^p(<.>^s), or the mixed FL^{p,q}(<.>^s) when ``q`` is given (d = 2).

    Mixed norms integrate |g|^p over the first frequency axis, then the
    result to the power q/p over the second.
    """

    p: float = 2.0
    s: float = 0.0
    q: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "s", float(self.s))
        if self.q is not None:
            object.__setattr__(self, "q", float(self.q))
        for e in (self.p, self.q):
            if e is not None and not e >= 1:
                raise DescriptorError(f"Lebesgue exponent must be >= 1, got {e}")

    @property
    def weight(self) -> Weight:
        return Weight(self.s)

    def exponents(self, d: int) -> tuple[float, ...]:
        if self.q is None:
            return (self.p,) * d
        if d != 2:
            raise DescriptorError("mixed exponents need d = 2")
        return (self.p, self.q)

    def tau(self, d: int) -> float:
        """Critical isotropic growth rate -(s + sum 1/p_i)."""
        return -(self.s + sum(1.0 / e for e in self.exponents(d)))

    def __str__(self) -> str:
        fmt = lambda v: "inf" if np.isinf(v) else f"{v:g}"
        if self.q is None:
            return f"FL(p={fmt(self.p)},s={fmt(self.s)})"
        return f"FL(p={fmt(self.p)},q={fmt(self.q)},s={fmt(self.s)})"


_DESCRIPTOR = re.compile(r"^\s*FL\s*\((?P<body>[^()]*)\)\s*$")


def parse_space(text: str) -> SpaceDescriptor:
    """Parse ``"FL(p=2,s=1.5)"`` or ``"FL(p=2,q=1,s=0)"``; ``inf`` is allowed."""
    m = _DESCRIPTOR.match(text)
    if not m:
        raise DescriptorError(f"cannot parse space descriptor {text!r}")
    fields: dict[str, float] = {}
    for part in filter(None, (t.strip() for t in m.group("body").split(","))):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in ("p", "q", "s") or key in fields:
            raise DescriptorError(f"bad field {part!r} in {text!r}")
        try:
            fields[key] = float(val.strip())
        except ValueError:
            raise DescriptorError(f"bad number {val!r} in {text!r}") from None
    if "p" not in fields:
        raise DescriptorError(f"descriptor {text!r} needs p")
    if "s" in fields and np.isinf(fields["s"]):
        raise DescriptorError("weight exponent must be finite")
    return SpaceDescriptor(p=fields["p"], s=fields.get("s", 0.0), q=fields.get("q"))


# ---------------------------------------------------------------------------
# Norms


def _lp(values: np.ndarray, p: float, axis, cell: float) -> np.ndarray:
    a = np.abs(values)
    if np.isinf(p):
        return a.max(axis=axis, initial=0.0)
    return (np.sum(a**p, axis=axis) * cell) ** (1.0 / p)


def lebesgue_norm(values: np.ndarray, spacing: float, p: float, q: Optional[float] = None) -> float:
    """Riemann-sum (mixed) L^p norm of grid samples with step ``spacing``."""
    values = np.asarray(values)
    if q is None or values.ndim == 1:
        return float(_lp(values.ravel(), p, None, spacing**values.ndim))
    inner = _lp(values, p, 0, spacing)
    return float(_lp(inner, q, None, spacing))


def _region_mask(g: GridSignal, region) -> np.ndarray:
    if region is None:
        return np.ones(g.samples.shape, dtype=bool)
    if hasattr(region, "mask"):
        return np.broadcast_to(region.mask(*g.coords()), g.samples.shape)
    mask = np.asarray(region, dtype=bool)
    if mask.shape != g.samples.shape:
        raise GridError("region mask does not match the grid")
    return mask


def weighted_norm(g: GridSignal, sp: SpaceDescriptor, region=None) -> float:
    """|| g omega chi_region || in the Lebesgue space of ``sp``.

    ``g`` holds samples on a grid (usually a frequency grid from
    :func:`spectrum`); ``region`` is a boolean mask or an object with a
    ``mask(*coords)`` method (cones, annuli). Empty regions give 0.
    """
    mask = _region_mask(g, region)
    vals = np.where(mask, g.samples * sp.weight(g.coords()), 0.0)
    return lebesgue_norm(vals, g.spacing, sp.p, sp.q)


# ---------------------------------------------------------------------------
# Moderateness and convolution estimates


@dataclass(frozen=True)
class ModerateResult:
    passed: bool
    counterexample: Optional[tuple[np.ndarray, np.ndarray]] = None
    ratio: float = 0.0


def moderate_check(w: Weight, trials: int = 1000, dim: int = 1, seed: int = 0) -> ModerateResult:
    """Test omega(x + y) <= C omega(x) v(y) on small lattice points and random pairs.

    Random pairs are drawn with |x|, |y| <= 10^3. Returns the first violating
    pair, or the largest observed ratio lhs/rhs when none violates.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    lattice = np.array(np.meshgrid(*[np.arange(-3, 4)] * dim, indexing="ij")).reshape(dim, -1).T
    xs = np.repeat(lattice, len(lattice), axis=0)
    ys = np.tile(lattice, (len(lattice), 1))
    rx = rng.uniform(-1, 1, (trials, dim)) * 10.0 ** rng.uniform(-2, 3, (trials, 1))
    ry = rng.uniform(-1, 1, (trials, dim)) * 10.0 ** rng.uniform(-2, 3, (trials, 1))
    xs = np.concatenate([xs, rx])
    ys = np.concatenate([ys, ry])
    pts = lambda a: tuple(a.T)
    lhs = w(pts(xs + ys))
    rhs = w.C * w(pts(xs)) * w.v(pts(ys))
    ratio = lhs / rhs
    bad = np.flatnonzero(ratio > 1.0 + 1e-12)
    if bad.size:
        k = bad[0]
        return ModerateResult(False, (xs[k], ys[k]), float(ratio[k]))
    return ModerateResult(True, None, float(ratio.max()))


def _linear_convolution(a: GridSignal, b: GridSignal) -> GridSignal:
    """Non-periodic discrete convolution sum_k a_k b_{j-k} h^d on the doubled grid."""
    if a.dim != b.dim or a.n != b.n or not np.isclose(a.spacing, b.spacing, rtol=1e-12):
        raise GridError("convolution needs signals on the same grid")
    full = sps.fftconvolve(a.samples, b.samples, mode="full") * a.cell
    pad = [(0, 1)] * a.dim  # 2n - 1 -> 2n samples keeps the power-of-two invariant
    return GridSignal(a.dim, np.pad(full, pad), a.spacing, a.origin + b.origin, a.domain)


def young_convolution_check(phi: GridSignal, f: GridSignal, sp: SpaceDescriptor) -> tuple[float, float]:
    """(||phi * f||, C ||phi||_{L^1(v)} ||f||) with norms of ``sp`` on the grid variable.

    The convolution is the exact linear (non-circular) one, so the discrete
    inequality follows from Minkowski and the weight certificate and must
    hold up to rounding.
    """
    w = sp.weight
    conv = _linear_convolution(phi, f)
    lhs = weighted_norm(conv, sp)
    phi_l1v = lebesgue_norm(phi.samples * w.v(phi.coords()), phi.spacing, 1.0)
    return lhs, w.C * phi_l1v * weighted_norm(f, sp)


def product_module_check(f: GridSignal, g: GridSignal, sp: SpaceDescriptor) -> tuple[float, float]:
    """(||f g||_{FB}, (2 pi)^(-d/2) C ||f||_{FB} ||g^||_{L^1(v)}) on the grid.

    The transform of the product is taken as the linear convolution of the
    discrete spectra times (2 pi)^(-d/2), the aliasing-free product of the
    band-limited interpolants.
    """
    fh, gh = spectrum(f), spectrum(g)
    w = sp.weight
    d = f.dim
    conv = _linear_convolution(fh, gh)
    lhs = (2 * np.pi) ** (-d / 2) * weighted_norm(conv, sp)
    gh_l1v = lebesgue_norm(gh.samples * w.v(gh.coords()), gh.spacing, 1.0)
    return lhs, (2 * np.pi) ** (-d / 2) * w.C * weighted_norm(fh, sp) * gh_l1v


def random_estimate_suite(
    pairs: int = 200,
    n: int = 128,
    seed: int = 0,
    ps=(1.0, 2.0, np.inf),
    ss=(-1.0, 0.0, 1.0),
    slack: float = 1e-6,
) -> dict[str, int]:
    """Count violations of the Young and product estimates on random pairs.

    Each pair is a random complex signal times a random Gaussian envelope on
    an n-point grid; (p, s) cycles through the product of ``ps`` and ``ss``.
    """
    rng = np.random.default_rng(seed)
    combos = [SpaceDescriptor(p=p, s=s) for p in ps for s in ss]
    counts = {"young": 0, "product": 0, "pairs": pairs}
    for k in range(pairs):
        sp = combos[k % len(combos)]
        dx = rng.uniform(0.02, 0.2)
        origin = -dx * n / 2 + rng.uniform(-1, 1)

        def draw():
            x = origin + dx * np.arange(n)
            env = np.exp(-((x - rng.uniform(-2, 2)) ** 2) / (2 * rng.uniform(0.2, 3) ** 2))
            z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            return GridSignal(1, z * env, dx, origin)

        a, b = draw(), draw()
        lhs, rhs = young_convolution_check(a, b, sp)
        counts["young"] += int(lhs > rhs * (1 + slack))
        lhs, rhs = product_module_check(a, b, sp)
        counts["product"] += int(lhs > rhs * (1 + slack))
    return counts
