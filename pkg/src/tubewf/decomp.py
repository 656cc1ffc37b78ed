"""Cone decompositions, their uniqueness defects and integration along a variable.

A cover by closed cones G_1, ..., G_m induces the first-come partition
phi_j = indicator of G_j minus (G_1 u ... u G_{j-1}) on the sphere. The
pieces are the boundary values f_j = integral F(. - i omega) phi_j(omega)
d omega of F = K * f, whose transforms are f^ times

    m_j(xi) = integral e^<omega, xi> phi_j(omega) d omega / I(xi).

In d = 1 this is a logistic function of 2 xi; in d = 2 it is the mass that
a von Mises law with mean direction xi / |xi| and concentration |xi| puts
on the arcs of cone j. The m_j sum to 1 exactly, so the pieces resum to f
on the frequency grid, and each m_j is smooth, turning from 1 to 0 across
the cone edges over an angle of order |xi|^(-1/2).

The sharp route f_j^ = f^ phi_j(xi / |xi|) is available too. Its angular
jumps make the pieces singular along lines through each singular point
orthogonal to the cone edges, so only the smooth route passes the
containment checks away from the singular points themselves.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from scipy import special, stats

from .bf_spaces import SpaceDescriptor
from .signals import GridError, GridSignal, ModelDistribution, inverse_spectrum, local_grid, sample, spectrum
from .tube import SphereMeasure, average_over_sphere, make_analytic_rep, sphere_nodes
from .wavefront import Cone, Verdict, WfConfig, WfReport, bin_axes, bin_cone, wf_detect

__all__ = [
    "ConeCover",
    "CoverError",
    "ContainmentResult",
    "as_grid",
    "boundary_pieces",
    "cone_containment",
    "cone_decompose",
    "decomposition_defect",
    "defect_containment",
    "pairing_cross_check",
    "project_integrate",
    "projection_containment",
]

_CLOSED_TOL = 1e-12


class CoverError(ValueError):
    """Cones that leave some direction uncovered, or inconsistent inputs."""


def _closed_member(cone: Cone, coords: Sequence[np.ndarray]) -> np.ndarray:
    rho = np.sqrt(sum(c**2 for c in coords))
    nonzero = rho > 0
    if cone.half_angle >= np.pi:
        return nonzero
    dot = sum(a * c for a, c in zip(cone.axis, coords))
    cos = np.divide(dot, rho, out=np.zeros_like(rho, dtype=float), where=nonzero)
    return nonzero & (cos >= np.cos(cone.half_angle) - _CLOSED_TOL)


@dataclass(frozen=True)
class ConeCover:
    """Closed cones covering R^d minus 0, with the first-come partition of unity."""

    dim: int
    cones: tuple[Cone, ...]

    def __post_init__(self):
        object.__setattr__(self, "cones", tuple(self.cones))
        if not self.cones:
            raise CoverError("a cover needs at least one cone")
        if any(c.dim != self.dim for c in self.cones):
            raise CoverError("cone dimensions differ from the cover's")

    @classmethod
    def whole(cls, dim: int) -> "ConeCover":
        return cls(dim, (Cone.full(dim),))

    @classmethod
    def half_lines(cls) -> "ConeCover":
        """The two closed half-lines of R minus 0, positive first."""
        return cls(1, (Cone(1, (1.0,), np.pi / 2), Cone(1, (-1.0,), np.pi / 2)))

    @classmethod
    def parse(cls, text: str) -> "ConeCover":
        """Planar cover from ``"axis:half,axis:half,..."`` in degrees."""
        cones = []
        for part in filter(None, (t.strip() for t in text.split(","))):
            m = re.fullmatch(r"(-?[\d.]+)\s*:\s*([\d.]+)", part)
            if not m:
                raise CoverError(f"bad cone {part!r}; expected axis:half-angle in degrees")
            axis, half = np.radians(float(m.group(1))), np.radians(float(m.group(2)))
            if not 0 < half <= np.pi:
                raise CoverError(f"half-angle of {part!r} must lie in (0, 180]")
            cones.append(Cone.from_angle(axis, half))
        return cls(2, tuple(cones))

    @property
    def m(self) -> int:
        return len(self.cones)

    def labels(self, *coords: np.ndarray) -> np.ndarray:
        """Index of the first cone containing each point; -1 where none does (and at 0)."""
        out = np.full(np.shape(coords[0]), -1, dtype=int)
        for k in reversed(range(self.m)):
            out = np.where(_closed_member(self.cones[k], coords), k, out)
        return out

    def partition(self, k: int, *coords: np.ndarray) -> np.ndarray:
        """phi_k as a 0/1 array."""
        return (self.labels(*coords) == k).astype(float)

    def uncovered(self, n_test: int = 7200) -> Optional[np.ndarray]:
        """First test direction lying in no cone, or None."""
        if self.dim == 1:
            dirs = np.array([[1.0], [-1.0]])
        else:
            t = 2 * np.pi * (np.arange(n_test) + 0.5) / n_test
            dirs = np.column_stack([np.cos(t), np.sin(t)])
        lab = self.labels(*dirs.T)
        bad = np.flatnonzero(lab < 0)
        return dirs[bad[0]] if bad.size else None

    def validate(self) -> None:
        miss = self.uncovered()
        if miss is not None:
            raise CoverError(f"direction {np.round(miss, 6).tolist()} is not covered")

    def arcs(self) -> list[tuple[float, float, int]]:
        """Elementary arcs (start, end, label) of the partition of the circle, in radians."""
        if self.dim != 2:
            raise CoverError("arcs are defined for planar covers")
        cuts = {0.0}
        for c in self.cones:
            if c.half_angle < np.pi:
                a = np.arctan2(c.axis[1], c.axis[0])
                cuts.update(((a - c.half_angle) % (2 * np.pi), (a + c.half_angle) % (2 * np.pi)))
        edges = sorted(cuts) + [min(cuts) + 2 * np.pi]
        out = []
        for a, b in zip(edges[:-1], edges[1:]):
            if b - a <= 1e-15:
                continue
            mid = 0.5 * (a + b)
            lab = int(self.labels(np.array([np.cos(mid)]), np.array([np.sin(mid)]))[0])
            if lab < 0:
                raise CoverError(f"direction at {np.degrees(mid):.6g} degrees is not covered")
            if out and out[-1][2] == lab and abs(out[-1][1] - a) < 1e-15:
                out[-1] = (out[-1][0], b, lab)
            else:
                out.append((a, b, lab))
        return out

    def multipliers(self, *coords: np.ndarray) -> list[np.ndarray]:
        """The smooth partition m_j on frequency coordinates; sums to 1 pointwise."""
        self.validate()
        rho = np.sqrt(sum(c**2 for c in coords))
        out = [np.zeros(rho.shape) for _ in range(self.m)]
        if self.dim == 1:
            xi = coords[0]
            for omega in (1.0, -1.0):
                k = int(self.labels(np.array([omega]))[0])
                out[k] = out[k] + special.expit(2.0 * omega * xi)
            return out
        mean = np.arctan2(coords[1], coords[0])
        for a, b, k in self.arcs():
            # cumulative von Mises distribution: F(x + 2 pi) = F(x) + 1
            out[k] = out[k] + (stats.vonmises.cdf(b - mean, rho) - stats.vonmises.cdf(a - mean, rho))
        return out

    def meets(self, k: int, other: Cone) -> bool:
        """True when cone k and ``other`` (open) share a direction."""
        c = self.cones[k]
        if c.half_angle >= np.pi or other.half_angle >= np.pi:
            return True
        if self.dim == 1:
            return c.axis[0] * other.axis[0] > 0
        gap = np.arccos(np.clip(np.dot(c.axis, other.axis), -1, 1))
        return bool(gap < c.half_angle + other.half_angle)


def as_grid(f, n: int, spacing: float, center=0.0) -> GridSignal:
    """Catalog entries are sampled on a lattice-aligned grid; grids pass through."""
    if isinstance(f, GridSignal):
        return f
    if isinstance(f, ModelDistribution):
        return sample(f, n, spacing, local_grid(f.dim, n, spacing, np.broadcast_to(center, (f.dim,))))
    raise TypeError("expected a ModelDistribution or a GridSignal")


# ---------------------------------------------------------------------------
# Decomposition


def cone_decompose(f: GridSignal, cover: ConeCover, route: str = "smooth") -> list[GridSignal]:
    """Pieces f_j of f over the cover; their sum is f up to rounding.

    ``route="smooth"`` multiplies f^ by m_j (the boundary-value pieces);
    ``route="sharp"`` by phi_j(xi / |xi|), with xi = 0 sent to the first cone.
    """
    if f.dim != cover.dim:
        raise CoverError("cover and signal dimensions differ")
    cover.validate()
    fh = spectrum(f)
    coords = fh.coords()
    if route == "smooth":
        masks = cover.multipliers(*coords)
    elif route == "sharp":
        lab = cover.labels(*coords)
        lab = np.where(np.sqrt(sum(c**2 for c in coords)) == 0, 0, lab)
        masks = [(lab == k).astype(float) for k in range(cover.m)]
    else:
        raise ValueError(f"unknown route {route!r}")
    return [inverse_spectrum(fh.with_samples(fh.samples * mk), f.origin) for mk in masks]


def boundary_pieces(f: GridSignal, cover: ConeCover, eps: float, n_nodes: int = 256) -> list[GridSignal]:
    """f_j^eps = integral F(. - i (1 - eps) omega) phi_j(omega) d omega with F = K * f.

    The sphere integral uses the quadrature of :func:`sphere_nodes`; each
    node carries the label of its direction.
    """
    if f.dim != cover.dim:
        raise CoverError("cover and signal dimensions differ")
    cover.validate()
    F = make_analytic_rep(f)
    dirs, w = sphere_nodes(f.dim, n_nodes)
    lab = cover.labels(*dirs.T)
    return [average_over_sphere(F, SphereMeasure(f.dim, -dirs, np.where(lab == k, w, 0.0)), eps)
            for k in range(cover.m)]


def pairing_cross_check(f: GridSignal, cover: ConeCover, eps: float = 1e-3,
                        test_width: float = 1.0) -> float:
    """Largest relative pairing gap between quadrature boundary pieces at eps and :func:`cone_decompose`.

    Pairings are taken against a Gaussian of width ``test_width`` centered on
    the grid.
    """
    center = f.origin + 0.5 * (f.n - 1) * f.spacing
    phi = f.with_samples(np.exp(-sum((c - ck) ** 2 for c, ck in zip(f.coords(), center)) / (2 * test_width**2)))
    exact = cone_decompose(f, cover)
    approx = boundary_pieces(f, cover, eps)
    pair = lambda g: complex(np.sum(g.samples * phi.samples) * g.cell)
    scale = max(abs(pair(f)), max(abs(pair(g)) for g in exact))
    return max(abs(pair(a) - pair(e)) for a, e in zip(approx, exact)) / scale


def decomposition_defect(f: GridSignal, cover: ConeCover, alt: Sequence[GridSignal],
                         tol: float = 1e-8) -> np.ndarray:
    """Antisymmetric table of f_jk for an alternative decomposition ``alt`` of f.

    With g_j = f_j' - f_j (f_j the canonical pieces) the defect is
    f_jk = (g_j)_k - (g_k)_j, where (g)_k is the k-th piece of g, the
    boundary value of integral (K * g)(. - i omega) phi_k(omega) d omega.
    Returns an object array of GridSignals; f_jj = 0 and f_kj is the exact
    negation of f_jk. Then f_j' = f_j + sum_k f_jk.
    """
    if len(alt) != cover.m:
        raise CoverError(f"need {cover.m} alternative pieces, got {len(alt)}")
    total = sum(a.samples for a in alt)
    gap = np.linalg.norm(total - f.samples) / max(np.linalg.norm(f.samples), 1e-300)
    if gap > tol:
        raise CoverError(f"alternative pieces do not sum to f (relative gap {gap:.3g})")
    canon = cone_decompose(f, cover)
    g = [a.with_samples(a.samples - c.samples) for a, c in zip(alt, canon)]
    parts = [cone_decompose(gj, cover) for gj in g]
    m = cover.m
    table = np.empty((m, m), dtype=object)
    zero = f.with_samples(np.zeros_like(f.samples))
    for j in range(m):
        table[j, j] = zero
        for k in range(j + 1, m):
            fjk = parts[j][k].samples - parts[k][j].samples
            table[j, k] = f.with_samples(fjk)
            table[k, j] = f.with_samples(-fjk)
    return table


# ---------------------------------------------------------------------------
# Integration along a variable


def project_integrate(f: GridSignal, axis: int, support_tol: float = 1e-10) -> GridSignal:
    """f_1(x') = integral f(x', x'') dx'' by the trapezoid rule along ``axis``.

    Raises GridError when f is not negligible on the first and last samples
    of the integrated variable, where compact support would fail.
    """
    if f.dim != 2 or axis not in (0, 1):
        raise GridError("project_integrate needs a 2-d grid and axis 0 or 1")
    s = np.moveaxis(f.samples, axis, 0)
    peak = np.abs(s).max(initial=0.0)
    edge = max(np.abs(s[0]).max(), np.abs(s[-1]).max())
    if edge > support_tol * max(peak, 1e-300):
        raise GridError("support touches the boundary in the integrated variable")
    h = f.spacing
    vals = h * (s.sum(axis=0) - 0.5 * (s[0] + s[-1]))
    keep = 1 - axis
    return GridSignal(1, vals, h, np.array([f.origin[keep]]))


# ---------------------------------------------------------------------------
# Containment checks


@dataclass
class ContainmentResult:
    """Flags of a derived signal that are not explained by the reference."""

    name: str
    passed: bool
    violations: list[tuple] = field(default_factory=list)
    flagged: int = 0


def _bins_meeting(cover: ConeCover, k: int, D: int, cfg: WfConfig) -> np.ndarray:
    return np.array([cover.meets(k, bin_cone(cover.dim, D, b, cfg.cone_factor)) for b in range(D)])


def cone_containment(f: GridSignal, pieces: Sequence[GridSignal], cover: ConeCover, sp: SpaceDescriptor,
                     base_points, cfg: WfConfig | None = None) -> list[ContainmentResult]:
    """IN_WF cells of each f_j must lie in bins meeting cone j and not be REGULAR for f.

    An INCONCLUSIVE reference cell cannot rule a flag out, so it counts as
    possibly in the wave-front set of f.
    """
    cfg = cfg or WfConfig()
    ref = wf_detect(f, sp, base_points, cfg).verdicts()
    out = []
    for k, piece in enumerate(pieces):
        v = wf_detect(piece, sp, base_points, cfg).verdicts()
        allowed = (ref != Verdict.REGULAR.value) & _bins_meeting(cover, k, v.shape[1], cfg)[None, :]
        hits = v == Verdict.IN_WF.value
        bad = [(int(i), int(b)) for i, b in zip(*np.nonzero(hits & ~allowed))]
        out.append(ContainmentResult(f"f_{k}", not bad, bad, int(hits.sum())))
    return out


def defect_containment(table: np.ndarray, cover: ConeCover, sp: SpaceDescriptor, base_points,
                       cfg: WfConfig | None = None) -> list[ContainmentResult]:
    """IN_WF cells of each f_jk (j < k) must lie in bins meeting both cones j and k."""
    cfg = cfg or WfConfig()
    out = []
    m = cover.m
    for j in range(m):
        for k in range(j + 1, m):
            v = wf_detect(table[j, k], sp, base_points, cfg).verdicts()
            D = v.shape[1]
            allowed = _bins_meeting(cover, j, D, cfg) & _bins_meeting(cover, k, D, cfg)
            hits = v == Verdict.IN_WF.value
            bad = [(int(i), int(b)) for i, b in zip(*np.nonzero(hits & ~allowed[None, :]))]
            out.append(ContainmentResult(f"f_{j}{k}", not bad, bad, int(hits.sum())))
    return out


def projection_containment(f: GridSignal, axis: int, sp: SpaceDescriptor, x_prime, x_second,
                           cfg: WfConfig | None = None) -> ContainmentResult:
    """IN_WF at (x', +-1) for f_1 needs some x'' with (x', x'') not REGULAR in the bin of (+-e, 0).

    ``e`` is the unit vector of the kept variable; the 2-d scan runs over the
    product of ``x_prime`` and ``x_second``.
    """
    cfg = cfg or WfConfig()
    f1 = project_integrate(f, axis)
    xp = np.atleast_1d(np.asarray(x_prime, dtype=float))
    xs = np.atleast_1d(np.asarray(x_second, dtype=float))
    v1 = wf_detect(f1, sp, xp, cfg).verdicts()
    keep = 1 - axis
    pts = np.array([[a, b] if keep == 0 else [b, a] for a in xp for b in xs])
    rep: WfReport = wf_detect(f, sp, pts, cfg)
    v2 = rep.verdicts().reshape(len(xp), len(xs), -1)
    D = v2.shape[2]
    axes2 = bin_axes(2, D)
    target = {}
    for sgn_idx, sgn in enumerate((1.0, -1.0)):
        e = np.zeros(2)
        e[keep] = sgn
        target[sgn_idx] = int(np.argmax(axes2 @ e))
    bad = []
    hits = v1 == Verdict.IN_WF.value
    for i, b in zip(*np.nonzero(hits)):
        if np.all(v2[i, :, target[b]] == Verdict.REGULAR.value):
            bad.append((int(i), int(b)))
    return ContainmentResult("f_1", not bad, bad, int(hits.sum()))
