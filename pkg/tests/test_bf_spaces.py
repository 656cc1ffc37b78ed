import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tubewf.bf_spaces import (
    DescriptorError,
    SpaceDescriptor,
    Weight,
    lebesgue_norm,
    moderate_check,
    parse_space,
    product_module_check,
    random_estimate_suite,
    weighted_norm,
    young_convolution_check,
)
from tubewf.signals import GridSignal
from tubewf.wavefront import Annulus, Cone


def grid(values, dx, dim=1, domain="space"):
    n = np.shape(values)[0]
    return GridSignal(dim, values, dx, np.full(dim, -(n // 2) * dx), domain)


# --- descriptors -------------------------------------------------------------


@pytest.mark.parametrize(
    "text, want",
    [
        ("FL(p=2,s=1.5)", SpaceDescriptor(2, 1.5)),
        ("FL(p=2,q=1,s=0)", SpaceDescriptor(2, 0, 1)),
        (" FL( p = inf , s = -2 ) ", SpaceDescriptor(np.inf, -2)),
        ("FL(p=1)", SpaceDescriptor(1, 0)),
    ],
)
def test_parse_space(text, want):
    assert parse_space(text) == want


@pytest.mark.parametrize("text", ["FL(p=2", "L(p=2,s=1)", "FL(s=1)", "FL(p=0.5)", "FL(p=2,p=3)", "FL(p=2,r=1)",
                                  "FL(p=x)", "FL(p=2,s=inf)"])
def test_parse_space_rejects(text):
    with pytest.raises(DescriptorError):
        parse_space(text)


@given(st.sampled_from([1.0, 1.5, 2.0, 4.0, np.inf]), st.floats(-3, 3).map(lambda v: round(v, 2)))
def test_descriptor_round_trips_through_text(p, s):
    sp = SpaceDescriptor(p, s)
    assert parse_space(str(sp)) == sp


def test_tau():
    assert SpaceDescriptor(2, 1).tau(1) == -1.5
    assert SpaceDescriptor(2, 0).tau(2) == -1.0
    assert SpaceDescriptor(2, 0, 1).tau(2) == -1.5
    assert SpaceDescriptor(np.inf, 1).tau(1) == -1.0


# --- norms -------------------------------------------------------------------


def test_indicator_norm_is_sqrt2():
    dx = 1e-3
    xi = (np.arange(4096) - 2048) * dx
    g = grid(np.where(np.abs(xi) <= 1, 1.0, 0.0), dx, domain="frequency")
    assert abs(weighted_norm(g, SpaceDescriptor(2, 0)) - np.sqrt(2)) < 2 * dx


def test_japanese_bracket_norm_is_sqrt_pi():
    # int (1 + xi^2)^-1 over the line is pi; the truncation at |xi| = L loses about 2/L
    dx, n = 0.01, 2**20
    xi = (np.arange(n) - n // 2) * dx
    g = grid(1 / np.sqrt(1 + xi**2), dx, domain="frequency")
    L = n // 2 * dx
    exact_truncated = np.sqrt(2 * np.arctan(L))
    val = weighted_norm(g, SpaceDescriptor(2, 0))
    assert abs(val - exact_truncated) < 1e-4
    assert abs(val - np.sqrt(np.pi)) < 2 / L


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_cone_norm_is_angle_fraction_of_full_norm(p):
    n, dx = 512, 0.05
    t = (np.arange(n) - n // 2) * dx
    X, Y = np.meshgrid(t, t, indexing="ij")
    g = grid(np.exp(-(X**2 + Y**2) / 4), dx, dim=2, domain="frequency")
    sp = SpaceDescriptor(p, 0)
    full = weighted_norm(g, sp)
    cone = Cone.from_angle(0.3, np.pi / 4)
    # half-angle pi/4 covers a quarter of the circle
    assert abs(weighted_norm(g, sp, cone) - 0.25 ** (1 / p) * full) < 0.01 * full


def test_empty_region_is_zero_and_regions_are_monotone(rng):
    n, dx = 256, 0.1
    g = grid(rng.normal(size=n) + 1j * rng.normal(size=n), dx, domain="frequency")
    sp = SpaceDescriptor(2, 1)
    assert weighted_norm(g, sp, np.zeros(n, bool)) == 0
    small = weighted_norm(g, sp, Annulus(1))
    big = weighted_norm(g, sp, Annulus(1).mask(*g.coords()) | Annulus(2).mask(*g.coords()))
    assert small <= big <= weighted_norm(g, sp)


vec = st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=16,
               max_size=16).map(np.array)
spaces = st.builds(SpaceDescriptor, st.sampled_from([1.0, 2.0, 3.5, np.inf]), st.sampled_from([-1.0, 0.0, 2.0]))


@given(vec, vec, spaces, st.complex_numbers(max_magnitude=100, allow_nan=False, allow_infinity=False))
def test_norm_axioms(a, b, sp, lam):
    A, B = grid(a, 0.3, domain="frequency"), grid(b, 0.3, domain="frequency")
    na, nb = weighted_norm(A, sp), weighted_norm(B, sp)
    tol = 1e-9 * (na + nb + 1e-300)
    assert abs(weighted_norm(A.with_samples(lam * a), sp) - abs(lam) * na) <= 1e-9 * abs(lam) * na + 1e-300
    assert weighted_norm(A.with_samples(a + b), sp) <= na + nb + tol
    # solidity: |c| <= |a| pointwise
    c = a * np.random.default_rng(0).uniform(0, 1, a.shape)
    assert weighted_norm(A.with_samples(c), sp) <= na + tol


@given(vec, st.integers(-5, 5), st.sampled_from([-2.0, -1.0, 0.0, 1.0, 2.0]), st.sampled_from([1.0, 2.0, np.inf]))
def test_translation_estimate_for_whole_grid_shifts(a, k, s, p):
    # shift inside a zero-padded grid so the discrete translation is a permutation
    dx = 0.25
    padded = np.concatenate([np.zeros(8), a, np.zeros(8)])
    A = grid(padded, dx, domain="frequency")
    T = A.with_samples(np.roll(padded, k))
    sp = SpaceDescriptor(p, s)
    w = sp.weight
    assert weighted_norm(T, sp) <= w.C * w.v(k * dx) * weighted_norm(A, sp) * (1 + 1e-12) + 1e-300


def test_mixed_norm_orders_axes():
    v = np.zeros((4, 4))
    v[:, 0] = 1.0
    assert lebesgue_norm(v, 1.0, 1.0, 2.0) == 4.0
    assert lebesgue_norm(v, 1.0, 2.0, 1.0) == 2.0


# --- moderateness ------------------------------------------------------------


@pytest.mark.parametrize("s", [-2.0, -1.0, 0.0, 1.0, 2.0])
def test_peetre_certificate_passes(s):
    for dim in (1, 2):
        assert moderate_check(Weight(s), trials=2000, dim=dim).passed


def test_trivial_weight_passes_and_false_claim_fails():
    assert moderate_check(Weight(0.0, 1.0, 0.0)).passed
    r = moderate_check(Weight(2.0, 1.0, 0.0))
    assert not r.passed
    x, y = r.counterexample
    assert (1 + (x + y) ** 2) > (1 + x**2)


def test_moderate_check_needs_trials():
    with pytest.raises(ValueError):
        moderate_check(Weight(1.0), trials=0)


# --- convolution and product estimates ---------------------------------------


def test_young_with_spike_reproduces_f(rng):
    n, dx = 128, 0.1
    x = (np.arange(n) - n // 2) * dx
    f = grid(np.exp(-(x**2)) * rng.normal(size=n), dx)
    spike = np.zeros(n)
    spike[n // 2] = 1 / dx
    lhs, rhs = young_convolution_check(grid(spike, dx), f, SpaceDescriptor(2, 1))
    fn = weighted_norm(f, SpaceDescriptor(2, 1))
    assert abs(lhs - fn) < 1e-12 * fn and rhs >= fn


def test_young_two_gaussians_closed_form():
    # exp(-x^2/2) * exp(-x^2/2) = sqrt(pi) exp(-x^2/4), whose L2 norm is sqrt(pi) (2 pi)^(1/4)
    n, dx = 512, 0.05
    x = (np.arange(n) - n // 2) * dx
    g = grid(np.exp(-(x**2) / 2), dx)
    lhs, rhs = young_convolution_check(g, g, SpaceDescriptor(2, 0))
    assert abs(lhs - np.sqrt(np.pi) * (2 * np.pi) ** 0.25) < 1e-8
    assert rhs >= lhs


def test_product_with_one_and_with_a_window():
    n, dx = 256, 0.05
    x = (np.arange(n) - n // 2) * dx
    f = grid(np.exp(-(x**2) / 2), dx)
    one = grid(np.ones(n), dx)
    lhs, rhs = product_module_check(f, one, SpaceDescriptor(2, 0))
    assert abs(lhs - weighted_norm(__import__("tubewf").signals.spectrum(f), SpaceDescriptor(2, 0))) < 1e-10
    bump = grid(np.where(np.abs(x) < 1, np.exp(-1 / np.maximum(1 - x**2, 1e-300)), 0.0), dx)
    for sp in (SpaceDescriptor(1, 1), SpaceDescriptor(2, -1), SpaceDescriptor(np.inf, 0)):
        lhs, rhs = product_module_check(f, bump, sp)
        assert lhs <= rhs * (1 + 1e-6)


def test_random_estimate_suite_has_no_violations():
    counts = random_estimate_suite(pairs=60, seed=3)
    assert counts == {"young": 0, "product": 0, "pairs": 60}
