import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tubewf.bf_spaces import SpaceDescriptor
from tubewf.signals import GridError, GridSignal, get_model, local_grid, localize, sample
from tubewf.tube import make_analytic_rep
from tubewf.wavefront import (
    Cone,
    Verdict,
    WfConfig,
    bin_axes,
    bin_cone,
    cone_norm_profile,
    direction_free_scan,
    gaussian_window,
    singular_support,
    stability_check,
    stft,
    tube_membership,
    tube_scan,
    wf_detect,
    wf_detect_inf,
    wf_detect_modulation,
)

CFG = WfConfig()
FL = SpaceDescriptor
IN, REG, INC = Verdict.IN_WF.value, Verdict.REGULAR.value, Verdict.INCONCLUSIVE.value


# --- cones and bins ----------------------------------------------------------


def test_cone_indicator_and_dual():
    c = Cone.from_angle(0.0, np.pi / 6)
    assert c.contains(np.array([[1.0, 0.1]]))[0] and not c.contains(np.array([[0.0, 1.0]]))[0]
    assert not c.mask(np.array([0.0]), np.array([0.0]))[0]
    dual = c.dual()
    assert dual.half_angle == pytest.approx(np.pi / 2 - np.pi / 6)
    with pytest.raises(ValueError):
        Cone.from_angle(0.0, 2 * np.pi / 3).dual()


def test_bins_cover_the_circle():
    axes = bin_axes(2, 16)
    assert np.allclose(np.linalg.norm(axes, axis=1), 1)
    th = np.linspace(0, 2 * np.pi, 721)
    dirs = np.column_stack([np.cos(th), np.sin(th)])
    covered = np.zeros(len(th), bool)
    for k in range(16):
        covered |= bin_cone(2, 16, k).contains(dirs)
    assert covered.all()


# --- annulus profiles --------------------------------------------------------


def test_delta_profile_grows_like_two_to_the_half_j():
    r = cone_norm_profile(get_model("delta"), [0.0], bin_cone(1, 2, 0), FL(2, 0), CFG)
    assert abs(r.norm_slope - 0.5) < 0.02
    assert r.verdict.value == IN


def test_heaviside_profile():
    for k in (0, 1):
        r0 = cone_norm_profile(get_model("heaviside"), [0.0], bin_cone(1, 2, k), FL(2, 0), CFG)
        assert abs(r0.norm_slope + 0.5) < 0.05 and r0.verdict.value == REG
        r1 = cone_norm_profile(get_model("heaviside"), [0.0], bin_cone(1, 2, k), FL(2, 1), CFG)
        assert r1.verdict.value == IN


def test_localized_gaussian_profile_is_far_below_every_threshold():
    for k in (0, 1):
        r = cone_norm_profile(get_model("gaussian"), [0.4], bin_cone(1, 2, k), FL(2, 1), CFG)
        assert r.verdict.value == REG and r.norm_slope < -4 and r.tail_ratio <= 1 + 1e-3


# --- Fourier-side detector ---------------------------------------------------


def test_heaviside_flags_both_directions_only_at_the_jump():
    rep = wf_detect(get_model("heaviside"), FL(2, 1), [-2.0, 0.0, 2.0], CFG)
    assert rep.flagged() == {(1, 0), (1, 1)}
    assert np.array_equal(singular_support(rep), [[0.0]])


def test_delta_is_regular_in_negative_enough_spaces():
    rep = wf_detect(get_model("delta"), FL(2, -2), [-1.0, 0.0, 1.0], CFG)
    assert np.all(rep.verdicts() == REG)


def test_half_plane_edge_flags_the_conormal_bins():
    pts = [[0.0, -0.5], [0.0, 0.4], [0.5, 0.0]]
    rep = wf_detect(get_model("half_plane"), FL(2, 1), pts, CFG)
    assert rep.flagged() == {(0, 0), (0, 8), (1, 0), (1, 8)}


def test_quadrant_singular_support():
    t = [-0.5, 0.0, 0.5]
    pts = [[a, b] for a in t for b in t]
    rep = wf_detect(get_model("quadrant"), FL(2, 1.5), pts, CFG)
    got = {tuple(p) for p in singular_support(rep).tolist()}
    want = {(0.0, 0.0), (0.0, 0.5), (0.5, 0.0)}
    assert got == want


def test_report_rows_and_margin():
    rep = wf_detect(get_model("heaviside"), FL(2, 1), [0.0], CFG)
    rows = rep.rows()
    assert len(rows) == 2 and {r["verdict"] for r in rows} == {IN}
    for r in rep.results:
        assert r.margin == pytest.approx(abs(r.alpha - r.tau))


@pytest.mark.parametrize("name", ["heaviside", "delta", "gaussian", "abs_x", "pv_inv"])
def test_projection_identity(name):
    pts = np.linspace(-1.0, 1.0, 5)
    rep = wf_detect(get_model(name), FL(2, 1), pts, CFG)
    free = direction_free_scan(get_model(name), FL(2, 1), pts, CFG)
    flagged_points = (rep.verdicts() == IN).any(axis=1)
    assert np.array_equal(flagged_points, free == IN)


@settings(max_examples=8)
@given(st.sampled_from(["delta", "heaviside", "abs_x", "sign"]), st.floats(-2.5, 1.5), st.floats(0.25, 2.0))
def test_weight_monotonicity(name, s, ds):
    a = wf_detect(get_model(name), FL(2, s), [0.0], CFG).verdicts()
    b = wf_detect(get_model(name), FL(2, s + ds), [0.0], CFG).verdicts()
    assert np.all(b[a == IN] == IN)


def test_cone_monotonicity():
    f = get_model("half_plane")
    sp = FL(2, 1)
    for axis in np.linspace(0, 2 * np.pi, 8, endpoint=False):
        big = cone_norm_profile(f, [0.0, 0.0], Cone.from_angle(axis, 0.5), sp, CFG)
        if big.verdict.value == REG:
            small = cone_norm_profile(f, [0.0, 0.0], Cone.from_angle(axis + 0.2, 0.25), sp, CFG)
            assert small.verdict.value == REG


@pytest.mark.parametrize("name", ["delta", "heaviside", "sign", "pv_inv", "inv_x_plus_i0", "abs_x", "gaussian"])
def test_stability_under_radius_and_profile(name):
    checks = stability_check(get_model(name), FL(2, 1), [-0.5, 0.0, 0.5], CFG)
    assert all(checks.values()), checks


def test_stability_d2_half_plane():
    checks = stability_check(get_model("half_plane"), FL(2, 1), [[0.0, 0.0], [0.4, 0.0]], CFG)
    assert all(checks.values()), checks


# --- STFT --------------------------------------------------------------------


def _grid(n=256, dx=0.05, values=None):
    o = -(n // 2) * dx
    x = o + dx * np.arange(n)
    return GridSignal(1, values(x) if values else np.zeros(n), dx, np.array([o])), x


def test_stft_matches_the_direct_formula(rng):
    f, x = _grid(values=lambda x: np.exp(-(x**2)) * np.cos(3 * x) + 0.1j * np.exp(-((x - 1) ** 2)))
    sigma = 0.5
    pos = rng.uniform(-2, 2, 32)
    V = stft(f, sigma, pos[:, None])
    xi_axis = V.freq_spacing * (np.arange(f.n) - f.n // 2)
    phi = gaussian_window(sigma)
    for i in range(32):
        k = rng.integers(0, f.n)
        direct = np.sum(f.samples * np.conj(phi(x - pos[i])) * np.exp(-1j * x * xi_axis[k])) * f.spacing
        assert abs(V.values[i, k] - direct / np.sqrt(2 * np.pi)) < 1e-8


def test_stft_of_delta_is_flat_in_frequency():
    n, dx = 256, 0.05
    vals = np.zeros(n)
    vals[n // 2] = 1 / dx
    f, x = _grid(n, dx, lambda x: vals)
    V = stft(f, 0.5, [[0.3]])
    assert np.allclose(np.abs(V.values[0]), np.exp(-(0.3**2) / (2 * 0.25)) / np.sqrt(2 * np.pi))


def test_stft_of_a_tone_peaks_at_its_frequency():
    w0 = 12.0
    f, x = _grid(1024, 0.02, lambda x: np.exp(1j * w0 * x) * np.exp(-((x / 4) ** 2)))
    V = stft(f, 0.5, [[0.0], [1.0]])
    xi = V.freq_spacing * (np.arange(f.n) - f.n // 2)
    for row in V.values:
        assert abs(xi[np.argmax(np.abs(row))] - w0) <= V.freq_spacing


def test_stft_translation_covariance():
    k = 13
    f, x = _grid(values=lambda x: np.exp(-((x - 0.2) ** 2) * 3))
    g = f.with_samples(np.roll(f.samples, k))
    a = k * f.spacing
    pos = np.array([[0.4], [-0.7]])
    Vg = stft(g, 0.4, pos)
    Vf = stft(f, 0.4, pos - a)
    assert np.max(np.abs(np.abs(Vg.values) - np.abs(Vf.values))) < 1e-8


def test_stft_rejects_wide_windows():
    f, _ = _grid(64, 0.05)
    with pytest.raises(GridError):
        stft(f, 1.0)


# --- modulation, inf, tube ---------------------------------------------------


def test_modulation_detector_basics():
    assert not wf_detect_modulation(get_model("gaussian"), FL(2, 1), [-1.0, 0.0, 1.0], CFG).flagged()
    assert wf_detect_modulation(get_model("heaviside"), FL(2, 1), [0.0, 1.0], CFG).flagged() == {(0, 0), (0, 1)}


def test_inf_detector():
    f = get_model("delta")
    pts = [0.0, 0.5]
    single = wf_detect_inf(f, [FL(2, 1)], pts, CFG)
    assert np.array_equal(single.verdicts(), wf_detect(f, FL(2, 1), pts, CFG).verdicts())
    fam = [FL(2, -2), FL(2, 0), FL(2, 1)]
    assert not wf_detect_inf(f, fam, pts, CFG).flagged()
    h = get_model("heaviside")
    straddle = [FL(2, 1), FL(2, -0.5)]
    rough = wf_detect(h, FL(2, 1), pts, CFG).flagged()
    assert wf_detect_inf(h, straddle, pts, CFG).flagged() < rough
    with pytest.raises(ValueError):
        wf_detect_inf(f, [], pts, CFG)


def test_tube_membership_on_closed_form_cases():
    sp = FL(2, 1)
    n, dx = CFG.grid_n(1), CFG.spacing(1)

    def rep(name, x):
        return make_analytic_rep(sample(get_model(name), n, dx, local_grid(1, n, dx, [x])))

    w = CFG.localizer([0.0])
    F = rep("delta", 0.0)
    for u in ([1.0], [-1.0]):
        assert tube_membership(F, [0.0], u, sp, w, CFG).verdict.value == IN
    for x in (0.0, 1.0):
        G = rep("gaussian", x)
        for u in ([1.0], [-1.0]):
            assert tube_membership(G, [x], u, sp, CFG.localizer([x]), CFG).verdict.value == REG
    with pytest.raises(GridError):
        tube_membership(make_analytic_rep(get_model("delta")), [0.0], [1.0], sp, w, CFG)
    with pytest.raises(ValueError):
        tube_membership(F, [0.0], [2.0], sp, w, CFG)


def test_boundary_value_from_the_upper_half_plane_flags_one_side():
    # f^ of 1/(x + i0) lives on xi > 0 (FFT half-line oracle), the dual cone of the upper half-line
    f = get_model("inv_x_plus_i0")
    g = sample(f, CFG.grid_n(1), CFG.spacing(1), local_grid(1, CFG.grid_n(1), CFG.spacing(1), [0.0]))
    from tubewf.signals import spectrum

    assert np.all(f.fourier(-np.geomspace(1e-3, 1e3, 50)) == 0)
    G = spectrum(localize(g, CFG.localizer([0.0])))
    (xi,) = G.coords()
    # the window's spectral tail leaks across xi = 0; it has decayed by |xi| ~ 200
    band = (np.abs(xi) > 200) & (np.abs(xi) < 400)
    assert np.abs(G.samples[band & (xi < 0)]).max() < 1e-4 * np.abs(G.samples[band & (xi > 0)]).min()
    for rep in (wf_detect(f, FL(2, 1), [0.0], CFG), tube_scan(f, FL(2, 1), [0.0], CFG)):
        assert rep.flagged() == {(0, 0)}
        assert bin_axes(1, 2)[0][0] > 0
