import warnings

import numpy as np
import pytest

from ghostsim import (
    ApertureSamplingWarning,
    CoincidenceMap,
    DoubleSlit,
    GridMismatchError,
    GridSpec,
    ParameterError,
    PhasePattern,
    QuadSettings,
    SamplingError,
    background_subtract,
    expected_fringe_period,
    ghost_image_map,
    ghost_interference_map,
    ghost_magnification,
    half_plane_pattern,
    pattern_from_extent,
    rotate_pattern_90,
    uniform_pattern,
)

# d=2 mm in the fringe geometry: lambda (s1+s2) / d, and the exact period of
# the model's chirp term pi s1 s2 / (c_chirp d); they differ by 0.03%
PERIOD_SMALL_ANGLE = 0.94365e-3
PERIOD_EXACT = np.pi * 1.33 * 1.0 / (2213321.255917696 * 2e-3)


# ---------------------------------------------------------------------------
# object-plane records
# ---------------------------------------------------------------------------


def test_double_slit_validation():
    DoubleSlit(d=2e-3)
    with pytest.raises(ParameterError):
        DoubleSlit(d=0.0)
    with pytest.raises(ParameterError):
        DoubleSlit(d=2e-3, axis="z")
    with pytest.raises(ParameterError):
        DoubleSlit(d=2e-3, slit_width=2e-3)


def test_half_plane_pattern_structure():
    pat = half_plane_pattern(n=16, extent=4e-3)
    assert pat.shape == (16, 16)
    assert pat.pitch == (pytest.approx(0.25e-3), pytest.approx(0.25e-3))
    x = pat.x_centers()
    np.testing.assert_allclose(pat.grid[:, x < 0], np.pi)
    np.testing.assert_allclose(pat.grid[:, x > 0], 0.0)
    np.testing.assert_allclose(x + x[::-1], 0.0, atol=1e-17)


def test_half_plane_y_axis():
    pat = half_plane_pattern(n=8, extent=4e-3, axis="y")
    y = pat.y_centers()
    np.testing.assert_allclose(pat.grid[y < 0, :], np.pi)
    np.testing.assert_allclose(pat.grid[y > 0, :], 0.0)
    with pytest.raises(ParameterError):
        half_plane_pattern(axis="diag")


def test_pattern_validation():
    with pytest.raises(ParameterError):
        PhasePattern(grid=np.zeros((0, 4)), pitch=(1e-5, 1e-5), origin=(0, 0))
    with pytest.raises(ParameterError):
        PhasePattern(grid=np.full((4, 4), np.nan), pitch=(1e-5, 1e-5), origin=(0, 0))
    with pytest.raises(ParameterError):
        pattern_from_extent(np.zeros((4, 4)), (4e-3, 4e-3), aperture=np.full((4, 4), 2.0))
    with pytest.raises(ParameterError):
        pattern_from_extent(np.zeros((4, 4)), (4e-3, 4e-3), aperture=np.ones((3, 3)))


def test_default_transmission_is_open():
    pat = uniform_pattern(n=4)
    np.testing.assert_array_equal(pat.transmission(), np.ones((4, 4)))


def test_rotation_quarter_turn_moves_x_step_to_y():
    rot = rotate_pattern_90(half_plane_pattern(n=10, extent=4e-3))
    ypat = half_plane_pattern(n=10, extent=4e-3, axis="y")
    # one counterclockwise quarter turn parks the phase step on positive y
    np.testing.assert_array_equal(rot.grid, ypat.grid[::-1, :])


def test_rotation_twice_is_a_point_reflection():
    pat = half_plane_pattern(n=6, extent=4e-3)
    twice = rotate_pattern_90(rotate_pattern_90(pat))
    np.testing.assert_array_equal(twice.grid, pat.grid[::-1, ::-1])


def test_rotation_requires_square_centered_pattern():
    with pytest.raises(ParameterError):
        rotate_pattern_90(pattern_from_extent(np.zeros((4, 8)), (4e-3, 4e-3)))
    with pytest.raises(ParameterError):
        rotate_pattern_90(
            pattern_from_extent(np.zeros((4, 4)), (4e-3, 4e-3), center=(1e-3, 0.0))
        )


# ---------------------------------------------------------------------------
# coincidence-map record
# ---------------------------------------------------------------------------


def test_map_must_be_peak_normalized():
    good = np.zeros((4, 4))
    good[1, 2] = 1.0
    CoincidenceMap(values=good, pitch=(1e-5, 1e-5), origin=(0, 0))
    with pytest.raises(ParameterError):
        CoincidenceMap(values=2 * good, pitch=(1e-5, 1e-5), origin=(0, 0))
    with pytest.raises(ParameterError):
        CoincidenceMap(values=good - 0.5, pitch=(1e-5, 1e-5), origin=(0, 0))


def test_signed_map_allows_negatives():
    vals = np.array([[1.0, -0.5], [0.25, 0.0]])
    m = CoincidenceMap(values=vals, pitch=(1e-5, 1e-5), origin=(0, 0), signed=True)
    assert m.values.min() == -0.5


def test_raw_values_rescale():
    vals = np.array([[1.0, 0.5]])
    m = CoincidenceMap(
        values=vals, pitch=(1e-5, 1e-5), origin=(0, 0), meta={"raw_peak": 3.0}
    )
    np.testing.assert_allclose(m.raw_values(), [[3.0, 1.5]])


# ---------------------------------------------------------------------------
# ghost interference
# ---------------------------------------------------------------------------


def test_fringe_period_helper(fringe_params):
    assert expected_fringe_period(fringe_params, 2e-3) == pytest.approx(
        PERIOD_SMALL_ANGLE, rel=1e-4
    )


def _measured_period(cmap, row=0):
    c = cmap.values[row]
    x = cmap.x_centers()
    idx = np.nonzero((c[1:-1] > c[:-2]) & (c[1:-1] >= c[2:]))[0] + 1
    pos = []
    for i in idx:
        y0, y1, y2 = c[i - 1], c[i], c[i + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.0 if denom == 0 else 0.5 * (y0 - y2) / denom
        pos.append(x[i] + shift * (x[1] - x[0]))
    return float(np.mean(np.diff(pos)))


def test_fringe_period_of_map(fringe_params):
    grid = GridSpec(nx=512, ny=3, extent_x=6e-3, extent_y=0.3e-3)
    cmap = ghost_interference_map(fringe_params, DoubleSlit(d=2e-3), grid)
    period = _measured_period(cmap, row=1)
    assert period == pytest.approx(PERIOD_SMALL_ANGLE, rel=0.02)
    assert period == pytest.approx(PERIOD_EXACT, rel=0.02)


def test_fringes_follow_slit_axis(fringe_params):
    grid = GridSpec(nx=64, ny=64, extent_x=4e-3, extent_y=4e-3)
    along_x = ghost_interference_map(fringe_params, DoubleSlit(d=2e-3, axis="x"), grid)
    along_y = ghost_interference_map(fringe_params, DoubleSlit(d=2e-3, axis="y"), grid)
    # separable map: every row shows the same fringe profile up to a scale
    rows = along_x.values / np.max(along_x.values, axis=1, keepdims=True)
    np.testing.assert_allclose(rows, np.broadcast_to(rows[32], rows.shape), rtol=1e-9)
    # rotating the slit axis transposes the map on a square grid
    np.testing.assert_allclose(along_y.values, along_x.values.T, rtol=1e-12)


def test_interference_map_metadata_and_normalization(fringe_params):
    grid = GridSpec(nx=128, ny=4, extent_x=4e-3, extent_y=0.4e-3)
    cmap = ghost_interference_map(fringe_params, DoubleSlit(d=2e-3), grid)
    assert cmap.values.max() == pytest.approx(1.0, abs=1e-12)
    assert cmap.meta["raw_peak"] > 0
    assert cmap.meta["slit_separation_m"] == 2e-3
    assert cmap.meta["fringe_period_expected_m"] == pytest.approx(PERIOD_SMALL_ANGLE, rel=1e-4)


def test_coarse_grid_rejected(fringe_params):
    # d=12 mm shrinks the period to 0.157 mm, only 3.4 px at this pitch
    grid = GridSpec(nx=128, ny=4, extent_x=6e-3, extent_y=0.4e-3)
    with pytest.raises(SamplingError):
        ghost_interference_map(fringe_params, DoubleSlit(d=12e-3), grid)


def test_finite_slit_width_runs_and_softens_contrast(fringe_params):
    grid = GridSpec(nx=256, ny=3, extent_x=4e-3, extent_y=0.3e-3)
    sharp = ghost_interference_map(fringe_params, DoubleSlit(d=2e-3), grid)
    soft = ghost_interference_map(
        fringe_params, DoubleSlit(d=2e-3, slit_width=0.5e-3), grid
    )
    assert soft.values.max() == pytest.approx(1.0, abs=1e-12)
    assert not np.allclose(soft.values, sharp.values)


# ---------------------------------------------------------------------------
# ghost imaging
# ---------------------------------------------------------------------------


def _image(params, lens, pattern, d1_deg, grid, ts=1.0, nodes=512):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ApertureSamplingWarning)
        return ghost_image_map(
            params,
            lens,
            pattern,
            np.deg2rad(d1_deg),
            np.deg2rad(-45.0),
            grid,
            quad=QuadSettings(nodes=nodes),
            telescope_scale=ts,
        )


def test_image_map_metadata(imaging_params, imaging_lens):
    m = ghost_magnification(imaging_params, imaging_lens)
    grid = GridSpec(nx=24, ny=24, extent_x=m * 1e-3, extent_y=m * 1e-3)
    cmap = _image(imaging_params, imaging_lens, half_plane_pattern(n=32), -45.0, grid)
    assert cmap.meta["delta1_deg"] == pytest.approx(-45.0)
    assert cmap.meta["delta2_deg"] == pytest.approx(-45.0)
    assert cmap.meta["telescope_scale"] == 1.0
    assert cmap.meta["total_scale"] == pytest.approx(m)
    assert cmap.meta["aperture_nodes"] == 512
    assert cmap.meta["raw_peak"] > 0
    assert cmap.values.max() == pytest.approx(1.0, abs=1e-12)


def test_camera_grid_must_resolve_magnified_pattern(imaging_params, imaging_lens):
    m = ghost_magnification(imaging_params, imaging_lens)
    coarse = GridSpec(nx=8, ny=8, extent_x=m * 4e-3, extent_y=m * 4e-3)
    with pytest.raises(SamplingError):
        _image(imaging_params, imaging_lens, half_plane_pattern(n=32), -45.0, coarse)


def test_uniform_zero_pattern_gives_zero_map(imaging_params, imaging_lens):
    m = ghost_magnification(imaging_params, imaging_lens)
    grid = GridSpec(nx=16, ny=16, extent_x=m * 1e-3, extent_y=m * 1e-3)
    cmap = _image(imaging_params, imaging_lens, uniform_pattern(n=32), -45.0, grid)
    assert cmap.meta["raw_peak"] == 0.0
    np.testing.assert_array_equal(cmap.values, 0.0)


def test_telescope_scale_rescales_camera_coordinates(imaging_params, imaging_lens):
    # halving the relay scale while halving the camera extent lands on the
    # same image-plane sample points, so the values agree exactly
    m = ghost_magnification(imaging_params, imaging_lens)
    pat = half_plane_pattern(n=32)
    direct = _image(
        imaging_params, imaging_lens, pat, -45.0,
        GridSpec(nx=20, ny=20, extent_x=m * 1e-3, extent_y=m * 1e-3), ts=1.0,
    )
    relayed = _image(
        imaging_params, imaging_lens, pat, -45.0,
        GridSpec(nx=20, ny=20, extent_x=0.5 * m * 1e-3, extent_y=0.5 * m * 1e-3), ts=0.5,
    )
    np.testing.assert_array_equal(relayed.values, direct.values)
    assert relayed.meta["total_scale"] == pytest.approx(0.5 * m)


def test_invalid_telescope_scale_rejected(imaging_params, imaging_lens):
    grid = GridSpec(nx=16, ny=16, extent_x=1e-3, extent_y=1e-3)
    with pytest.raises(ParameterError):
        ghost_image_map(
            imaging_params, imaging_lens, half_plane_pattern(n=32),
            0.0, 0.0, grid, telescope_scale=0.0,
        )


def test_background_subtraction(imaging_params, imaging_lens):
    m = ghost_magnification(imaging_params, imaging_lens)
    grid = GridSpec(nx=16, ny=16, extent_x=m * 1e-3, extent_y=m * 1e-3)
    pat = half_plane_pattern(n=32)
    sig = _image(imaging_params, imaging_lens, pat, -45.0, grid)
    bg = _image(imaging_params, imaging_lens, uniform_pattern(n=32), -45.0, grid)
    diff = background_subtract(sig, bg)
    assert diff.signed
    np.testing.assert_allclose(diff.raw_values(), sig.raw_values(), rtol=1e-12, atol=1e-28)
    zero = background_subtract(sig, sig)
    assert zero.meta["raw_peak"] == 0.0
    np.testing.assert_array_equal(zero.values, 0.0)


def test_background_subtraction_grid_mismatch(imaging_params, imaging_lens):
    m = ghost_magnification(imaging_params, imaging_lens)
    a = _image(
        imaging_params, imaging_lens, half_plane_pattern(n=32), -45.0,
        GridSpec(nx=16, ny=16, extent_x=m * 1e-3, extent_y=m * 1e-3),
    )
    b = _image(
        imaging_params, imaging_lens, half_plane_pattern(n=32), -45.0,
        GridSpec(nx=12, ny=12, extent_x=m * 1e-3, extent_y=m * 1e-3),
    )
    c = _image(
        imaging_params, imaging_lens, half_plane_pattern(n=32), -45.0,
        GridSpec(nx=16, ny=16, extent_x=m * 2e-3, extent_y=m * 2e-3),
    )
    with pytest.raises(GridMismatchError):
        background_subtract(a, b)
    with pytest.raises(GridMismatchError):
        background_subtract(a, c)


def test_image_workers_do_not_change_bytes(imaging_params, imaging_lens):
    m = ghost_magnification(imaging_params, imaging_lens)
    grid = GridSpec(nx=20, ny=20, extent_x=m * 1.5e-3, extent_y=m * 1.5e-3)
    pat = half_plane_pattern(n=32)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ApertureSamplingWarning)
        maps = [
            ghost_image_map(
                imaging_params, imaging_lens, pat,
                np.deg2rad(-45.0), np.deg2rad(-45.0), grid,
                quad=QuadSettings(nodes=1536), workers=w,
            )
            for w in (1, 3)
        ]
    assert maps[0].values.tobytes() == maps[1].values.tobytes()
