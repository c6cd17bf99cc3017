"""
Tests for the procedural texture and the stereo renderer
"""

from pathlib import Path

import numpy as np
import pytest
from numpy.lib.stride_tricks import sliding_window_view

from src.calib.epipolar import check_alignment
from src.errors import InvariantViolation
from src.geometry.pose import Pose2D
from src.render.renderer import (
    BACKGROUND, RenderParams, Scene, correspondences_from_render, render_stereo
)
from src.render.texture import procedural_texture
from src.sim.world import Box, WorldModel, load_world
from src.stereo.matcher import MatcherParams, compute_disparity

WALL_DISPARITY = 125.0 * 0.063 / 1.0
SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
SCENARIO_VIEWS = [
    ("single_box", Pose2D(1.0, 2.0, 0.0)),
    ("turn_left", Pose2D(0.5, 1.5, 0.0)),
    ("dead_end", Pose2D(0.8, 1.8, 0.0)),
    ("doorway", Pose2D(2.0, 1.0, 0.0)),
    ("l_room", Pose2D(1.5, 3.0, 0.0)),
]


@pytest.fixture
def wall_scene():
    """Camera 1 m in front of a tall wall that fills the upper view"""
    world = WorldModel(5.0, 5.0, (Box(2.0, 0.0, 0.5, 5.0, 2.0, seed=3),))
    return Scene(world, Pose2D(1.0, 2.5, 0.0), camera_height=0.25)


@pytest.fixture
def pillar_scene():
    """Pillar 0.5 m ahead, wall behind it at 1 m"""
    world = WorldModel(5.0, 5.0, (
        Box(2.0, 0.0, 0.5, 5.0, 2.0, seed=3),
        Box(1.5, 2.4, 0.1, 0.2, 2.0, seed=9),
    ))
    return Scene(world, Pose2D(1.0, 2.5, 0.0), camera_height=0.25)


def test_texture_deterministic_and_bounded():
    """Test repeatability and the intensity range"""
    rng = np.random.default_rng(0)
    u, v = rng.uniform(-50, 50, 1000), rng.uniform(-50, 50, 1000)
    a = procedural_texture(4, u, v)
    np.testing.assert_array_equal(a, procedural_texture(4, u, v))
    assert a.min() >= 0.0 and a.max() <= 255.0
    assert a.std() > 30.0


def test_texture_seeds_decorrelated():
    """Test that different seeds give unrelated fields"""
    rng = np.random.default_rng(1)
    u, v = rng.uniform(0, 100, 10_000), rng.uniform(0, 100, 10_000)
    rho = np.corrcoef(procedural_texture(1, u, v), procedural_texture(2, u, v))[0, 1]
    assert abs(rho) < 0.1


def test_scene_camera_on_floor():
    """Test that the camera must stand on the floor"""
    with pytest.raises(InvariantViolation):
        Scene(WorldModel(2.0, 2.0), Pose2D(3.0, 1.0, 0.0))


def test_render_wall_disparity(wall_scene, sim_rig):
    """Test a fronto-parallel wall at 1 m"""
    out = render_stereo(wall_scene, sim_rig)
    assert out.left.data.shape == out.right.data.shape == (120, 160)
    np.testing.assert_allclose(out.depth[:90], 1.0, rtol=1e-12)
    np.testing.assert_allclose(out.gt_disparity_px[:90, 8:], WALL_DISPARITY, rtol=1e-9)
    # wall pixels whose match would fall left of the right image
    assert out.occluded[:90, :7].all()


def test_gt_consistent_with_depth(pillar_scene, sim_rig):
    """Test gt = f*T/Z at every valid pixel"""
    out = render_stereo(pillar_scene, sim_rig)
    valid = np.isfinite(out.gt_disparity_px)
    assert valid.sum() > 10_000
    np.testing.assert_allclose(out.gt_disparity_px[valid], 125 * 0.063 / out.depth[valid],
                               rtol=1e-9)
    assert (out.gt_disparity.valid_mask() == valid).all()


def test_render_empty_view(sim_rig):
    """Test that a camera looking off the floor edge sees only background"""
    scene = Scene(WorldModel(5.0, 5.0), Pose2D(4.99, 2.5, 0.0))
    out = render_stereo(scene, sim_rig)
    assert not out.gt_disparity.valid_mask().any()
    assert (out.left.data == BACKGROUND).all()


def test_occlusion_band_beside_pillar(pillar_scene, sim_rig):
    """Test that the band left of the pillar is about one disparity step wide"""
    out = render_stereo(pillar_scene, sim_rig)
    band = int(out.occluded[40, 8:].sum())
    assert abs(band - (2 * WALL_DISPARITY - WALL_DISPARITY)) <= 1.5


def test_render_deterministic(pillar_scene, sim_rig):
    """Test that rendering is a pure function of scene and params"""
    params = RenderParams(noise_sigma=2.0, seed=5)
    a = render_stereo(pillar_scene, sim_rig, params)
    b = render_stereo(pillar_scene, sim_rig, params)
    np.testing.assert_array_equal(a.left.data, b.left.data)
    np.testing.assert_array_equal(a.right_color.data, b.right_color.data)


def test_rendered_windows_have_texture(wall_scene, sim_rig):
    """Test that almost every 9x9 window on the wall has intensity variation"""
    out = render_stereo(wall_scene, sim_rig)
    windows = sliding_window_view(out.left.data[:80].astype(float), (9, 9))
    assert (windows.var(axis=(-1, -2)) > 0).mean() >= 0.99


def test_matcher_recovers_rendered_disparity(pillar_scene, sim_rig):
    """Test end-to-end fidelity of the matcher on a rendered pair"""
    out = render_stereo(pillar_scene, sim_rig)
    p = MatcherParams(max_disp=40)
    dm = compute_disparity(out.left, out.right, p)
    measured = dm.to_pixels()
    both = np.isfinite(measured) & np.isfinite(out.gt_disparity_px)
    assert both.sum() > 5000
    error = np.abs(measured[both] - out.gt_disparity_px[both])
    assert (error <= 1.0).mean() >= 0.9


@pytest.mark.parametrize("world, pose", SCENARIO_VIEWS)
def test_matcher_on_scenario_views(world, pose, sim_rig):
    """Test matcher fidelity on non-occluded pixels of five bundled worlds"""
    scene = Scene(load_world(SCENARIOS / f"{world}.world"), pose, camera_height=0.25)
    out = render_stereo(scene, sim_rig)
    measured = compute_disparity(out.left, out.right, MatcherParams(max_disp=40)).to_pixels()
    both = np.isfinite(measured) & np.isfinite(out.gt_disparity_px) & ~out.occluded
    assert both.sum() > 1000
    error = np.abs(measured[both] - out.gt_disparity_px[both])
    assert (error <= 1.0).mean() >= 0.9


def test_correspondences_and_misalignment(wall_scene, sim_rig):
    """Test that sampled pairs expose the vertical offset hook"""
    aligned = correspondences_from_render(render_stereo(wall_scene, sim_rig), 40, seed=1)
    assert len(aligned) == 40
    assert check_alignment(aligned).max_px == 0.0

    shifted = render_stereo(wall_scene, sim_rig, RenderParams(vertical_offset_px=2.0))
    report = check_alignment(correspondences_from_render(shifted, 40, seed=1))
    assert report.mean_px == pytest.approx(2.0)
    assert not report.passed
