import pytest

from lanenav.scene import CameraIntrinsics, Pose, rasterize_floor, render_frame
from lanenav.sim.demo import make_demo_deployment, make_straight_world


@pytest.fixture(scope="session")
def demo():
    return make_demo_deployment()


@pytest.fixture(scope="session")
def straight():
    return make_straight_world(5.0)


@pytest.fixture(scope="session")
def straight_raster(straight):
    return rasterize_floor(straight)


@pytest.fixture(scope="session")
def canonical_frame(straight_raster):
    """On-lane view: walker on the centerline of the straight RED/BLUE edge,
    facing the far node."""
    pose = Pose(position=(2.5, 3.0), body_heading=0.0)
    return render_frame(straight_raster, pose, CameraIntrinsics())
