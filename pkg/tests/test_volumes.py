"""Voxel encoding tests: bounds, index mapping, invariants, file format."""

import struct

import numpy as np
import pytest

from voxact import volumes as vx
from voxact.errors import (
    EmptyInput,
    IndexOutOfRange,
    MalformedFile,
    OutOfBounds,
    TruncatedFile,
    VersionMismatch,
)
from voxact.preprocess import PointCloudSequence


def _cloud(*frames):
    return PointCloudSequence(frames=tuple(np.asarray(f, dtype=np.float64) for f in frames))


# --------------------------------------------------------------------------
# bounds fitting
# --------------------------------------------------------------------------

def test_fit_bounds_unit_box_zero_margin():
    pts = np.array([[-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]])
    bounds = vx.fit_bounds(_cloud(pts), margin=0.0)
    assert np.allclose(bounds.center, 0.0)
    assert bounds.half_extent == 1.0
    assert np.allclose(bounds.minimum, [-1.0, -1.0, -1.0])
    assert np.allclose(bounds.maximum, [1.0, 1.0, 1.0])


def test_fit_bounds_margin_scales_half_extent():
    pts = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
    bounds = vx.fit_bounds(_cloud(pts), margin=0.05)
    assert np.allclose(bounds.center, [1.0, 0.0, 0.0])
    assert np.isclose(bounds.half_extent, 1.05)


def test_fit_bounds_cube_uses_largest_dimension():
    pts = np.array([[0.0, 0.0, 0.0], [4.0, 2.0, 1.0]])
    bounds = vx.fit_bounds(_cloud(pts), margin=0.0)
    assert np.allclose(bounds.center, [2.0, 1.0, 0.5])
    assert bounds.half_extent == 2.0  # from the x span


def test_fit_bounds_spans_all_frames():
    bounds = vx.fit_bounds(
        _cloud([[0.0, 0.0, 0.0]], [[0.0, 6.0, 0.0]]), margin=0.0
    )
    assert np.allclose(bounds.center, [0.0, 3.0, 0.0])
    assert bounds.half_extent == 3.0


def test_fit_bounds_single_point_floors_extent():
    bounds = vx.fit_bounds(_cloud([[5.0, -2.0, 0.25]]))
    assert np.allclose(bounds.center, [5.0, -2.0, 0.25])
    assert bounds.half_extent == vx.MIN_HALF_EXTENT == 0.1


def test_fit_bounds_validation():
    with pytest.raises(EmptyInput):
        vx.fit_bounds(PointCloudSequence(frames=()))
    with pytest.raises(EmptyInput):
        vx.fit_bounds(_cloud(np.zeros((0, 3))))
    with pytest.raises(ValueError):
        vx.fit_bounds(_cloud([[0.0, 0.0, 0.0]]), margin=-0.1)


def test_grid_bounds_validation():
    with pytest.raises(ValueError):
        vx.GridBounds(center=np.zeros(3), half_extent=0.0)
    with pytest.raises(ValueError):
        vx.GridBounds(center=np.zeros(2), half_extent=1.0)


# --------------------------------------------------------------------------
# point-to-voxel mapping
# --------------------------------------------------------------------------

def test_point_to_voxel_known_cells():
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    # cube [-1, 1]^3 at resolution 4 has cells of width 0.5
    assert vx.point_to_voxel([-1.0, -1.0, -1.0], bounds, 4) == (0, 0, 0)
    assert vx.point_to_voxel([-0.75, -0.25, 0.25], bounds, 4) == (0, 1, 2)
    assert vx.point_to_voxel([0.999, 0.999, 0.999], bounds, 4) == (3, 3, 3)


def test_point_to_voxel_max_face_clamps_into_last_cell():
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    assert vx.point_to_voxel([1.0, 1.0, 1.0], bounds, 4) == (3, 3, 3)


def test_point_to_voxel_cell_boundary_goes_up():
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    assert vx.point_to_voxel([0.0, 0.0, 0.0], bounds, 4) == (2, 2, 2)


def test_point_to_voxel_out_of_bounds():
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    for bad in ([1.1, 0, 0], [0, -1.0001, 0], [0, 0, 2.0]):
        with pytest.raises(OutOfBounds):
            vx.point_to_voxel(bad, bounds, 4)


def test_point_to_voxel_tolerates_roundoff_at_faces():
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    eps = 1e-12
    assert vx.point_to_voxel([1.0 + eps, 0.0, 0.0], bounds, 4)[0] == 3
    assert vx.point_to_voxel([-1.0 - eps, 0.0, 0.0], bounds, 4)[0] == 0


# --------------------------------------------------------------------------
# encoders
# --------------------------------------------------------------------------

def test_encode_spatial_marks_expected_cells():
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    cloud = _cloud([[-1.0, -1.0, -1.0]], [[0.5, 0.5, 0.5]])
    grid = vx.encode_spatial(cloud, bounds, 2)
    assert grid.kind == vx.KIND_SPATIAL
    expect = np.zeros((2, 2, 2))
    expect[0, 0, 0] = 1.0
    expect[1, 1, 1] = 1.0
    assert np.array_equal(grid.values, expect)


def test_encode_temporal_last_touch_values():
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    p_shared = [0.5, 0.5, 0.5]
    p_first = [-0.5, -0.5, -0.5]
    cloud = _cloud([p_shared, p_first], [p_shared], [p_shared])
    grid = vx.encode_temporal(cloud, bounds, 2)
    assert grid.kind == vx.KIND_TEMPORAL
    # shared voxel last touched by frame 3 of 3 -> (3-1)/(3-1) = 1.0
    assert grid.values[1, 1, 1] == 1.0
    # first-frame-only voxel -> (1-1)/2 = 0.0 (indistinguishable from empty)
    assert grid.values[0, 0, 0] == 0.0


def test_encode_temporal_middle_frame_value():
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    cloud = _cloud([[-0.5] * 3], [[0.5] * 3], [[-0.5] * 3 ])
    grid = vx.encode_temporal(cloud, bounds, 2)
    assert grid.values[1, 1, 1] == 0.5  # only frame 2 of 3 touches it
    assert grid.values[0, 0, 0] == 1.0  # frames 1 and 3; last touch wins


def test_encode_temporal_single_frame_is_one():
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    grid = vx.encode_temporal(_cloud([[0.5] * 3]), bounds, 2)
    assert grid.values[1, 1, 1] == 1.0


def test_encoders_reject_empty_clouds():
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    with pytest.raises(EmptyInput):
        vx.encode_spatial(PointCloudSequence(frames=()), bounds, 2)
    with pytest.raises(EmptyInput):
        vx.encode_temporal(_cloud(np.zeros((0, 3))), bounds, 2)


def test_encode_invariants_random_clouds():
    rng = np.random.default_rng(50)
    for _ in range(20):
        f = int(rng.integers(1, 8))
        frames = [rng.uniform(-1, 1, size=(int(rng.integers(1, 30)), 3)) for _ in range(f)]
        cloud = _cloud(*frames)
        bounds = vx.fit_bounds(cloud)
        spatial = vx.encode_spatial(cloud, bounds, 12)
        temporal = vx.encode_temporal(cloud, bounds, 12)
        assert set(np.unique(spatial.values)) <= {0.0, 1.0}
        allowed = {0.0} | (
            {1.0} if f == 1 else {(i - 1) / (f - 1) for i in range(1, f + 1)}
        )
        assert set(np.unique(temporal.values)) <= allowed
        # time recorded only where something occupies the voxel
        assert np.all(spatial.values[temporal.values > 0] == 1.0)


def test_encode_spatial_ignores_frame_order():
    rng = np.random.default_rng(51)
    frames = [rng.uniform(-1, 1, size=(10, 3)) for _ in range(5)]
    cloud = _cloud(*frames)
    reordered = _cloud(*[frames[i] for i in (4, 2, 0, 3, 1)])
    bounds = vx.fit_bounds(cloud)
    a = vx.encode_spatial(cloud, bounds, 10)
    b = vx.encode_spatial(reordered, bounds, 10)
    assert np.array_equal(a.values, b.values)


def test_voxel_grid_validation():
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    with pytest.raises(ValueError):
        vx.VoxelGrid(values=np.zeros((2, 3, 2)), bounds=bounds, kind=vx.KIND_SPATIAL)
    with pytest.raises(ValueError):
        vx.VoxelGrid(values=np.full((2, 2, 2), 0.5), bounds=bounds, kind=vx.KIND_SPATIAL)
    with pytest.raises(ValueError):
        vx.VoxelGrid(values=np.full((2, 2, 2), 1.5), bounds=bounds, kind=vx.KIND_TEMPORAL)
    with pytest.raises(ValueError):
        vx.VoxelGrid(values=np.zeros((2, 2, 2)), bounds=bounds, kind="other")


# --------------------------------------------------------------------------
# volume files
# --------------------------------------------------------------------------

def _sample_grid(kind=vx.KIND_TEMPORAL, resolution=3, num_frames=5):
    rng = np.random.default_rng(52)
    bounds = vx.GridBounds(center=np.array([0.5, -1.0, 2.0]), half_extent=1.25)
    if kind == vx.KIND_SPATIAL:
        values = (rng.random((resolution,) * 3) < 0.5).astype(np.float64)
    else:
        # norms that survive the float32 disk round trip exactly
        steps = np.float64(
            np.array(
                [(f - 1) / (num_frames - 1) for f in range(1, num_frames + 1)],
                dtype=np.float32,
            )
        )
        values = rng.choice(np.concatenate([[0.0], steps]), size=(resolution,) * 3)
    return vx.VoxelGrid(values=values, bounds=bounds, kind=kind)


def test_volume_layout_matches_documented_format():
    grid = _sample_grid(vx.KIND_SPATIAL, resolution=2)
    expected = (
        b"VXVL"
        + struct.pack("<H", 1)
        + struct.pack("<B", 0)
        + struct.pack("<I", 2)
        + struct.pack("<3d", *grid.bounds.center)
        + struct.pack("<d", grid.bounds.half_extent)
        + grid.values.astype("<f4").tobytes()
    )
    assert vx.write_volume(grid) == expected


@pytest.mark.parametrize("kind", [vx.KIND_SPATIAL, vx.KIND_TEMPORAL])
def test_volume_round_trip(kind):
    grid = _sample_grid(kind)
    blob = vx.write_volume(grid)
    back = vx.read_volume(blob)
    assert back.kind == grid.kind
    assert back.resolution == grid.resolution
    assert np.allclose(back.bounds.center, grid.bounds.center)
    assert back.bounds.half_extent == grid.bounds.half_extent
    assert np.array_equal(back.values, grid.values)  # f32-exact payload
    assert vx.write_volume(back) == blob


def test_volume_file_round_trip(tmp_path):
    grid = _sample_grid(vx.KIND_SPATIAL)
    path = tmp_path / "vol.vox"
    vx.save_volume(grid, path)
    back = vx.load_volume(path)
    assert np.array_equal(back.values, grid.values)


def test_volume_read_errors():
    blob = vx.write_volume(_sample_grid(vx.KIND_SPATIAL))
    with pytest.raises(VersionMismatch):
        vx.read_volume(b"NOPE" + blob[4:])
    with pytest.raises(VersionMismatch):
        vx.read_volume(blob[:4] + struct.pack("<H", 7) + blob[6:])
    with pytest.raises(MalformedFile):
        vx.read_volume(blob[:6] + b"\x09" + blob[7:])  # unknown kind code
    with pytest.raises(MalformedFile):
        vx.read_volume(blob + b"\x00")
    for n in (0, 3, 8, 20, len(blob) - 1):
        with pytest.raises((TruncatedFile, VersionMismatch)):
            vx.read_volume(blob[:n])


def test_volume_read_rejects_bad_resolution_and_nonfinite():
    blob = bytearray(vx.write_volume(_sample_grid(vx.KIND_SPATIAL)))
    zeroed = bytearray(blob)
    zeroed[7:11] = struct.pack("<I", 0)
    with pytest.raises(MalformedFile):
        vx.read_volume(bytes(zeroed))
    huge = bytearray(blob)
    huge[7:11] = struct.pack("<I", 5000)
    with pytest.raises(MalformedFile):
        vx.read_volume(bytes(huge))
    nan = bytearray(blob)
    payload_start = 4 + 2 + 1 + 4 + 24 + 8
    nan[payload_start : payload_start + 4] = struct.pack("<f", float("nan"))
    with pytest.raises(MalformedFile):
        vx.read_volume(bytes(nan))


# --------------------------------------------------------------------------
# slicing and rendering
# --------------------------------------------------------------------------

def _ramp_grid():
    values = np.arange(27, dtype=np.float64).reshape(3, 3, 3) / 26.0
    bounds = vx.GridBounds(center=np.zeros(3), half_extent=1.0)
    return vx.VoxelGrid(values=values, bounds=bounds, kind=vx.KIND_TEMPORAL)


def test_volume_slice_axes():
    grid = _ramp_grid()
    assert np.array_equal(vx.volume_slice(grid, "x", 1), grid.values[1])
    assert np.array_equal(vx.volume_slice(grid, "y", 2), grid.values[:, 2])
    assert np.array_equal(vx.volume_slice(grid, "z", 0), grid.values[:, :, 0])


def test_volume_slice_validation():
    grid = _ramp_grid()
    with pytest.raises(IndexOutOfRange):
        vx.volume_slice(grid, "x", 3)
    with pytest.raises(IndexOutOfRange):
        vx.volume_slice(grid, "x", -1)
    with pytest.raises(ValueError):
        vx.volume_slice(grid, "w", 0)


def test_max_projection():
    grid = _ramp_grid()
    assert np.array_equal(vx.max_projection(grid, "x"), grid.values.max(axis=0))
    assert np.array_equal(vx.max_projection(grid, "z"), grid.values.max(axis=2))
    with pytest.raises(ValueError):
        vx.max_projection(grid, "q")


def test_pgm_bytes_header_and_endpoints():
    plane = np.array([[0.0, 1.0], [0.5, 0.25]])
    data = vx.to_pgm_bytes(plane)
    assert data.startswith(b"P5\n2 2\n255\n")
    pixels = data[len(b"P5\n2 2\n255\n") :]
    assert pixels[0] == 255  # value 0 renders white
    assert pixels[1] == 0    # value 1 renders black
    assert pixels[2] == 255 - 128
    assert len(pixels) == 4


def test_pgm_respects_row_column_order():
    plane = np.zeros((2, 3))
    data = vx.to_pgm_bytes(plane)
    assert data.startswith(b"P5\n3 2\n255\n")  # width then height


def test_plane_to_csv_uses_repr_floats():
    plane = np.array([[0.1, 0.0], [1.0, 0.25]])
    text = vx.plane_to_csv(plane)
    assert text == "0.1,0.0\n1.0,0.25\n"
