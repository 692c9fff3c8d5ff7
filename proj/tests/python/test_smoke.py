"""End-to-end smoke tests for the Python bindings."""

import math

import numpy as np
import pytest

import gsplit


def make_gaussian(position=(0, 0, 0), scales=(1, 1, 1), mass=1.0):
    g = gsplit.Gaussian()
    g.position = np.asarray(position, dtype=float)
    g.scales = np.asarray(scales, dtype=float)
    g.opacity_mass = mass
    g.sh_coeffs = [0.0, 0.0, 0.0]
    return g


def make_model(gaussians):
    m = gsplit.SplatModel()
    m.sh_degree = 0
    m.gaussians = gaussians
    return m


def test_half_normal_split():
    g = make_gaussian()
    plane = gsplit.Plane(normal=[1, 0, 0], offset=0.0)
    children = gsplit.split_at_plane(g, plane)
    assert children is not None
    left, right = children
    assert left.opacity_mass == pytest.approx(0.5, abs=1e-12)
    assert left.position[0] == pytest.approx(-math.sqrt(2 / math.pi), abs=1e-12)
    assert left.covariance()[0, 0] == pytest.approx(1 - 2 / math.pi, abs=1e-12)
    assert right.position[0] == pytest.approx(+math.sqrt(2 / math.pi), abs=1e-12)

    merged = gsplit.merge(left, right)
    assert merged.opacity_mass == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(merged.position, g.position, atol=1e-12)
    assert np.allclose(merged.covariance(), np.eye(3), atol=1e-9)


def test_split_far_plane_passes_through():
    g = make_gaussian()
    assert gsplit.split_at_plane(g, gsplit.Plane(normal=[1, 0, 0], offset=50.0)) is None


def test_halfspace_moments_against_mc():
    g = make_gaussian(position=(0.3, -0.2, 0.1), scales=(0.8, 1.4, 0.5), mass=2.0)
    plane = gsplit.Plane(normal=[1, 2, 2], offset=-0.1)
    mass, first, second = gsplit.halfspace_moments(g, plane)
    estimate, se = gsplit.mc_halfspace_mass(g, plane, samples=200000, seed=7)
    assert abs(mass - estimate) <= 3 * se
    assert first.shape == (3,)
    assert second.shape == (3, 3)


def test_ply_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    gaussians = []
    for _ in range(16):
        g = make_gaussian(
            position=rng.uniform(-1, 1, 3),
            scales=np.exp(rng.uniform(-2, 0, 3)),
        )
        q = rng.normal(size=4)
        g.rotation = q / np.linalg.norm(q)
        g.opacity_mass = 0.5 * float(np.prod(g.scales)) * (2 * math.pi) ** 1.5
        g.sh_coeffs = rng.uniform(-1, 1, 3).tolist()
        gaussians.append(g)
    model = make_model(gaussians)

    path = tmp_path / "model.ply"
    clamped = gsplit.save_model(model, str(path))
    assert clamped == 0
    back = gsplit.load_model(str(path))
    assert len(back) == len(model)
    for a, b in zip(model.gaussians, back.gaussians):
        assert np.allclose(a.position, b.position, atol=1e-6)
        assert np.allclose(a.scales, b.scales, rtol=1e-6)
        assert a.opacity_mass == pytest.approx(b.opacity_mass, rel=2e-6)

    points = tmp_path / "points.ply"
    gsplit.export_points(back, str(points))
    assert points.stat().st_size > 0


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.ply"
    path.write_text("not a ply")
    with pytest.raises(gsplit.FormatError):
        gsplit.load_model(str(path))


def test_plane_split_edit_report():
    gaussians = [
        make_gaussian(position=(0.01 * i - 0.05, 0, 0), scales=(0.5, 0.5, 0.5))
        for i in range(10)
    ]
    model = make_model(gaussians)
    spec = (
        '{"kind":"plane_split","plane":{"normal":[1,0,0],"d":0},'
        '"strategy":"ours","repeat":2}'
    )
    edited, report = gsplit.apply_edit(model, spec)
    assert report["W"] > 0
    assert report["removed"] == 0
    assert len(edited) == report["W"] + report["passthrough"]
    assert report["e_e"] >= 0.0

    _, move_report = gsplit.apply_edit(
        model, '{"kind":"plane_split","plane":{"normal":[1,0,0],"d":0},"strategy":"move"}'
    )
    assert move_report["e_i"] == 0.0
    assert report["e_e"] < move_report["e_e"]


def test_homogenize_reaches_gamma_threshold():
    model = make_model([make_gaussian(scales=(10, 1, 1))])
    out, report = gsplit.homogenize(model, eta_gamma=5.0)
    assert report["split_rounds"] == 2
    assert report["gamma_max"] <= 5.0
    assert len(out) == 4
    assert gsplit.gamma(out.gaussians[0]) <= 5.0


def test_densify_for_points_masses():
    gaussians = [
        make_gaussian(position=(0.05 * i, 0, 0), scales=(0.1, 0.1, 0.1)) for i in range(99)
    ]
    gaussians.append(make_gaussian(scales=(5, 0.1, 0.1), mass=2.0))
    model = make_model(gaussians)
    out, report = gsplit.densify_for_points(model, eta_gamma=2.0, max_rounds=1)
    assert len(out) == 101
    tail = out.gaussians[99]
    assert tail.opacity_mass == pytest.approx(2.0 * 0.5 * (1 - math.erf(math.sqrt(2))), rel=1e-9)

    values, component = gsplit.gamma_ij(make_gaussian(scales=(5, 1, 1)), 0.0)
    assert values[0] == pytest.approx(5.0)
    assert component == 0


def test_validation_errors_map_to_python():
    g = make_gaussian()
    with pytest.raises(gsplit.GsplitError):
        gsplit.merge(make_gaussian(mass=0.0), make_gaussian(mass=0.0))
    with pytest.raises(gsplit.SingularCovarianceError):
        bad = make_gaussian(scales=(1e-80, 1e-80, 1e-80))
        bad.pdf_at(np.zeros(3))
    assert g.pdf_at(np.zeros(3)) == pytest.approx((2 * math.pi) ** -1.5, rel=1e-12)
