import json
import math

import numpy as np
import pytest

import jolimas


def look_at(view_id, eye, target, focal=700.0, width=640, height=480):
    eye, target = np.asarray(eye, float), np.asarray(target, float)
    forward = target - eye
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, [0.0, 1.0, 0.0])
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    rot = np.stack([right, down, forward])
    return {
        "id": view_id,
        "fx": focal,
        "fy": focal,
        "cx": (width - 1) / 2,
        "cy": (height - 1) / 2,
        "width": width,
        "height": height,
        "R": rot.ravel().tolist(),
        "t": (-rot @ eye).tolist(),
    }


def mirror_point(light, eye):
    # Reflection of the light in z = 0, joined to the eye.
    lz, ez = light[2], eye[2]
    s = ez / (ez + lz)
    return [eye[0] + s * (light[0] - eye[0]), eye[1] + s * (light[1] - eye[1]), 0.0]


@pytest.fixture(scope="module")
def plane_scene():
    light = [0.0, -0.35, 1.0]
    views = []
    for i in range(5):
        phi = -0.5 + i * 0.25
        eye = [1.2 * math.sin(phi), 0.35, 1.2 * math.cos(phi)]
        views.append(look_at(f"v{i}", eye, mirror_point(light, eye)))
    return {
        "surface": {"type": "plane", "normal": [0, 0, 1], "offset": 0.0},
        "light": light,
        "views": views,
    }


def test_ellipse_error_concentric_circles():
    assert jolimas.ellipse_error((320, 240, 10, 10, 0), (320, 240, 20, 20, 0), 640, 480) == pytest.approx(1.25)


def test_spearman_monotone():
    assert jolimas.spearman([1, 2, 3], [2, 5, 100]) == pytest.approx(1.0)


def test_render_detect_reconstruct_predict(plane_scene):
    images = {v["id"]: jolimas.render(json.dumps(plane_scene), v["id"]) for v in plane_scene["views"]}
    img = images["v2"]
    assert img.shape == (480, 640) and img.dtype == np.float32
    det = jolimas.detect(img, "v2")
    assert abs(det["brightest_px"][0] - 319.5) < 2 and abs(det["brightest_px"][1] - 239.5) < 2

    model = jolimas.reconstruct(plane_scene, {k: v for k, v in images.items() if k != "v2"})
    assert model["mode"] == "canonical"
    pred = jolimas.predict(model, plane_scene, "v2")
    e_p, e_d = pred["ellipse"], det["ellipse"]
    err = jolimas.ellipse_error(
        (*e_p["center"], e_p["a"], e_p["b"], e_p["theta"]), (*e_d["center"], e_d["a"], e_d["b"], e_d["theta"]), 640, 480
    )
    assert err < 1.0


def test_errors_surface_as_exceptions(plane_scene):
    with pytest.raises(jolimas.JolimasError):
        jolimas.render(json.dumps(plane_scene), "missing")
    with pytest.raises(jolimas.JolimasError):
        jolimas.detect(np.zeros((20, 20), np.float32))


def test_cli_usage_error():
    assert jolimas.dispatch(["no-such-command"]) == 2
