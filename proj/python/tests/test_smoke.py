import json
import os
import pathlib
import shutil
import subprocess

import numpy as np
import pytest

import agmn

ROOT = pathlib.Path(__file__).resolve().parents[2]


def find_cli():
    env = os.environ.get("AGMN_CLI")
    if env:
        return env
    built = ROOT / "build" / "tools" / "agmn"
    if built.exists():
        return str(built)
    return shutil.which("agmn")


def hand_pose():
    # A plausible pose on the 46x46 grid, wrist first, fingers of 4 joints.
    pts = [(23.0, 30.0)]
    for f, dx in enumerate((-4, -2, 0, 2, 4)):
        for j in range(1, 5):
            pts.append((23.0 + dx * j * 0.5 * (1 + (f == 0)), 30.0 - 4.0 * j))
    return pts


def test_version():
    assert agmn.__version__ == "0.1.0"


def test_targets_shapes_and_center():
    pts = hand_pose()
    s, q = agmn.make_targets_arrays(pts)
    assert s.shape == (21, 46, 46)
    assert q.shape == (40, 45, 45)
    assert s.dtype == np.float64
    same = list(pts)
    same[1] = same[0]
    _, q0 = agmn.make_targets_arrays(same)
    peaks = [np.unravel_index(np.argmax(q0[c]), q0[c].shape) for c in range(40)]
    assert (22, 22) in peaks


def test_infer_recovers_clean_pose():
    pts = hand_pose()
    s, q = agmn.make_targets_arrays(pts)
    marg, preds = agmn.infer_arrays(s, q)
    assert marg.shape == (21, 46, 46)
    np.testing.assert_allclose(marg.sum(axis=(1, 2)), 1.0, atol=1e-12)
    assert preds == [(int(y), int(x)) for x, y in pts]

    _, base = agmn.infer_arrays(s, q, unary_only=True)
    assert base == preds
    fft, _ = agmn.infer_arrays(s, q, conv="fft")
    np.testing.assert_allclose(fft, marg, atol=1e-12)


def test_float32_matches_float64_predictions():
    rng = np.random.default_rng(0)
    u = rng.random((21, 20, 20)).astype(np.float32)
    k = rng.random((40, 5, 5)).astype(np.float32)
    m32, p32 = agmn.infer_arrays(u, k)
    m64, p64 = agmn.infer_arrays(u.astype(np.float64), k.astype(np.float64))
    assert p32 == p64
    assert np.array_equal(m32, m64)


def test_wrong_channel_count():
    with pytest.raises(agmn.AgmnError, match="expected 40"):
        agmn.infer_arrays(np.ones((21, 8, 8)), np.ones((39, 5, 5)))
    with pytest.raises(agmn.AgmnError):
        agmn.infer_arrays(np.ones((21, 8)), np.ones((40, 5, 5)))


def test_tensor_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    a = rng.standard_normal((3, 4, 5))
    agmn.write_tensor(a, str(tmp_path / "a.agt"))
    assert np.array_equal(agmn.read_tensor(str(tmp_path / "a.agt")), a)


def test_graph_json():
    g = json.loads(agmn.default_graph_json())
    assert g["num_nodes"] == 21
    assert len(g["edges"]) == 20


@pytest.mark.skipif(find_cli() is None, reason="agmn command-line tool not built")
@pytest.mark.parametrize("index", [0, 1, 2])
def test_matches_cli(tmp_path, index):
    cli = find_cli()
    subprocess.run(
        [cli, "synth", "--n", "3", "--seed", "11", "--occlusion", "0.2", "--distractors", "2",
         "--noise", "0.05", "--dtype", "f64", "--out", str(tmp_path / "data")],
        check=True, capture_output=True)
    stem = tmp_path / "data" / f"sample_{index:05d}"
    unary = agmn.read_tensor(f"{stem}_unary.agt")
    kernels = agmn.read_tensor(f"{stem}_kernels.agt")

    subprocess.run(
        [cli, "infer", "--unary", f"{stem}_unary.agt", "--kernels", f"{stem}_kernels.agt",
         "--out-marginals", str(tmp_path / "m.agt"), "--out-pred", str(tmp_path / "p.json")],
        check=True, capture_output=True)
    marg, preds = agmn.infer_arrays(unary, kernels)
    assert np.array_equal(marg, agmn.read_tensor(str(tmp_path / "m.agt")))
    cells = json.loads((tmp_path / "p.json").read_text())["cells"]
    assert [tuple(c) for c in cells] == preds

    subprocess.run(
        [cli, "targets", "--keypoints", f"{stem}_keypoints.json",
         "--out-unary", str(tmp_path / "s.agt"), "--out-kernels", str(tmp_path / "q.agt")],
        check=True, capture_output=True)
    pts = [tuple(p) for p in json.loads(pathlib.Path(f"{stem}_keypoints.json").read_text())["points"]]
    s, q = agmn.make_targets_arrays(pts)
    assert np.array_equal(s, agmn.read_tensor(str(tmp_path / "s.agt")))
    assert np.array_equal(q, agmn.read_tensor(str(tmp_path / "q.agt")))
