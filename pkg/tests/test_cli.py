import json
import os

import numpy as np
import pytest

from flagdyn.cli import main


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def test_unknown_preset_exits_2(tmp_path, capsys):
    rc = main(["control-sets", "--preset", "nope", "--output-dir", str(tmp_path)])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_missing_generators_exits_2(tmp_path):
    assert main(["control-sets", "--output-dir", str(tmp_path)]) == 2


def test_invalid_generator_file_exits_2(tmp_path):
    path = tmp_path / "gens.json"
    path.write_text(json.dumps([[[1, 0], [0, -1]]]))
    rc = main(
        ["control-sets", "--generators", str(path), "--output-dir", str(tmp_path)]
    )
    assert rc == 2


def test_config_file_with_unknown_key_exits_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    rc = main(
        ["control-sets", "--preset", "full-group", "--config", str(cfg),
         "--output-dir", str(tmp_path)]
    )
    assert rc == 2


def test_decompose_writes_report(tmp_path, capsys):
    rc = main(["decompose", "--preset", "full-group", "--output-dir", str(tmp_path)])
    assert rc == 0
    payload = read_json(tmp_path / "decompose.json")
    assert len(payload["elements"]) == 4
    for entry in payload["elements"]:
        k = np.array(entry["iwasawa"]["k"])
        a = np.array(entry["iwasawa"]["a"])
        n = np.array(entry["iwasawa"]["n"])
        g = np.array(entry["matrix"])
        assert np.allclose(k @ a @ n, g, atol=1e-9)
    out = capsys.readouterr().out
    assert "decomposed 4 elements" in out


def test_control_sets_outputs_and_summary(tmp_path, capsys):
    rc = main(
        ["control-sets", "--preset", "full-group", "--output-dir", str(tmp_path)]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "PROJ: 1 (1 invariant)" in out
    assert "K: 1 (1 invariant)" in out
    for tag in ("PROJ", "K"):
        sets = read_json(tmp_path / ("control_sets_%s.json" % tag))
        assert len(sets["control_sets"]) == 1
        assert sets["control_sets"][0]["invariant"] is True
        pts = read_json(tmp_path / ("points_%s.json" % tag))
        assert pts["count"] == len(pts["points"])
        lines = (tmp_path / ("graph_%s.jsonl" % tag)).read_text().splitlines()
        header = json.loads(lines[1])
        assert header["edge_count"] == len(lines) - 2


def test_single_space_flag(tmp_path):
    rc = main(
        ["control-sets", "--preset", "full-group", "--space", "K",
         "--output-dir", str(tmp_path)]
    )
    assert rc == 0
    assert (tmp_path / "control_sets_K.json").exists()
    assert not (tmp_path / "control_sets_PROJ.json").exists()


def test_verify_full_group_passes(tmp_path, capsys):
    rc = main(
        ["verify", "--preset", "full-group", "--output-dir", str(tmp_path),
         "--theorems", "counting,right-translation,pi-compatibility",
         "--cloud-count", "360"]
    )
    out = capsys.readouterr().out
    assert rc == 0, out
    reports = read_json(tmp_path / "verify.json")["reports"]
    assert all(r["passed"] for r in reports)
    tags = {r["theorem_tag"] for r in reports}
    assert tags == {"counting", "right-translation", "pi-compatibility"}


def test_byte_determinism_excluding_timestamp(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        rc = main(
            ["control-sets", "--preset", "full-group", "--output-dir", str(out)]
        )
        assert rc == 0
    for name in sorted(os.listdir(out_a)):
        if name.endswith(".jsonl"):
            a = (out_a / name).read_text().splitlines()
            b = (out_b / name).read_text().splitlines()
            assert a[1:] == b[1:]
            continue
        a = read_json(out_a / name)
        b = read_json(out_b / name)
        a.pop("meta")
        b.pop("meta")
        assert a == b


def test_epsilon_and_depth_flags_override(tmp_path):
    rc = main(
        ["control-sets", "--preset", "full-group", "--space", "K",
         "--epsilon", "0.05", "--word-depth", "2", "--output-dir", str(tmp_path)]
    )
    assert rc == 0
    payload = read_json(tmp_path / "control_sets_K.json")
    assert payload["epsilon"] == 0.05
    assert payload["word_depth"] == 2
