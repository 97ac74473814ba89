import json

import pytest

from cyclogaudin.cli import main
from cyclogaudin.config import ConfigError, parse_config_dict

from conftest import CONFIGS


def run(tmp_path, *args, name="report.json"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, json.loads(out.read_text()), out


def small_config(tmp_path, **extra):
    raw = json.loads((CONFIGS / "gaudin_sl2.json").read_text())
    raw.update({"block_height": 2, "n_starts": 30, **extra})
    path = tmp_path / "small.json"
    path.write_text(json.dumps(raw))
    return path


def test_surat_config_a_passes(tmp_path):
    code, rep, _ = run(tmp_path, "surat", "--config", str(CONFIGS / "surat_sl2.json"))
    assert code == 0 and rep["pass"]
    assert len(rep["result"]["samples"]) == 8
    assert set(rep) == {"command", "config_hash", "seed", "result", "pass", "wall_time"}


def test_surat_with_threads(tmp_path, monkeypatch):
    monkeypatch.setenv("CYCLOGAUDIN_THREADS", "3")
    code, rep, _ = run(tmp_path, "surat", "--config", str(CONFIGS / "surat_sl2.json"))
    assert code == 0 and rep["result"]["max_residual"] <= 1e-8


def test_all_aggregates(tmp_path):
    code, rep, _ = run(tmp_path, "all", "--config", str(small_config(tmp_path)))
    subs = rep["result"]["reports"]
    assert set(subs) == {"info", "surat", "commute", "bethe-verify"}  # chi != 0 skips singular
    assert rep["pass"] == all(s["pass"] for s in subs.values())
    assert code == (0 if rep["pass"] else 1)


def test_info_dumps_algebra(tmp_path):
    code, rep, _ = run(tmp_path, "info", "--config", str(small_config(tmp_path)), "--dump-algebra")
    assert code == 0
    assert rep["result"]["dim_g"] == 3
    assert "structure_constants" in rep["result"]["algebra"]


def test_commute_dumps_matrices(tmp_path):
    code, rep, _ = run(tmp_path, "commute", "--config", str(small_config(tmp_path)), "--dump-matrices")
    assert code == 0
    assert "0" in rep["result"]["matrices"]


def test_reports_are_reproducible(tmp_path):
    cfg = str(small_config(tmp_path))
    _, a, _ = run(tmp_path, "bethe-solve", "--config", cfg, "--seed", "4", name="a.json")
    _, b, _ = run(tmp_path, "bethe-solve", "--config", cfg, "--seed", "4", name="b.json")
    a.pop("wall_time"), b.pop("wall_time")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["seed"] == 4


def test_singular_needs_chi_zero(tmp_path, capsys):
    assert main(["singular", "--config", str(small_config(tmp_path))]) == 2
    assert "chi" in capsys.readouterr().err


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", "--config", "x.json"])
    assert exc.value.code == 2


def test_missing_config_exits_2(tmp_path):
    assert main(["info", "--config", str(tmp_path / "nope.json")]) == 2


@pytest.mark.parametrize(
    "raw,field",
    [
        ({"algebra": {"series": "E", "rank": 6}}, "algebra"),
        ({"algebra": {"series": "A", "rank": 2}, "automorphism": {"diagram_perm": [1, 0], "T": 1}}, "automorphism"),
        ({"algebra": {"series": "A", "rank": 1}, "points": [1.0, 1.0]}, "points"),
        ({"algebra": {"series": "A", "rank": 1}, "points": [1.0], "weights": [[1, 2]]}, "weights[0]"),
        ({"algebra": {"series": "A", "rank": 1}, "colors": [1]}, "colors"),
        ({"algebra": {"series": "A", "rank": 1}, "tolerances": {"bogus": 1}}, "tolerances.bogus"),
        (
            {"algebra": {"series": "A", "rank": 2}, "automorphism": {"diagram_perm": [1, 0], "T": 2}, "lambda0": [1, 0]},
            "lambda0",
        ),
        (
            {"algebra": {"series": "A", "rank": 2}, "automorphism": {"diagram_perm": [1, 0], "T": 2}, "chi": [1, 1]},
            "chi",
        ),
    ],
)
def test_config_errors_name_the_field(raw, field):
    with pytest.raises(ConfigError, match=field.replace("[", r"\[").replace("]", r"\]")):
        parse_config_dict(raw)


def test_complex_values_in_config():
    cfg = parse_config_dict({"algebra": {"series": "A", "rank": 1}, "points": [[1.0, 0.5]]})
    assert cfg.z[0] == 1.0 + 0.5j
    assert cfg.digest() == parse_config_dict({"points": [[1.0, 0.5]], "algebra": {"rank": 1, "series": "A"}}).digest()
