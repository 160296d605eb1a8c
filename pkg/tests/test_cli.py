import csv
import json

import pytest
from gmpy2 import mpfr

from renormlab import cli
from renormlab.cli import (Config, ConfigError, cache_get, cache_key, cache_put,
                           cached, load_config, run_command)


@pytest.fixture
def cache(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv("RENORMLAB_CACHE", str(d))
    return d


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    code = run_command(args + ["--out", str(out)])
    return code, out


def test_windows_csv(cache, tmp_path):
    code, out = run(["windows", "--level", "1", "--cutoff", "4", "--format", "csv"],
                    tmp_path, "w.csv")
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["level", "period", "label", "c_minus", "c_plus", "c_star", "length"]
    assert len(rows) == 4
    assert sorted(r[1] for r in rows[1:]) == ["2", "3", "4"]
    # decimal strings at full precision
    assert all(len(r[3]) > 50 for r in rows[1:])


def test_cache_transparency(cache, tmp_path):
    args = ["windows", "--level", "1", "--cutoff", "3"]
    _, cold = run(args + ["--no-cache"], tmp_path, "cold")
    _, warm1 = run(args, tmp_path, "warm1")
    _, warm2 = run(args, tmp_path, "warm2")
    assert cold.read_bytes() == warm1.read_bytes() == warm2.read_bytes()
    assert list((cache / "windows").iterdir())


def test_deterministic_output(cache, tmp_path):
    args = ["orbit", "--c", "-1.4", "--n", "20"]
    _, a = run(args, tmp_path, "a")
    _, b = run(args, tmp_path, "b")
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert data[1]["x"].startswith("-1.4")
    assert all(isinstance(r["x"], str) for r in data)


def test_cycle_and_knead(cache, tmp_path):
    _, out = run(["cycle", "--c", "-1.1"], tmp_path)
    d = json.loads(out.read_text())
    assert d["cycle"]["period"] == 2
    assert abs(mpfr(d["cycle"]["multiplier"]) + mpfr("0.4")) < 1e-15
    _, out = run(["knead", "--c", "-1"], tmp_path)
    assert json.loads(out.read_text())["kneading"] == "LC"


def test_fixpoint_and_spectrum(cache, tmp_path):
    code, out = run(["fixpoint", "--word", "2"], tmp_path, "gstar.json")
    assert code == 0
    g = json.loads(out.read_text())
    assert g["N"] == 40 and mpfr(g["residual"]) < mpfr("1e-40")
    code, out = run(["spectrum", "--word", "2"], tmp_path, "spec.json")
    s = json.loads(out.read_text())
    assert s["expanding_count"] == 1
    assert abs(mpfr(s["top"]) - mpfr("4.66920160910299")) < 1e-6


def test_domain_error_exit_code(cache, tmp_path, capsys):
    code, _ = run(["essper", "--c", "-1.6"], tmp_path)
    assert code == 2
    assert "NotRenormalizable" in capsys.readouterr().err


def test_config_error_exit_code(cache, tmp_path):
    code, _ = run(["orbit", "--c", "-1", "--dps", "20"], tmp_path)
    assert code == 2


def test_internal_error_exit_code(cache, tmp_path, monkeypatch):
    def boom(a, cfg):
        raise RuntimeError("boom")
    monkeypatch.setattr(cli, "cmd_orbit", boom)
    code, _ = run(["orbit", "--c", "-1"], tmp_path)
    assert code == 1


def test_usage_error():
    with pytest.raises(SystemExit) as e:
        run_command(["nosuchcommand"])
    assert e.value.code == 2


def test_config_file_and_overrides(tmp_path, monkeypatch):
    monkeypatch.delenv("RENORMLAB_CACHE", raising=False)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"dps": 60, "kneading": 128, "cache_dir": "/x"}))
    cfg = load_config(str(p), {"kneading": 32})
    assert cfg.dps == 60 and cfg.kneading == 32 and cfg.cache_dir == "/x"
    monkeypatch.setenv("RENORMLAB_CACHE", "/y")
    assert load_config(str(p)).cache_dir == "/y"
    p.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ConfigError):
        load_config(str(p))
    with pytest.raises(ConfigError):
        Config(dps=20, order=40).validate()
    with pytest.raises(ConfigError):
        Config(return_budget=0).validate()


def test_cache_put_get(tmp_path):
    cfg = Config(cache_dir=str(tmp_path))
    key = cache_key("op", [1, "x"], cfg)
    cache_put(str(tmp_path), "ns", key, {"v": ["1.5"]})
    assert cache_get(str(tmp_path), "ns", key) == {"v": ["1.5"]}
    # D is part of the key
    assert cache_get(str(tmp_path), "ns", cache_key("op", [1, "x"], Config(dps=60))) is None


def test_cache_version_bump_misses(tmp_path, monkeypatch):
    cfg = Config(cache_dir=str(tmp_path))
    key = cache_key("op", [], cfg)
    cache_put(str(tmp_path), "ns", key, 1)
    monkeypatch.setattr(cli, "__version__", "999.0")
    assert cache_get(str(tmp_path), "ns", cache_key("op", [], cfg)) is None


def test_corrupt_entry_is_recomputed(tmp_path):
    cfg = Config(cache_dir=str(tmp_path))
    calls = []

    def compute():
        calls.append(1)
        return {"x": "1"}
    cached(cfg, "ns", ["a"], compute)
    path = next((tmp_path / "ns").iterdir())
    path.write_text("{not json")
    with pytest.warns(UserWarning):
        assert cached(cfg, "ns", ["a"], compute) == {"x": "1"}
    assert len(calls) == 2
    assert json.loads(path.read_text())["payload"] == {"x": "1"}
