import csv
import json

import numpy as np
import pytest

from hsic import metrics
from hsic.cli import main
from hsic.codec import decompress, quantize, read_bitstream, write_bitstream
from hsic.cube_io import CubeHeader, NormParams, read_cube, read_header
from hsic.siren import SirenConfig, init_siren

FAST = ["--iterations", "40", "--eval-every", "20"]


@pytest.fixture
def fixture_cube(tmp_path):
    path = tmp_path / "fx.raw"
    assert main(["fixtures", "gen", "--out", str(path), "--height", "12", "--width", "10",
                 "--bands", "4", "--format", "u16le", "--interleave", "bil"]) == 0
    return path


def test_fixtures_gen_writes_sidecar(fixture_cube):
    h = read_header(str(fixture_cube) + ".json")
    assert h == CubeHeader(12, 10, 4, "BIL", "u16le")
    cube = read_cube(fixture_cube, h)
    assert cube.samples.max() > 1000 and cube.samples.min() >= 0
    m = json.loads(open(str(fixture_cube) + ".manifest.json").read())
    assert m["command"] == "fixtures" and m["argv"][0] == "fixtures"


def test_compress_decompress_eval(tmp_path, fixture_cube, capsys):
    out = tmp_path / "m.hsic"
    assert main(["compress", str(fixture_cube), "--out", str(out), "--depth", "2", "--width", "8",
                 "--bits", "16", *FAST]) == 0
    line = capsys.readouterr().out.strip().splitlines()[-1]
    fields = dict(kv.split("=") for kv in line.split())
    cm = read_bitstream(out)
    assert cm.bits == 16 and (cm.height, cm.width, cm.bands) == (12, 10, 4)
    assert float(fields["bpppb"]) == out.stat().st_size * 8 / (12 * 10 * 4)
    assert len(metrics.read_rd_csv(str(out) + ".trace.csv")) == 3
    manifest = json.loads(open(str(out) + ".manifest.json").read())
    assert manifest["settings"]["config"]["hidden_width"] == 8
    assert manifest["settings"]["train"]["iterations"] == 40

    rec = tmp_path / "rec.raw"
    assert main(["decompress", str(out), "--out", str(rec), "--format", "u16le",
                 "--interleave", "BIL"]) == 0
    assert read_header(str(rec) + ".json") == CubeHeader(12, 10, 4, "BIL", "u16le")
    capsys.readouterr()
    assert main(["eval", str(fixture_cube), str(rec)]) == 0
    res = dict(kv.split("=") for kv in capsys.readouterr().out.split())
    assert float(res["psnr"]) > 0
    assert main(["eval", str(fixture_cube), str(fixture_cube)]) == 0
    assert "psnr=inf" in capsys.readouterr().out


@pytest.fixture
def model(tmp_path, fixture_cube):
    out = tmp_path / "m.hsic"
    assert main(["compress", str(fixture_cube), "--out", str(out), "--depth", "2", "--width", "6",
                 "--bits", "32", *FAST]) == 0
    return out


def test_decompress_scale(tmp_path, model):
    rec = tmp_path / "low.raw"
    assert main(["decompress", str(model), "--out", str(rec), "--scale", "3"]) == 0
    h = read_header(str(rec) + ".json")
    assert (h.height, h.width, h.bands) == (4, 4, 4)
    full = decompress(read_bitstream(model))
    assert np.array_equal(read_cube(rec, h).samples,
                          full.samples.astype(np.float32)[:, ::3, ::3])


def test_decompress_crop(tmp_path, model):
    full = decompress(read_bitstream(model)).samples.astype(np.float32)
    rec = tmp_path / "crop.raw"
    assert main(["decompress", str(model), "--out", str(rec), "--crop", "2", "3", "5", "4"]) == 0
    h = read_header(str(rec) + ".json")
    assert np.array_equal(read_cube(rec, h).samples, full[:, 2:7, 3:7])
    whole = tmp_path / "whole.raw"
    assert main(["decompress", str(model), "--out", str(whole), "--crop", "0", "0", "12", "10"]) == 0
    assert np.array_equal(read_cube(whole, read_header(str(whole) + ".json")).samples, full)


def test_decompress_bad_crop(tmp_path, model):
    assert main(["decompress", str(model), "--out", str(tmp_path / "x"), "--crop", "10", "0", "5", "5"]) == 5
    assert main(["decompress", str(model), "--out", str(tmp_path / "x"), "--scale", "0"]) == 5


def test_search_command(tmp_path, fixture_cube, capsys):
    out = tmp_path / "search.csv"
    assert main(["search", str(fixture_cube), "--out", str(out), "--target-bpppb", "4",
                 "--depths", "2", "3", "--min-width", "1", "--probe-iters", "10", "--lrs", "2e-4", "1e-3"]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4
    assert capsys.readouterr().out.startswith("best d=")


def test_compress_with_budget(tmp_path, fixture_cube):
    out = tmp_path / "b.hsic"
    assert main(["compress", str(fixture_cube), "--out", str(out), "--target-bpppb", "4",
                 "--depths", "2", "--min-width", "1", "--probe-iters", "10", *FAST]) == 0
    cm = read_bitstream(out)
    assert cm.param_count * 16 <= 4 * 12 * 10 * 4
    assert (tmp_path / "b.hsic.search.csv").exists()


def test_rd_sweep_command(tmp_path, fixture_cube):
    out = tmp_path / "rd.csv"
    save = tmp_path / "models"
    assert main(["rd-sweep", str(fixture_cube), "--out", str(out), "--targets", "8", "4",
                 "--bits", "32", "16", "--depths", "2", "--min-width", "1", "--probe-iters", "10",
                 "--save-dir", str(save), *FAST]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [(r["bits"], r["target_bpppb"]) for r in rows] == [
        ("16", "4.0"), ("16", "8.0"), ("32", "4.0"), ("32", "8.0")]
    assert all(r["status"] == "ok" for r in rows)
    assert sorted(p.name for p in save.iterdir()) == [
        "b16_t4.hsic", "b16_t8.hsic", "b32_t4.hsic", "b32_t8.hsic"]
    for r in rows:
        size = (save / f"b{r['bits']}_t{float(r['target_bpppb']):g}.hsic").stat().st_size * 8
        assert float(r["file_bpppb"]) == size / (12 * 10 * 4)


def test_rd_sweep_isolates_failed_rows(tmp_path, fixture_cube):
    out = tmp_path / "rd.csv"
    # 0.01 bpppb cannot hold any network on this cube
    assert main(["rd-sweep", str(fixture_cube), "--out", str(out), "--targets", "0.01", "8",
                 "--depths", "2", "--min-width", "1", "--probe-iters", "5", *FAST]) == 0
    rows = list(csv.DictReader(out.open()))
    assert rows[0]["status"].startswith("failed") and rows[1]["status"] == "ok"


def test_replay_is_byte_identical(tmp_path, fixture_cube):
    out = tmp_path / "m.hsic"
    args = ["compress", str(fixture_cube), "--out", str(out), "--depth", "2", "--width", "6", *FAST]
    assert main(args) == 0
    again = tmp_path / "again.hsic"
    assert main(["replay", str(out) + ".manifest.json", "--out", str(again)]) == 0
    assert again.read_bytes() == out.read_bytes()


def test_exit_codes(tmp_path, fixture_cube):
    assert main([]) == 2
    assert main(["compress", str(fixture_cube), "--out", "x", "--depth", "2"]) == 2
    assert main(["decompress", str(tmp_path / "missing.hsic"), "--out", "x"]) == 3
    bad = tmp_path / "bad.hsic"
    bad.write_bytes(b"NOPE" + b"\0" * 60)
    assert main(["decompress", str(bad), "--out", str(tmp_path / "x")]) == 4
    (tmp_path / "short.raw").write_bytes(b"\0" * 3)
    (tmp_path / "short.raw.json").write_text(json.dumps(CubeHeader(2, 2, 1, "BSQ", "u8").to_dict()))
    assert main(["eval", str(tmp_path / "short.raw"), str(tmp_path / "short.raw")]) == 4


def test_thread_cap_env(tmp_path, fixture_cube, monkeypatch):
    monkeypatch.setenv("HSIC_THREADS", "1")
    assert main(["eval", str(fixture_cube), str(fixture_cube)]) == 0
    monkeypatch.setenv("HSIC_THREADS", "zero")
    assert main(["eval", str(fixture_cube), str(fixture_cube)]) == 5


@pytest.fixture
def default_fixture(tmp_path):
    path = tmp_path / "fx32.raw"
    assert main(["fixtures", "gen", "--out", str(path)]) == 0
    return path


def test_compress_reports_file_rate(tmp_path, default_fixture, capsys):
    out = tmp_path / "m.hsic"
    assert main(["compress", str(default_fixture), "--out", str(out), "--depth", "3", "--width", "64",
                 "--bits", "16", *FAST]) == 0
    fields = dict(kv.split("=") for kv in capsys.readouterr().out.split()[-5:])
    cm = read_bitstream(out)
    assert float(fields["bpppb"]) == metrics.file_bpppb(cm.total_bits, 32, 32, 8)
    assert out.stat().st_size * 8 == cm.total_bits


def test_low_budget_compress_and_sweep(tmp_path, default_fixture):
    # at 0.2 bpppb and below no network of width >= 8 fits a 32x32x8 cube
    out = tmp_path / "low.hsic"
    assert main(["compress", str(default_fixture), "--out", str(out), "--target-bpppb", "0.2",
                 "--probe-iters", "10", *FAST]) == 5
    assert main(["compress", str(default_fixture), "--out", str(out), "--target-bpppb", "0.2",
                 "--min-width", "1", "--probe-iters", "10", *FAST]) == 0
    cm = read_bitstream(out)
    assert metrics.bpppb(cm.param_count, 16, 32, 32, 8) <= 0.2
    rd = tmp_path / "rd.csv"
    assert main(["rd-sweep", str(default_fixture), "--out", str(rd), "--targets", "0.05", "0.1", "0.2",
                 "--min-width", "1", "--probe-iters", "10", *FAST]) == 0
    rows = list(csv.DictReader(rd.open()))
    assert len(rows) == 3
    assert all(r["status"] == "ok" and float(r["bpppb"]) <= float(r["target_bpppb"]) for r in rows)


def test_scale_two_rounds_up(tmp_path, default_fixture):
    out = tmp_path / "m.hsic"
    assert main(["compress", str(default_fixture), "--out", str(out), "--depth", "1", "--width", "4",
                 "--iterations", "2"]) == 0
    # 32x32 divides evenly, so also decode an odd 5x7 frame
    odd = tmp_path / "odd.hsic"
    write_bitstream(quantize(init_siren(SirenConfig(1, 4, 2), 0), 16, CubeHeader(5, 7, 2),
                             NormParams(0, 1)), odd)
    for src, dims in ((out, (16, 16, 8)), (odd, (3, 4, 2))):
        rec = tmp_path / (src.stem + ".raw")
        assert main(["decompress", str(src), "--out", str(rec), "--scale", "2"]) == 0
        h = read_header(str(rec) + ".json")
        assert (h.height, h.width, h.bands) == dims
