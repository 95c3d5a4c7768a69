import json

from pseudodice.cli import main
from pseudodice.constdigits import load_digit_file
from pseudodice.bitseq import load_bit_file


def test_gen_digits_and_verify(tmp_path, capsys):
    out = tmp_path / "pi.txt"
    code = main(["gen-digits", "--constant", "pi", "--count", "2000", "--out", str(out), "--verify"])
    assert code == 0
    assert "verified" in capsys.readouterr().out
    stream = load_digit_file(out)
    assert stream.count == 2000
    assert stream.digits[:5].tolist() == [1, 4, 1, 5, 9]


def test_gen_digits_capacity_exit_code(tmp_path):
    code = main(["gen-digits", "--constant", "pi", "--count", "99999999", "--out", str(tmp_path / "x")])
    assert code == 3


def test_binarize_and_census_and_normality(tmp_path, capsys):
    digits = tmp_path / "e.txt"
    bits = tmp_path / "e.bits"
    assert main(["gen-digits", "--constant", "e", "--count", "5000", "--out", str(digits)]) == 0
    assert main(["binarize", "--in", str(digits), "--out", str(bits)]) == 0
    loaded = load_bit_file(bits)
    assert loaded.count == 5000

    census_csv = tmp_path / "census.csv"
    assert main(["census", "--in", str(bits), "--n", "5000", "--out", str(census_csv)]) == 0
    assert len(census_csv.read_text().strip().split("\n")) == 129

    norm_json = tmp_path / "norm.json"
    assert main(["normality", "--in", str(bits), "--n-grid", "1000,5000", "--out", str(norm_json)]) == 0
    data = json.loads(norm_json.read_text())
    assert [r["n"] for r in data["reports"]] == [1000, 5000]
    out = capsys.readouterr().out
    assert "statistic" in out


def test_binarize_format_error_exit_code(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("not a digit file\n")
    code = main(["binarize", "--in", str(bad), "--out", str(tmp_path / "x.bits")])
    assert code == 2


def test_census_bounds_exit_code(tmp_path):
    bits = tmp_path / "tiny.bits"
    assert main(["mt", "--seed", "1", "--count", "10", "--out", str(bits)]) == 0
    assert main(["census", "--in", str(bits), "--n", "100", "--out", str(tmp_path / "c.csv")]) == 3


def test_mt_subcommand(tmp_path):
    out = tmp_path / "mt.bits"
    assert main(["mt", "--seed", "5489", "--count", "64", "--out", str(out)]) == 0
    bits = load_bit_file(out)
    assert bits.count == 64
    # first real for seed 5489 is 0.8147... >= 0.5
    assert bits.bits[0] == 1


def test_experiment_subcommand(tmp_path):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("experiment=b\nseeds=1\ntrials=2\ntrain_count=1500\n")
    out = tmp_path / "out"
    assert main(["experiment", "b", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["experiment"] == "b"
    assert (out / "b_trials.csv").exists()
    assert (out / "runtime.json").exists()


def test_experiment_config_error_exit_code(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("experiment=b\nbogus_key=1\n")
    assert main(["experiment", "b", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_experiment_capacity_exit_code(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"experiment=c\nsources=pi\nn_grid=1000\ndigit_cache_dir={tmp_path}/void\n")
    assert main(["experiment", "c", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_experiment_without_config_uses_defaults(tmp_path):
    # experiment b defaults need no digit cache, but 9 seeds x 100 trials is
    # the full run; pass a config that shrinks it instead
    cfg = tmp_path / "b.cfg"
    cfg.write_text("seeds=2\ntrials=1\ntrain_count=1000\n")
    assert main(["experiment", "b", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
