"""Drive bbqlab through main(): alpha grids, exit codes, CSV tables with
manifest sidecars, JSON verification reports and config merging. Runs in a
scratch directory; a few seconds."""
import csv
import json
import os
import sys
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(os.path.dirname(HERE), "src"))
sys.path.insert(0, HERE)

from checks import run_checks  # noqa: E402
from cli.commands import EXIT_OK, EXIT_USAGE, main, parse_alpha_grid  # noqa: E402
from cli.manifest import format_value, sidecar_path  # noqa: E402
from cli.settings import deep_merge, get_default_config, load_config  # noqa: E402
from coding.errors import ConfigError, UsageError  # noqa: E402


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


# 1. Inclusive alpha grids.
def test_alpha_grid():
    """1:3:0.1 gives 21 points from 1 to 3; 1:8:0.1 gives 71"""
    grid = parse_alpha_grid("1:3:0.1")
    assert len(grid) == 21 and grid[0] == 1.0 and grid[-1] == 3.0
    assert len(parse_alpha_grid("1:8:0.1")) == 71
    assert parse_alpha_grid("2:2:1") == [2.0]
    for bad in ("1:3", "1:x:0.1", "1:3:0", "3:1:0.5"):
        try:
            parse_alpha_grid(bad)
        except UsageError:
            continue
        raise AssertionError(f"{bad!r} accepted")


# 2. Bad flags and values exit 1 without writing anything.
def test_usage_errors_exit_one():
    """no subcommand, --samples 0, alpha < 1, unknown suite, unknown case: exit 1"""
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "x.csv")
        for argv in ([],
                     ["gamma", "--alpha", "4", "--samples", "0", "--out", out],
                     ["snrloss", "--alpha", "0.5", "--out", out],
                     ["snrloss", "--alphas", "1:3", "--out", out],
                     ["verify", "nosuch", "--out", out],
                     ["simulate", "--case", "z", "--out", out],
                     ["simulate", "--case", "custom", "--rho", "0.5", "--out", out]):
            assert main(argv) == EXIT_USAGE, argv
        assert not os.listdir(tmp)


# 3. snrloss writes a headed CSV and its manifest sidecar.
def test_snrloss_table():
    """two_baseband alpha 8 -> 0.1336 dB; one_baseband alpha 1 -> 3.0103 dB"""
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "loss.csv")
        assert main(["snrloss", "--alpha", "8", "--alpha", "4",
                     "--scenario", "two_baseband", "--out", out]) == EXIT_OK
        rows = read_csv(out)
        assert rows[0] == ["alpha", "snr_loss_db"]
        assert [float(r[0]) for r in rows[1:]] == [8.0, 4.0]
        assert abs(float(rows[1][1]) - 0.1336) < 5e-4
        with open(sidecar_path(out), encoding="utf-8") as fh:
            manifest = json.load(fh)
        assert manifest["command"] == "snrloss" and manifest["seeds"] == [0]
        assert manifest["parameters"]["scenario"] == "two_baseband"

        main(["snrloss", "--alpha", "1", "--scenario", "one_baseband", "--out", out])
        assert abs(float(read_csv(out)[1][1]) - 3.0103) < 5e-5


# 4. Gamma rows, JSON output, and the estimate cache across runs.
def test_gamma_json_and_cache():
    """gamma --format json carries manifest and rows; a cached rerun is identical"""
    with tempfile.TemporaryDirectory() as tmp:
        cache = os.path.join(tmp, "gammas.json")
        outs = [os.path.join(tmp, f"g{i}.json") for i in (1, 2)]
        for out in outs:
            assert main(["gamma", "--alpha", "4", "--samples", "5000", "--m-range", "100",
                         "--cache", cache, "--format", "json", "--out", out]) == EXIT_OK
        reports = []
        for out in outs:
            with open(out, encoding="utf-8") as fh:
                reports.append(json.load(fh))
        assert reports[0]["rows"] == reports[1]["rows"]
        row = reports[0]["rows"][0]
        assert set(row) == {"alpha", "gamma1", "gamma1_se", "gamma12", "gamma12_se",
                            "jittered", "degenerate_fraction"}
        assert abs(row["gamma1"] - 1.0) < 0.15 and abs(row["gamma12"]) < 0.1
        assert row["jittered"] is False and row["degenerate_fraction"] < 0.01
        assert reports[0]["manifest"]["parameters"]["samples"] == 5000
        assert os.path.exists(cache)


# 5. A lattice-degenerate transform is flagged in the rows themselves.
def test_gamma_jitter_flag_in_rows():
    """identity transform at alpha 2: CSV rows say jittered, with the degenerate fraction"""
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "gamma.csv")
        assert main(["gamma", "--alpha", "2", "--alpha", "1.3", "--transform", "identity",
                     "--block-len", "2", "--samples", "5000", "--m-range", "100",
                     "--out", out]) == EXIT_OK
        rows = read_csv(out)
        assert rows[0][-2:] == ["jittered", "degenerate_fraction"]
        at_two = dict(zip(rows[0], rows[1]))
        assert at_two["jittered"] == "True" and float(at_two["degenerate_fraction"]) > 0.1


# 6. Without --seed each command takes the seed of its own config section.
def test_seed_from_config():
    """simulation.seed 7 and verify.seed 3 reach the runs; --seed overrides both"""
    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "seeds.yaml")
        with open(cfg, "w", encoding="utf-8") as fh:
            fh.write("simulation:\n  seed: 7\nverify:\n  seed: 3\n  resolution: 64\n"
                     "logging:\n  level: WARNING\n")
        stem = os.path.join(tmp, "rd")
        flags = ["simulate", "--case", "custom", "--rho", "0.5", "--block-len", "4",
                 "--blocks", "300", "--q2-multipliers", "8", "--config", cfg, "--out", stem]

        def seeds(path):
            with open(sidecar_path(path), encoding="utf-8") as fh:
                return json.load(fh)["seeds"]

        assert main(flags) == EXIT_OK
        assert seeds(f"{stem}_gaps.csv") == [7, 0]
        curve = read_csv(f"{stem}_coarse.csv")
        assert main(flags + ["--seed", "7"]) == EXIT_OK
        assert seeds(f"{stem}_gaps.csv") == [7] and read_csv(f"{stem}_coarse.csv") == curve
        assert main(flags + ["--seed", "11"]) == EXIT_OK
        assert seeds(f"{stem}_gaps.csv") == [11] and read_csv(f"{stem}_coarse.csv") != curve

        out = os.path.join(tmp, "verify.json")
        assert main(["verify", "lemma2", "--config", cfg, "--out", out]) == EXIT_OK
        with open(out, encoding="utf-8") as fh:
            assert json.load(fh)["manifest"]["seeds"] == [3]


# 7. simulate writes both RD curves and the gap table, each with a manifest.
def test_simulate_outputs():
    """custom case: <stem>_coarse/_negligible/_gaps CSVs, gaps predicted at alpha 8 and 4"""
    with tempfile.TemporaryDirectory() as tmp:
        stem = os.path.join(tmp, "rd")
        assert main(["simulate", "--case", "custom", "--rho", "0.5", "--block-len", "4",
                     "--blocks", "500", "--q2-multipliers", "8,4", "--out", stem]) == EXIT_OK
        for part in ("coarse", "negligible", "gaps"):
            path = f"{stem}_{part}.csv"
            assert os.path.exists(path) and os.path.exists(sidecar_path(path)), part
        curve = read_csv(f"{stem}_coarse.csv")
        assert curve[0] == ["bits_per_sample", "mse", "snr_db", "q2"] and len(curve) == 3
        gaps = read_csv(f"{stem}_gaps.csv")
        assert gaps[0] == ["q2", "alpha", "gap_db", "theory_db"]
        assert [round(float(r[1]), 9) for r in gaps[1:]] == [8.0, 4.0]
        assert abs(float(gaps[1][3]) - 0.1336) < 5e-4


# 8. Bitdepth table.
def test_bitdepth_table():
    """ranges 300 and 900 -> 8.2 and 9.8 effective bits"""
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "bits.csv")
        assert main(["bitdepth", "--ranges", "300,900", "--out", out]) == EXIT_OK
        rows = read_csv(out)
        assert rows[0] == ["value_range", "effective_bits", "q1"]
        assert round(float(rows[1][1]), 1) == 8.2 and round(float(rows[2][1]), 1) == 9.8
        assert abs(float(rows[1][2]) - 65535.0 / 300.0) < 1e-9


# 9. A passing suite exits 0 with a JSON report; --config is merged in.
def test_verify_report():
    """verify lemma2 with a coarse-grid config: exit 0, manifest and checks"""
    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "fast.yaml")
        with open(cfg, "w", encoding="utf-8") as fh:
            fh.write("verify:\n  resolution: 64\nlogging:\n  level: WARNING\n")
        out = os.path.join(tmp, "verify.json")
        assert main(["verify", "lemma2", "--config", cfg, "--out", out]) == EXIT_OK
        with open(out, encoding="utf-8") as fh:
            report = json.load(fh)
        assert set(report) == {"manifest", "checks"}
        assert report["manifest"]["parameters"]["suite_parameters"]["resolution"] == 64
        assert report["checks"] and all(c["passed"] for c in report["checks"])
        assert all(c["name"].startswith("lemma2: ") for c in report["checks"])


# 10. Configuration merging and failure modes.
def test_config_loading():
    """user files override key by key; a missing or non-mapping file is a ConfigError"""
    merged = deep_merge({"a": {"x": 1, "y": 2}, "b": 3}, {"a": {"y": 5}, "c": 4})
    assert merged == {"a": {"x": 1, "y": 5}, "b": 3, "c": 4}
    defaults = load_config()
    assert defaults["simulation"]["cases"]["b"]["block_len"] == 256
    assert set(defaults) == set(get_default_config())
    with tempfile.TemporaryDirectory() as tmp:
        for name, text in (("missing.yaml", None), ("list.yaml", "- 1\n- 2\n"),
                           ("broken.yaml", "a: [1, 2\n")):
            path = os.path.join(tmp, name)
            if text is not None:
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(text)
            try:
                load_config(path)
            except ConfigError:
                continue
            raise AssertionError(f"{name} accepted")


# 11. CSV cells are locale-free with 12 significant digits.
def test_cell_formatting():
    """floats keep 12 digits, NaN prints as nan, ints stay ints"""
    assert format_value(1.0 / 3.0) == "0.333333333333"
    assert format_value(float("nan")) == "nan"
    assert format_value(7) == "7"


if __name__ == "__main__":
    run_checks(globals())
