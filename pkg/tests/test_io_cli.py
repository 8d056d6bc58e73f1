import csv
import json

import numpy as np
import pytest

from convpovm import io as fmt
from convpovm.cli import PRESETS, main
from convpovm.measures import Density, ProbabilityMeasure, ScalarMeasure, moment
from convpovm.operators import random_hermitian
from convpovm.sampling import sample
from convpovm.semispectral import smear, spectral_measure_of


def read_csv(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def summary(out):
    return json.loads((out / "summary.json").read_text())


def run_cli(tmp_path, command, *args, name=None):
    out = tmp_path / (name or command)
    code = main([command, "--out", str(out), *args])
    return code, out


# ---------------------------------------------------------------- formats


def test_measure_roundtrip():
    mu = ScalarMeasure([-1.0, 0.5], [1 + 2j, -0.25], Density(-2.0, 0.5, [0.1, 0.2j, 0.3]))
    back = fmt.measure_from_json(json.loads(fmt.dumps(fmt.measure_to_json(mu))))
    np.testing.assert_array_equal(back.locations, mu.locations)
    np.testing.assert_array_equal(back.weights, mu.weights)
    np.testing.assert_array_equal(back.density.values, mu.density.values)
    assert back.density.origin == -2.0 and back.density.step == 0.5


def test_probability_measure_roundtrip():
    mu = ProbabilityMeasure.from_atoms([0.0, 1.0], [0.25, 0.75])
    back = fmt.measure_from_json(fmt.measure_to_json(mu), probability=True)
    assert isinstance(back, ProbabilityMeasure)
    assert back.atoms == mu.atoms


def test_operator_roundtrip(rng):
    a = random_hermitian(5, rng)
    doc = fmt.operator_to_json(a)
    assert doc["dim"] == 5 and len(doc["entries"][0][0]) == 2
    np.testing.assert_array_equal(fmt.operator_from_json(doc), a)


def test_operator_dim_mismatch():
    with pytest.raises(ValueError):
        fmt.operator_from_json({"dim": 3, "entries": [[[1, 0]]]})


def test_povm_roundtrip(rng):
    povm = smear(ProbabilityMeasure.from_atoms([-0.5, 0.5], [0.5, 0.5]),
                 spectral_measure_of(random_hermitian(3, rng)), [-1.0, 0.0, 1.0])
    back = fmt.povm_from_json(json.loads(fmt.dumps(fmt.povm_to_json(povm))))
    np.testing.assert_array_equal(back.effects, povm.effects)
    np.testing.assert_array_equal(back.reps, povm.reps)


def test_moment_report_csv_columns():
    rep = moment(ScalarMeasure.point(2.0), 1, [1.0, 3.0, 5.0])
    rows = list(csv.reader(fmt.moment_report_csv(rep).splitlines()))
    assert rows[0] == ["R", "re", "im", "abs_partial", "verdict"]
    assert rows[3] == ["5.0", "2.0", "0.0", "2.0", "converged"]


def test_sample_csv_and_metadata():
    povm = smear(ProbabilityMeasure.point(0.0), spectral_measure_of(np.diag([0.0, 1.0])), [0.5])
    s = sample(povm, np.eye(2) / 2, 4, seed=5)
    text = fmt.sample_csv(s)
    assert text.splitlines()[0] == "index,outcome"
    assert len(text.splitlines()) == 5
    meta = fmt.sample_metadata(s)
    assert meta["seed"] == 5 and meta["n"] == 4 and meta["generator"]


# ---------------------------------------------------------------- command line


def test_convolve_point_mass_files(tmp_path):
    for name, x in (("a.json", 1.0), ("b.json", 2.5)):
        fmt.write_json(tmp_path / name, fmt.measure_to_json(ScalarMeasure.point(x)))
    cfg = tmp_path / "run.yaml"
    cfg.write_text("mu: a.json\nnu: b.json\nkmax: 1\n")
    code, out = run_cli(tmp_path, "convolve", "--config", str(cfg))
    assert code == 0
    doc = fmt.read_json(out / "convolution.json")
    assert doc["atoms"] == [[3.5, 1.0, 0.0]]
    assert doc["provenance"]["config_sha256"]


def test_convolve_example1_preset(tmp_path):
    code, out = run_cli(tmp_path, "convolve", "--preset", "example1")
    assert code == 0
    rows = read_csv(out / "example1.csv")
    evens = [r for r in rows if int(r["n"]) % 2 == 0]
    assert len(evens) == 41
    assert all(float(r["slice_integral"]) == pytest.approx(1.0, abs=1e-12) for r in evens)
    assert all(abs(complex(float(r["re"]), float(r["im"]))) <= 1e-12 for r in evens)


def test_convolve_gaussian_preset(tmp_path):
    code, out = run_cli(tmp_path, "convolve", "--preset", "gaussian")
    assert code == 0
    rows = read_csv(out / "moments_summary.csv")
    assert float(rows[2]["re"]) == pytest.approx(3.0, abs=1e-3)
    assert rows[2]["verdict"] == "converged"


def test_moments_heavy_tail_preset(tmp_path):
    code, out = run_cli(tmp_path, "moments", "--preset", "heavy-tail")
    assert code == 0
    verdicts = [r["verdict"] for r in read_csv(out / "moments_summary.csv")]
    assert verdicts == ["converged", "converged", "diverging"]
    assert read_csv(out / "moments_k2.csv")[-1]["verdict"] == "diverging"


def test_example1_command(tmp_path):
    code, out = run_cli(tmp_path, "example1", "--preset", "default")
    assert code == 0
    assert all(summary(out)["checks"].values())


def test_smear_presets(tmp_path):
    code, out = run_cli(tmp_path, "smear", "--preset", "identity", name="identity")
    assert code == 0
    dists = [float(r["max_entry_distance"]) for r in read_csv(out / "moment_comparison.csv")]
    assert max(dists) <= 1e-10
    code, out = run_cli(tmp_path, "smear", "--preset", "random", name="random")
    assert code == 0
    assert all(float(r["max_entry_distance"]) < 1e-8
               for r in read_csv(out / "moment_comparison.csv"))


def test_smear_heavy_tail_refuses_second_moment(tmp_path):
    code, out = run_cli(tmp_path, "smear", "--preset", "heavy-tail")
    assert code == 0
    rows = read_csv(out / "moment_comparison.csv")
    assert rows[2]["status"] == "refused"
    report = fmt.read_json(out / "divergence_k2.json")
    assert report["verdict"] == "diverging"
    assert np.all(np.diff(report["partial_abs"]) > 0)


@pytest.mark.slow
@pytest.mark.filterwarnings("ignore::convpovm.phasespace.TruncationWarning")
def test_phasespace_vacuum_preset(tmp_path):
    code, out = run_cli(tmp_path, "phasespace", "--preset", "vacuum")
    assert code == 0
    table = read_csv(out / "moment_table.csv")
    k0 = [r for r in table if r["k"] == "0"]
    assert all(float(r["max_entry_distance"]) <= 1e-6 for r in k0)
    marg = read_csv(out / "povm" / "marginals.csv")
    reps = np.array([float(r["rep"]) for r in marg])
    mass = np.array([float(r["mass_x"]) for r in marg])
    assert np.sum(reps ** 2 * mass) == pytest.approx(1.0, abs=1e-2)
    conv = read_csv(out / "convolution_check_summary.csv")
    d = [float(r["max_distance"]) for r in conv]
    assert d[0] >= d[1] >= d[2]
    assert (out / "povm" / "grid.json").is_file()


def test_sample_presets_and_determinism(tmp_path):
    code, out = run_cli(tmp_path, "sample", "--preset", "eigenstate", name="eig")
    assert code == 0
    outcomes = {r["outcome"] for r in read_csv(out / "samples.csv")}
    assert outcomes == {"0.0"}
    a = run_cli(tmp_path, "sample", "--preset", "vacuum-marginal", "--seed", "77", name="v1")
    b = run_cli(tmp_path, "sample", "--preset", "vacuum-marginal", "--seed", "77", name="v2")
    assert a[0] == b[0] == 0
    for name in ("samples.csv", "samples.json", "moment_comparison.csv", "summary.json"):
        assert (a[1] / name).read_bytes() == (b[1] / name).read_bytes()
    z = [abs(float(r["z"])) for r in read_csv(a[1] / "moment_comparison.csv")]
    assert max(z) < 5


def test_failing_check_exits_one(tmp_path):
    cfg = tmp_path / "strict.json"
    cfg.write_text(json.dumps({"z_max": 0.0}))
    code, out = run_cli(tmp_path, "sample", "--preset", "vacuum-marginal", "--config", str(cfg))
    assert code == 1
    assert summary(out)["ok"] is False


def test_config_errors_exit_two_with_json(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "convolve", "--config", str(tmp_path / "missing.yaml"))
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config"
    code, _ = run_cli(tmp_path, "smear", "--preset", "nope")
    assert code == 2
    assert "unknown preset" in json.loads(capsys.readouterr().err)["message"]
    cfg = tmp_path / "big.yaml"
    cfg.write_text("state: vacuum\nN: 1000\n")
    code, _ = run_cli(tmp_path, "phasespace", "--config", str(cfg))
    assert code == 2
    assert "N=1000" in json.loads(capsys.readouterr().err)["message"]


def test_presets_are_declared_for_every_command():
    assert set(PRESETS) == {"convolve", "moments", "example1", "smear", "phasespace", "sample"}
