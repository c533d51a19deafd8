import json

import numpy as np
import pytest

from stationary_ge import ProcessParams, simulate
from stationary_ge.cli import (
    EXIT_CONVERGENCE,
    EXIT_DATA,
    EXIT_OK,
    EXIT_USAGE,
    DataError,
    Transform,
    UsageError,
    ingest,
    main,
)


def write(tmp_path, text, name="data.txt"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_ingest_applies_affine_transform(tmp_path):
    path = write(tmp_path, "4642.32\n4230.02\n")
    s = ingest(path, transform=Transform(4200.0, 100.0))
    np.testing.assert_allclose(s.values, [4.4232, 0.3002], rtol=1e-12)
    np.testing.assert_allclose(s.raw(), [4642.32, 4230.02], rtol=1e-14)


def test_ingest_rejects_nonpositive_with_line_number(tmp_path):
    path = write(tmp_path, "4642.32\n\n4100\n")
    with pytest.raises(DataError) as info:
        ingest(path, transform=Transform(4200.0, 100.0))
    assert info.value.line == 3
    assert "line 3" in str(info.value)


def test_ingest_columns_delimiters_and_header(tmp_path):
    path = write(tmp_path, "date,price\n# comment\n2020-01-01, 5.5\n2020-01-02 6.5\n")
    s = ingest(path, column=1, skip_header=1)
    np.testing.assert_array_equal(s.values, [5.5, 6.5])


@pytest.mark.parametrize(
    "text,line",
    [("1.0\nabc\n", 2), ("1.0\n2.0\nnan\n", 3), ("1 2\n3\n", 2)],
)
def test_ingest_parse_errors(tmp_path, text, line):
    with pytest.raises(DataError) as info:
        ingest(write(tmp_path, text), column=1 if text.startswith("1 2") else 0)
    assert info.value.line == line


def test_ingest_empty_and_missing(tmp_path):
    with pytest.raises(DataError):
        ingest(write(tmp_path, "# only a comment\n\n"))
    with pytest.raises(DataError):
        ingest(str(tmp_path / "missing.txt"))


def test_transform_validates():
    with pytest.raises(UsageError):
        Transform(0.0, 0.0)
    with pytest.raises(UsageError):
        Transform(float("inf"), 1.0)


def test_simulate_round_trip_is_bit_exact(tmp_path):
    out = str(tmp_path / "sim.txt")
    assert main(["simulate", "-n", "100", "--alpha0", "2", "--alpha1", "2", "--seed", "7",
                 "--out", out]) == EXIT_OK
    expect = simulate(100, ProcessParams(2.0, 2.0, 1.0), seed=7).values
    np.testing.assert_array_equal(ingest(out).values, expect)


def test_simulate_then_fit_pipeline(tmp_path):
    sim = str(tmp_path / "sim.txt")
    rep = str(tmp_path / "rep.json")
    grid = str(tmp_path / "grid.csv")
    main(["simulate", "-n", "100", "--alpha0", "2", "--alpha1", "2", "--seed", "7", "--out", sim])
    code = main(["fit", sim, "--model", "equal", "--boot", "100", "--seed", "3",
                 "--report-out", rep, "--grid-out", grid])
    assert code == EXIT_OK
    d = json.load(open(rep))
    for key in ["model", "alpha0", "alpha1", "lambda", "loglik", "ci", "B", "level", "seed"]:
        assert key in d
    assert 1.2 < d["alpha0"] < 3.5 and 0.6 < d["lambda"] < 1.6
    assert d["B"] == 100 and d["seed"] == 3
    lines = open(grid).read().splitlines()
    assert lines[0] == "lambda,loglik"
    table = np.loadtxt(grid, delimiter=",", skiprows=1)
    best = table[np.argmax(table[:, 1]), 0]
    step = np.log(table[1, 0] / table[0, 0])
    assert abs(np.log(best / d["lambda"])) <= step


def test_fit_unequal_writes_contour(tmp_path):
    sim = str(tmp_path / "sim.txt")
    grid = str(tmp_path / "grid.csv")
    rep = str(tmp_path / "rep.json")
    main(["simulate", "-n", "80", "--alpha0", "2", "--alpha1", "3", "--seed", "1", "--out", sim])
    assert main(["fit", sim, "--model", "unequal", "--grid-out", grid, "--report-out", rep]) == 0
    assert open(grid).readline().strip() == "gamma,lambda,loglik"
    table = np.loadtxt(grid, delimiter=",", skiprows=1)
    assert table.shape[1] == 3
    assert json.load(open(rep))["model"] == "unequal-shapes"


def test_reports_are_deterministic(tmp_path):
    sim = str(tmp_path / "sim.txt")
    main(["simulate", "-n", "60", "--alpha0", "2", "--alpha1", "2", "--seed", "2", "--out", sim])
    outs = []
    for k in range(2):
        rep = str(tmp_path / f"rep{k}.json")
        main(["analyze", sim, "--boot", "100", "--seed", "5", "--sims", "1000",
              "--report-out", rep])
        outs.append(open(rep).read())
    assert outs[0] == outs[1]


def test_analyze_report(tmp_path):
    sim = str(tmp_path / "sim.txt")
    rep = str(tmp_path / "rep.json")
    main(["simulate", "-n", "100", "--alpha0", "2", "--alpha1", "2", "--seed", "7", "--out", sim])
    assert main(["analyze", sim, "--sims", "1000", "--seed", "1", "--report-out", rep]) == 0
    d = json.load(open(rep))
    assert d["unequal"]["loglik"] >= d["equal"]["loglik"] - 1e-8
    assert d["loglik_comparison"]["difference"] >= -1e-8
    assert "verdicts" in d["gof"]


def test_shift_and_divide_preprocessing(tmp_path):
    raw = 4200.0 + 100.0 * simulate(40, ProcessParams(2.0, 2.0), seed=3).values
    path = write(tmp_path, "price\n" + "\n".join(f"{v:.2f}" for v in raw) + "\n")
    rep = str(tmp_path / "rep.json")
    code = main(["gof", path, "--skip-header", "1", "--shift", "4200", "--divisor", "100",
                 "--sims", "1000", "--seed", "2", "--report-out", rep])
    assert code == EXIT_OK
    d = json.load(open(rep))
    assert d["transform"] == {"shift": 4200.0, "divisor": 100.0}


def test_exit_codes(tmp_path, capsys):
    good = write(tmp_path, "\n".join(str(v) for v in np.linspace(0.5, 3.0, 30)))
    assert main([]) == EXIT_USAGE
    assert main(["fit", good, "--model", "weird"]) == EXIT_USAGE
    assert main(["fit", good, "--level", "2"]) == EXIT_USAGE
    assert main(["fit", good, "--boot", "5"]) == EXIT_USAGE
    assert main(["simulate", "-n", "0", "--alpha0", "1", "--alpha1", "1"]) == EXIT_USAGE
    assert main(["fit", write(tmp_path, "1\n-2\n", "bad.txt")]) == EXIT_DATA
    assert main(["fit", write(tmp_path, "1\n1\n1\n1\n", "flat.txt")]) == EXIT_DATA
    assert main(["fit", str(tmp_path / "nope.txt")]) == EXIT_DATA
    err = capsys.readouterr().err
    assert "usage error" in err and "data error" in err


def test_convergence_failure_exit_code(tmp_path, monkeypatch, capsys):
    from stationary_ge import cli
    from stationary_ge._validation import ConvergenceError

    def stuck(*args, **kwargs):
        raise ConvergenceError("profile maximum on the bracket edge")

    monkeypatch.setattr(cli, "fit_case1", stuck)
    good = write(tmp_path, "\n".join(str(v) for v in np.linspace(0.5, 3.0, 30)))
    assert main(["fit", good]) == EXIT_CONVERGENCE
    assert "convergence failure" in capsys.readouterr().err
