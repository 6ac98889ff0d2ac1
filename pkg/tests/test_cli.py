import json
import math

import numpy as np
import pytest

from resonantlab.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def lam_file(tmp_path):
    d = tmp_path / "lat"
    assert run("lattice", "--model", "beam", "--box", "4",
               "--out-dir", d) == 0
    return d / "lambda.json"


def beating_amps():
    al, be = math.sqrt(0.475), math.sqrt(0.025)
    return json.dumps([[al, 0.0], [be, 0.0], [al, 0.0], [be, 0.0]])


# ---------------------------------------------------------------- lattice

def test_lattice_smoke(tmp_path):
    d = tmp_path / "out"
    assert run("lattice", "--model", "beam", "--box", "4", "--out-dir", d) == 0
    payload = json.loads((d / "lambda.json").read_text())
    assert payload["lambda"]["certificate"]
    assert "config_hash" in payload["metadata"]
    modes = payload["lambda"]["tuples"][0]["modes"]
    # smallest-first selection: a 1x2 rectangle of the odd lattice
    assert sum(a * a + b * b for a, b in modes) == 12


def test_lattice_not_enough_tuples(tmp_path):
    assert run("lattice", "--model", "beam", "--box", "2", "--tuples", "99",
               "--out-dir", tmp_path) == 2


def test_config_file_defaults_and_strictness(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"box": 4}))
    # box comes from the config file when the flag is omitted
    d = tmp_path / "out"
    assert run("lattice", "--model", "beam", "--config", cfg,
               "--out-dir", d) == 0
    # an explicit flag wins over the config value
    d2 = tmp_path / "out2"
    cfg2 = tmp_path / "cfg2.json"
    cfg2.write_text(json.dumps({"box": 2, "tuples": 99}))
    assert run("lattice", "--model", "beam", "--box", "4", "--tuples", "1",
               "--config", cfg2, "--out-dir", d2) == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bxo": 4}))
    assert run("lattice", "--model", "beam", "--box", "4", "--config", bad,
               "--out-dir", tmp_path) == 2


def test_lattice_requires_box(tmp_path):
    assert run("lattice", "--model", "beam", "--out-dir", tmp_path) == 2


# ---------------------------------------------------------------- reduced

def test_reduced_smoke_with_poincare(tmp_path):
    d = tmp_path / "red"
    assert run("reduced", "--n", "1", "--eps", "0", "--t-end", "30",
               "--samples", "300", "--psi0", "[0.2]", "--k0", "[0.5]",
               "--poincare-crossings", "3", "--poincare-angle", "0.0",
               "--out-dir", d) == 0
    header = (d / "reduced.csv").read_text().splitlines()[0]
    assert header == "t,psi1,K1,H"
    pts = np.loadtxt(d / "poincare.csv", delimiter=",", skiprows=1, ndmin=2)
    assert len(pts) == 3
    meta = json.loads((d / "reduced.meta.json").read_text())
    assert meta["energy_drift"] < 1e-8


# ---------------------------------------------------------------- resonant

def test_resonant_determinism(tmp_path, lam_file):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert run("resonant", "--lambda", lam_file, "--t-end", "20",
                   "--samples", "200", "--seed", "7", "--out-dir", d) == 0
        outs.append((d / "resonant.csv").read_bytes())
    assert outs[0] == outs[1]
    d = tmp_path / "c"
    assert run("resonant", "--lambda", lam_file, "--t-end", "20",
               "--samples", "200", "--seed", "8", "--out-dir", d) == 0
    assert (d / "resonant.csv").read_bytes() != outs[0]


def test_missing_lambda_file(tmp_path):
    assert run("resonant", "--lambda", tmp_path / "nope.json",
               "--out-dir", tmp_path) == 2


# ---------------------------------------------------------------- pde

def test_pde_smoke_and_determinism(tmp_path, lam_file):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert run("pde", "--lambda", lam_file, "--delta", "0.05",
                   "--t-end", "2", "--sample-every", "100", "--seed", "5",
                   "--out-dir", d) == 0
        outs.append((d / "pde.csv").read_bytes())
    assert outs[0] == outs[1]
    header = (tmp_path / "a" / "pde.csv").read_text().splitlines()[0].split(",")
    assert header[:2] == ["t", "tau"]
    assert "energy" in header and "odd_violation" in header
    meta = json.loads((tmp_path / "a" / "pde.meta.json").read_text())
    assert meta["J"] == 8
    assert meta["energy_drift"] < 1e-6


def test_pde_tau_end(tmp_path, lam_file):
    d = tmp_path / "tau"
    assert run("pde", "--lambda", lam_file, "--delta", "0.1",
               "--tau-end", "0.01", "--sample-every", "1000",
               "--out-dir", d) == 0
    data = np.loadtxt(d / "pde.csv", delimiter=",", skiprows=1, ndmin=2)
    assert data[-1, 1] >= 0.01  # reached the normalized horizon


# ---------------------------------------------------------------- analyze

def write_sin2_csv(path, T=3.0, n=2400, t_max=24.0):
    t = np.linspace(0, t_max, n)
    y = np.sin(np.pi * t / T) ** 2
    with open(path, "w") as fh:
        fh.write("t,K1,K2\n")
        for ti, yi in zip(t, y):
            fh.write(f"{float(ti)!r},{float(yi)!r},{float(1 - yi)!r}\n")


def test_analyze_tasks(tmp_path):
    csv = tmp_path / "series.csv"
    write_sin2_csv(csv)
    for task, extra in [("q", []), ("crossings", []),
                        ("bumps", ["--eps", "0.05"]),
                        ("symbols", ["--period", "2.0", "--delta", "1.0"]),
                        ("itinerary", ["--columns", "K1,K2", "--eps", "0.1"])]:
        assert run("analyze", "--input", csv, "--task", task,
                   "--column", "K1", "--out-dir", tmp_path, *extra) == 0
    q = json.loads((tmp_path / "analyze_q.json").read_text())["report"]
    assert abs(q["period"] - 3.0) / 3.0 < 1e-3
    # bump gaps are T = 3, the quantum is 2: symbols (m, theta) = (1, 0.5)
    sym = json.loads((tmp_path / "analyze_symbols.json").read_text())["report"]
    assert all(m == 1 for m in sym["m"])
    assert sym["theta"] == pytest.approx([0.5] * len(sym["theta"]), abs=1e-5)


def test_analyze_scaling(tmp_path):
    csv = tmp_path / "series.csv"
    write_sin2_csv(csv)
    pairs = json.dumps([[d, 0.5 * d ** 1.5] for d in (0.08, 0.04, 0.02, 0.01)])
    assert run("analyze", "--input", csv, "--task", "scaling",
               "--pairs", pairs, "--out-dir", tmp_path) == 0
    rep = json.loads((tmp_path / "analyze_scaling.json").read_text())["report"]
    assert rep["exponent"] == pytest.approx(1.5, abs=1e-6)


def test_analyze_refuses_mismatched_normalization(tmp_path):
    csv = tmp_path / "series.csv"
    write_sin2_csv(csv)
    (tmp_path / "series.meta.json").write_text(
        json.dumps({"normalization": {"kind": "raw_spectral"}}))
    assert run("analyze", "--input", csv, "--task", "crossings",
               "--column", "K1", "--out-dir", tmp_path) == 2


# ---------------------------------------------------------------- pipeline

def test_pipeline_smoke(tmp_path):
    d = tmp_path / "pl"
    assert run("pipeline", "--out-dir", d, "--t-end", "120") == 0
    for name in ("lambda.json", "resonant.csv", "analyze_crossings.json"):
        assert (d / name).exists()
    assert not (d / "FAILED").exists()
    rep = json.loads((d / "analyze_crossings.json").read_text())["report"]
    assert len(rep["up"]) >= 1


# ---------------------------------------------------------------- sweep

def test_sweep_manifest(tmp_path, lam_file):
    d = tmp_path / "sw"
    assert run("sweep", "--lambda", lam_file, "--stage", "pde",
               "--param", "delta", "--values", "0.08,0.04",
               "--tau-end", "0.005", "--out-dir", d) == 0
    man = json.loads((d / "manifest.json").read_text())
    assert [r["status"] for r in man["runs"]] == ["ok", "ok"]
    for r in man["runs"]:
        assert (tmp_path / r["dir"] / "pde.csv").exists() or \
            (d / f"delta_{r['value']:g}" / "pde.csv").exists()


def test_sweep_empty_axis(tmp_path, lam_file):
    d = tmp_path / "sw0"
    assert run("sweep", "--lambda", lam_file, "--values", "",
               "--out-dir", d) == 0
    assert json.loads((d / "manifest.json").read_text())["runs"] == []


def test_sweep_partial_failure(tmp_path, lam_file):
    d = tmp_path / "swf"
    assert run("sweep", "--lambda", lam_file, "--stage", "pde",
               "--param", "delta", "--values", "0.08,-1",
               "--tau-end", "0.005", "--out-dir", d) == 3
    man = json.loads((d / "manifest.json").read_text())
    assert [r["status"] for r in man["runs"]] == ["ok", "failed"]
