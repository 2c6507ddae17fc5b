import csv
import json
import shutil

import numpy as np
import pytest

from pcmopt.geometry import UnitCellSpec
from pcmopt.optimize import FunctionBackend, GAConfig
from pcmopt.studies import (GEOMETRY_BOUNDS, PROPERTY_BOUNDS,
                            ResamplingSurrogateBackend, SimulatorBackend,
                            SurrogateBackend, config_hash, default_workers,
                            emit_surface, generate_training_data,
                            geometry_case, problem_from_bounds, property_case,
                            run_ablation, run_pcm_comparison, run_tm_study,
                            tm_case)
from pcmopt.surrogate import TrainingSet, train_lm

COARSE_CELL = UnitCellSpec(dx=10e-6)
COARSE_SIM = {"dt": 0.025}


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_config_hash_stable_and_order_insensitive():
    a = config_hash({"x": 1, "y": [2, 3]})
    b = config_hash({"y": [2, 3], "x": 1})
    assert a == b
    assert len(a) == 12
    assert config_hash({"x": 2, "y": [2, 3]}) != a


def test_default_workers_env_override(monkeypatch):
    monkeypatch.setenv("PCMOPT_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.delenv("PCMOPT_WORKERS")
    assert default_workers() >= 1


def test_case_builders():
    values = {name: lo for name, (lo, hi) in PROPERTY_BOUNDS.items()}
    case = property_case(values)
    mat = case.pcm_override
    assert mat["T_m"] == 47.0
    assert mat["k_solid"] == mat["k_liquid"] == 10.0
    assert mat["rho_solid"] == 8780.0  # density stays at the base material

    geo = geometry_case({"H_um": 60.0, "W_um": 40.0, "T_m_C": 70.0},
                        dx=10e-6)
    assert geo.cell.H == pytest.approx(60e-6)
    assert geo.cell.dx == 10e-6
    assert geo.pcm_override["T_m"] == 70.0
    assert geo.pcm_override["L_H"] == 47730.0

    tm = tm_case({"T_m_C": 55.0})
    assert tm.pcm_override["T_m"] == 55.0


def test_pcm_comparison_rows_and_artifacts(tmp_path):
    rows = run_pcm_comparison(out_dir=tmp_path, cell=COARSE_CELL,
                              **COARSE_SIM)
    assert [r["material"] for r in rows[:2]] == ["Silicon", "Cerrolow117"]
    assert len(rows) == 8
    tms = [r["T_m_C"] for r in rows[1:]]
    assert tms == sorted(tms)
    assert len({r["config_hash"] for r in rows}) == 1
    assert (tmp_path / "results.csv").exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["best_T_o_max"] == "Solder174"


def test_tm_study_band_and_optima(tmp_path):
    res = run_tm_study(power_levels=(100e3,), tm_step=10.0,
                       tm_range=(47.0, 87.0), out_dir=tmp_path,
                       cell=COARSE_CELL, **COARSE_SIM)
    d = res[100e3]
    assert [r["T_m_C"] for r in d["table"]] == [47.0, 57.0, 67.0, 77.0, 87.0]
    for r in d["table"]:
        assert r["band_hi_C"] >= r["band_lo_C"]
        assert r["T_osc"] == pytest.approx(r["band_hi_C"] - r["band_lo_C"])
    assert d["opt_T_m_for_T_o_max"] in [r["T_m_C"] for r in d["table"]]
    assert len(read_csv(tmp_path / "results.csv")) == 5


@pytest.fixture(scope="module")
def small_campaign(tmp_path_factory):
    out = tmp_path_factory.mktemp("campaign")
    csv_path = generate_training_data(
        "geometry", 10, out, seed=3, dx=10e-6, workers=1,
        sim_kwargs=COARSE_SIM)
    return out, csv_path


def test_campaign_rows_within_bounds(small_campaign):
    out, csv_path = small_campaign
    rows = read_csv(csv_path)
    assert len(rows) == 10
    for row in rows:
        for name, (lo, hi) in GEOMETRY_BOUNDS.items():
            assert lo <= float(row[name]) <= hi
        assert float(row["T_o_max_C"]) > 26.85
    assert len({row["config_hash"] for row in rows}) == 1
    summary = json.loads((out / "summary.json").read_text())
    assert summary["n_complete"] == 10 and summary["n_failed"] == 0


def test_campaign_resume_is_byte_identical(small_campaign, tmp_path):
    out, csv_path = small_campaign
    original = csv_path.read_bytes()
    # drop the assembled CSV and two per-case artifacts, then resume
    csv_path.unlink()
    (out / "cases" / "case_000003.json").unlink()
    (out / "cases" / "case_000007.json").unlink()
    again = generate_training_data("geometry", 10, out, seed=3, dx=10e-6,
                                   workers=1, sim_kwargs=COARSE_SIM)
    assert again.read_bytes() == original


def test_campaign_worker_count_does_not_change_results(small_campaign,
                                                       tmp_path):
    out, csv_path = small_campaign
    parallel = generate_training_data("geometry", 10, tmp_path, seed=3,
                                      dx=10e-6, workers=2,
                                      sim_kwargs=COARSE_SIM)
    assert parallel.read_bytes() == csv_path.read_bytes()


def test_campaign_grid_sampler_deterministic(tmp_path):
    a = generate_training_data("geometry", 8, tmp_path / "a", sampler="grid",
                               dx=10e-6, workers=1, sim_kwargs=COARSE_SIM)
    b = generate_training_data("geometry", 8, tmp_path / "b", sampler="grid",
                               dx=10e-6, workers=1, sim_kwargs=COARSE_SIM)
    assert a.read_bytes() == b.read_bytes()


def test_campaign_input_validation(tmp_path):
    with pytest.raises(ValueError):
        generate_training_data("geometry", 0, tmp_path)
    with pytest.raises(ValueError):
        generate_training_data("shapes", 5, tmp_path)


def test_simulator_backend_evaluate_and_verify():
    backend = SimulatorBackend(
        lambda v: tm_case(v, cell=COARSE_CELL), ["T_m_C"], "T_o_max",
        sim_kwargs=COARSE_SIM, verify_kwargs=COARSE_SIM)
    x = np.array([77.0])
    assert backend.evaluate(x) == pytest.approx(backend.verify(x))
    with pytest.raises(ValueError):
        SimulatorBackend(tm_case, ["T_m_C"], "dt_85")


def synthetic_pool(n, seed=0):
    rng = np.random.default_rng(seed)
    names = list(GEOMETRY_BOUNDS)
    lo = np.array([GEOMETRY_BOUNDS[k][0] for k in names])
    hi = np.array([GEOMETRY_BOUNDS[k][1] for k in names])
    X = rng.uniform(lo, hi, size=(n, 3))
    y = (100.0 - 0.1 * X[:, 0] - 0.05 * X[:, 1]
         + 0.01 * (X[:, 2] - 77.0) ** 2)
    return TrainingSet(X, y, names, "T_osc_C")


def test_surrogate_backend_verifies_through_simulator_stub():
    pool = synthetic_pool(200)
    model = train_lm(pool, seed=0)
    truth = FunctionBackend(lambda x: 100.0 - 0.1 * x[0] - 0.05 * x[1]
                            + 0.01 * (x[2] - 77.0) ** 2)
    backend = SurrogateBackend(model, truth)
    x = np.array([60.0, 60.0, 77.0])
    assert backend.evaluate(x) == pytest.approx(backend.verify(x), abs=2.0)
    assert backend.verify(x) == truth.evaluate(x)


def test_resampling_backend_fresh_retrains():
    pool = synthetic_pool(120)
    truth = FunctionBackend(lambda x: float(x[0]))
    backend = ResamplingSurrogateBackend(pool, 60, truth, seed=0)
    x = np.array([50.0, 50.0, 70.0])
    same = backend.fresh(0)
    other = backend.fresh(1)
    assert same.evaluate(x) == pytest.approx(backend.evaluate(x))
    assert other.evaluate(x) != backend.evaluate(x)
    with pytest.raises(ValueError):
        ResamplingSurrogateBackend(pool, 500, truth)


def test_problem_from_bounds():
    problem = problem_from_bounds(GEOMETRY_BOUNDS, "T_osc",
                                  FunctionBackend(lambda x: 0.0),
                                  steps={"T_m_C": 1.0})
    assert problem.names == ["H_um", "W_um", "T_m_C"]
    assert problem.parameters[2].step == 1.0
    assert list(problem.lower) == [20.0, 20.0, 47.0]


def test_ablation_structure_with_synthetic_truth():
    pool = synthetic_pool(300, seed=1)
    test = synthetic_pool(100, seed=2)
    truth = FunctionBackend(lambda x: 100.0 - 0.1 * x[0] - 0.05 * x[1]
                            + 0.01 * (x[2] - 77.0) ** 2)
    report = run_ablation(pool, test, sizes=(40, 200),
                          verifier_factory=lambda target: truth,
                          repeats=3, strategies=("ga",),
                          optimizer_config=GAConfig(population=12,
                                                    max_generations=10))
    assert [e["size"] for e in report] == [40, 200]
    for entry in report:
        assert entry["r_squared"]["min"] <= entry["r_squared"]["mean"] \
            <= entry["r_squared"]["max"]
        assert entry["ga"]["n_runs"] == 3
    assert report[1]["r_squared"]["mean"] >= report[0]["r_squared"]["mean"]


def test_emit_surface(tmp_path):
    pool = synthetic_pool(150)
    model = train_lm(pool, seed=4)
    out = tmp_path / "surface.csv"
    rows = emit_surface(model, fixed_tm=77.0, h_grid=[40.0, 100.0],
                        w_grid=[40.0, 100.0], out_path=out, dx=10e-6,
                        training_points=np.array([[40.0, 100.0, 77.0]]),
                        sim_kwargs=COARSE_SIM)
    assert len(rows) == 4
    flags = {(r["H_um"], r["W_um"]): r["is_training_point"] for r in rows}
    assert flags[(40.0, 100.0)] is True
    assert flags[(40.0, 40.0)] is False
    for r in rows:
        assert r["T_sim_C"] > 26.85
    assert len(read_csv(out)) == 4
