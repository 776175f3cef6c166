import json

import pytest

import src.config as config
from src.catalog import (
    CATALOG,
    CSV_COLUMNS,
    calibrate_sign,
    run_identity,
    run_scan,
    run_suite,
)
from src.errors import BadParams, IncompatibleCase, UnknownId
from src.families import example_spec, with_overrides
from tests.conftest import N_POINTS, domain_points, load_spec


def _by_id(report):
    return {c.id: c for c in report.checks}


def test_catalog_has_a_tolerance_for_every_entry():
    assert set(CATALOG) == set(config.DEFAULT_TOLERANCES)


def test_flat_cone_passes_the_curvature_components():
    report = run_suite(load_spec("flat.json", samples=N_POINTS), ["I4", "I5", "I6", "I7", "I16", "I21"], threads=1)
    checks = _by_id(report)
    for i in ("I4", "I5", "I6", "I7"):
        assert checks[i].passed, checks[i].notes
    for i in ("I16", "I21"):
        assert checks[i].passed
        assert "‖R‖ below floor" in checks[i].notes
    assert report.exit_code == 0


def test_bryant_family_passes_the_general_identities():
    ids = ["I1", "I2", "I3", "I8", "I9", "I16", "I17", "I18", "I21", "I26"]
    report = run_suite(load_spec("bryant_case1.json", samples=N_POINTS), ids, threads=2)
    checks = _by_id(report)
    for i in ids:
        assert checks[i].passed, f"{i}: {checks[i].notes}"
        assert checks[i].n_samples == N_POINTS


def test_two_eigenvalue_family_passes_the_b_hat_identities():
    ids = ["I10", "I11", "I12a", "I12b", "I12c", "I13", "I14", "I15"]
    report = run_suite(load_spec("case3_two_eigenvalues.json", samples=N_POINTS), ids, threads=2)
    checks = _by_id(report)
    for i in ids:
        assert checks[i].passed, f"{i}: {checks[i].notes}"


def test_negative_control_fails_where_expected():
    report = run_suite(load_spec("negative_control.json", samples=N_POINTS), ["I19", "I20", "I21"], threads=2)
    checks = _by_id(report)
    assert not checks["I19"].passed
    assert "commutator norm 1.000e-01" in checks["I19"].notes
    assert not checks["I20"].passed
    assert not checks["I21"].passed
    assert checks["I21"].max_residual > 1e-3
    assert report.exit_code == 1


def test_generating_function_check():
    report = run_suite(load_spec("tachibana.json"), ["I23"], threads=1)
    check = _by_id(report)["I23"]
    assert check.passed
    assert check.n_samples == 20


def test_empty_selection():
    report = run_suite(load_spec("bryant_case1.json"), [], threads=1)
    assert report.checks == []
    assert report.exit_code == 0
    assert json.loads(report.to_json())["summary"] == {"pass": 0, "fail": 0, "seconds": 0.0}


def test_reports_do_not_depend_on_thread_count():
    spec = load_spec("bryant_case1.json", samples=N_POINTS)
    ids = ["I1", "I17", "I20", "I21"]
    assert run_suite(spec, ids, threads=1).to_json() == run_suite(spec, ids, threads=4).to_json()


def test_unknown_id():
    with pytest.raises(UnknownId):
        run_suite(load_spec("flat.json"), ["I99"])
    with pytest.raises(UnknownId):
        run_identity("I99", None)


def test_case_restricted_entries_are_skipped(flat_family):
    report = run_suite(load_spec("flat.json", samples=N_POINTS), ["I10", "I19"], threads=1)
    assert {"id": "I10", "reason": "not defined for case 1"} in report.skipped
    assert [c.id for c in report.checks] == ["I19"]
    z = domain_points(flat_family, 1)[0]
    with pytest.raises(IncompatibleCase):
        run_identity("I10", flat_family, z)
    assert run_identity("I19", flat_family).passed


def test_single_identity_at_a_point(bryant_family):
    z = domain_points(bryant_family, 1, seed=3)[0]
    result = run_identity("I1", bryant_family, z)
    assert result.passed
    assert result.n_samples == 1
    with pytest.raises(IncompatibleCase):
        run_identity("I1", bryant_family)


def test_per_sample_rows():
    report = run_suite(load_spec("bryant_case1.json", samples=N_POINTS), ["I1", "I19"], threads=1)
    frame = report.to_frame()
    assert list(frame.columns) == CSV_COLUMNS
    assert len(frame) == N_POINTS + 1
    assert frame.loc[frame["id"] == "I19", "r"].isna().all()


def test_sign_calibration():
    assert calibrate_sign([(1.0, -1.0, 1.0), (2.0, -2.0, 1.0)]) == -1.0
    assert calibrate_sign([(1.0, 1.0, 1.0)]) == 1.0


def test_scan_over_a_grid():
    with open(config.DATA_DIR / "grid.json", "r", encoding="utf-8") as fh:
        grid = json.load(fh)
    table = run_scan(grid, threads=1)
    assert len(table) == 4
    assert list(table.columns) == ["d", "seed", "pass", "fail", "worst_id", "worst_residual", "error"]
    with pytest.raises(BadParams):
        run_scan({"base": grid["base"]})


@pytest.mark.parametrize(
    "spec",
    [
        load_spec("bryant_case1.json", samples=N_POINTS),
        load_spec("einstein_case2.json", samples=N_POINTS),
        load_spec("case3_two_eigenvalues.json", samples=N_POINTS),
        load_spec("case4_order_one.json", samples=N_POINTS),
        load_spec("case4_constant_roots.json", samples=N_POINTS),
    ],
    ids=["case1", "case2", "case3", "case4-order-one", "case4-constant-roots"],
)
def test_every_case_is_bochner_flat(spec):
    check = _by_id(run_suite(spec, ["I21"], threads=2))["I21"]
    assert check.passed, check.notes


@pytest.mark.parametrize(
    "name",
    ["case3_parabolic_mu.json", "case3_nilpotent.json", "case4_beta_root.json", "case4_parabolic_mu.json"],
)
def test_bryant_subcases_pass_the_root_identities(name):
    ids = ["I13", "I15", "I21", "I22"]
    report = run_suite(load_spec(name, samples=N_POINTS), ids, threads=2)
    checks = _by_id(report)
    for i in ids:
        assert checks[i].passed, f"{i}: {checks[i].notes}"
        assert checks[i].n_samples == N_POINTS


ACCEPTANCE_IDS = [i for i in CATALOG if i not in ("I24", "I25", "I26", "I27")]
ACCEPTANCE_SPECS = {
    "case1-bryant": load_spec("bryant_case1.json", seed=1),
    "case1-weights": with_overrides(example_spec("bryant", [0.0, 0.1, 0.3]), seed=2),
    "case1-einstein": load_spec("einstein_case1.json", seed=3),
    "case2-e1": load_spec("einstein_case2.json", seed=1),
    "case2-e05": with_overrides(example_spec("einstein", [0.5, 2.0]), seed=2),
    "case2-e2": with_overrides(example_spec("einstein", [2.0, 2.0]), seed=3),
    "case3-two-eigenvalues": load_spec("case3_two_eigenvalues.json", seed=1),
    "case3-mu": load_spec("case3_parabolic_mu.json", seed=2),
    "case3-nilpotent": load_spec("case3_nilpotent.json", seed=3),
    "case4-order-one": load_spec("case4_order_one.json", seed=1),
    "case4-constant-roots": load_spec("case4_constant_roots.json", seed=2),
    "case4-beta-root": load_spec("case4_beta_root.json", seed=3),
    "case4-mu": load_spec("case4_parabolic_mu.json", seed=4),
}


@pytest.mark.slow
@pytest.mark.parametrize("spec", list(ACCEPTANCE_SPECS.values()), ids=list(ACCEPTANCE_SPECS))
def test_seeded_specs_pass_the_catalog(spec):
    report = run_suite(with_overrides(spec, samples=20), ACCEPTANCE_IDS, threads=4)
    failed = {c.id: c.notes for c in report.checks if not c.passed}
    assert failed == {}
    assert report.exit_code == 0
