import logging

import pandas as pd

import src.config as config
from src.catalog import run_suite
from src.families import FamilySpec
from src.indefherm import describe, load_operator

logging.basicConfig(level=logging.INFO)

SPEC_FILES = [
    "flat.json",
    "bryant_case1.json",
    "einstein_case1.json",
    "einstein_case4.json",
    "case3_two_eigenvalues.json",
    "case4_order_one.json",
    "case4_constant_roots.json",
    "tachibana.json",
    "negative_control.json",
]

operator = load_operator(config.DATA_DIR / "nilpotent_operator.json")
print(f"Nilpotent operator: {describe(operator)['kind']}")

summary = []
for name in SPEC_FILES:
    spec = FamilySpec.load(config.DATA_DIR / name)
    print(f"Running the identity suite on {name} ({spec.samples} samples, seed {spec.seed})")
    report = run_suite(spec)
    stem = name.replace(".json", "")
    report.write(config.REPORTS_DIR / f"{stem}_report.json")
    report.write_csv(config.REPORTS_DIR / f"{stem}_samples.csv")
    failed = [c.id for c in report.checks if not c.passed]
    print(f"{name}: {report.n_pass} pass, {report.n_fail} fail {failed if failed else ''}")
    summary.append({"spec": stem, "pass": report.n_pass, "fail": report.n_fail, "failed_ids": " ".join(failed)})

summary = pd.DataFrame(summary)
summary.to_csv(config.REPORTS_DIR / "verify_summary.csv", index=False)
print(summary)
