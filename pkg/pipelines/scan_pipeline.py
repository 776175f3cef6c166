import json
import logging

import src.config as config
from src.catalog import run_scan

logging.basicConfig(level=logging.INFO)

with open(config.DATA_DIR / "grid.json", "r", encoding="utf-8") as fh:
    grid = json.load(fh)

print(f"Scanning {', '.join(sorted(grid['grid']))} over the base spec")
table = run_scan(grid)
table.to_csv(config.REPORTS_DIR / "scan.csv", index=False, float_format="%.17g")
print(table.to_string(index=False))
print(f"Scan written to {config.REPORTS_DIR / 'scan.csv'}")
