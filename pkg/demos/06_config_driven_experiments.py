"""
Running experiments from configuration files
============================================

The ``mrnldp`` command runs a configured experiment and writes CSV
tables plus a JSON summary. The same entry point is callable from Python.
"""

import json
import tempfile
from pathlib import Path

from mrnldp.cli import main

configs = Path(__file__).resolve().parent.parent / "configs"
out = Path(tempfile.mkdtemp())

main(["list-experiments"])
main(["validate", str(configs / "rate_landscape.yaml")])
main(["run", str(configs / "rate_landscape.yaml"), "--out", str(out / "landscape")])
main(["run", str(configs / "slope_scan_empty.yaml"), "--out", str(out / "slopes")])

summary = json.loads((out / "slopes" / "summary.json").read_text())
print(json.dumps(summary, indent=1))
print((out / "slopes" / "slopes.csv").read_text())
