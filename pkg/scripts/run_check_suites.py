#!/usr/bin/env python3
"""Run every statistical check suite at CLI scale and summarize pass/fail.

Usage: python scripts/run_check_suites.py [out_dir]
"""

import json
import sys
from pathlib import Path

from phi4torus.cli import main

out = sys.argv[1] if len(sys.argv) > 1 else "out/checks"
suites = ["reversibility", "ibp", "energy", "moments", "poincare"]
failed = 0
for suite in suites:
    code = main(["check", "--suite", suite, "--out-dir", out,
                 "--starts", "2000"])
    if code != 0:
        sys.exit(code)
    payload = json.loads((Path(out) / f"check_{suite}.json").read_text())
    for check in payload["checks"]:
        status = "pass" if check["pass"] else "FAIL"
        if not check["pass"]:
            failed += 1
        print(f"{status:4s}  {check['test-name']}: est={check['estimate']:.4g}")
sys.exit(1 if failed else 0)
