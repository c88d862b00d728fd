"""Validate the sample configs and their reports against schemas/.

Usage: python3 scripts/check_schemas.py [path/to/shiftlab]
"""

import json
import pathlib
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main() -> int:
    binary = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "target/debug/shiftlab")
    config = json.loads((ROOT / "schemas/config.v1.schema.json").read_text())
    report = json.loads((ROOT / "schemas/report.v1.schema.json").read_text())
    registry = Registry().with_resource(config["$id"], Resource.from_contents(config))
    config_check = jsonschema.Draft202012Validator(config)
    report_check = jsonschema.Draft202012Validator(report, registry=registry)
    failed = 0
    for path in sorted((ROOT / "configs").glob("*.json")):
        errors = list(config_check.iter_errors(json.loads(path.read_text())))
        out = subprocess.run([binary, "--config", str(path)], capture_output=True, text=True, check=True)
        errors += list(report_check.iter_errors(json.loads(out.stdout)))
        for e in errors:
            print(f"FAIL {path.name}: {e.message[:200]} at {list(e.absolute_path)}")
        failed += bool(errors)
        if not errors:
            print(f"ok   {path.name}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
