"""Checks the shipped configs against docs/config.schema.json and that the
schema rejects what the loader rejects."""
import json
import pathlib
import sys

import jsonschema

root = pathlib.Path(sys.argv[1])
schema = json.loads((root / "docs" / "config.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)

failed = 0
for path in sorted((root / "configs").glob("*.json")):
    errors = list(validator.iter_errors(json.loads(path.read_text())))
    for e in errors:
        print(f"{path.name}: {e.message}")
    failed += bool(errors)

rejected = [
    {"bogus": 1},
    {"topology": {"n_locals": 3}},
    {"topology": {"n_local": 0}},
    {"routing": "shortest"},
    {"traffic": {"pattern": "burst"}},
    {"attacks": [{"start": 1}]},
    {"failures": [{"controller": 0, "at": 5}]},
    {"scenarios": {"Sc5": {}}},
]
for doc in rejected:
    if validator.is_valid(doc):
        print(f"schema accepted {doc}")
        failed += 1

print("schema check:", "FAIL" if failed else "PASS")
sys.exit(1 if failed else 0)
