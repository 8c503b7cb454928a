"""Validates wire fixtures and recorded engine traffic against the published JSON schemas."""

import argparse
import json
import pathlib
import sys

import jsonschema


def load_schemas(directory):
    schemas = {}
    for path in sorted(directory.glob("*.schema.json")):
        schema = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(schema)
        schemas[path.name[: -len(".schema.json")]] = jsonschema.Draft202012Validator(schema)
    return schemas


def schema_name(path):
    # "<route>.<request|response>.<n>.json" or "error.<n>.json"
    parts = path.name.split(".")
    return "error" if parts[0] == "error" else f"{parts[0]}.{parts[1]}"


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--schemas", type=pathlib.Path, required=True)
    parser.add_argument("--fixtures", type=pathlib.Path, required=True)
    parser.add_argument("--recordings", type=pathlib.Path)
    args = parser.parse_args()

    schemas = load_schemas(args.schemas)
    failures = []
    checked = 0

    for path in sorted((args.fixtures / "valid").glob("*.json")):
        errors = list(schemas[schema_name(path)].iter_errors(json.loads(path.read_text())))
        checked += 1
        if errors:
            failures.append(f"{path.name}: expected valid, got {errors[0].message}")

    for path in sorted((args.fixtures / "invalid").glob("*.json")):
        errors = list(schemas[schema_name(path)].iter_errors(json.loads(path.read_text())))
        checked += 1
        if not errors:
            failures.append(f"{path.name}: expected a schema violation")

    if args.recordings is not None:
        recorded = sorted(args.recordings.rglob("*.json"))
        if not recorded:
            failures.append(f"no recorded bodies under {args.recordings}")
        for path in recorded:
            errors = list(schemas[schema_name(path)].iter_errors(json.loads(path.read_text())))
            checked += 1
            if errors:
                failures.append(f"recorded {path.relative_to(args.recordings)}: {errors[0].message}")

    for failure in failures:
        print("FAIL", failure)
    print(f"checked {checked} documents, {len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
