#!/usr/bin/env python3
# srvscan: state-reverting vulnerability scanner for EVM contracts
# Copyright 2026 The srvscan Authors.
# Licensed under the Apache License, Version 2.0.

"""Validate shipped models and every corpus report against the JSON schemas."""

import argparse
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--root", required=True)
    args = ap.parse_args()
    root = pathlib.Path(args.root)
    model_schema = load(root / "schemas/contract_model.schema.json")
    report_schema = load(root / "schemas/report.schema.json")
    jsonschema.Draft202012Validator.check_schema(model_schema)
    jsonschema.Draft202012Validator.check_schema(report_schema)
    model_v = jsonschema.Draft202012Validator(model_schema)
    report_v = jsonschema.Draft202012Validator(report_schema)

    failures = 0
    checked = 0

    def check(validator, doc, label):
        nonlocal failures, checked
        checked += 1
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        for e in errors[:5]:
            print(f"{label}: {'/'.join(map(str, e.path))}: {e.message}")
        failures += bool(errors)

    models = sorted(root.glob("corpus/*.model.json")) + sorted(root.glob("tests/fixtures/models/*.model.json"))
    for p in models:
        check(model_v, load(p), str(p.relative_to(root)))

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        for p in sorted(root.glob("corpus/*")):
            if p.name.endswith(".model.json"):
                name, flag = p.name[: -len(".model.json")], "--model"
            elif p.suffix == ".hex":
                name, flag = p.stem, "--bytecode"
            else:
                continue
            cmd = [args.cli, "analyze", flag, str(p), "--out", str(tmp / "r.json"), "--dump-model", str(tmp / "m.json")]
            traces = root / "corpus" / f"{name}.traces.jsonl"
            if traces.exists():
                cmd += ["--traces", str(traces)]
            rc = subprocess.run(cmd).returncode
            if rc not in (0, 2):
                print(f"{name}: analyze exited {rc}")
                failures += 1
                continue
            check(report_v, load(tmp / "r.json"), f"report {name}")
            check(model_v, load(tmp / "m.json"), f"model {name}")

    print(f"{checked} documents checked, {failures} invalid")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
