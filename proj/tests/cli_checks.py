"""End-to-end checks of the forelli-lab executable.

usage: cli_checks.py <mode> <forelli-lab> <source dir>
modes: exit-codes, schema, determinism
"""

import json
import os
import subprocess
import sys
import tempfile

import jsonschema

MODE, BINARY, SOURCE = sys.argv[1], sys.argv[2], sys.argv[3]
DATA = os.path.join(SOURCE, "tests", "data")

# (arguments, expected exit code)
CASES = [
    (["analyze", "--expr", "exp(z1+z2)", "--order", "12", "--directions", "sphere"], 0),
    (["analyze", "--expr", "z1^2*z2*conj(z1)/normsq(z)"], 1),
    (["analyze", "--series", os.path.join(DATA, "mixed.series"), "--directions", "cap 0.3 1 0"], 1),
    (["capacity", "--set", "segment -1 1", "--m", "128"], 0),
    (["capacity", "--set", "points 0 1 2", "--m", "16"], 0),
    (["capacity", "--method", "normality", "--directions", "cap 0.3 1 0"], 0),
    (["jet", "--expr", "1/(1-z1)", "--order", "6", "--rho-max", "0.5"], 0),
    (["jet", "--expr", "z1*conj(z1)/normsq(z)", "--n", "2", "--order", "4"], 1),
    (["slice", "--expr", "1/(1-z1-z2)", "--order", "10", "--rho-max", "0.3", "--count", "5"], 0),
    (["certify", "--expr", "1/((1-z1)*(1-z2))", "--order", "20", "--rho-max", "0.5"], 0),
    (["psh", "--family", "growing", "--classify"], 0),
    (["pencil-check", "--pencil", os.path.join(DATA, "twist.json"), "--expr", "exp(z1+z2)"], 0),
    (["pencil-check", "--pencil", os.path.join(DATA, "standard.json"), "--expr", "conj(z1)"], 1),
    (["subpencil", "--pencil", os.path.join(DATA, "twist.json"), "--expr", "exp(z1+z2)",
      "--w", "cap 0.2 1 0 count=32"], 0),
    (["subpencil", "--pencil", os.path.join(DATA, "standard.json"), "--expr", "conj(z1)"], 1),
    (["normalize", "--pencil", os.path.join(DATA, "twist.json"), "--v0", "1 0", "--expr", "exp(z1+z2)"], 0),
    (["normalize", "--pencil", os.path.join(DATA, "standard.json"), "--v0", "1 0", "--expr", "conj(z2)"], 1),
    # usage and configuration errors
    ([], 2),
    (["frobnicate"], 2),
    (["analyze", "--expr", "z1+"], 2),
    (["analyze", "--expr", "z1", "--directions", "cap 0.3"], 2),
    (["capacity", "--set", "hexagon 1"], 2),
    (["pencil-check", "--pencil", os.path.join(DATA, "missing.json")], 2),
    (["analyze", "--expr", "z1", "--tol", "-1"], 2),
    # a pole on a sample torus
    (["jet", "--expr", "1/(z1-0.25)", "--order", "4"], 3),
]


def run(args, out=None):
    cmd = [BINARY] + args + (["--out", out] if out and args else [])
    return subprocess.run(cmd, capture_output=True, text=True)


def exit_codes():
    bad = 0
    for args, want in CASES:
        got = run(args).returncode
        status = "ok" if got == want else "MISMATCH"
        bad += got != want
        print(f"{status}: exit {got} (want {want}) for {' '.join(args)}")
    return bad


def reports(tmp):
    for i, (args, want) in enumerate(CASES):
        if want in (0, 1):
            path = os.path.join(tmp, f"r{i}.json")
            run(args, path)
            yield args, path


def schema():
    with open(os.path.join(SOURCE, "schemas", "report.schema.json")) as f:
        validator = jsonschema.Draft202012Validator(json.load(f))
    bad = 0
    with tempfile.TemporaryDirectory() as tmp:
        for args, path in reports(tmp):
            with open(path) as f:
                errors = list(validator.iter_errors(json.load(f)))
            bad += bool(errors)
            print(("ok" if not errors else "INVALID") + ": " + " ".join(args))
            for e in errors[:3]:
                print("   ", e.message)
    return bad


def determinism():
    bad = 0
    with tempfile.TemporaryDirectory() as tmp:
        for args, path in reports(tmp):
            again = path + ".again"
            run(args, again)
            with open(path, "rb") as a, open(again, "rb") as b:
                same = a.read() == b.read()
            bad += not same
            print(("ok" if same else "DIFFERENT") + ": " + " ".join(args))
    return bad


sys.exit(1 if {"exit-codes": exit_codes, "schema": schema, "determinism": determinism}[MODE]() else 0)
