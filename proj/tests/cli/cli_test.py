"""End-to-end checks of the senssolve executable: exit codes, determinism and
JSON output validated against the schemas in docs/schema."""

import json
import pathlib
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource

EXE, SCHEMA_DIR, DATA_DIR = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
SMALL = str(DATA_DIR / "small.csv")

failures = []


def run(*args):
    return subprocess.run([EXE, *args], capture_output=True, text=True)


def check(name, ok, detail=""):
    print(("ok   " if ok else "FAIL ") + name + (": " + detail if detail and not ok else ""))
    if not ok:
        failures.append(name)


schemas = {p.stem: json.loads(p.read_text()) for p in SCHEMA_DIR.glob("*.json")}
registry = Registry().with_resources((s["$id"], Resource.from_contents(s)) for s in schemas.values())


def validates(name, args):
    proc = run(*args)
    if proc.returncode != 0:
        check(name, False, f"exit {proc.returncode}: {proc.stderr.strip()}")
        return None
    try:
        doc = json.loads(proc.stdout)
        jsonschema.Draft202012Validator(schemas[name], registry=registry).validate(doc)
    except (json.JSONDecodeError, jsonschema.ValidationError) as e:
        check(name + " schema", False, str(e).splitlines()[0])
        return None
    check(name + " schema", True)
    return doc


validates("analyze", ["analyze", "--input", SMALL, "--method", "dbar,ktilde,perm_t", "--gamma", "1:0.5:3"])
validates("changepoint", ["changepoint", "--input", SMALL, "--method", "dbar,perm_t"])
validates("randref", ["randref", "--input", SMALL, "--gamma", "2", "--M", "1000", "--seed", "3"])
sim = validates("simulate", ["simulate", "--scenario", "a", "--M", "100", "--B", "50", "--seed", "7"])
validates("simulate", ["simulate", "--scenario", "binary-a", "--M", "100", "--B", "30", "--seed", "7"])

first = run("simulate", "--scenario", "a", "--M", "100", "--B", "50", "--seed", "7", "--format", "csv")
second = run("simulate", "--scenario", "a", "--M", "100", "--B", "50", "--seed", "7", "--format", "csv")
check("simulate is deterministic for a fixed seed", first.returncode == 0 and first.stdout == second.stdout)
third = run("simulate", "--scenario", "a", "--M", "100", "--B", "50", "--seed", "8", "--format", "csv")
check("simulate depends on the seed", third.stdout != first.stdout)

r1 = run("randref", "--input", SMALL, "--gamma", "2", "--M", "2000", "--seed", "5")
r2 = run("randref", "--input", SMALL, "--gamma", "2", "--M", "2000", "--seed", "5")
check("randref is deterministic for a fixed seed", r1.returncode == 0 and r1.stdout == r2.stdout)

for fmt in ("csv", "text"):
    proc = run("analyze", "--input", SMALL, "--gamma", "1,2", "--format", fmt)
    check(f"analyze --format {fmt}", proc.returncode == 0 and proc.stdout.count("\n") == 3, proc.stdout)

usage = {
    "no subcommand": [],
    "unknown method": ["analyze", "--input", SMALL, "--method", "nope"],
    "gamma below one": ["analyze", "--input", SMALL, "--gamma", "0.5"],
    "malformed gamma": ["analyze", "--input", SMALL, "--gamma", "two"],
    "alpha out of range": ["analyze", "--input", SMALL, "--alpha", "0.7"],
    "unknown scenario": ["simulate", "--scenario", "z"],
    "too few replicates": ["simulate", "--scenario", "a", "--M", "10"],
    "too few reference draws": ["randref", "--input", SMALL, "--M", "10"],
    "missing input": ["analyze"],
}
for name, args in usage.items():
    code = run(*args).returncode
    check(f"usage error exits 1 ({name})", code == 1, f"exit {code}")

data = {
    "binary_ip on continuous outcomes": ["analyze", "--input", SMALL, "--method", "binary_ip"],
    "binary_ip simulate on continuous scenario": ["simulate", "--scenario", "a", "--method", "binary_ip", "--M", "100"],
    "unreadable input": ["analyze", "--input", str(DATA_DIR / "does_not_exist.csv")],
    "stratum with one unit": ["analyze", "--input", str(DATA_DIR / "singleton_block.csv")],
}
for name, args in data.items():
    proc = run(*args)
    check(f"data error exits 2 ({name})", proc.returncode == 2 and proc.stderr != "", f"exit {proc.returncode}")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
