"""Run each CLI subcommand that emits JSON and validate the output against its schema."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def run(tool, *args, ok=(0,)):
    proc = subprocess.run([tool, *map(str, args)], capture_output=True, text=True)
    if proc.returncode not in ok:
        sys.exit(f"{' '.join(map(str, args))} exited {proc.returncode}: {proc.stderr}")
    return proc.stdout


def check(schema_dir, name, doc):
    schema = json.loads((schema_dir / name).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    jsonschema.validate(doc, schema, cls=jsonschema.Draft202012Validator)
    print(f"ok {name}")


def main():
    tool, schema_dir = sys.argv[1], Path(sys.argv[2])
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        mtx = tmp / "a.mtx"
        run(tool, "gen", "--kind", "uniform", "--m", 400, "--n", 12, "--rho", 0.05, "--seed", 3, "--out", mtx)

        run(tool, "sketch", "--matrix", mtx, "--gamma", 2, "--variant", "jki", "--out", tmp / "s.bin",
            "--format", "bin")
        check(schema_dir, "sketch_stats.schema.json", json.loads((tmp / "s.bin.stats.json").read_text()))

        for extra in ([], ["--decomp", "svd"], ["--method", "lsqrd", "--maxit", 3000]):
            check(schema_dir, "solve.schema.json", json.loads(run(tool, "solve", "--matrix", mtx, *extra)))
        stalled = run(tool, "solve", "--matrix", mtx, "--method", "lsqrd", "--maxit", 1, ok=(3,))
        check(schema_dir, "solve.schema.json", json.loads(stalled))

        run(tool, "bench", "--matrix", mtx, "--d", 24, "--threads", "1,2", "--modes", "counter,checkpoint",
            "--reps", 1, "--json", tmp / "b.json", "--csv", tmp / "b.csv")
        check(schema_dir, "bench.schema.json", json.loads((tmp / "b.json").read_text()))

        for rho in (1e-6, 0.3, 1.0):
            out = run(tool, "analyze", "--cache-bytes", 262144, "--h", 0.05, "--B", 8, "--rho", rho,
                      "--d", 500, "--m", 10000, "--n", 250)
            check(schema_dir, "analyze.schema.json", json.loads(out))


if __name__ == "__main__":
    main()
