#!/usr/bin/env python3
"""Validate the CLI's JSON documents against docs/schemas.

usage: check_schemas.py TINYSOL_BIN SOURCE_DIR
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    binary, root = sys.argv[1], Path(sys.argv[2])
    corpus = root / "tests" / "corpus"
    schemas = {p.name.split(".")[0]: json.loads(p.read_text()) for p in (root / "docs" / "schemas").glob("*.json")}
    bad = 0

    def check(kind: str, doc) -> None:
        nonlocal bad
        try:
            jsonschema.validate(doc, schemas[kind])
        except jsonschema.ValidationError as e:
            bad += 1
            print(f"FAIL {kind}: {e.message} at {list(e.absolute_path)}")

    def cli(*args: str):
        out = subprocess.run([binary, "--json", *args], capture_output=True, text=True).stdout
        return json.loads(out)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        family = tmp / "family.json"
        family.write_text('{"fields": {"Y.balance": [0, 1]}}')
        for f in sorted(corpus.glob("*.tsol")):
            check("parse", cli("parse", str(f)))
            check("derivation", cli("typecheck", str(f)))
        check("run", cli("run", str(corpus / "counter.tsol"), "--dump-state", str(tmp / "s.json"),
                         "--trace", str(tmp / "t.json")))
        check("run", cli("run", str(corpus / "reentrancy.tsol"), "--fuel", "200"))
        check("state", json.loads((tmp / "s.json").read_text()))
        check("trace", json.loads((tmp / "t.json").read_text()))
        check("verdict", cli("check-ci", str(corpus / "branch_on_high.tsol"), "--trusted", "X,Z",
                             "--family", str(family)))
        check("verdict", cli("check-ni", str(corpus / "balance_leak.tsol"), "--trusted", "X",
                             "--family", str(family), "--tx", "Y->Y.go():0"))
        check("corpus", cli("corpus", str(corpus)))
        check("error", cli("parse", str(tmp / "missing.tsol")))

    print("schemas: ok" if bad == 0 else f"schemas: {bad} failures")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
