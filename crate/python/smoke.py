"""Smoke test for the entente Python bindings.

Build and install first:
    pip install --no-build-isolation ./crates/py
then run from the repository root:
    python python/smoke.py
"""

import json
import os
import pathlib
import tempfile

import entente

ROOT = pathlib.Path(__file__).resolve().parent.parent


def check(cond, what):
    if not cond:
        raise SystemExit("FAIL: " + what)
    print("ok:", what)


check(entente.ASSERT_SENTINEL == "ENTENTE_ASSERT_FAIL:", "sentinel")
check(entente.normalize("index 12 out of range at foo.js:3:7") == entente.normalize("index 9 out of range at bar.js:40:1"),
      "normalization ignores numbers and locations")
check(entente.is_valid("var a = [1, 2];") and not entente.is_valid("var a = [1, 2;"), "bundled syntax check")

a = json.loads(entente.mutate("x = (a + b) * (c - d);\n", 5, 42))
b = json.loads(entente.mutate("x = (a + b) * (c - d);\n", 5, 42))
check(a == b and len(a["mutants"]) == 5, "mutation is replayable")

src = "".join("step%d();\n" % i for i in range(1, 11))
reduced = entente.reduce(src, lambda s: "step3();" in s and "step7();" in s)
check(reduced == "step3();\nstep7();\n", "reduction to lines 3 and 7")

outcomes = {
    "chakra": {"engine": "chakra", "category": "PASS"},
    "jsc": {"engine": "jsc", "category": "RUNTIME_ERROR", "exception_kind": "RangeError",
            "message": "byteOffset cannot be negative"},
    "sm": {"engine": "sm", "category": "RUNTIME_ERROR", "exception_kind": "RangeError",
           "message": "invalid or out-of-range index"},
    "v8": {"engine": "v8", "category": "RUNTIME_ERROR", "exception_kind": "RangeError",
           "message": "Offset is outside the bounds of the DataView"},
}
w = json.loads(entente.compare_outcomes(json.dumps(outcomes)))
check((w["priority"], w["group"]) == ("LO", "chakra"), "oracle flags the lone passing engine")
check(entente.compare_outcomes(json.dumps({"a": outcomes["chakra"], "b": dict(outcomes["chakra"], engine="b")})) is None,
      "agreement is not a warning")

check(entente.code_probability("var x = foo(1);") > entente.code_probability("Thanks for the quick fix!"),
      "paragraph scorer")

mock = pathlib.Path(os.environ.get("ENTENTE_MOCK", ROOT / "target" / "debug" / "entente-mock"))
if mock.is_file():
    with tempfile.TemporaryDirectory() as d:
        reg = pathlib.Path(d) / "registry.toml"
        reg.write_text(entente.mock_registry(str(mock), ["chakra", "jsc", "sm", "v8"]))
        manifest = str(ROOT / "fixtures" / "corpus" / "manifest.toml")
        report = json.loads(entente.transplant(str(reg), manifest, d))
        check(report["transplant_matrix"]["suites"] == ["v8", "sm", "jsc", "shared"], "transplant through the bindings")
        check("## Transplantation failures" in entente.summarize(str(pathlib.Path(d) / "report.json")),
              "summary of the written report")
else:
    print("skip: no mock engine at", mock)

print("smoke passed")
