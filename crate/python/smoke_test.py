"""Smoke test for the dualsim_py extension.

Build first:
    cargo build --release -p dualsim-py --features extension-module
then run:
    python3 python/smoke_test.py [path/to/libdualsim_py.so]
"""

import importlib.util
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def locate_library():
    if len(sys.argv) > 1:
        return Path(sys.argv[1])
    for profile in ("release", "debug"):
        for name in ("libdualsim_py.so", "libdualsim_py.dylib", "dualsim_py.dll"):
            candidate = ROOT / "target" / profile / name
            if candidate.exists():
                return candidate
    sys.exit("libdualsim_py not found; build it with "
             "`cargo build --release -p dualsim-py --features extension-module`")


def load(lib):
    # The shared object must be named after the module to be importable.
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    tmp = Path(tempfile.mkdtemp())
    target = tmp / f"dualsim_py{suffix}"
    shutil.copy(lib, target)
    spec = importlib.util.spec_from_file_location("dualsim_py", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    ds = load(locate_library())
    h = 1 / math.sqrt(2)
    I = [[1, 0], [0, 1]]
    Z = [[1, 0], [0, -1]]

    out = ds.run_pure_pipeline([h, h], [0.5, 0.5], [I, Z])
    assert abs(out[0] - h) < 1e-12 and abs(out[1]) < 1e-12, out

    plus = [[0.5, 0.5], [0.5, 0.5]]
    mixed = ds.run_gudder_mixed_pipeline(plus, [0.5, 0.5], [I, Z])
    coherent = ds.run_density_pipeline(plus, [0.5, 0.5], [I, Z])
    assert abs(mixed[1][1] - 0.5) < 1e-12
    assert abs(coherent[1][1]) < 1e-12

    a = [[1 + 2j, 3 - 1j], [0.5j, -2]]
    terms = ds.decompose(a)
    b = ds.reconstruct(terms)
    assert max(abs(b[i][j] - a[i][j]) for i in range(2) for j in range(2)) < 1e-8

    report = json.loads(ds.search_demo(16, 5))
    assert report["efficiency"] == 0.0625 and report["outcome"] == 5

    circuit = ds.Circuit((ROOT / "circuits" / "paradox.dc").read_text())
    r = json.loads(circuit.run("mixed", [h, h]))
    assert all(abs(p - 0.5) < 1e-12 for p in r["distribution"]["probabilities"])

    try:
        ds.Circuit("qubits 1\ndivide 0.6 0.6\n")
    except ds.CircuitParseError as e:
        assert e.args[1] == "E_PROB_SUM"
    else:
        raise AssertionError("bad circuit accepted")

    print("dualsim_py smoke test passed")


if __name__ == "__main__":
    main()
