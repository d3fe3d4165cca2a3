"""Builds the extension module, imports it and exercises run, run_config and sweep."""

import importlib.util
import os
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "sphdg-python", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = Path(os.environ.get("CARGO_TARGET_DIR", ROOT / "target")) / "release"
    lib = next(p for p in (target / "libsphdg_py.so", target / "libsphdg_py.dylib") if p.exists())
    tmp = Path(tempfile.mkdtemp())
    dest = tmp / "sphdg_py.so"
    shutil.copy(lib, dest)
    spec = importlib.util.spec_from_file_location("sphdg_py", dest)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    m = load_module()

    r = m.run("wb_gamma2", overrides={"n": "20", "t_end": "0.1"})
    assert r["scenario"] == "wb_gamma2" and r["cells"] == 20
    assert abs(r["t_final"] - 0.1) < 1e-12
    assert max(r["l1_errors"]) < 1e-11, r["l1_errors"]
    assert len(r["ledger"]["t"]) == r["steps"] + 1

    with tempfile.TemporaryDirectory() as out:
        r = m.run_config("scenario = explosion\nn = 20\nt_end = 0.01\n", out=out)
        assert abs(r["max_abs_dE_cum"]) < 1e-12
        assert (Path(out) / "ledger.csv").read_text().startswith("t,E_int")

    rows = m.sweep("manufactured", [10, 20], overrides={"k": "1", "rk": "2", "t_end": "0.1"})
    assert rows[0]["rates"] is None
    assert 1.7 < rows[1]["rates"][0] < 2.3, rows

    try:
        m.run("no_such_scenario")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown scenario accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
