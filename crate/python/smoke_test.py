"""Smoke test for the pyfreeprob extension.

Uses an installed module when there is one, otherwise the library produced by
`cargo build --release -p freeprob-py`.
"""

import importlib.util
import math
import os
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        import pyfreeprob

        return pyfreeprob
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libpyfreeprob.so"
        if lib.exists():
            break
    else:
        sys.exit("pyfreeprob not installed and no built library under target/; run cargo build --release -p freeprob-py")
    tmp = pathlib.Path(tempfile.mkdtemp())
    dst = tmp / "pyfreeprob.so"
    shutil.copy(lib, dst)
    spec = importlib.util.spec_from_file_location("pyfreeprob", dst)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    fp = load()
    semicircle = {"family": "semicircle", "params": {"mean": 0.0, "variance": 1.0}}
    bernoulli = {"family": "bernoulli"}

    report = fp.entropy_report(semicircle)
    close(report["chi"], 0.5 * math.log(2 * math.pi * math.e), 1e-3)
    close(report["fisher_abs"], 1.0, 1e-6)

    phi, phi_rel = fp.fisher({"family": "semicircle", "params": {"variance": 2.0}})
    close(phi_rel, 0.5, 1e-4)

    k = fp.stein_kernel({"family": "semicircle", "params": {"variance": 2.0}}, degree=4)
    close(k["discrepancy_lb"], 1.0, 1e-6)

    close(fp.hilbert(semicircle, [0.5])[0], 0.25, 1e-6)
    # G(i) = (i − i√5)/2 for the standard semicircle
    g = fp.cauchy(semicircle, 1j)
    close(g.real, 0.0, 1e-9)
    close(g.imag, (1 - math.sqrt(5)) / 2, 1e-9)

    law = fp.free_add(bernoulli, bernoulli)
    mass = sum(0.5 * (x1 - x0) * (d0 + d1) for x0, x1, d0, d1 in zip(law["grid"], law["grid"][1:], law["density"], law["density"][1:]))
    close(mass, 1.0, 1e-6)

    checks = fp.static_checks({"family": "uniform", "params": {"c": math.sqrt(3.0)}})
    assert [c["name"] for c in checks] == ["lsi", "hsi", "deficit"]
    assert all(c["holds"] for c in checks)

    rows = fp.clt(bernoulli, [2])["rows"]
    close(rows[0]["entropy_gap"], 0.5 * math.log(2) - 0.25, 1e-3)

    f = fp.fock(2, 0.3, depth=6, words=[[1, 1, 1, 1], [1, 2, 1, 2]])
    close(f["moments"][0], 2.3, 1e-12)
    close(f["moments"][1], 0.3, 1e-12)
    close(f["bound"], 0.6 / math.sqrt(0.82), 1e-12)

    assert fp.tangent_margin("0.5 0 1 1\n1 0 1 1 1 1\n", seed=1, samples=20) >= -1e-10

    try:
        fp.entropy_report({"family": "semicircle", "params": {"variance": -1}})
    except ValueError:
        pass
    else:
        raise AssertionError("negative variance accepted")

    with open(os.devnull, "w") as null:
        saved = os.dup(1)
        os.dup2(null.fileno(), 1)
        try:
            status = fp.run_cli(["fock", "--n", "1", "--q", "0.1"])
        finally:
            os.dup2(saved, 1)
    assert status == 0
    print("pyfreeprob smoke test passed")


if __name__ == "__main__":
    main()
