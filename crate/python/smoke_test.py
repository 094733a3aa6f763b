"""Smoke test for the stadisc_py extension module.

Build it first:

    cargo build -p stadisc-py --release --features extension-module

then run `python3 python/smoke_test.py`. An installed `stadisc_py` is used if
present, otherwise the freshly built library under target/release.
"""

import importlib.util
import json
import shutil
import sys
import sysconfig
import tempfile
from pathlib import Path


def load():
    try:
        import stadisc_py

        return stadisc_py
    except ImportError:
        pass
    root = Path(__file__).resolve().parent.parent
    built = root / "target" / "release" / "libstadisc_py.so"
    if not built.exists():
        sys.exit(f"{built} not found; build with --features extension-module")
    tmp = Path(tempfile.mkdtemp())
    target = tmp / ("stadisc_py" + sysconfig.get_config_var("EXT_SUFFIX"))
    shutil.copy(built, target)
    spec = importlib.util.spec_from_file_location("stadisc_py", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    sd = load()
    ident = [[1 + 0j]]

    q = sd.Surface.quadric(ident)
    d = sd.star_disc(ident, 0j, [1 + 0j])
    center = d.center()
    assert abs(center[0] - 2) < 1e-14 and abs(center[1] - 1) < 1e-14, center
    assert max(abs(q.value(z)) for z in d.boundary()) < 1e-12
    assert sd.maslov_index(q, d) == 4

    rho = json.loads(q.to_json())
    rho["terms"].append({"exp": [0, 1, 1, 0], "coeff": 0.05})
    s = sd.Surface.from_json(json.dumps(rho))
    disc, report = sd.solve_center(s, [2 + 0j, 1 + 0j])
    assert report["converged"] and report["boundary_residual"] <= 1e-10, report
    assert max(abs(s.value(z)) for z in disc.boundary()) < 1e-10

    jet = disc.boundary_jet()
    again, _ = sd.solve_jet(s, jet["df1"][1:], jet["df1"][0] * jet["dg1"][0], guess=disc)
    assert max(abs(a - b) for a, b in zip(again.center(), center)) < 1e-8

    nf, record = sd.normal_form(json.dumps(rho), [0.25 + 0j, 0.5 + 0j])
    assert record["pivot"] == 0 and nf.n == 1

    dilation = {"n": 1, "components": [[{"exp": [1, 0], "coeff": [0.64, 0]}], [{"exp": [0, 1], "coeff": [0.8, 0]}]]}
    pts = [center]
    rec = sd.reconstruct(json.dumps(dilation), q, pts)
    assert abs(rec[0][0] - 0.64 * center[0]) < 1e-12 and abs(rec[0][1] - 0.8 * center[1]) < 1e-12

    try:
        sd.star_disc(ident, 1.5 + 0j, [1 + 0j])
    except ValueError:
        pass
    else:
        raise AssertionError("|a| > 1 accepted")

    passed, line = sd.acceptance(3)
    assert passed, line
    print(line)
    print(f"stadisc_py {sd.__version__}: ok (perturbed solve residual {report['boundary_residual']:.2e})")


if __name__ == "__main__":
    main()
