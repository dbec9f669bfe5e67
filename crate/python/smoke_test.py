#!/usr/bin/env python3
"""Smoke test for the mfcforge_py extension module.

Builds the cdylib with cargo if needed, stages it under the extension name
Python expects, and runs a miniature design pipeline on the case-study
vehicle: plant build, stabilizing set, iPD transforms, margins, and a
closed-loop simulation.

Usage: python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_and_import():
    lib = REPO / "target" / "release" / "libmfcforge_py.so"
    if not lib.exists():
        subprocess.run(
            ["cargo", "build", "-p", "mfcforge-py", "--release"],
            cwd=REPO,
            check=True,
        )
    stage = Path(tempfile.mkdtemp(prefix="mfcforge-py-"))
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy2(lib, stage / f"mfcforge_py{suffix}")
    sys.path.insert(0, str(stage))
    import mfcforge_py

    return mfcforge_py


def approx(a, b, rel):
    return abs(a - b) <= rel * max(1.0, abs(b))


def main():
    mfc = build_and_import()
    print(f"imported mfcforge_py {mfc.__version__}")

    params = mfc.VehicleParams(1372.0, 9.72, 1990.0, 37022.5, 35900.0, 0.98, 1.48)
    plant = mfc.lateral_plant(params, 0.05)
    assert len(plant.den) == 5, plant.den
    assert abs(plant.den[-1] - 1.0) < 1e-15, "denominator must be monic"
    print(f"plant: {plant!r}")

    s = mfc.stabilizing_set(plant, "pid", 4.0, 0.0, 0.28, 100, -40.0, 40.0)
    assert not s.is_empty(), "stabilizing set must be nonempty"
    print(f"set: {s!r}")

    filt = mfc.FilterConfig(4.0, 0.05)
    ipd = mfc.IpdGains(0.00093, 0.043, 315.7, n=2)
    pid = mfc.ipd2_to_pid(ipd, filt)
    assert approx(pid.k2, 1.277969, 1e-4), pid.k2
    back = mfc.pid_to_ipd2(pid, filt, method="nonlinear")
    assert approx(back.kd, 0.043, 1e-9) and approx(back.alpha, 315.7, 1e-9)
    # The mapped controller lies inside the computed set (one slice spacing).
    dist = s.distance(pid.k3, pid.k1, pid.k2)
    assert dist <= s.gate_spacing, f"controller sits {dist} outside the set"
    print(f"controller 1: pid={pid!r}, set distance {dist:.2e}")

    m = mfc.margins(plant, ipd, filt)
    assert approx(m["gain_margin_db"], 16.71, 0.01), m
    assert approx(m["phase_margin_deg"], 51.16, 0.01), m
    print(f"margins: GM = {m['gain_margin_db']:.2f} dB, PM = {m['phase_margin_deg']:.2f} deg")

    r = mfc.simulate(plant, ipd, filt, reference="step", n=1200)
    assert not r["diverged"]
    assert r["settled"]
    assert approx(r["os_pct"], 17.95, 0.01), r["os_pct"]
    assert math.isclose(r["t"][1] - r["t"][0], 0.05)
    print(f"simulate: OS = {r['os_pct']:.2f}%, ST(5%) = {r['st_s']:.2f} s")

    print("smoke test: OK")


if __name__ == "__main__":
    main()
