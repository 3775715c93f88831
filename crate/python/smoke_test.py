"""Smoke test for the pyqrd extension.

Build and run from the repository root:

    cargo build --release -p qrd-py --features extension-module
    cp target/release/libpyqrd.so python/pyqrd.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pyqrd


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    rho = pyqrd.Operator([[0.7, 0.2], [0.2, 0.3]])
    sigma = pyqrd.Operator.diagonal([0.5, 0.5])
    assert rho.dim == 2 and close(rho.trace(), 1.0)

    assert close(pyqrd.umegaki(rho, rho), 0.0)
    assert close(pyqrd.d_alpha_z(rho, rho, 2.0, 1.0), 0.0)

    petz2 = pyqrd.d_alpha_z(rho, sigma, 2.0, 1.0)
    sand2 = pyqrd.d_alpha_z(rho, sigma, 2.0, 2.0)
    assert sand2 <= petz2 + 1e-12
    assert pyqrd.d_max(rho, sigma) >= sand2 - 1e-12

    pure, mixed = pyqrd.family(json.dumps({"family": "pure_family", "c": 1.0, "eps": 0.25}))
    assert close(pyqrd.d_max(pure, mixed), math.log(2.0))

    singular = pyqrd.Operator.diagonal([1.0, 0.0])
    assert pyqrd.d_alpha_z(rho, singular, 2.0, 1.0) == math.inf

    m = pyqrd.measured_renyi(rho, sigma, 2.0, seed=7)
    assert m <= sand2 + 1e-8

    ident = pyqrd.Channel.identity(2)
    dep = pyqrd.Channel.depolarizing(2, 0.2)
    assert close(pyqrd.channel_dmax(ident, dep), math.log(1.0 / 0.85), 1e-7)

    try:
        pyqrd.Operator([[1.0, 1.0], [0.0, 1.0]])
    except ValueError:
        pass
    else:
        raise AssertionError("non-Hermitian input accepted")

    report = json.loads(pyqrd.verify("nszkola", 5, 7))
    assert report["passed"], report

    print("pyqrd smoke test passed")


if __name__ == "__main__":
    main()
