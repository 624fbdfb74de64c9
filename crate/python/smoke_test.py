"""Smoke test for the pathvisc_py extension."""

import math
import pathlib
import tempfile

import pathvisc_py as pv

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main():
    flat = pv.Metric.identity(2)
    x, y = [0.1, -0.2], [0.4, 0.2]
    d2 = (0.3**2 + 0.4**2) / 4
    assert abs(flat.energy(x, y) - d2) < 1e-12, flat.energy(x, y)
    gx, gy = flat.grad_energy(x, y)
    assert all(abs(a + b) < 1e-9 for a, b in zip(gx, gy))

    conf = pv.Metric.conformal(2, 0.2)
    assert conf.energy(x, y) > 0
    ups, _, _, converged = conf.probe(samples=40)
    assert ups > 0 and converged > 0

    xi = pv.Signal.zigzag(0.05, 8, 1.0)
    zeta = pv.Signal.linear(0.0, 1.0)
    dp, dm = pv.delta_pm(xi, zeta, 1.0)
    assert abs(dp - 0.05) < 1e-12 and dm == 0.0
    assert abs(pv.theta(1.0, 1.0 / dp) - dp / 2) < 1e-15
    assert pv.Signal.from_csv(xi.to_csv()).values == xi.values

    n, length = 200, 2.0
    h = length / n
    u0 = [-abs(-1.0 + i * h) for i in range(n)]
    times, states = pv.solve(u0, length, pv.Metric.identity(1), pv.Signal.linear(1.0, 0.2), 0.2)
    exact = pv.hopf_lax_flat(u0, length, 1, 0.2)
    err = max(abs(a - b) for a, b in zip(states[-1], exact))
    assert times[0] == 0.0 and math.isclose(times[-1], 0.2)
    assert err < 0.05, err

    with tempfile.TemporaryDirectory() as out:
        code, summary = pv.run("compare1", ROOT / "configs" / "zigzag.ini", out)
        assert code == 0, summary
        assert (pathlib.Path(out) / "report.csv").exists()

    print("smoke test passed")


if __name__ == "__main__":
    main()
