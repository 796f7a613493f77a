"""Smoke test for the vbma_py extension module."""

import math

import vbma_py


def main():
    cfg = vbma_py.VortexConfig(r1=3, r2=2, n=32)
    assert cfg.is_stable and abs(cfg.juncture_target - 1.4) < 1e-12

    sol = vbma_py.solve(cfg)
    assert sol.converged and sol.t_final == 1.0
    mon = sol.monitors()
    assert abs(mon["degree"] - 1.0) < 1e-8
    assert abs(mon["juncture_value"] - 1.4) < 1e-6
    assert len(sol.psi) == 32 * 32 and max(sol.phi2) < 1.0
    rep = sol.verify(cp1_points=2)
    assert rep["passed"], rep
    print(f"solve (3,2) n=32: residual {sol.final_residual:.2e}, juncture {mon['juncture_value']:.10f}")

    try:
        vbma_py.solve(vbma_py.VortexConfig(r1=2, r2=3, n=16))
    except vbma_py.SolveFailure as exc:
        print(f"unstable ranks rejected: {exc}")
    else:
        raise AssertionError("unstable ranks accepted")

    fs = vbma_py.EndoForm.fubini_study()
    assert fs.wedge_square() == [[3, 0], [0, 3]]
    assert fs.nakano_check()["margin"] == 0.0
    assert fs.ma_check()["positive"]
    assert fs.griffiths_check(256)["positive"]
    assert fs.chern_gap() == -6.0

    form = vbma_py.EndoForm([[1.1, 0], [0, 0.1]], [[0, 0], [1, 0]], [[0.1, 0], [0, 1.1]])
    assert form.nakano_check()["positive"] and not form.ma_check()["positive"]
    print(f"Nakano margin {form.nakano_check()['margin']:.3f}, MA margin {form.ma_check()['margin']:.3f}")

    slopes = vbma_py.ma_slopes(3, 2)
    assert slopes["mu_ma_sub"] == "8" and slopes["mu_ma_total"] == "17/2"
    assert vbma_py.mumford_gap(5, 2) == -6

    lam, res = vbma_py.fs_power([0.3 + 0.1j, -0.2j])
    assert abs(lam - 1.5) < 1e-12 and res < 1e-12
    report = vbma_py.fs_lambda(2, [[0.5, 0.5j]])
    assert report["discrepancy"] and report["matches_derived"]
    print(f"CP^2 lambda {lam:.12f} (literature value {report['literature_value']})")

    assert math.isclose(cfg.mu, 34.0)
    print("smoke ok")


if __name__ == "__main__":
    main()
