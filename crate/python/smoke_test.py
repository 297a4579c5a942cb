"""Smoke test for the Python bindings: simulate, fit and score."""

import math

import msm


def main():
    w, vecs = msm.grid_spectrum(4, 4)
    assert len(w) == 16 and len(vecs) == 16
    assert all(a >= b for a, b in zip(w, w[1:]))
    assert abs(w[-1]) < 1e-10

    d = msm.simulate(setting=1, seed=3, side=6)
    assert len(d["y"]) == 36 and len(d["x"][0]) == 4

    ols = msm.fit(d["y"], d["x"], model="ols")
    sp = msm.fit(d["y"], d["x"], model="spatialplus", fraction=1.0)
    for a, b in zip(ols["beta_hat"], sp["beta_hat"]):
        for u, v in zip(a, b):
            assert abs(u - v) < 1e-8

    fit = msm.fit(d["y"], d["x"], n_basis=5, rank=2, n_iter=300, n_burn=100, seed=7)
    for lo, est, hi in zip(fit["low"], fit["beta_hat"], fit["high"]):
        for l, e, h in zip(lo, est, hi):
            assert math.isfinite(e) and l <= e <= h

    assert msm.rank_ok(400, 5, 9, 386, 5)
    assert not msm.rank_ok(400, 5, 9, 387, 5)
    assert msm.mab([[[0.3]], [[-0.3]]], [[0.0]]) == 0.0
    assert abs(msm.mse([[[0.3]], [[-0.3]]], [[0.0]]) - 0.09) < 1e-15

    try:
        msm.fit(d["y"], d["x"], n_basis=40)
    except ValueError as e:
        assert "rank" in str(e).lower() or "L" in str(e)
    else:
        raise AssertionError("oversized basis accepted")

    print("smoke test passed:", fit["method"], [round(v, 3) for v in fit["beta_hat"][1]])


if __name__ == "__main__":
    main()
