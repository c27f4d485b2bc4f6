"""Smoke test for the sashimi_py extension module.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`,
then run `python crates/python/python/smoke_test.py`.
"""

import math
import random

import sashimi_py as sp


def toy_pattern(n=600, seed=7):
    rng = random.Random(seed)
    xs = [rng.uniform(0, 100) for _ in range(n)]
    ys = [rng.uniform(0, 100) for _ in range(n)]
    types = [rng.choice(["tumor", "immune", "stromal"]) for _ in range(n)]
    return sp.Pattern(xs, ys, types, window=(0.0, 100.0, 0.0, 100.0))


def main():
    pat = toy_pattern()
    assert len(pat) == 600
    assert sorted(pat.types()) == ["immune", "stromal", "tumor"]
    again = sp.Pattern.from_csv(pat.to_csv())
    assert len(again) == len(pat)

    r = sp.default_rgrid(pat, bins=64)
    k = sp.summary(pat, "K", r=r)
    mid = len(r) // 2
    assert abs(k["estimate"][mid] / k["theoretical"][mid] - 1.0) < 0.25
    cross = sp.summary(pat, "PCF", r=r, of_type="tumor", to_type="immune")
    assert cross["name"] == "PCF.CROSS" and len(cross["estimate"]) == 64
    mcf = sp.summary(pat, "MCF", r=r, of_type="tumor", to_type="immune")
    assert len(mcf["estimate"]) == 64

    assert sp.morans_i([1, 0, 0, 1], "rook") == -1.0
    assert abs(sp.gearys_c([1, 0, 0, 1], "rook") - 1.5) < 1e-12
    assert sp.join_counts([True, False, False, True], "rook") == (0.0, 4.0, 0.0)
    assert abs(sp.similarity("dice", [1, 1, 0], [1, 0, 1]) - 0.5) < 1e-12
    stat, dof, p = sp.quadrat_test([4, 0, 0, 0])
    assert stat == 12.0 and dof == 3 and 0.0 < p < 0.01
    counts = sp.quadrat_counts(pat, q=10, of_type="tumor")
    assert len(counts) == 100 and sum(counts) == len(pat.coords("tumor"))
    assert 0.5 < sp.clark_evans(pat) < 1.5

    circle = [(math.cos(2 * math.pi * i / 8), math.sin(2 * math.pi * i / 8)) for i in range(8)]
    dense = [(math.cos(2 * math.pi * i / 64), math.sin(2 * math.pi * i / 64)) for i in range(64)]
    diagram = sp.witness_persistence(circle, dense, max_eps=2.0)
    loops = [d for d in diagram if d[0] == 1 and d[2] - d[1] > 0.5]
    assert loops, diagram

    grid = [i / 49 for i in range(50)]
    curves = [[a * math.sin(math.pi * t) for t in grid] for a in (1.0, 2.0, -1.0, 0.5)]
    res = sp.fpca(grid, curves)
    assert res["variance_explained"][0] > 0.999

    features, reasons = sp.extract(pat, types=["tumor", "immune", "stromal"], config='{"bins": 64}')
    assert "PCF.CROSS.T2I.PC1" in features and "MH.IS" in features
    assert "witness_tumor_stromal_h0_lifetime_max" in features
    assert math.isnan(features["K.REP.PC1"]) and "K.REP.PC1" in reasons
    assert math.isfinite(features["MoranI.T"])
    print(f"ok: {len(features)} features")


if __name__ == "__main__":
    main()
