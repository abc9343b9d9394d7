"""Smoke test for the permeas Python extension.

Build and install first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/permeas_py-*.whl
"""

import math

import permeas_py as pm


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    tent = pm.Map.zoo("tent")
    assert tent.critical_points == [0.0, 0.5, 1.0]
    assert tent.has_exact_form
    assert close(tent.evaluate(0.3), 0.6)
    assert close(tent.invert_branch(1, 0.5), 0.75)

    points, word = tent.iterate("3/10", 3)
    assert word == [0, 1, 1]
    assert all(close(p, q) for p, q in zip(points, [0.3, 0.6, 0.8, 0.4]))

    cyls = tent.cylinders(2)
    assert [w for w, _, _ in cyls] == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert pm.cylinder_of_word(tent, [0, 1]) == (0.25, 0.5)

    hits = tent.covering_times("3/10", 3)
    assert [h[0] for h in hits] == [2, 3]
    orbits = tent.periodic_points("3/10", 3)
    assert [o.exact for o in orbits] == ["2/5", "2/7"]
    assert all(o.residual == 0.0 for o in orbits)

    golden = pm.Map.zoo("golden")
    assert len(golden.cylinders(2, backend="float")) == 3

    assert close(pm.w1_distance([(0.2, 1.0)], [(0.5, 1.0)]), 0.3)
    h, rate = pm.block_entropy([0, 1, 1] * 1000, 4)
    assert h <= math.log(3) + 1e-12
    assert pm.conditional_information([0, 1, 1] * 1000, 3) < 1e-12

    rows = tent.approximate(seed=2, length=20_000, burn_in=100, l_max=3, base_point=0.3)
    assert [r.l for r in rows] == [2, 3]
    assert abs(rows[0].w1 - 0.15) < 0.02

    rows = golden.approximate(seed=1, length=50_000, l_max=40)
    assert rows and min(r.w1 for r in rows) < 0.1

    try:
        pm.Map.zoo("wobbly").approximate(backend="rational")
    except ValueError:
        pass
    else:
        raise AssertionError("wobbly has no exact form")

    print(pm.REPORT_HEADER)
    for r in rows[:3]:
        print(r)
    print("smoke test passed")


if __name__ == "__main__":
    main()
