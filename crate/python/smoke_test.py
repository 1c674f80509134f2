"""Smoke test for the cils_py extension.

Build and install first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/cils_py-*.whl

Then run `python python/smoke_test.py`.
"""

import cils_py

Y = [
    [0.5, 3.7, -0.8, 3.3, 0.3, -3.5, -3.5],
    [1.8, 5.8, -0.5, -0.4, -1.3, -2.7, -2.7],
    [-2.2, -3.1, 2.6, 0.5, -0.4, 1.3, 1.3],
    [0.8, 3.5, -1.1, 2.5, 0.3, -3.0, -3.0],
]
G = [
    [0.5, 0.3, 3.5],
    [1.8, -1.3, 2.7],
    [-2.2, -0.4, -1.3],
    [0.8, 0.3, 3.0],
]
A = [
    [8, 2, 10, 0, 12, 2, 0],
    [4, 6, 9, 1, 14, 5, 2],
    [2, 0, 1, 1, 0, 1, 0],
    [2, 1, 3, 0, 4, 0, 1],
]
X_A = [
    [1, 1, -1, -1, 0, 0, 0],
    [0, -1, -1, 1, 1, 0, 0],
    [0, 1, 0, 1, 0, -1, -1],
]


def check(cond, msg):
    if not cond:
        raise SystemExit("FAIL: " + msg)
    print("ok:", msg)


def main():
    h, u = cils_py.hermite_normal_form(A)
    check(len(h) == 4 and len(u) == 4, "hermite_normal_form shapes")
    check(cils_py.int_rank(X_A) == 3, "int_rank of X_a")

    rows, nodes = cils_py.solve_diophantine_sparse(A, [-1, 0, 1], 4)
    check(len(rows) == 7 and all(r in rows for r in X_A), "seven candidate rows")
    check(nodes >= len(rows), "node count")

    example = cils_py.ProblemInstance(Y, G, A, [-1, 0, 1], 4, 3, d0=0.5)
    check(cils_py.solve(example).x == X_A, "worked example solves to X_a")

    inst, planted = cils_py.generate_instance(3, 7, 4, [-1, 0, 1], seed=3, sigma=0.0)
    res = cils_py.solve(inst)
    check(res.objective < 1e-20 and res.x == planted, "noiseless instance recovered")
    ref = cils_py.oracle_solve(inst)
    check(abs(ref.objective - res.objective) <= 1e-9, "oracle agrees")
    again = cils_py.ProblemInstance.from_json(inst.to_json())
    check(again.to_json() == inst.to_json(), "json round trip")
    check(abs(cils_py.objective(inst.y, inst.g, res.x) - res.objective) < 1e-12, "objective")

    pts = cils_py.sphere_decode([1.0, 0.0], [[1.0, 0.0], [0.0, 1.0]], 0.5, [[-1, 0, 1], [-1, 0, 1]])
    check(pts[0] == ([1, 0], 0.0), "sphere_decode nearest point")

    g = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]]
    x = cils_py.solve_ils_eq([0.9, -1.1, 0.2, 0.0], g, [[1, 1, 0]], [-1, 0, 1], 2)
    check(x == [1, -1, 0], "solve_ils_eq exact")
    cils_py.solve_ils_eq([0.9, -1.1, 0.2, 0.0], g, [[1, 1, 0]], [-1, 0, 1], 2, mode="paper-heuristic")

    identity = [[int(i == j) for j in range(7)] for i in range(7)]
    g1 = [[1.0], [0.5], [0.2], [0.1]]
    try:
        cils_py.solve(cils_py.ProblemInstance(Y, g1, identity, [-1, 0, 1], 4, 1))
        raise SystemExit("FAIL: expected InfeasibleError")
    except cils_py.InfeasibleError:
        check(True, "A = I raises InfeasibleError")

    try:
        cils_py.ProblemInstance(Y, g1, A, [-1, 0, 1], 9, 1)
        raise SystemExit("FAIL: expected ValueError")
    except ValueError:
        check(True, "K > L raises ValueError")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
