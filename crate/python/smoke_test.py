"""Smoke test for the local_hodge extension module.

Build and install first:
    pip install maturin
    pip install --no-build-isolation ./crates/python
"""

import json
import math
import random

import local_hodge as lh


def check(label, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {label} {detail}")
    return ok


def main():
    results = []

    mesh = lh.Mesh("unit_square", "simplicial", 3)
    results.append(check("mesh", mesh.num_cells == 128 and mesh.euler_characteristic() == 1, repr(mesh)))

    pair = lh.HodgePair(mesh, 2)
    f = pair.load_vector(lambda x: [2 * math.pi**2 * math.sin(math.pi * x[0]) * math.sin(math.pi * x[1])])
    sol = pair.solve(f, variant="lumped")
    results.append(check("solve", sol["residual"] < 1e-10, f"residual {sol['residual']:.1e} via {sol['solver']}"))
    cons = pair.conservation(sol["sigma"], f)
    results.append(check("conservation", cons["max_cell_residual"] < 1e-10, f"{cons['max_cell_residual']:.1e}"))

    rng = random.Random(0)
    edges = lh.HodgePair(lh.Mesh("unit_square", "cubical", 3), 1)
    u = [rng.uniform(-1, 1) for _ in range(edges.u_dim)]
    local = edges.coderivative_local(u)
    glob = edges.coderivative_global(u, variant="lumped")
    gap = max(abs(a - b) for a, b in zip(local, glob))
    results.append(check("block equivalence", gap < 1e-12, f"{gap:.1e}"))
    results.append(check("adjointness", edges.adjoint_residual(u, local) < 1e-10))
    probe = edges.locality_probe(u, 0, edges.u_dim - 1)
    results.append(check("locality", probe["far"] and probe["max_change"] == 0.0))

    annulus = lh.HodgePair(lh.Mesh("square_with_hole", "simplicial", 2), 1)
    results.append(check("harmonic forms", annulus.harmonic_dim() == 1))

    config = {"domain": "unit_square", "kind": "cubical", "k": 2, "variant": "exact", "levels": [2, 3, 4]}
    report, csv = lh.run_convergence(json.dumps(config))
    results.append(check("convergence", report["passed"], f"final rate {report['final_rate']:.3f}"))
    results.append(check("csv header", csv.splitlines()[0].startswith("level,h,dofs,err_sigma_l2")))

    checks = lh.run_unisolvency(2)
    results.append(check("unisolvency", checks["failed"] == 0, f"{checks['passed']} checks"))

    try:
        lh.HodgePair(mesh, 3)
        results.append(check("rejects bad degree", False))
    except ValueError as e:
        results.append(check("rejects bad degree", True, str(e)))

    print(f"{sum(results)}/{len(results)} smoke checks passed")
    raise SystemExit(0 if all(results) else 1)


if __name__ == "__main__":
    main()
