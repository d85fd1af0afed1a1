"""Smoke test for the mdlab extension module.

Build and install first, e.g. ``maturin build -m crates/python/Cargo.toml``
followed by ``pip install`` of the wheel, then run this file.
"""

import math

import mdlab


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    singlet = mdlab.Model.singlet_onesided()
    assert singlet.kind == "singlet-onesided"
    close(singlet.analytic_correlator([1, 0, 0], [0, 1, 0]), 0.0, 1e-15)

    close(mdlab.m_sphere_pair(math.pi / 2), 2 * math.sqrt(2) - 2, 1e-10)
    report = mdlab.m_supremum(singlet)
    close(report["m"], 2 * math.sqrt(2) - 2, 1e-8)
    close(report["argmax_pair"]["beta"], math.pi / 2, 1e-6)
    close(mdlab.free_will(report["m"]), 2 - math.sqrt(2), 1e-8)
    close(mdlab.mutual_information_onesided(), 1 - 1 / (2 * math.log(2)), 1e-8)

    toy = mdlab.Model.toy_table(0.5)
    quad = [toy.analytic_correlator(x, y) for x in ("X", "X'") for y in ("Y", "Y'")]
    assert mdlab.chsh_max(quad) == (3.0, 0)
    assert mdlab.bound_check(3.0, 1.0)["satisfied"]

    est = mdlab.estimate_correlator(singlet, [0, 0, 1], [0, 0, 1], 100_000, seed=1)
    close(est["mean"], -1.0, 5 * max(est["std_error"], 1e-12))
    again = mdlab.estimate_correlator(singlet, [0, 0, 1], [0, 0, 1], 100_000, seed=1)
    assert est == again

    close(mdlab.min_m_for_chsh(3.0)["m_star"], 1.0, 1e-9)
    close(mdlab.min_m_for_correlators([1, 1, 1, -1])["m_star"], 2.0, 1e-9)

    table = mdlab.run("table", p=0.25, shots=10_000)
    assert table["results"]["chsh_b"] == 2.5

    for bad in (lambda: mdlab.Model.toy_table(1.5), lambda: mdlab.unit(0, 0, 0),
                lambda: mdlab.run("chsh", sedd=3)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    print("smoke test passed")


if __name__ == "__main__":
    main()
