"""Smoke test for the exotic_vortex_py extension module.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

import math

import exotic_vortex_py as ev

PAIR = """
[problem]
lambda0 = 1
lambda = 1
radius = 1
q = 1
q = -1
q = 0
q = 1
r = 1
r = 1
vortex1 = -0.5+0i
vortex2 = 0+0i

[grid]
n = 64
"""


def check_charges():
    q, r = ev.toda_charge_family(0.3, 1, -1)
    gram = [[sum(q[a][c] * q[b][c] for c in range(2)) for b in range(2)] for a in range(2)]
    assert max(abs(gram[a][b] - k) for a, b, k in [(0, 0, 2), (0, 1, -1), (1, 0, -1), (1, 1, 2)]) < 1e-12
    assert ev.vacuum_moduli([[1, -1], [0, 1]], [1, 1], 1.0, 1.0) == [1.0, 2.0]


def check_analytic():
    g, h, phi_sq = ev.single_field_eval(1, 1, [0, 0, 1], 0.5 + 0.0j)
    # Taubes with f = z^2: |phi|^2 = (1 - r^2)^2 |2z|^2 / (1 - r^4)^2
    r2 = 0.25
    assert abs(phi_sq - (1 - r2) ** 2 * 4 * r2 / (1 - r2 * r2) ** 2) < 1e-14
    assert abs(math.exp(2 * h) - phi_sq) < 1e-14
    e1, e2 = ev.toda_eval([0, 1], [0, 0, 0.5], -1, 0j)
    assert abs(e1 - 2) < 1e-10 and abs(e2 - 2) < 1e-10
    z = 0.3 - 0.2j
    assert max(abs(a - b) for a, b in zip(ev.toda_eval([0, 1], [0, 0, 0.5], 1, z),
                                          ev.kls_from_minors([0, 1], [0, 0, 0.5], 1, z))) < 1e-12
    try:
        ev.toda_eval([1], [0, 1], -1, 0j)
    except ev.VortexError:
        pass
    else:
        raise AssertionError("constant data must be rejected")


def check_solver():
    sol = ev.solve(PAIR)
    assert sol.final_residual < 1e-10, sol.final_residual
    assert sol.flavours == 2
    z1, = sol.zeros(0)
    z2, = sol.zeros(1)
    assert abs(z1 + 0.5) < sol.spacing and abs(z2) < sol.spacing
    flux = sol.flux()
    assert all(abs(n - 1) < 0.05 for n in flux["contracted_abs"]), flux
    csv = sol.to_csv()
    assert csv.startswith("x,y,h1,h2,phi1_sq,phi2_sq\n")
    assert csv == ev.solve(PAIR).to_csv()
    assert ev.normalize_config(ev.normalize_config(PAIR)) == ev.normalize_config(PAIR)


if __name__ == "__main__":
    check_charges()
    check_analytic()
    check_solver()
    print("smoke test passed")
