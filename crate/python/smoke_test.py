"""Smoke test for the qburgers_py extension."""

import math

import qburgers_py as qb


def main():
    n, d = 3, 3
    k = qb.ansatz_param_count(n, d)
    u_t = qb.ansatz(n, d, [0.1 * i for i in range(k)])
    u_l = qb.ansatz(n, d, [0.3 - 0.2 * i for i in range(k)], "cu_alt")
    assert u_t.width == n + 1 and u_t.ancilla == 0

    text = u_t.text()
    assert qb.Circuit.parse(text).text() == text

    amps = u_t.statevector()
    assert abs(sum(abs(a) ** 2 for a in amps) - 1.0) < 1e-12

    for kind in ["overlap", "shift_plus", "shift_minus", "shiftdiag_plus", "shiftdiag_minus"]:
        c = qb.gterm_circuit(kind, u_t, u_l)
        amps = c.statevector()
        z = sum((1 if (i & 1) == 0 else -1) * abs(a) ** 2 for i, a in enumerate(amps))
        ref = qb.gterm_reference(kind, u_t, u_l)
        assert abs(z - ref.real) < 1e-10, (kind, z, ref)
        elided = c.elide()
        assert elided.gate_counts("ion")["g2"] <= c.gate_counts("ion")["g2"]

    rows = qb.gatecount(3)
    ion = {r["scheme"]: r["g2"] for r in rows if r["architecture"] == "ion" and r["granularity"] == "shiftdiag"}
    assert ion["conventional"] >= 3 * ion["low-depth"], ion

    u = [math.exp(-((0.25 * i - 1.0) ** 2) / 0.18) for i in range(8)]
    assert len(qb.classical_step(u, 0.0, 2.0, 0.025, 1e-3)) == 8

    params, inf = qb.fit_initial()
    assert inf < 1e-4, inf
    run = qb.burgers_run("[grid]\nsteps = 4\n")
    assert max(run["infidelity"]) < 1e-2
    assert "aqt-ibex" in qb.noise_profiles()
    print("smoke test passed: fit infidelity %.2e, ION g2 %s" % (inf, ion))


if __name__ == "__main__":
    main()
