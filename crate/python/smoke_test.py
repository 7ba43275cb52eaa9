"""Smoke test for the ofdm_secrecy extension module.

Build it first, e.g. `maturin develop -m crates/py/Cargo.toml`.
"""

import math

import ofdm_secrecy as osc


def main():
    qpsk = osc.Constellation.psk(4)
    assert len(qpsk) == 4 and abs(qpsk.entropy() - 2.0) < 1e-12
    assert osc.Constellation.by_name("qam16").label

    ev = osc.MiEvaluator(qpsk)
    i1 = ev.mutual_info(1.0)
    est, se = osc.monte_carlo_mi(qpsk, 1.0, 200_000, 3)
    assert abs(i1 - est) < 4 * se, (i1, est, se)
    assert 0.0 < ev.mmse(1.0) < 1.0
    assert osc.gaussian_mi(1.0) == 1.0

    model = osc.InputModel(qpsk)
    ch = osc.SubcarrierChannel(1.0, 0.25)
    assert model.subcarrier_rate(ch, 0.0) == 0.0
    assert model.subcarrier_rate(ch, 5.0) > 0.0

    chans = osc.iid_rayleigh(16, seed=4)
    sol = osc.solve_dual(model, chans, 1.0)
    powers = sol["powers"]
    assert len(powers) == 16
    assert sum(powers) / 16 <= 1.0 + 1e-9
    assert sol["gap"] >= -1e-9
    eq = model.total_rate(chans, osc.equal_pa(chans, 1.0), 1.0)
    assert sol["primal_value"] >= eq - 1e-9, (sol["primal_value"], eq)

    g_powers, u = osc.gaussian_optimal_pa(chans, 1.0)
    assert abs(sum(g_powers) / 16 - 1.0) < 1e-6 and u > 0

    tiny = chans[:2]
    bf_powers, bf_rate = osc.brute_force_solve(model, tiny, 1.0, 100)
    dual = osc.solve_dual(model, tiny, 1.0)
    assert bf_rate - dual["primal_value"] < 1e-3

    mp = osc.multipath(8, [1.0, 0.4 - 0.2j], [0.5, 0.1j])
    assert len(mp) == 8 and all(math.isfinite(c.h_gain) for c in mp)

    try:
        osc.Constellation.square_qam(8)
    except ValueError:
        pass
    else:
        raise AssertionError("qam8 should be rejected")

    print(f"ok: I(1)={i1:.6f}, dual rate {sol['primal_value']:.4f} vs equal {eq:.4f}")


if __name__ == "__main__":
    main()
