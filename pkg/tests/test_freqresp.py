import csv

import numpy as np
import pytest

from ctrlinterlace.errors import SingularResponse
from ctrlinterlace.freqresp import (bandwidth, bode_columns, bode_sweep, default_grid,
                                    dual_rate_response, margins, ripple_index, t0_sum_response,
                                    write_bode_csv)
from ctrlinterlace.interlace import InterlaceSchedule
from ctrlinterlace.lifting import LiftedSystem, interlaced_loops, lift_dual_rate
from ctrlinterlace.sim import run_interlaced, sinusoid_probe
from ctrlinterlace.tfcore import RationalTF, StateSpace, tf_to_ss

from conftest import random_stable_plant


def test_single_rate_reduction():
    rng = np.random.default_rng(0)
    P = random_stable_plant(rng, order=3)
    tf_eval = lambda z: (P.C @ np.linalg.solve(z * np.eye(3) - P.A, P.B))[0, 0]
    lifted = lift_dual_rate(P, 3, 3)
    plain = LiftedSystem.from_statespace(P)
    for w in np.linspace(0.05, np.pi / 0.1 - 0.05, 200):
        expected = tf_eval(np.exp(1j * w * 0.1))
        fc1 = dual_rate_response(plain, w)
        assert abs(fc1.components[0] - expected) < 1e-12 * max(1, abs(expected))
        fc3 = dual_rate_response(lifted, w)
        assert abs(fc3.components[0] - expected) < 1e-12 * max(1, abs(expected))
        assert np.all(np.abs(fc3.components[1:]) < 1e-12)
        assert ripple_index(fc3) < 1e-10


def test_component_frequencies():
    P = random_stable_plant(np.random.default_rng(1))
    fc = dual_rate_response(lift_dual_rate(P, 4, 4), 2.0)
    assert np.allclose(fc.omegas_r, 2.0 + 2 * np.pi * np.arange(4) / 0.4)
    assert len(fc) == 4


def test_conjugate_symmetry(ref_blocks, ref_plant):
    ol, _ = interlaced_loops(ref_blocks, InterlaceSchedule.from_order([2, 0, 1], 3), ref_plant)
    T0 = ol.T0
    for w in (0.7, 3.1, 9.0):
        a = dual_rate_response(ol, w).components
        b = dual_rate_response(ol, -w).components
        # component r at w pairs with component (-r mod N) at -w
        for r in range(3):
            assert b[(-r) % 3] == pytest.approx(np.conj(a[r]), abs=1e-10)
    assert T0 == pytest.approx(0.3)


def test_static_gain_flat():
    gain = StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[2.5]], 0.1)
    data = bode_sweep(lift_dual_rate(gain, 3, 3), default_grid(0.1, 50))
    assert np.allclose(data.mag_db(0), 20 * np.log10(2.5))
    assert np.allclose(data.phase_deg(0), 0.0)
    assert np.allclose(data.t0, 2.5)


def test_integrator_margins():
    T, k = 0.1, 0.2
    loop = tf_to_ss(RationalTF([k], [-1.0, 1.0], T))
    data = bode_sweep(LiftedSystem.from_statespace(loop), default_grid(T, 2000, 4))
    m = margins(data)
    # |k/(e^{jwT}-1)| = 1 at 2 sin(wT/2) = k ; phase -(pi/2 + wT/2)
    wc = 2 * np.arcsin(k / 2) / T
    assert m.gain_crossover == pytest.approx(wc, rel=1e-3)
    assert m.phase_margin == pytest.approx(90 - np.degrees(wc * T / 2), abs=0.05)
    # phase only touches -180 deg at Nyquist, so there is no crossing
    assert np.isinf(m.gain_margin_db)
    # one extra delay: phase -(pi/2 + 3wT/2) crosses -180 deg at wT = pi/3, |L| = k
    delayed = tf_to_ss(RationalTF([k], [0.0, -1.0, 1.0], T))
    m = margins(bode_sweep(LiftedSystem.from_statespace(delayed), default_grid(T, 2000, 4)))
    assert m.phase_crossover == pytest.approx(np.pi / 3 / T, rel=1e-3)
    assert m.gain_margin_db == pytest.approx(-20 * np.log10(k), abs=0.02)


def test_no_crossover_is_infinite():
    small = tf_to_ss(RationalTF([0.01], [-0.5, 1.0], 0.1))
    m = margins(bode_sweep(LiftedSystem.from_statespace(small), default_grid(0.1, 100)))
    assert np.isinf(m.phase_margin) and m.infinite


def test_bandwidth_first_order():
    T = 0.1
    a = 0.9
    cl = tf_to_ss(RationalTF([1 - a], [-a, 1.0], T))
    data = bode_sweep(LiftedSystem.from_statespace(cl), default_grid(T, 3000, 3))
    wb = bandwidth(data)
    z = np.exp(1j * wb * T)
    assert abs((1 - a) / (z - a)) == pytest.approx(10 ** (-3 / 20), rel=1e-3)


def test_singular_response_and_sweep_continues():
    integ = LiftedSystem.from_statespace(tf_to_ss(RationalTF([1.0], [-1.0, 1.0], 0.1)))
    w_sing = 2 * np.pi / 0.1 / 2
    lifted = lift_dual_rate(tf_to_ss(RationalTF([1.0], [1.0, 1.0], 0.1)), 1, 1)
    with pytest.raises(SingularResponse):
        dual_rate_response(lifted, w_sing)
    data = bode_sweep(lifted, np.array([1.0, w_sing]))
    assert data.singular == [pytest.approx(w_sing)]
    assert np.isnan(data.t0[1]) and np.isfinite(data.t0[0])
    assert np.isfinite(dual_rate_response(integ, 0.5).components[0])


def test_ripple_undefined_raises():
    from ctrlinterlace.freqresp import FreqComponents
    with pytest.raises(ZeroDivisionError):
        ripple_index(FreqComponents(1.0, np.array([0.0, 1.0]), np.array([1.0, 2.0])))


def test_grid_validation():
    P = LiftedSystem.from_statespace(random_stable_plant(np.random.default_rng(2)))
    with pytest.raises(ValueError):
        bode_sweep(P, np.array([2.0, 1.0]))
    with pytest.raises(ValueError):
        bode_sweep(P, np.array([1.0, 100.0]))
    g = default_grid(0.1, 400, 3.0)
    assert g[-1] == pytest.approx(np.pi / 0.1) and g[0] == pytest.approx(np.pi / 0.1 / 1000)


def test_bode_csv(tmp_path, ref_blocks, ref_plant):
    ol, _ = interlaced_loops(ref_blocks, InterlaceSchedule.from_order([2, 0, 1], 3), ref_plant)
    data = bode_sweep(ol, default_grid(0.1, 7))
    path = tmp_path / "bode.csv"
    write_bode_csv(data, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == bode_columns(3)
    assert rows[0][:3] == ["omega_rad_s", "mag_db_0", "phase_deg_0"]
    assert len(rows) == 8 and all(len(r) == 9 for r in rows)
    assert float(rows[-1][-2]) == pytest.approx(data.mag_db()[-1])


def test_components_match_time_domain_probe(ref_blocks, ref_plant):
    sched = InterlaceSchedule.from_order([2, 0, 1], 3)
    _, cl = interlaced_loops(ref_blocks, sched, ref_plant)
    runner = lambda r: run_interlaced(ref_blocks, sched, ref_plant, r).output.values
    for w in (0.5, 4.0, 13.0):
        fc = dual_rate_response(cl, w)
        # the slowest mode has |lambda| ~ 0.993 per metaperiod: discard 3000
        probe = sinusoid_probe(runner, w, 0.1, 3, metaperiods=4000, discard=3000)
        assert np.allclose(probe, fc.components, atol=1e-6)
        assert t0_sum_response(fc) == pytest.approx(np.sum(probe), abs=1e-6)
