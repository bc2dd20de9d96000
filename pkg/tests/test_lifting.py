import numpy as np
import pytest

from ctrlinterlace.errors import IllPosedLoop, ScheduleError
from ctrlinterlace.interlace import (InputStrategy, InterlaceSchedule, OutputStrategy,
                                     to_slow_block)
from ctrlinterlace.lifting import (LiftedSystem, augment_block, close_loop, compose_open_loop,
                                   delift_signal, input_selector, interlaced_loops,
                                   lift_dual_rate, lift_rates, lift_signal,
                                   output_hold_pattern, series, simulate_lifted,
                                   spectral_radius)
from ctrlinterlace.sim import DifferenceEquation, run_controller
from ctrlinterlace.tfcore import StateSpace

from conftest import random_loop, random_stable_plant

STRATEGIES = [(i, o) for i in InputStrategy for o in OutputStrategy]


def step_fast(ss, u):
    x = np.zeros(ss.n_states)
    y = np.empty(len(u))
    for k, uk in enumerate(u):
        y[k] = (ss.C @ x + ss.D[:, 0] * uk)[0]
        x = ss.A @ x + ss.B[:, 0] * uk
    return y


def random_ss(rng, n=3, proper=True):
    A = rng.normal(size=(n, n))
    A *= 0.8 / max(np.abs(np.linalg.eigvals(A)))
    D = rng.normal(size=(1, 1)) if proper else np.zeros((1, 1))
    return StateSpace(A, rng.normal(size=(n, 1)), rng.normal(size=(1, n)), D, 0.1)


# ---------------------------------------------------------------- lifting

def test_lift_four_to_one_structure():
    rng = np.random.default_rng(0)
    ss = random_ss(rng, proper=False)
    A, B, C = ss.A, ss.B, ss.C
    L = lift_dual_rate(ss, 4, 1, output_instant="end")
    mp = np.linalg.matrix_power
    assert np.allclose(L.A, mp(A, 4), atol=1e-12)
    assert np.allclose(L.B, np.hstack([mp(A, 3) @ B, mp(A, 2) @ B, A @ B, B]), atol=1e-12)
    assert np.allclose(L.C, C @ mp(A, 4), atol=1e-12)
    assert np.allclose(L.D, np.hstack([C @ mp(A, 3) @ B, C @ mp(A, 2) @ B, C @ A @ B, C @ B]),
                       atol=1e-12)
    assert L.T0 == pytest.approx(0.4)
    assert (L.Nu, L.Ny) == (4, 1)


def test_lift_end_requires_strictly_proper():
    with pytest.raises(ValueError):
        lift_dual_rate(random_ss(np.random.default_rng(1)), 2, 1, output_instant="end")


@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_full_lift_matches_stepping(N):
    rng = np.random.default_rng(N)
    ss = random_ss(rng)
    u = rng.normal(size=20 * N)
    y = step_fast(ss, u)
    L = lift_dual_rate(ss, N, N)
    Y = simulate_lifted(L, lift_signal(u, N))
    assert np.allclose(delift_signal(Y), y, atol=1e-12)
    # causality: lifted feedthrough is lower triangular
    assert np.allclose(np.triu(L.D, 1), 0.0)


def test_multirate_lift_matches_stepping():
    rng = np.random.default_rng(4)
    ss = random_ss(rng)
    L = lift_rates(ss, 0.2, 0.3)           # Nu=3, Ny=2 over a 0.6 s metaperiod
    assert (L.Nu, L.Ny, L.T0) == (3, 2, pytest.approx(0.6))
    U = rng.normal(size=(15, 3))
    u_fast = np.repeat(U.reshape(-1), 2)
    y_fast = step_fast(ss, u_fast)
    Y = simulate_lifted(L, U)
    assert np.allclose(Y.reshape(-1), y_fast[::3], atol=1e-12)
    with pytest.raises(ValueError):
        lift_rates(ss, 0.15, 0.3)


def test_signal_roundtrip_and_length_check():
    x = np.arange(12.0)
    assert np.array_equal(delift_signal(lift_signal(x, 3)), x)
    with pytest.raises(ValueError):
        lift_signal(np.arange(10.0), 3)


# ---------------------------------------------------------------- selectors and dummy state

def test_selectors():
    assert list(input_selector(2, 3)) == [0, 0, 1]
    assert list(input_selector(2, 3, InputStrategy.I2_SLOW)) == [1, 0, 0]
    stale, fresh = output_hold_pattern(1, 3)
    assert list(stale) == [1, 0, 0] and list(fresh) == [0, 1, 1]
    stale, fresh = output_hold_pattern(0, 3)
    assert list(stale) == [0, 0, 0] and list(fresh) == [1, 1, 1]
    stale, fresh = output_hold_pattern(2, 3, OutputStrategy.O2_SLOW_CHANGE)
    assert list(stale) == [1, 1, 1] and list(fresh) == [0, 0, 0]
    with pytest.raises(ValueError):
        input_selector(3, 3)


def test_augmented_block_outputs(ref_blocks):
    slow = to_slow_block(ref_blocks.slow_blocks[0], 3)
    aug = augment_block(slow)
    de = DifferenceEquation(slow.tf)
    rng = np.random.default_rng(2)
    e = rng.normal(size=25)
    x = np.zeros(aug.n_states)
    prev = 0.0
    for ek in e:
        fresh = aug.C_fresh @ x + aug.D_fresh * ek
        stale = aug.C_stale @ x
        out = de.step(ek)
        assert fresh[0] == pytest.approx(out, abs=1e-12)
        assert stale[0] == pytest.approx(prev, abs=1e-12)
        prev = out
        x = aug.A @ x + aug.B[:, 0] * ek


# ---------------------------------------------------------------- composed controller

@pytest.mark.parametrize("strategy", STRATEGIES)
def test_composed_controller_matches_executor(ref_blocks, strategy):
    rng = np.random.default_rng(11)
    e = rng.normal(size=60)
    for order in ([0, 1, 2], [2, 0, 1], [1, 2, 0]):
        sched = InterlaceSchedule.from_order(order, 3, *strategy)
        K = compose_open_loop(ref_blocks, sched)
        u_lift = delift_signal(simulate_lifted(K, lift_signal(e, 3)))
        u_exec, _ = run_controller(ref_blocks, sched, e)
        assert np.allclose(u_lift, u_exec, atol=1e-9)


def test_composed_controller_rejects_bad_schedule(ref_blocks):
    with pytest.raises(ScheduleError):
        compose_open_loop(ref_blocks, InterlaceSchedule(3, (0, 0, 1)))


def test_composed_dc_gain_equals_controller(ref_blocks):
    # with the double integrator removed the DC gain is finite
    from ctrlinterlace.decomposition import BlockSet
    bs = BlockSet(ref_blocks.fast, ref_blocks.slow_blocks[1:])
    K = compose_open_loop(bs, InterlaceSchedule(3, (0, 1)))
    expected = bs.evaluate(1.0).real
    # a constant error yields the same constant control at every lifted sample
    assert np.allclose(K.dc_gain().sum(axis=1), expected, rtol=1e-9)


# ---------------------------------------------------------------- closing the loop

def test_series_and_close_loop_against_stepping():
    rng = np.random.default_rng(3)
    P = random_stable_plant(rng)
    K = StateSpace([[0.5]], [[1.0]], [[0.3]], [[0.4]], 0.1)
    Kl, Pl = (lift_dual_rate(s, 2, 2) for s in (K, P))
    cl = close_loop(Kl, Pl)
    r = rng.normal(size=40)
    xk, xp = np.zeros(1), np.zeros(P.n_states)
    y = np.empty(len(r))
    for k, rk in enumerate(r):
        y[k] = (P.C @ xp)[0]
        e = rk - y[k]
        u = (K.C @ xk)[0] + K.D[0, 0] * e
        xk = K.A @ xk + K.B[:, 0] * e
        xp = P.A @ xp + P.B[:, 0] * u
    Y = simulate_lifted(cl, lift_signal(r, 2))
    assert np.allclose(delift_signal(Y), y, atol=1e-12)
    ol = series(Kl, Pl)
    assert ol.D.shape == (2, 2) and ol.n_states == 1 + P.n_states


def test_close_loop_dc_matches_simulation():
    rng = np.random.default_rng(8)
    for _ in range(20):
        blocks, plant = random_loop(rng)
        sched = InterlaceSchedule(3, tuple(range(len(blocks.slow_blocks))))
        _, cl = interlaced_loops(blocks, sched, plant)
        if spectral_radius(cl) > 0.98:
            continue
        Y = simulate_lifted(cl, np.ones((4000, 3)))
        assert np.allclose(Y[-1], cl.dc_gain().sum(axis=1), atol=1e-6)


def test_ill_posed_loop_rejected():
    K = LiftedSystem(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[1.0]], 0.1)
    P = LiftedSystem(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[-1.0]], 0.1)
    with pytest.raises(IllPosedLoop):
        close_loop(K, P)


def test_incompatible_metaperiods_rejected():
    rng = np.random.default_rng(0)
    ss = random_ss(rng)
    with pytest.raises(ValueError):
        series(lift_dual_rate(ss, 2, 2), lift_dual_rate(ss, 3, 3))


def test_reference_loops_stable(ref_blocks, ref_plant):
    for strategy in STRATEGIES:
        sched = InterlaceSchedule.from_order([2, 0, 1], 3, *strategy)
        _, cl = interlaced_loops(ref_blocks, sched, ref_plant)
        assert spectral_radius(cl) < 1.0


# ---------------------------------------------------------------- shifted solves

def test_solve_shifted_matches_dense_solve():
    from ctrlinterlace.lifting import solve_shifted
    rng = np.random.default_rng(6)
    for n in (1, 3, 6):
        A = rng.normal(size=(n, n))
        B = rng.normal(size=(n, 2))
        z = 1.5 + 0.5j
        assert np.allclose(solve_shifted(A, z, B), np.linalg.solve(z * np.eye(n) - A, B))
        L = np.tril(A)
        L[0, 0] = 0.3
        assert np.allclose(solve_shifted(L, z, B), np.linalg.solve(z * np.eye(n) - L, B))


def test_solve_shifted_jordan_chain_accuracy():
    # chain of unit poles: exact answer 1/(z-1)^k for the k-th state
    from ctrlinterlace.lifting import solve_shifted
    A = np.eye(3) + np.diag([1.0, 1.0], -1)
    B = np.array([[1.0], [0.0], [0.0]])
    z = np.exp(1e-3j)
    x = solve_shifted(A, z, B)[:, 0]
    exact = np.array([(z - 1) ** -k for k in (1, 2, 3)])
    assert np.max(np.abs(x - exact) / np.abs(exact)) < 1e-13
