"""Shared random-system generators and the reference case."""

import numpy as np
import pytest

from ctrlinterlace import reference
from ctrlinterlace.decomposition import decompose
from ctrlinterlace.tfcore import RationalTF, StateSpace


def random_stable_plant(rng, T=0.1, order=2):
    """Strictly proper discrete plant with poles inside radius 0.9."""
    A = rng.normal(size=(order, order))
    A *= rng.uniform(0.3, 0.9) / max(np.abs(np.linalg.eigvals(A)))
    B = rng.normal(size=(order, 1))
    C = rng.normal(size=(1, order))
    C *= 0.5 / max(1e-3, abs((C @ np.linalg.solve(np.eye(order) - A, B))[0, 0]))
    return StateSpace(A, B, C, np.zeros((1, 1)), T)


def random_controller(rng, T=0.1, n_slow=None):
    """Controller with one fast real pole and a mix of slow pole groups.

    Slow groups are drawn from: real pole in (0.86, 0.97), complex pair of
    radius in (0.88, 0.97).  The numerator is random with the same degree
    as the denominator minus one.
    """
    n_slow = rng.integers(1, 4) if n_slow is None else n_slow
    poles = [rng.uniform(0.1, 0.6)]
    for _ in range(n_slow):
        if rng.random() < 0.5:
            poles.append(rng.uniform(0.86, 0.97))
        else:
            r, th = rng.uniform(0.88, 0.97), rng.uniform(0.05, 0.6)
            poles += [r * np.exp(1j * th), r * np.exp(-1j * th)]
    zeros = list(rng.uniform(-0.5, 0.95, size=len(poles) - 1))
    return RationalTF.from_zpk(zeros, poles, rng.uniform(0.05, 0.3), T)


def random_loop(rng, T=0.1, n_slow=None):
    """(blocks, plant) pair for interlacing experiments."""
    c = random_controller(rng, T, n_slow)
    return decompose(c, 0.85), random_stable_plant(rng, T)


@pytest.fixture(scope="session")
def ref_controller():
    return reference.controller()


@pytest.fixture(scope="session")
def ref_plant():
    return reference.plant()


@pytest.fixture(scope="session")
def ref_blocks(ref_controller):
    return decompose(ref_controller, reference.THRESHOLD)


def stable_interlaced_loop(rng, N, rho_max=0.97):
    """``(blocks, plant, order)`` whose interlaced loop is stable for every strategy.

    The controller has ``N`` slow groups, so the schedule is full.  Plant
    and controller are both stable, so shrinking the controller gain
    eventually stabilizes the loop; the first gain scale that keeps the
    spectral radius below ``rho_max`` for all four strategies is used.
    """
    from ctrlinterlace.interlace import InputStrategy, InterlaceSchedule, OutputStrategy
    from ctrlinterlace.lifting import interlaced_loops, spectral_radius

    while True:
        c = random_controller(rng, n_slow=N)
        plant = random_stable_plant(rng)
        order = [int(b) for b in rng.permutation(N)]
        for scale in (1.0, 0.3, 0.1, 0.03, 0.01):
            blocks = decompose(c * scale, 0.85)
            if len(blocks.slow_blocks) != N:
                break
            rhos = [spectral_radius(interlaced_loops(
                        blocks, InterlaceSchedule.from_order(order, N, i, o), plant)[1])
                    for i in InputStrategy for o in OutputStrategy]
            if max(rhos) < rho_max:
                return blocks, plant, order
