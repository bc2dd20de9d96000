"""Fast-rate simulation of interlaced and single-rate control loops.

The interlaced controller is executed the way an embedded target would run
it: each term is a difference equation, the fast part runs every instant and
one slow block runs per instant according to the schedule.  Nothing here is
derived from the lifted models, which makes these runs an independent check
of :mod:`ctrlinterlace.lifting` and :mod:`ctrlinterlace.freqresp`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .decomposition import BlockSet
from .errors import DivergenceError, ScheduleError
from .interlace import (InputStrategy, InterlaceSchedule, OutputStrategy, to_slow_block,
                        validate_schedule)
from .tfcore import RationalTF, SignalSeq, StateSpace

__all__ = [
    "DIVERGENCE_LIMIT",
    "SimRun",
    "DifferenceEquation",
    "InterlacedController",
    "run_controller",
    "run_interlaced",
    "run_single_rate",
    "sinusoid_probe",
    "step_reference",
    "settling_time",
    "overshoot",
    "write_simrun_csv",
]

DIVERGENCE_LIMIT = 1e9
SIMRUN_COLUMNS = ("t_seconds", "reference", "output", "control", "mac_count")


class DifferenceEquation:
    """Direct-form realization of a proper transfer function.

    ``y[k] = sum_j b_j e[k-j] - sum_{j>=1} a_j y[k-j]`` with only the taps
    implied by the polynomial degrees.  ``macs`` counts every multiply
    performed so far.
    """

    def __init__(self, tf: RationalTF):
        n = tf.den.degree
        self.n = n
        den = tf.den.coeffs / tf.den.lead
        self.a = den[n - 1::-1] if n > 0 else np.zeros(0)         # a_1..a_n
        if tf.num.is_zero:
            self.b, self.delay = np.zeros(0), 0
        else:
            self.delay = n - tf.num.degree                          # first nonzero tap
            num = tf.num.coeffs / tf.den.lead
            self.b = num[::-1]                                       # b_delay..b_n
        self.e_hist = [0.0] * (n + 1)
        self.y_hist = [0.0] * n
        self.macs = 0

    @property
    def cost(self):
        return len(self.b) + len(self.a) if len(self.b) else 0

    def step(self, e: float) -> float:
        if self.n == 0 and len(self.b) == 0:
            return 0.0
        self.e_hist.insert(0, e)
        self.e_hist.pop()
        y = 0.0
        for i, bj in enumerate(self.b):
            y += bj * self.e_hist[self.delay + i]
            self.macs += 1
        for j, aj in enumerate(self.a):
            y -= aj * self.y_hist[j]
            self.macs += 1
        if self.n:
            self.y_hist.insert(0, y)
            self.y_hist.pop()
        return y


class InterlacedController:
    """Phase-switched executor of a parallel block set.

    At fast instant ``k`` (phase ``q = k mod N``) the fast part always runs;
    the slow block scheduled at ``q`` runs on the current error (fast input)
    or on the error latched at phase 0 (slow input).  With fast-change output
    its result enters the control sum immediately and is held; with
    slow-change output it is stored and the stored sum is injected at the
    next phase 0.
    """

    def __init__(self, blocks: BlockSet, sched: InterlaceSchedule):
        report = validate_schedule(sched, blocks)
        if not report.ok:
            raise ScheduleError("; ".join(report.violations))
        self.sched = sched
        self.N = sched.N
        self.fast = DifferenceEquation(blocks.fast)
        self.slow = [DifferenceEquation(to_slow_block(b, sched.N).tf) for b in blocks.slow_blocks]
        self.block_at = sched.order
        self.held = [0.0] * len(self.slow)
        self.injected = 0.0
        self.latched = 0.0
        self.k = 0

    @property
    def macs(self):
        return self.fast.macs + sum(s.macs for s in self.slow)

    def step(self, e: float) -> float:
        q = self.k % self.N
        self.k += 1
        before = self.macs
        u = self.fast.step(e)
        slow_change = self.sched.output_strategy is OutputStrategy.O2_SLOW_CHANGE
        if q == 0:
            self.latched = e
            if slow_change:
                self.injected = sum(self.held)
        b = self.block_at[q]
        if b is not None:
            w = e if self.sched.input_strategy is InputStrategy.I1_FAST else self.latched
            self.held[b] = self.slow[b].step(w)
        u += self.injected if slow_change else sum(self.held)
        self.last_macs = self.macs - before
        return u


@dataclass(frozen=True)
class SimRun:
    reference: SignalSeq
    output: SignalSeq
    control: SignalSeq
    mac_count: np.ndarray
    label: str = ""

    def __len__(self):
        return len(self.output)

    def times(self):
        return self.output.times()


def _as_reference(reference, steps, T):
    if isinstance(reference, SignalSeq):
        r = reference.values
    else:
        r = np.asarray(reference, dtype=float)
    if steps is None:
        steps = len(r)
    if len(r) < steps:
        raise ValueError(f"reference has {len(r)} samples, {steps} steps requested")
    return np.array(r[:steps], dtype=float), steps


def _make_run(r, y, u, macs, T, label, upto=None):
    if upto is not None:
        r, y, u, macs = r[:upto], y[:upto], u[:upto], macs[:upto]
    T = float(T)
    return SimRun(SignalSeq(r, T), SignalSeq(y, T), SignalSeq(u, T),
                  np.asarray(macs, dtype=int), label)


def _check_plant(plant: StateSpace):
    if not plant.is_discrete:
        raise ValueError("plant must be discrete at the fast period")
    if np.any(plant.D != 0):
        raise ValueError("the switched executor needs a strictly proper plant (D == 0)")


def _closed_loop(step_ctrl, mac_of, plant, r, label, guard):
    steps = len(r)
    T = plant.period
    x = np.zeros(plant.n_states)
    y = np.zeros(steps)
    u = np.zeros(steps)
    macs = np.zeros(steps, dtype=int)
    A, B, C = plant.A, plant.B[:, 0], plant.C[0]
    for k in range(steps):
        y[k] = C @ x
        if not abs(y[k]) <= guard:
            run = _make_run(r, y, u, macs, T, label, upto=k)
            raise DivergenceError(f"{label or 'run'}: |output| exceeded {guard:g} at step {k}",
                                  run=run, step=k)
        u[k] = step_ctrl(r[k] - y[k])
        macs[k] = mac_of()
        x = A @ x + B * u[k]
    return _make_run(r, y, u, macs, T, label)


def run_controller(blocks: BlockSet, sched: InterlaceSchedule, error) -> tuple:
    """Drive the interlaced controller open loop; returns ``(u, mac_count)``."""
    ctrl = InterlacedController(blocks, sched)
    e = np.asarray(error, dtype=float)
    u = np.zeros(len(e))
    macs = np.zeros(len(e), dtype=int)
    for k, ek in enumerate(e):
        u[k] = ctrl.step(ek)
        macs[k] = ctrl.last_macs
    return u, macs


def run_interlaced(blocks: BlockSet, sched: InterlaceSchedule, plant: StateSpace,
                   reference, steps: int | None = None, guard: float = DIVERGENCE_LIMIT) -> SimRun:
    """Closed loop with the interlaced controller and a ZOH plant at ``T``.

    Per fast instant: sample ``y``, form ``e = r - y``, update the
    controller terms, sum the control and apply it through the hold.
    All states start at zero.
    """
    _check_plant(plant)
    r, steps = _as_reference(reference, steps, plant.period)
    ctrl = InterlacedController(blocks, sched)
    label = f"interlaced {sched.label} order={sched.order}"
    return _closed_loop(ctrl.step, lambda: ctrl.last_macs, plant, r, label, guard)


def run_single_rate(controller: RationalTF, plant: StateSpace, reference,
                    steps: int | None = None, guard: float = DIVERGENCE_LIMIT) -> SimRun:
    """Closed loop with a single-rate controller.

    If the controller period is ``N`` times the plant period it runs every
    ``N`` fast instants on the error sampled then, and its output is held on
    the fast grid in between.
    """
    _check_plant(plant)
    ratio = controller.period / plant.period
    N = int(round(ratio))
    if N < 1 or abs(ratio - N) > 1e-9 * ratio:
        raise ValueError("controller period must be an integer multiple of the plant period")
    r, steps = _as_reference(reference, steps, plant.period)
    de = DifferenceEquation(controller)
    state = {"k": 0, "u": 0.0, "macs": 0}

    def step(e):
        k = state["k"]
        state["k"] += 1
        before = de.macs
        if k % N == 0:
            state["u"] = de.step(e)
        state["macs"] = de.macs - before
        return state["u"]

    label = "single-rate fast" if N == 1 else f"single-rate slow (x{N})"
    return _closed_loop(step, lambda: state["macs"], plant, r, label, guard)


def step_reference(steps: int, T: float, amplitude: float = 1.0) -> SignalSeq:
    return SignalSeq(np.full(steps, float(amplitude)), T)


def sinusoid_probe(runner, omega: float, T: float, N: int, metaperiods: int = 200,
                   discard: int = 40) -> np.ndarray:
    """Least-squares component fit of a loop driven by ``cos(omega k T)``.

    ``runner`` maps a reference array to the output array.  The first
    ``discard`` metaperiods are dropped; the rest is fitted with complex
    amplitudes at ``omega + r 2 pi / (N T)``, ``r = 0..N-1``, so that the
    output is ``Re(sum_r c_r exp(j omega_r k T))``.  Aliased basis pairs are
    resolved by the minimum-norm solution, which is the conjugate-symmetric
    one.
    """
    if metaperiods < 60:
        raise ValueError("need at least 60 metaperiods")
    if discard >= metaperiods:
        raise ValueError("discard must be smaller than metaperiods")
    k = np.arange(metaperiods * N)
    y = np.asarray(runner(np.cos(omega * k * T)), dtype=float)
    if not np.all(np.isfinite(y)):
        raise DivergenceError("probe output is not finite")
    kk = k[discard * N:]
    yy = y[discard * N:]
    omegas = omega + 2.0 * np.pi * np.arange(N) / (N * T)
    ph = np.outer(kk * T, omegas)
    basis = np.hstack([np.cos(ph), -np.sin(ph)])
    sol, *_ = np.linalg.lstsq(basis, yy, rcond=1e-10)
    return sol[:N] + 1j * sol[N:]


def settling_time(run: SimRun, band: float = 0.02) -> float:
    """Time after which the output stays within ``band`` of the final reference."""
    y = run.output.values
    target = run.reference.values[-1]
    tol = band * max(abs(target), 1e-12)
    outside = np.flatnonzero(np.abs(y - target) > tol)
    if outside.size == 0:
        return 0.0
    if outside[-1] == len(y) - 1:
        return float("inf")
    return float((outside[-1] + 1) * run.output.period)


def overshoot(run: SimRun) -> float:
    """Peak overshoot relative to the final reference value (fraction)."""
    target = run.reference.values[-1]
    if target == 0:
        return 0.0
    return float(max(0.0, (np.max(run.output.values * np.sign(target)) - abs(target)) / abs(target)))


def write_simrun_csv(run: SimRun, path) -> None:
    """Columns: ``t_seconds, reference, output, control, mac_count``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SIMRUN_COLUMNS)
        t = run.times()
        for k in range(len(run)):
            w.writerow([f"{t[k]:.10g}", f"{run.reference.values[k]:.17g}",
                        f"{run.output.values[k]:.17g}", f"{run.control.values[k]:.17g}",
                        int(run.mac_count[k])])
