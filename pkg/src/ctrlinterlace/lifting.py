"""Lifted (metaperiod) state-space models of dual-rate and interlaced loops.

A lifted signal stacks the samples of one metaperiod ``T0`` into a vector;
index ``q`` of the vector is the sample at ``k*T0 + q*T``.  Periodic
time-varying fast-rate systems then become LTI systems at ``T0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm

import numpy as np

from .decomposition import BlockSet
from .errors import IllPosedLoop, ScheduleError
from .interlace import (InputStrategy, InterlaceSchedule, OutputStrategy, SlowBlock,
                        to_slow_block, validate_schedule)
from .tfcore import StateSpace, tf_to_ss

__all__ = [
    "LiftedSystem",
    "AugmentedBlock",
    "lift_dual_rate",
    "lift_rates",
    "augment_block",
    "input_selector",
    "output_hold_pattern",
    "compose_open_loop",
    "series",
    "close_loop",
    "spectral_radius",
    "lift_signal",
    "delift_signal",
    "simulate_lifted",
    "interlaced_loops",
    "solve_shifted",
]


def _diagonal_blocks(A):
    """Boundaries of the finest block-lower-triangular partition of ``A``.

    Index ``k`` splits the blocks when ``A[:k, k:]`` is exactly zero.
    """
    n = A.shape[0]
    cuts = [0]
    nz = A != 0
    # last nonzero column per row, as a running maximum over the rows above
    reach = np.where(nz.any(axis=1), n - 1 - np.argmax(nz[:, ::-1], axis=1), -1)
    far = -1
    for k in range(n - 1):
        far = max(far, reach[k])
        if far <= k:
            cuts.append(k + 1)
    cuts.append(n)
    return cuts


def solve_shifted(A, z, B) -> np.ndarray:
    """Solve ``(z I - A) X = B``.

    Block lower triangular ``A`` (cascades and series connections) is
    solved by block forward substitution.  Near a repeated pole this is
    far more accurate than a pivoted LU of the whole matrix, which mixes
    the rows of a Jordan-like chain.
    """
    A = np.asarray(A)
    B = np.asarray(B, dtype=complex)
    cuts = _diagonal_blocks(A)
    if len(cuts) == 2:
        return np.linalg.solve(z * np.eye(A.shape[0]) - A, B)
    X = np.empty_like(B)
    for a, b in zip(cuts[:-1], cuts[1:]):
        rhs = B[a:b] + A[a:b, :a] @ X[:a]
        X[a:b] = np.linalg.solve(z * np.eye(b - a) - A[a:b, a:b], rhs)
    return X


def _ro(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LiftedSystem:
    """LTI model at the metaperiod ``T0`` acting on lifted signals.

    ``B`` has ``Nu * m`` columns (``Nu`` input samples of width ``m``) and
    ``C`` has ``Ny * p`` rows.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    T0: float
    Nu: int = 1
    Ny: int = 1

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = np.asarray(self.A).shape[0] if np.size(self.A) else 0
        A = np.asarray(self.A, dtype=float).reshape(n, n)
        B = np.asarray(self.B, dtype=float).reshape(n, D.shape[1])
        C = np.asarray(self.C, dtype=float).reshape(D.shape[0], n)
        if D.shape[1] % self.Nu or D.shape[0] % self.Ny:
            raise ValueError("lifted dimensions are not multiples of Nu/Ny")
        for name, arr in (("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, name, _ro(arr))
        object.__setattr__(self, "T0", float(self.T0))

    @classmethod
    def from_statespace(cls, ss: StateSpace):
        """Trivial lifting (``Nu = Ny = 1``) of a discrete system."""
        return cls(ss.A, ss.B, ss.C, ss.D, ss.period, 1, 1)

    @property
    def n_states(self):
        return self.A.shape[0]

    @property
    def Tu(self):
        return self.T0 / self.Nu

    @property
    def Ty(self):
        return self.T0 / self.Ny

    @property
    def m(self):
        return self.D.shape[1] // self.Nu

    @property
    def p(self):
        return self.D.shape[0] // self.Ny

    def evaluate(self, zN) -> np.ndarray:
        """Lifted transfer matrix at ``zN`` (the ``z`` variable of period ``T0``)."""
        if self.n_states == 0:
            return self.D.astype(complex)
        return self.C @ solve_shifted(self.A, zN, self.B) + self.D

    def dc_gain(self) -> np.ndarray:
        return self.evaluate(1.0).real


def lift_dual_rate(sys: StateSpace, Nu: int, Ny: int, output_instant: str = "start") -> LiftedSystem:
    """Lift a discrete system at base period ``T`` to the metaperiod.

    The metaperiod spans ``L = lcm(Nu, Ny)`` base steps.  Input sample ``q``
    is held over base steps ``q*L/Nu ... (q+1)*L/Nu - 1``.  Output sample
    ``p`` is taken at base step ``p*L/Ny`` (``output_instant="start"``) or at
    the end of its interval, ``(p+1)*L/Ny`` (``"end"``, requires ``D == 0``).

    With ``Nu = 4, Ny = 1`` and ``"end"`` the result is
    ``A_l = A^4``, ``B_l = [A^3B A^2B AB B]``, ``C_l = C A^4``,
    ``D_l = [CA^3B CA^2B CAB CB]``.
    """
    if not sys.is_discrete:
        raise ValueError("lift_dual_rate expects a discrete-time system")
    if Nu < 1 or Ny < 1:
        raise ValueError("Nu and Ny must be positive integers")
    if output_instant not in ("start", "end"):
        raise ValueError("output_instant must be 'start' or 'end'")
    if output_instant == "end" and np.any(sys.D != 0):
        raise ValueError("end-of-interval sampling needs a strictly proper system")
    L = lcm(Nu, Ny)
    hold, stride = L // Nu, L // Ny
    n, m, p = sys.n_states, sys.n_inputs, sys.n_outputs
    X = np.eye(n)                       # x_j = X x_0 + U u_l
    U = np.zeros((n, Nu * m))
    Crows = np.zeros((Ny * p, n))
    Drows = np.zeros((Ny * p, Nu * m))
    sample_at = {(k + (output_instant == "end")) * stride: k for k in range(Ny)}
    for j in range(L + 1):
        if j in sample_at:
            k = sample_at[j]
            Crows[k * p:(k + 1) * p] = sys.C @ X
            Drows[k * p:(k + 1) * p] = sys.C @ U
            if j < L:
                q = j // hold
                Drows[k * p:(k + 1) * p, q * m:(q + 1) * m] += sys.D
        if j == L:
            break
        q = j // hold
        X = sys.A @ X
        U = sys.A @ U
        U[:, q * m:(q + 1) * m] += sys.B
    return LiftedSystem(X, U, Crows, Drows, L * sys.period, Nu, Ny)


def lift_rates(sys: StateSpace, Tu: float, Ty: float, output_instant: str = "start",
               rtol: float = 1e-9) -> LiftedSystem:
    """Lift with input/output periods given in seconds.

    Both periods must be integer multiples of ``sys.period``.
    """
    T = sys.period
    ku, ky = Tu / T, Ty / T
    if (abs(ku - round(ku)) > rtol * ku or abs(ky - round(ky)) > rtol * ky
            or round(ku) < 1 or round(ky) < 1):
        raise ValueError(f"periods Tu={Tu}, Ty={Ty} are not multiples of T={T}")
    ku, ky = int(round(ku)), int(round(ky))
    L = lcm(ku, ky)
    return lift_dual_rate(sys, L // ku, L // ky, output_instant)


@dataclass(frozen=True)
class AugmentedBlock:
    """Slow block with one dummy state holding its previous-metaperiod input.

    State ``(x, chi)`` with ``x(k+1) = A x + B chi``, ``chi(k+1) = e(k)``.
    ``C_stale = [C D]`` reads the output computed one metaperiod ago;
    ``C_fresh = [CA CB]`` with ``D_fresh = D`` gives the output of the
    current execution.
    """

    A: np.ndarray
    B: np.ndarray
    C_stale: np.ndarray
    C_fresh: np.ndarray
    D_fresh: float

    @property
    def n_states(self):
        return self.A.shape[0]

    def as_statespace(self, period) -> StateSpace:
        return StateSpace(self.A, self.B, self.C_stale, [[0.0]], period)


def augment_block(block: SlowBlock) -> AugmentedBlock:
    ss = tf_to_ss(block.tf)
    n = ss.n_states
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = ss.A
    A[:n, n:] = ss.B
    B = np.zeros((n + 1, 1))
    B[n, 0] = 1.0
    C_stale = np.hstack([ss.C, ss.D])
    C_fresh = np.hstack([ss.C @ ss.A, ss.C @ ss.B])
    return AugmentedBlock(_ro(A), _ro(B), _ro(C_stale), _ro(C_fresh), float(ss.D[0, 0]))


def input_selector(phase: int, N: int, strategy: InputStrategy = InputStrategy.I1_FAST) -> np.ndarray:
    """0/1 row picking the lifted error sample a slow block consumes."""
    if not 0 <= phase < N:
        raise ValueError(f"phase {phase} outside [0, {N})")
    sel = np.zeros(N, dtype=int)
    sel[phase if strategy is InputStrategy.I1_FAST else 0] = 1
    return sel


def output_hold_pattern(phase: int, N: int,
                        strategy: OutputStrategy = OutputStrategy.O1_FAST_CHANGE):
    """``(stale, fresh)`` masks over the ``N`` fast instants of a metaperiod.

    Fast change: instants before ``phase`` still show the previous
    execution's output, instants from ``phase`` on show the new one.
    Slow change: every instant shows the value stored during the previous
    metaperiod, which is injected at the first instant of the next one.
    """
    if not 0 <= phase < N:
        raise ValueError(f"phase {phase} outside [0, {N})")
    idx = np.arange(N)
    if strategy is OutputStrategy.O2_SLOW_CHANGE:
        return np.ones(N, dtype=int), np.zeros(N, dtype=int)
    return (idx < phase).astype(int), (idx >= phase).astype(int)


def compose_open_loop(blocks: BlockSet, sched: InterlaceSchedule) -> LiftedSystem:
    """Lifted model (``Nu = Ny = N``) of the interlaced controller ``e -> u``.

    The fast part is lifted directly; each slow block contributes its
    augmented state, selected by its input selector and spread over the
    metaperiod by its hold pattern.
    """
    report = validate_schedule(sched, blocks)
    if not report.ok:
        raise ScheduleError("; ".join(report.violations))
    N = sched.N
    T = blocks.period
    fast = lift_dual_rate(tf_to_ss(blocks.fast), N, N)
    aug = [augment_block(to_slow_block(b, N)) for b in blocks.slow_blocks]
    n = fast.n_states + sum(a.n_states for a in aug)
    A = np.zeros((n, n))
    B = np.zeros((n, N))
    C = np.zeros((N, n))
    D = fast.D.copy()
    nf = fast.n_states
    A[:nf, :nf] = fast.A
    B[:nf] = fast.B
    C[:, :nf] = fast.C
    pos = nf
    for a, phase in zip(aug, sched.phase_of_block):
        k = a.n_states
        sl = slice(pos, pos + k)
        sel = input_selector(phase, N, sched.input_strategy)
        stale, fresh = output_hold_pattern(phase, N, sched.output_strategy)
        A[sl, sl] = a.A
        B[sl] = a.B @ sel[None, :]
        C[:, sl] = np.outer(stale, a.C_stale) + np.outer(fresh, a.C_fresh)
        D += a.D_fresh * np.outer(fresh, sel)
        pos += k
    return LiftedSystem(A, B, C, D, N * T, N, N)


def _check_compatible(first: LiftedSystem, second: LiftedSystem):
    if abs(first.T0 - second.T0) > 1e-12 * max(1.0, first.T0):
        raise ValueError(f"metaperiods differ ({first.T0} vs {second.T0})")
    if first.D.shape[0] != second.D.shape[1]:
        raise ValueError("output of the first system does not match input of the second")


def series(first: LiftedSystem, second: LiftedSystem) -> LiftedSystem:
    """``second`` driven by the output of ``first`` (e.g. plant after controller)."""
    _check_compatible(first, second)
    n1, n2 = first.n_states, second.n_states
    A = np.block([[first.A, np.zeros((n1, n2))],
                  [second.B @ first.C, second.A]])
    B = np.vstack([first.B, second.B @ first.D])
    C = np.hstack([second.D @ first.C, second.C])
    D = second.D @ first.D
    return LiftedSystem(A, B, C, D, first.T0, first.Nu, second.Ny)


def close_loop(controller: LiftedSystem, plant: LiftedSystem, cond_limit: float = 1e12) -> LiftedSystem:
    """Unity negative feedback, reference ``r`` to plant output ``y``.

    ``e = r - y``, ``u = K e``, ``y = P u``.  The lifted feedthrough may be
    nonzero below the diagonal (causal within a metaperiod); the loop is
    rejected only when ``I + D_P D_K`` is singular.
    """
    _check_compatible(controller, plant)
    if plant.D.shape[0] != controller.D.shape[1]:
        raise ValueError("plant output size does not match controller input size")
    Ak, Bk, Ck, Dk = controller.A, controller.B, controller.C, controller.D
    Ap, Bp, Cp, Dp = plant.A, plant.B, plant.C, plant.D
    ny = Dp.shape[0]
    M = np.eye(ny) + Dp @ Dk
    if np.linalg.cond(M) > cond_limit:
        raise IllPosedLoop("I + D_plant D_controller is singular: algebraic loop is ill-posed")
    Mi = np.linalg.inv(M)
    # y = Mi (Cp xp + Dp Ck xk + Dp Dk r)
    Yx = Mi @ np.hstack([Dp @ Ck, Cp])
    Yr = Mi @ Dp @ Dk
    # e = r - y ; u = Ck xk + Dk e
    Ex = -Yx
    Er = np.eye(ny) - Yr
    nk = controller.n_states
    Ux = np.hstack([Ck, np.zeros((Ck.shape[0], plant.n_states))]) + Dk @ Ex
    Ur = Dk @ Er
    A = np.vstack([
        np.hstack([Ak, np.zeros((nk, plant.n_states))]) + Bk @ Ex,
        np.hstack([np.zeros((plant.n_states, nk)), Ap]) + Bp @ Ux,
    ])
    B = np.vstack([Bk @ Er, Bp @ Ur])
    return LiftedSystem(A, B, Yx, Yr, controller.T0, controller.Nu, plant.Ny)


def spectral_radius(sys) -> float:
    A = sys.A
    if A.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def lift_signal(x, N: int) -> np.ndarray:
    """Reshape a fast sequence (length multiple of ``N``) to ``(frames, N)``."""
    x = np.asarray(x, dtype=float)
    if len(x) % N:
        raise ValueError("sequence length must be a multiple of N")
    return x.reshape(-1, N)


def delift_signal(Y) -> np.ndarray:
    return np.asarray(Y).reshape(-1)


def simulate_lifted(sys: LiftedSystem, u_lifted, x0=None) -> np.ndarray:
    """Step the lifted model over the rows of ``u_lifted``; returns lifted outputs."""
    U = np.atleast_2d(np.asarray(u_lifted, dtype=float))
    x = np.zeros(sys.n_states) if x0 is None else np.asarray(x0, dtype=float)
    Y = np.empty((U.shape[0], sys.D.shape[0]))
    for k, u in enumerate(U):
        Y[k] = sys.C @ x + sys.D @ u
        x = sys.A @ x + sys.B @ u
    return Y


def interlaced_loops(blocks: BlockSet, sched: InterlaceSchedule, plant: StateSpace):
    """Lifted ``(open_loop, closed_loop)`` for an interlaced controller and a ZOH plant.

    The open loop maps the error to the plant output; the closed loop maps
    the reference to the plant output.
    """
    K = compose_open_loop(blocks, sched)
    P = lift_dual_rate(plant, sched.N, sched.N)
    return series(K, P), close_loop(K, P)
