"""Slow-rate forms of controller blocks and the interlacing schedule.

A fast block ``N(z)/D(z)`` is multiplied above and below by ``W(z)`` so the
denominator becomes a polynomial in ``z**N`` (the dual-rate form).  Adding
the hold sum ``1 + z^-1 + ... + z^-(N-1)`` and keeping every ``N``-th
impulse-response sample gives a block that runs entirely at ``N*T``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .decomposition import COMPLEX_PAIR, BlockSet, PoleGroup, group_poles
from .errors import ImproperTransferFunction, ScheduleError
from .tfcore import Polynomial, RationalTF, poly_downsample

__all__ = [
    "InputStrategy",
    "OutputStrategy",
    "DualRateBlock",
    "SlowBlock",
    "InterlaceSchedule",
    "ValidationReport",
    "LoadProfile",
    "build_w_polynomial",
    "hold_polynomial",
    "to_dual_rate_block",
    "to_slow_block",
    "validate_schedule",
    "default_order",
    "mac_cost",
    "compute_load_profile",
    "parse_strategy",
]


class InputStrategy(enum.Enum):
    I1_FAST = "I1"
    I2_SLOW = "I2"


class OutputStrategy(enum.Enum):
    O1_FAST_CHANGE = "O1"
    O2_SLOW_CHANGE = "O2"


def parse_strategy(text: str):
    """``"i1o2"`` -> ``(InputStrategy.I1_FAST, OutputStrategy.O2_SLOW_CHANGE)``."""
    t = text.strip().lower().replace("-", "").replace(",", "").replace(" ", "")
    table = {"i1": InputStrategy.I1_FAST, "i2": InputStrategy.I2_SLOW}
    otable = {"o1": OutputStrategy.O1_FAST_CHANGE, "o2": OutputStrategy.O2_SLOW_CHANGE}
    if len(t) != 4 or t[:2] not in table or t[2:] not in otable:
        raise ValueError(f"unknown strategy {text!r}; expected one of i1o1, i1o2, i2o1, i2o2")
    return table[t[:2]], otable[t[2:]]


def _slow_denominator(group: PoleGroup, N: int) -> Polynomial:
    """Product of ``z**N - p**N`` over the group's poles, in the slow variable."""
    p = group.poles[0]
    if group.kind == COMPLEX_PAIR:
        # (zs - a^N)(zs - conj(a)^N), real by construction
        pN = p ** N
        base = Polynomial([abs(pN) ** 2, -2.0 * pN.real, 1.0])
    else:
        base = Polynomial([-(p.real ** N), 1.0])
    return base ** group.multiplicity


def _expand(slow: Polynomial, N: int) -> Polynomial:
    """Rewrite a polynomial in ``z**N`` as a polynomial in ``z``."""
    c = np.zeros(N * max(slow.degree, 0) + 1)
    c[::N] = slow.coeffs
    return Polynomial(c)


def build_w_polynomial(group: PoleGroup, N: int) -> Polynomial:
    """Multiplier ``W`` with ``group.factor() * W`` a polynomial in ``z**N``.

    For a real pole ``a`` this is ``z^(N-1) + a z^(N-2) + ... + a^(N-1)``;
    conjugate pairs use the product of both factors and repeated poles the
    power of the single factor, so the coefficients stay real.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if N == 1:
        return Polynomial([1.0])
    target = _expand(_slow_denominator(group, N), N)
    w, _ = divmod(target, group.factor())
    return w


def hold_polynomial(N: int) -> Polynomial:
    """``1 + z + ... + z^(N-1)``, i.e. the hold sum multiplied by ``z^(N-1)``."""
    return Polynomial(np.ones(N))


def _single_group(block: RationalTF) -> PoleGroup | None:
    if block.den.degree == 0:
        return None
    groups = group_poles(block.den)
    if len(groups) != 1:
        raise ValueError("block denominator must be the characteristic polynomial of one pole group")
    return groups[0]


def _w_for(block: RationalTF, N: int) -> Polynomial:
    if block.den.degree == 0 or N == 1:
        return Polynomial([1.0])
    w = Polynomial([1.0])
    for g in group_poles(block.den):
        w = w * build_w_polynomial(g, N)
    return w


@dataclass(frozen=True)
class DualRateBlock:
    """Block with a fast numerator over a denominator in ``z**N``.

    ``num_fast(z) / den_slow(z**N)`` equals the original block; the
    denominator is stored in the slow variable together with its period.
    """

    num_fast: Polynomial
    den_slow: Polynomial
    N: int
    period: float  # fast period T

    @property
    def slow_period(self):
        return self.N * self.period

    def den_fast(self) -> Polynomial:
        return _expand(self.den_slow, self.N)

    def as_tf(self) -> RationalTF:
        return RationalTF(self.num_fast, self.den_fast(), self.period, reduce=False)

    def __call__(self, z):
        z = complex(z)
        return complex(self.num_fast(z) / self.den_slow(z ** self.N))


@dataclass(frozen=True)
class SlowBlock:
    """Block executed once per metaperiod, modelled at period ``N*T``."""

    tf: RationalTF
    N: int = 1

    def __post_init__(self):
        if not self.tf.is_proper:
            raise ImproperTransferFunction("slow block must be proper")

    @property
    def period(self):
        return self.tf.period


def to_dual_rate_block(block: RationalTF, N: int) -> DualRateBlock:
    if not block.is_proper:
        raise ImproperTransferFunction("block must be proper")
    if N == 1:
        return DualRateBlock(block.num, block.den, 1, block.period)
    _single_group(block)
    w = _w_for(block, N)
    den_full = block.den * w
    return DualRateBlock(block.num * w, poly_downsample(den_full, N), N, block.period)


def to_slow_block(block: RationalTF, N: int) -> SlowBlock:
    """Slow-rate equivalent of ``block`` fed by a held input.

    The numerator is ``N(z) W(z) (1 + z + ... + z^(N-1))`` restricted to the
    exponents ``j*N + N - 1``; the denominator is ``D(z) W(z)`` read in
    ``z**N``.  DC gain is preserved and the poles are raised to the ``N``-th
    power.

    Examples
    --------
    >>> b = RationalTF([-0.03991], [-0.9072, 1.0], 0.1)
    >>> s = to_slow_block(b, 3).tf
    >>> round(s.num.coeff(0), 4), round(s.den.coeff(0), 4)
    (-0.1089, -0.7466)
    """
    if not block.is_proper:
        raise ImproperTransferFunction("block must be proper")
    if N == 1:
        return SlowBlock(block, 1)
    w = _w_for(block, N)
    den_slow = poly_downsample(block.den * w, N)
    num_slow = poly_downsample(hold_polynomial(N) * block.num * w, N, phase=N - 1)
    tf = RationalTF(num_slow, den_slow, N * block.period, reduce=False)
    if block.has_exact_poles:
        try:
            tf = tf.with_poles(block.poles() ** N)
        except ValueError:
            pass
    return SlowBlock(tf, N)


@dataclass(frozen=True)
class InterlaceSchedule:
    """Phase assignment of slow blocks inside a metaperiod of ``N`` fast steps.

    ``phase_of_block[i]`` is the fast-instant offset at which slow block
    ``i`` executes.  Phases without a block are idle (fast part only).
    """

    N: int
    phase_of_block: tuple
    input_strategy: InputStrategy = InputStrategy.I1_FAST
    output_strategy: OutputStrategy = OutputStrategy.O1_FAST_CHANGE

    def __post_init__(self):
        object.__setattr__(self, "phase_of_block", tuple(int(p) for p in self.phase_of_block))

    @classmethod
    def from_order(cls, order, N=None, input_strategy=InputStrategy.I1_FAST,
                   output_strategy=OutputStrategy.O1_FAST_CHANGE):
        """Build from an execution order: ``order[k]`` runs at phase ``k``."""
        order = [int(b) for b in order]
        N = len(order) if N is None else N
        if sorted(order) != list(range(len(order))):
            raise ScheduleError(f"order {order} is not a permutation of the block indices")
        phases = [0] * len(order)
        for phase, b in enumerate(order):
            phases[b] = phase
        return cls(N, tuple(phases), input_strategy, output_strategy)

    @property
    def order(self):
        """Block index per phase, ``None`` for idle phases."""
        out = [None] * self.N
        for b, p in enumerate(self.phase_of_block):
            if 0 <= p < self.N:
                out[p] = b
        return out

    @property
    def label(self):
        return self.input_strategy.value + self.output_strategy.value


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def raise_if_invalid(self):
        if self.violations:
            raise ScheduleError("; ".join(self.violations))


def validate_schedule(sched: InterlaceSchedule, blocks: BlockSet) -> ValidationReport:
    report = ValidationReport()
    v = report.violations
    if not isinstance(sched.N, (int, np.integer)) or sched.N < 1:
        v.append(f"N must be a positive integer, got {sched.N!r}")
        return report
    if blocks.decomposition != "parallel":
        v.append("interlacing requires a parallel decomposition")
    nb = len(blocks.slow_blocks)
    if nb > sched.N:
        v.append(f"more blocks than phases ({nb} slow blocks, N={sched.N})")
    if len(sched.phase_of_block) != nb:
        v.append(f"schedule assigns {len(sched.phase_of_block)} phases for {nb} slow blocks")
    for b, p in enumerate(sched.phase_of_block):
        if not 0 <= p < sched.N:
            v.append(f"block {b} phase {p} outside [0, {sched.N})")
    seen = {}
    for b, p in enumerate(sched.phase_of_block):
        if p in seen:
            v.append(f"duplicate phase {p} for blocks {seen[p]} and {b}")
        seen.setdefault(p, b)
    if not isinstance(sched.input_strategy, InputStrategy):
        v.append(f"invalid input strategy {sched.input_strategy!r}")
    if not isinstance(sched.output_strategy, OutputStrategy):
        v.append(f"invalid output strategy {sched.output_strategy!r}")
    return report


def default_order(blocks: BlockSet) -> list:
    """Slow block indices by descending DC-gain magnitude (integrators first)."""
    def gain(b):
        try:
            return abs(b(1.0))
        except ZeroDivisionError:
            return np.inf
    return sorted(range(len(blocks.slow_blocks)), key=lambda i: (-gain(blocks.slow_blocks[i]), i))


def mac_cost(tf: RationalTF) -> int:
    """Multiply-accumulates of one difference-equation update of ``tf``."""
    if tf.num.is_zero:
        return 0
    return tf.num.degree + 1 + tf.den.degree


@dataclass(frozen=True)
class LoadProfile:
    """Per-fast-instant MAC counts over one metaperiod."""

    monolithic: np.ndarray
    interlaced: np.ndarray
    idle_phases: tuple

    @property
    def uniform(self):
        return bool(np.all(self.interlaced == self.interlaced[0]))

    @property
    def peak_saving(self):
        return int(self.monolithic.max() - self.interlaced.max())


def compute_load_profile(blocks: BlockSet, sched: InterlaceSchedule) -> LoadProfile:
    validate_schedule(sched, blocks).raise_if_invalid()
    N = sched.N
    mono = np.full(N, mac_cost(blocks.reconstruct()), dtype=int)
    inter = np.full(N, mac_cost(blocks.fast), dtype=int)
    for b, p in enumerate(sched.phase_of_block):
        inter[p] += mac_cost(to_slow_block(blocks.slow_blocks[b], N).tf)
    idle = tuple(p for p in range(N) if p not in sched.phase_of_block)
    return LoadProfile(mono, inter, idle)
