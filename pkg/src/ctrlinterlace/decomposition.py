"""Fast/slow split of a single-rate controller.

Poles are grouped (real, complex pair, repeated real), classified by
magnitude, and the controller is expanded into one parallel term per group.
The constant direct term, if any, always goes to the fast part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (IllConditionedDecomposition, ImproperTransferFunction,
                     UnsupportedMultiplicity)
from .tfcore import Polynomial, RationalTF, StateSpace, hold_resample, tf_to_ss

__all__ = [
    "REAL",
    "COMPLEX_PAIR",
    "REPEATED_REAL",
    "DEFAULT_THRESHOLD",
    "PoleGroup",
    "BlockSet",
    "StabilityReport",
    "group_poles",
    "classify_poles",
    "partial_fractions",
    "decompose",
    "series_decomposition",
    "slow_single_rate_check",
    "slow_controller",
]

REAL = "real"
COMPLEX_PAIR = "complex-pair"
REPEATED_REAL = "repeated-real"

DEFAULT_THRESHOLD = 0.85
#: distinct pole groups closer than this make the split ill-conditioned
CLUSTER_TOL = 1e-6
#: slack on the rounding-level residual when deciding that roots coincide
MULTIPLE_ROOT_SLACK = 100.0
#: largest root scatter ever attributed to rounding (relative to max(1, |p|))
MULTIPLE_ROOT_CAP = 1e-3
#: imaginary parts below this are treated as numerical noise
IMAG_TOL = 1e-9
THRESHOLD_TIE_TOL = 1e-12


@dataclass(frozen=True)
class PoleGroup:
    """One pole (or conjugate pair) together with its multiplicity."""

    kind: str
    poles: tuple
    multiplicity: int = 1

    def __post_init__(self):
        poles = tuple(complex(p) for p in self.poles)
        if self.kind == REAL:
            if len(poles) != 1 or poles[0].imag != 0.0 or self.multiplicity != 1:
                raise ValueError("a real group holds one real pole of multiplicity 1")
        elif self.kind == COMPLEX_PAIR:
            if len(poles) != 2 or poles[1] != poles[0].conjugate() or poles[0].imag == 0:
                raise ValueError("a complex-pair group holds two exact conjugates")
        elif self.kind == REPEATED_REAL:
            if len(poles) != 1 or poles[0].imag != 0.0 or self.multiplicity < 2:
                raise ValueError("a repeated-real group holds one real pole, multiplicity >= 2")
        else:
            raise ValueError(f"unknown pole group kind {self.kind!r}")
        object.__setattr__(self, "poles", poles)

    @property
    def magnitude(self):
        return abs(self.poles[0])

    @property
    def order(self):
        """Number of poles (with multiplicity) covered by the group."""
        return len(self.poles) * self.multiplicity

    def all_poles(self) -> tuple:
        """Every pole of the group, repeated according to multiplicity."""
        return self.poles * self.multiplicity

    def factor(self) -> Polynomial:
        """Monic real characteristic polynomial of the group."""
        p = self.poles[0]
        if self.kind == COMPLEX_PAIR:
            base = Polynomial([abs(p) ** 2, -2.0 * p.real, 1.0])
        else:
            base = Polynomial([-p.real, 1.0])
        return base ** self.multiplicity

    def __str__(self):
        p = self.poles[0]
        if self.kind == COMPLEX_PAIR:
            s = f"{p.real:.6g} ± {abs(p.imag):.6g}j"
        else:
            s = f"{p.real:.6g}"
        return s + (f" (x{self.multiplicity})" if self.multiplicity > 1 else "")


def _merge_radius(c: np.ndarray, z: complex, m: int) -> float:
    """Scatter expected from rounding for an ``m``-fold root of ``c`` near ``z``.

    Perturbing the coefficients by ``eps * sum|c_k||z|^k`` moves an
    ``m``-fold root by about ``(eps*S / |c^(m)(z)/m!|)^(1/m)``.
    """
    scale = np.sum(np.abs(c) * np.abs(z) ** np.arange(len(c)))
    d = npoly.polyder(c, m) / math.factorial(m)
    lead = abs(npoly.polyval(z, d))
    cap = MULTIPLE_ROOT_CAP * max(1.0, abs(z))
    if lead == 0.0:
        return cap
    r = (MULTIPLE_ROOT_SLACK * np.finfo(float).eps * scale / lead) ** (1.0 / m)
    return float(min(max(r, CLUSTER_TOL), cap))


def _polish(c: np.ndarray, z: complex, m: int) -> complex:
    """Newton steps on the ``(m-1)``-th derivative, where the root is simple.

    Steps larger than ``1e-6 * max(1, |z|)`` are refused: refinement is
    meant to remove rounding noise, never to move a root to a neighbour.
    """
    d0 = npoly.polyder(c, m - 1) if m > 1 else c
    d1 = npoly.polyder(d0)
    for _ in range(3):
        den = npoly.polyval(z, d1)
        if den == 0:
            break
        step = npoly.polyval(z, d0) / den
        if not abs(step) < 1e-6 * max(1.0, abs(z)):
            break
        z = z - step
    return complex(z)


def group_poles(den: Polynomial, roots=None) -> list[PoleGroup]:
    """Group the roots of ``den`` into real, complex-pair and repeated groups.

    A multiple root comes back from the eigenvalue solver as a small cloud
    whose size depends on how ill-conditioned the polynomial is near it.
    Roots are merged when they lie within the scatter that rounding alone
    would produce for a root of that multiplicity; the merged root is then
    refined on the derivative, where it is simple.  Roots passed in
    explicitly are trusted as given and only exact coincidences merge.
    """
    exact = roots is not None
    roots = den.roots() if roots is None else np.asarray(roots, dtype=complex)
    c = den.coeffs
    n = len(roots)
    label = list(range(n))

    def find(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            mid = 0.5 * (roots[i] + roots[j])
            radius = 0.0 if exact else _merge_radius(c, mid, 2)
            if abs(roots[i] - roots[j]) <= 2.0 * radius:
                label[find(i)] = find(j)
    clusters = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(roots[i])

    groups = []
    pending = []
    for members in clusters.values():
        m = len(members)
        z = complex(np.mean(members))
        if m > 1 and not exact:
            z = _polish(c, z, m)
        if abs(z.imag) <= IMAG_TOL * max(1.0, abs(z)):
            if m == 1:
                groups.append(PoleGroup(REAL, (z.real,)))
            else:
                groups.append(PoleGroup(REPEATED_REAL, (z.real,), m))
        elif z.imag > 0:
            pending.append((z, m))
    for z, m in pending:
        groups.append(PoleGroup(COMPLEX_PAIR, (z, z.conjugate()), m))
    count = sum(g.order for g in groups)
    if count != den.degree:
        raise IllConditionedDecomposition(
            f"could not pair the {den.degree} roots into conjugate-closed groups")
    groups.sort(key=lambda g: (-g.magnitude, -g.poles[0].real))
    return groups


def classify_poles(c: RationalTF, threshold: float = DEFAULT_THRESHOLD):
    """Split the pole groups of ``c`` into ``(fast, slow)`` by magnitude.

    A group is slow iff ``|p| >= threshold``; magnitudes within 1e-12 of the
    threshold count as slow.  Conjugate pairs and repeated poles are never
    split.  Both lists are ordered by descending magnitude.
    """
    if not c.is_proper:
        raise ImproperTransferFunction("controller must be proper")
    fast, slow = [], []
    hint = c.poles() if c.has_exact_poles else None
    for g in group_poles(c.den, hint):
        (slow if g.magnitude >= threshold - THRESHOLD_TIE_TOL else fast).append(g)
    return fast, slow


@dataclass(frozen=True)
class BlockSet:
    """Fast part plus ordered slow blocks of a decomposed controller.

    For a parallel decomposition the controller equals
    ``fast + sum(slow_blocks)``; for a series one it is the product.
    """

    fast: RationalTF
    slow_blocks: tuple
    decomposition: str = "parallel"
    slow_groups: tuple = field(default=())
    fast_groups: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "slow_blocks", tuple(self.slow_blocks))
        object.__setattr__(self, "slow_groups", tuple(self.slow_groups))
        object.__setattr__(self, "fast_groups", tuple(self.fast_groups))
        if self.decomposition not in ("parallel", "series"):
            raise ValueError("decomposition must be 'parallel' or 'series'")
        for b in self.slow_blocks:
            if not b.is_proper:
                raise ImproperTransferFunction("slow blocks must be proper")

    @property
    def period(self):
        return self.fast.period

    def __len__(self):
        return len(self.slow_blocks)

    def reconstruct(self) -> RationalTF:
        if self.decomposition == "series":
            out = self.fast
            for b in self.slow_blocks:
                out = out * b
            return out
        out = self.fast
        for b in self.slow_blocks:
            out = out + b
        return out

    def evaluate(self, z) -> complex:
        vals = [self.fast(z)] + [b(z) for b in self.slow_blocks]
        return complex(np.prod(vals) if self.decomposition == "series" else np.sum(vals))


def _check_groups(c, groups):
    total = sum(g.order for g in groups)
    if total != c.den.degree:
        raise ValueError(f"groups cover {total} poles but the controller has {c.den.degree}")
    for g in groups:
        if g.multiplicity > 2 or (g.kind == COMPLEX_PAIR and g.multiplicity > 1):
            raise UnsupportedMultiplicity(
                f"pole group {g} has unsupported multiplicity {g.multiplicity}")
    for i, a in enumerate(groups):
        for b in groups[i + 1:]:
            d = min(abs(p - q) for p in a.poles for q in b.poles)
            if d < CLUSTER_TOL:
                raise IllConditionedDecomposition(
                    f"pole groups {a} and {b} are {d:.2e} apart; the split is ill-conditioned")


def _group_numerators(c, groups):
    """Numerators ``n_g`` with ``num/den = d0 + sum n_g / f_g`` (deg n_g < deg f_g)."""
    factors = [g.factor() for g in groups]
    n = sum(f.degree for f in factors)
    d0 = c.num.coeff(n) if c.num.degree == n else 0.0
    rem = c.num - c.den * d0
    cols = []
    for i, f in enumerate(factors):
        others = Polynomial([1.0])
        for j, h in enumerate(factors):
            if j != i:
                others = others * h
        for k in range(f.degree):
            col = (others * Polynomial.monomial(k)).coeffs
            cols.append(np.pad(col, (0, n - len(col))))
    M = np.array(cols).T
    rhs = np.pad(rem.coeffs, (0, n - len(rem.coeffs)))[:n]
    x = np.linalg.solve(M, rhs)
    out, pos = [], 0
    for f in factors:
        out.append(Polynomial(x[pos:pos + f.degree]))
        pos += f.degree
    return d0, factors, out


def partial_fractions(c: RationalTF, slow, fast=()) -> BlockSet:
    """Parallel expansion of ``c`` with one term per pole group.

    Parameters
    ----------
    c : RationalTF
        Proper controller at the fast period.
    slow, fast : sequence of PoleGroup
        Together they must partition the poles of ``c``.  Fast terms and the
        direct term are summed into ``BlockSet.fast``; each slow group gives
        one slow block, in the order given.

    Raises
    ------
    IllConditionedDecomposition
        Two distinct groups lie closer than ``CLUSTER_TOL``.
    UnsupportedMultiplicity
        A real pole repeated more than twice, or a repeated complex pair.
    """
    if not c.is_proper:
        raise ImproperTransferFunction("controller must be proper")
    slow, fast = list(slow), list(fast)
    groups = slow + fast
    _check_groups(c, groups)
    if not groups:
        return BlockSet(RationalTF(c.num, c.den, c.period), (), "parallel")
    d0, factors, nums = _group_numerators(c, groups)
    T = c.period
    terms = [RationalTF(nums[i], factors[i], T, reduce=False).with_poles(g.all_poles())
             for i, g in enumerate(groups)]
    slow_blocks = terms[:len(slow)]
    fast_tf = RationalTF([d0], [1.0], T)
    for term in terms[len(slow):]:
        fast_tf = fast_tf + term
    return BlockSet(fast_tf, slow_blocks, "parallel", slow, fast)


def decompose(c: RationalTF, threshold: float = DEFAULT_THRESHOLD) -> BlockSet:
    """Classify poles by ``threshold`` and expand in parallel."""
    fast, slow = classify_poles(c, threshold)
    return partial_fractions(c, slow, fast)


def series_decomposition(c: RationalTF, slow, fast, numerators) -> BlockSet:
    """Series split with a user-supplied numerator grouping.

    ``numerators[0]`` belongs to the fast factor, ``numerators[1:]`` to the
    slow groups in order; their product (times the fast factor gain) must
    reproduce ``c.num``.  No grouping is chosen automatically.
    """
    slow, fast = list(slow), list(fast)
    _check_groups(c, slow + fast)
    numerators = [Polynomial(n) if not isinstance(n, Polynomial) else n for n in numerators]
    if len(numerators) != len(slow) + 1:
        raise ValueError("need one numerator for the fast factor plus one per slow group")
    prod = Polynomial([1.0])
    for n in numerators:
        prod = prod * n
    if not prod.allclose(c.num, atol=1e-8 * max(1.0, np.max(np.abs(c.num.coeffs)))):
        raise ValueError("numerator grouping does not multiply back to the controller numerator")
    T = c.period
    fast_den = Polynomial([1.0])
    for g in fast:
        fast_den = fast_den * g.factor()
    blocks = [RationalTF(numerators[i + 1], g.factor(), T, reduce=False)
              for i, g in enumerate(slow)]
    for b in blocks:
        if not b.is_proper:
            raise ImproperTransferFunction("series slow factor would be improper")
    return BlockSet(RationalTF(numerators[0], fast_den, T, reduce=False), blocks, "series",
                    slow, fast)


@dataclass(frozen=True)
class StabilityReport:
    spectral_radius: float
    stable: bool
    controller: RationalTF

    def __str__(self):
        verdict = "stable" if self.stable else "UNSTABLE"
        return f"slow single-rate loop: spectral radius {self.spectral_radius:.6f} ({verdict})"


def slow_controller(blocks: BlockSet, N: int) -> RationalTF:
    """All-slow controller: every term (fast part included) moved to ``N*T``."""
    from .interlace import to_slow_block

    if blocks.decomposition != "parallel":
        raise ValueError("the all-slow controller is defined for parallel decompositions")
    terms = [blocks.fast] + list(blocks.slow_blocks)
    out = None
    for t in terms:
        s = to_slow_block(t, N).tf
        out = s if out is None else out + s
    return out


def slow_single_rate_check(blocks: BlockSet, plant: StateSpace, N: int) -> StabilityReport:
    """Close the loop at ``N*T`` with the all-slow controller and the held plant.

    The plant must be the ZOH discretization at the fast period; it is
    re-discretized at ``N*T`` by holding its input for ``N`` steps.
    """
    from .lifting import LiftedSystem, close_loop, spectral_radius

    if not plant.is_discrete:
        raise ValueError("plant must be discrete at the fast period")
    ctrl = slow_controller(blocks, N)
    slow_plant = hold_resample(plant, N)
    loop = close_loop(LiftedSystem.from_statespace(tf_to_ss(ctrl)),
                      LiftedSystem.from_statespace(slow_plant))
    rho = spectral_radius(loop)
    return StabilityReport(rho, bool(rho < 1.0), ctrl)
