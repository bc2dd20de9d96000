"""Polynomial and transfer-function algebra, realizations and rate changes.

Coefficients are stored in ascending powers of ``z`` (index ``i`` holds the
coefficient of ``z**i``).  Printing uses the conventional descending order.

All value types are immutable: their arrays are flagged read-only and every
operation returns a new object.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import expm

from .errors import ImproperTransferFunction, PoleEvaluationError

__all__ = [
    "Polynomial",
    "RationalTF",
    "StateSpace",
    "SignalSeq",
    "poly_mul",
    "poly_downsample",
    "upsample",
    "downsample",
    "tf_to_ss",
    "cascade_realization",
    "c2d_zoh",
    "eval_tf",
    "hold_resample",
    "ROOT_CANCEL_TOL",
]

#: absolute distance under which a numerator and a denominator root cancel
ROOT_CANCEL_TOL = 1e-8


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


class Polynomial:
    """Real polynomial in ``z`` with ascending coefficients.

    Trailing (highest-power) exact zeros are stripped so that
    ``degree == len(coeffs) - 1``.  The zero polynomial keeps a single
    ``0.0`` coefficient and reports degree ``-1``.

    Examples
    --------
    >>> p = Polynomial([-1, 0, 0, 1])      # z**3 - 1
    >>> p.degree
    3
    >>> p(2.0)
    7.0
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs=(0.0,)):
        if isinstance(coeffs, Polynomial):
            c = coeffs.coeffs
        else:
            c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.ndim != 1:
            raise ValueError("polynomial coefficients must be one-dimensional")
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1)
        object.__setattr__(self, "_c", _frozen(c))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def from_roots(cls, roots, gain=1.0):
        """Monic polynomial with the given roots, scaled by ``gain``.

        Complex roots must come in conjugate pairs; the imaginary residue of
        the expansion is discarded.
        """
        roots = np.asarray(roots, dtype=complex)
        if roots.size == 0:
            return cls([gain])
        c = npoly.polyfromroots(roots)
        if np.max(np.abs(np.imag(c))) > 1e-9 * max(1.0, np.max(np.abs(c))):
            raise ValueError("roots are not closed under conjugation")
        return cls(gain * np.real(c))

    @classmethod
    def monomial(cls, k, coeff=1.0):
        c = np.zeros(k + 1)
        c[k] = coeff
        return cls(c)

    @property
    def coeffs(self):
        return self._c

    @property
    def degree(self):
        return -1 if self.is_zero else len(self._c) - 1

    @property
    def is_zero(self):
        return len(self._c) == 1 and self._c[0] == 0.0

    @property
    def lead(self):
        return float(self._c[-1])

    def descending(self):
        """Coefficients from the highest power down (display order)."""
        return self._c[::-1].copy()

    def roots(self):
        if self.degree < 1:
            return np.zeros(0, dtype=complex)
        return npoly.polyroots(self._c).astype(complex)

    def __call__(self, z):
        return npoly.polyval(z, self._c)

    def __add__(self, other):
        other = _as_poly(other)
        return Polynomial(npoly.polyadd(self._c, other._c))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self._c)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, Number):
            return Polynomial(self._c * float(other))
        return poly_mul(self, _as_poly(other))

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Polynomial([1.0])
        for _ in range(int(k)):
            out = out * self
        return out

    def __divmod__(self, other):
        q, r = npoly.polydiv(self._c, _as_poly(other)._c)
        return Polynomial(q), Polynomial(r)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash(self._c.tobytes())

    def allclose(self, other, atol=1e-12):
        a, b = self._c, _as_poly(other)._c
        n = max(len(a), len(b))
        return np.allclose(np.pad(a, (0, n - len(a))), np.pad(b, (0, n - len(b))),
                           rtol=0.0, atol=atol)

    def chop(self, atol):
        """Zero every coefficient with magnitude below ``atol``."""
        c = self._c.copy()
        c[np.abs(c) < atol] = 0.0
        return Polynomial(c)

    def coeff(self, k):
        return float(self._c[k]) if 0 <= k < len(self._c) else 0.0

    def __repr__(self):
        return f"Polynomial({self.format()})"

    def format(self, var="z", digits=4):
        if self.is_zero:
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self._c[k]
            if c == 0.0:
                continue
            mag = f"{abs(c):.{digits}g}"
            if k and mag == "1":
                mag = ""
            pw = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
            body = mag + ("*" if mag and pw else "") + pw
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def _as_poly(x):
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, Number):
        return Polynomial([float(x)])
    return Polynomial(x)


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Exact product (coefficient convolution) of two polynomials."""
    return Polynomial(np.convolve(_as_poly(a).coeffs, _as_poly(b).coeffs))


def poly_downsample(p: Polynomial, N: int, phase: int = 0) -> Polynomial:
    """Keep the coefficients at exponents ``j*N + phase`` as a polynomial in ``z**N``.

    The result is expressed in the slow variable: its coefficient ``j`` is
    the input coefficient of ``z**(j*N + phase)``.  Every other coefficient
    of ``p`` is discarded.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0 <= phase < N:
        raise ValueError("phase must lie in [0, N)")
    c = _as_poly(p).coeffs[phase::N]
    return Polynomial(c if c.size else [0.0])


def _cancel_common_roots(num, den, tol):
    if num.degree < 1 or den.degree < 1:
        return num, den
    rn, rd = num.roots(), den.roots()
    used = np.zeros(len(rd), dtype=bool)
    common = []
    for r in rn:
        dist = np.abs(rd - r)
        dist[used] = np.inf
        j = int(np.argmin(dist))
        if dist[j] < tol:
            used[j] = True
            common.append(0.5 * (r + rd[j]))
    if not common:
        return num, den
    common = np.asarray(common)
    # keep only conjugate-closed cancellations so the factor stays real
    keep = [c for c in common
            if abs(c.imag) < tol or np.min(np.abs(common - np.conj(c))) < tol]
    if not keep:
        return num, den
    keep = np.asarray(keep)
    keep = np.where(np.abs(keep.imag) < tol, keep.real, keep)
    factor = Polynomial.from_roots(keep)
    qn, _ = divmod(num, factor)
    qd, _ = divmod(den, factor)
    return qn, qd


class RationalTF:
    """Rational transfer function ``num(z)/den(z)`` with a sampling period.

    The denominator is normalized to be monic and common numerator and
    denominator roots closer than ``ROOT_CANCEL_TOL`` are cancelled on
    construction.  ``period == 0`` marks a continuous-time (Laplace) model.

    Parameters
    ----------
    num, den : Polynomial or array_like
        Ascending coefficients.
    period : float
        Sampling period in seconds, 0 for continuous time.
    reduce : bool
        Cancel common roots (default True).
    """

    __slots__ = ("num", "den", "period", "_pole_hint", "_zero_hint")

    def __init__(self, num, den=(1.0,), period=1.0, reduce=True):
        num, den = _as_poly(num), _as_poly(den)
        if den.is_zero:
            raise ZeroDivisionError("denominator is identically zero")
        if period < 0 or not np.isfinite(period):
            raise ValueError("period must be a finite non-negative number")
        lead = den.lead
        num, den = num * (1.0 / lead), den * (1.0 / lead)
        if reduce and not num.is_zero:
            num, den = _cancel_common_roots(num, den, ROOT_CANCEL_TOL)
            lead = den.lead
            num, den = num * (1.0 / lead), den * (1.0 / lead)
        if num.is_zero:
            den = Polynomial([1.0])
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "period", float(period))
        object.__setattr__(self, "_pole_hint", None)
        object.__setattr__(self, "_zero_hint", None)

    def __setattr__(self, name, value):
        raise AttributeError("RationalTF is immutable")

    @classmethod
    def from_zpk(cls, zeros, poles, gain, period=1.0, reduce=True):
        """Build from zeros, poles and gain.

        The given poles and zeros are remembered alongside the expanded
        polynomials (unless a cancellation changed them).  Clustered roots,
        such as a double integrator next to slow complex modes or zeros
        just inside the unit circle, are far better conditioned as a list
        than as expanded coefficients; :meth:`poles`, evaluation and
        :func:`tf_to_ss` use the lists when they are available.
        """
        poles = np.asarray(poles, dtype=complex).ravel()
        zeros = np.asarray(zeros, dtype=complex).ravel()
        tf = cls(Polynomial.from_roots(zeros, gain), Polynomial.from_roots(poles),
                 period, reduce=reduce)
        if tf.den.degree == len(poles) and not tf.num.is_zero:
            object.__setattr__(tf, "_pole_hint", _frozen(poles, complex))
            if tf.num.degree == len(zeros):
                object.__setattr__(tf, "_zero_hint", _frozen(zeros, complex))
        return tf

    @classmethod
    def from_descending(cls, num, den, period=1.0, reduce=True):
        """Build from coefficient lists written highest power first."""
        return cls(np.asarray(num, float)[::-1], np.asarray(den, float)[::-1],
                   period, reduce=reduce)

    @property
    def is_proper(self):
        return self.num.degree <= self.den.degree

    @property
    def is_strictly_proper(self):
        return self.num.degree < self.den.degree

    @property
    def relative_degree(self):
        return self.den.degree - max(self.num.degree, 0)

    def poles(self):
        if self._pole_hint is not None:
            return self._pole_hint.copy()
        return self.den.roots()

    @property
    def has_exact_poles(self):
        """True when the poles were supplied explicitly rather than computed."""
        return self._pole_hint is not None

    def with_poles(self, poles, rtol=1e-9):
        """Copy that remembers ``poles`` as its exact pole list.

        ``poles`` must match the denominator: same count, and their
        expansion must agree with the stored coefficients to ``rtol``
        (relative to the largest coefficient).  Transfer functions whose
        numerator vanishes are returned unchanged.
        """
        poles = np.asarray(poles, dtype=complex).ravel()
        if self.num.is_zero:
            return self
        if len(poles) != self.den.degree:
            raise ValueError(f"{len(poles)} poles given for a degree-{self.den.degree} denominator")
        expanded = Polynomial.from_roots(poles)
        scale = max(1.0, float(np.max(np.abs(self.den.coeffs))))
        if np.max(np.abs(npoly.polysub(expanded.coeffs, self.den.coeffs))) > rtol * scale:
            raise ValueError("poles do not match the denominator")
        out = RationalTF(self.num, self.den, self.period, reduce=False)
        object.__setattr__(out, "_pole_hint", _frozen(poles, complex))
        object.__setattr__(out, "_zero_hint", self._zero_hint)
        return out

    def _known_poles(self):
        """Exact pole list if available (empty for constants), else ``None``."""
        if self._pole_hint is not None:
            return self._pole_hint
        if self.den.degree == 0:
            return np.zeros(0, dtype=complex)
        return None

    def _combine_hints(self, result, a, b):
        pa, pb = a._known_poles(), b._known_poles()
        if pa is None or pb is None or result.num.is_zero:
            return result
        poles = np.concatenate([pa, pb])
        if len(poles) != result.den.degree:
            return result
        try:
            return result.with_poles(poles)
        except ValueError:
            return result

    @property
    def has_exact_zeros(self):
        return self._zero_hint is not None

    def zeros(self):
        if self._zero_hint is not None:
            return self._zero_hint.copy()
        return self.num.roots()

    def __call__(self, z):
        return eval_tf(self, z)

    def dc_gain(self):
        """Gain at ``z = 1`` (or ``s = 0`` for continuous models)."""
        return eval_tf(self, 0.0 if self.period == 0 else 1.0).real

    def _check_period(self, other):
        if abs(self.period - other.period) > 1e-12 * max(1.0, self.period):
            raise ValueError("transfer functions have different sampling periods")

    def __add__(self, other):
        if isinstance(other, Number):
            other = RationalTF([other], [1.0], self.period)
        self._check_period(other)
        if self.den == other.den:
            out = RationalTF(self.num + other.num, self.den, self.period)
            if self.has_exact_poles and out.den.degree == self.den.degree and not out.num.is_zero:
                out = out.with_poles(self._pole_hint)
            return out
        out = RationalTF(self.num * other.den + other.num * self.den,
                         self.den * other.den, self.period)
        return self._combine_hints(out, self, other)

    __radd__ = __add__

    def _scaled(self, k):
        out = RationalTF(self.num * k, self.den, self.period, reduce=False)
        if self.has_exact_poles and not out.num.is_zero:
            object.__setattr__(out, "_pole_hint", self._pole_hint)
            object.__setattr__(out, "_zero_hint", self._zero_hint)
        return out

    def __neg__(self):
        return self._scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Number):
            return self._scaled(other)
        self._check_period(other)
        out = RationalTF(self.num * other.num, self.den * other.den, self.period)
        return self._combine_hints(out, self, other)

    __rmul__ = __mul__

    def __repr__(self):
        return (f"RationalTF(({self.num.format()}) / ({self.den.format()}), "
                f"period={self.period:g})")


@dataclass(frozen=True)
class StateSpace:
    """State-space quadruple ``(A, B, C, D)``; ``period == 0`` is continuous."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    period: float = 1.0

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        p, m = D.shape
        A = np.atleast_2d(np.asarray(self.A, dtype=float)) if np.size(self.A) else np.zeros((0, 0))
        n = A.shape[0]
        B = np.asarray(self.B, dtype=float).reshape(n, m)
        C = np.asarray(self.C, dtype=float).reshape(p, n)
        if A.shape != (n, n):
            raise ValueError("A must be square")
        for name, arr in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
        if self.period < 0:
            raise ValueError("period must be non-negative")
        for name, arr in (("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, name, _frozen(arr))
        object.__setattr__(self, "period", float(self.period))

    @property
    def n_states(self):
        return self.A.shape[0]

    @property
    def n_inputs(self):
        return self.D.shape[1]

    @property
    def n_outputs(self):
        return self.D.shape[0]

    @property
    def is_discrete(self):
        return self.period > 0

    def poles(self):
        return np.linalg.eigvals(self.A) if self.n_states else np.zeros(0, complex)

    def evaluate(self, z):
        """Transfer matrix ``C (zI - A)^-1 B + D`` at a complex point."""
        if self.n_states == 0:
            return self.D.astype(complex)
        M = z * np.eye(self.n_states) - self.A
        return self.C @ np.linalg.solve(M, self.B.astype(complex)) + self.D


@dataclass(frozen=True)
class SignalSeq:
    """Uniformly sampled real sequence ``values[k] = f(k * period)``."""

    values: np.ndarray
    period: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("signal values must be finite")
        if not self.period > 0:
            raise ValueError("period must be positive")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "period", float(self.period))

    def __len__(self):
        return len(self.values)

    def times(self):
        return np.arange(len(self.values)) * self.period


def upsample(x: SignalSeq, N: int) -> SignalSeq:
    """Zero-insertion rate increase from period ``N*T`` to ``T``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    out = np.zeros(len(x) * N)
    out[::N] = x.values
    return SignalSeq(out, x.period / N)


def downsample(x: SignalSeq, N: int) -> SignalSeq:
    """Keep every ``N``-th sample, moving from period ``T`` to ``N*T``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return SignalSeq(x.values[::N], x.period * N)


def tf_to_ss(tf: RationalTF) -> StateSpace:
    """State-space realization of a proper SISO transfer function.

    By default this is the controllable canonical form: for ``den = z^n +
    a_{n-1} z^{n-1} + ... + a_0`` the first state row of ``A`` is
    ``[-a_{n-1}, ..., -a_0]``, ``B = e_1`` and ``C`` holds the strictly
    proper remainder coefficients, highest power first.

    When the poles are known exactly (see :meth:`RationalTF.with_poles`) and
    there are at least two of them, a cascade of first- and second-order
    sections is used instead (:func:`cascade_realization`).  The canonical
    form of a high-order denominator with clustered roots, such as a double
    integrator next to slow modes, moves those roots by orders of magnitude
    more than their rounding.
    """
    if not tf.is_proper:
        raise ImproperTransferFunction(
            f"numerator degree {tf.num.degree} exceeds denominator degree {tf.den.degree}")
    n = tf.den.degree
    if n == 0 or tf.num.is_zero:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)),
                          [[tf.num.coeff(0) / tf.den.lead if n == 0 else 0.0]], tf.period)
    if tf.has_exact_poles and n >= 2:
        if tf.has_exact_zeros:
            paired = _paired_sections(tf._zero_hint, tf._pole_hint)
            if paired is not None:
                return _series_realization(paired, tf.num.lead, tf.period)
        sections = _pole_sections(tf._pole_hint)
        if sections is not None:
            return cascade_realization(tf, sections)
    a = tf.den.coeffs          # monic, ascending
    b = np.pad(tf.num.coeffs, (0, n + 1 - len(tf.num.coeffs)))
    d = b[n]
    r = b[:n] - d * a[:n]
    A = np.zeros((n, n))
    A[0, :] = -a[n - 1::-1]
    A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    C = r[::-1].reshape(1, n)
    return StateSpace(A, B, C, [[d]], tf.period)


def _pole_sections(poles, imag_tol=1e-12):
    """Real monic factors (degree 1 or 2) for a conjugate-closed pole list.

    Returns ``None`` if some complex pole has no conjugate partner.
    """
    poles = list(np.asarray(poles, dtype=complex))
    sections = []
    upper = [p for p in poles if p.imag > imag_tol * max(1.0, abs(p))]
    lower = [p for p in poles if p.imag < -imag_tol * max(1.0, abs(p))]
    if len(upper) != len(lower):
        return None
    for p in poles:
        if abs(p.imag) <= imag_tol * max(1.0, abs(p)):
            sections.append(Polynomial([-p.real, 1.0]))
    for p in upper:
        j = int(np.argmin([abs(q - np.conj(p)) for q in lower]))
        q = lower.pop(j)
        if abs(q - np.conj(p)) > 1e-9 * max(1.0, abs(p)):
            return None
        sections.append(Polynomial([abs(p) ** 2, -2.0 * p.real, 1.0]))
    return sections


def _section_roots(roots, imag_tol=1e-12):
    """Like :func:`_pole_sections` but keeps one representative root per factor."""
    factors = _pole_sections(roots, imag_tol)
    if factors is None:
        return None
    return [(f, f.roots()[0] if f.degree == 2 else -f.coeff(0)) for f in factors]


def _paired_sections(zeros, poles):
    """Split a zero/pole list into proper real sections ``(num_k, den_k)``.

    Every zero factor goes to the section whose pole is nearest and that
    still has room, so near-cancelling pairs (zeros just inside the unit
    circle next to integrators) are evaluated together.  Returns ``None``
    when a quadratic zero factor finds no quadratic section.
    """
    zf, pf = _section_roots(zeros), _section_roots(poles)
    if zf is None or pf is None:
        return None
    nums = [Polynomial([1.0]) for _ in pf]
    room = [f.degree for f, _ in pf]
    for f, r in sorted(zf, key=lambda item: -item[0].degree):
        fits = [k for k in range(len(pf)) if room[k] >= f.degree]
        if not fits:
            return None
        k = min(fits, key=lambda k: abs(pf[k][1] - r))
        nums[k] = nums[k] * f
        room[k] -= f.degree
    return [(num, den, root) for num, (den, root) in zip(nums, pf)]


def _modal_section(num, root, period) -> StateSpace:
    """``num / ((z - p)(z - conj p))`` with ``A = [[s, w], [-w, s]]``, ``p = s + jw``.

    The rotation block is a normal matrix, so nearly coincident pole pairs
    keep the conditioning their companion form loses.
    """
    sig, om = float(np.real(root)), abs(float(np.imag(root)))
    den = Polynomial([sig * sig + om * om, -2.0 * sig, 1.0])
    b = np.pad(num.coeffs, (0, 3 - len(num.coeffs)))
    d = b[2]
    r0, r1 = b[0] - d * den.coeff(0), b[1] - d * den.coeff(1)
    # (zI - A)^-1 [0, 1]^T = [w, z - s]^T / den
    C = [[(r0 + r1 * sig) / om, r1]]
    A = [[sig, om], [-om, sig]]
    return StateSpace(A, [[0.0], [1.0]], C, [[d]], period)


def _series_realization(sections, gain, period) -> StateSpace:
    """Chain of canonical section realizations, the first one scaled by ``gain``."""
    A = np.zeros((0, 0))
    B = np.zeros((0, 1))
    C = np.zeros((1, 0))
    D = np.array([[float(gain)]])
    for num, den, root in sections:
        if den.degree == 2 and np.imag(root) != 0:
            s = _modal_section(num, root, period)
        else:
            s = tf_to_ss(RationalTF(num, den, period, reduce=False))
        n0, n1 = A.shape[0], s.n_states
        A = np.block([[A, np.zeros((n0, n1))], [s.B @ C, s.A]])
        B = np.vstack([B, s.B @ D])
        C = np.hstack([s.D @ C, s.C])
        D = s.D @ D
    return StateSpace(A, B, C, D, period)


def cascade_realization(tf: RationalTF, sections) -> StateSpace:
    """Chain of real sections ``1/d_1, 1/d_2, ...`` read out by a row ``C``.

    Section ``k`` is driven by the last state of section ``k-1`` (the input
    for ``k = 0``), so its states carry ``w_k = u / (d_1 ... d_k)`` and, for
    a quadratic section, ``z w_k``.  Writing the strictly proper remainder
    as ``r = sum_k c_k d_{k+1} ... d_K`` with ``deg c_k < deg d_k`` (found
    by repeated division) gives ``C``.  ``A`` is block lower triangular, so
    its eigenvalues are exactly the section roots.
    """
    n = tf.den.degree
    if sum(sec.degree for sec in sections) != n:
        raise ValueError("sections do not cover the denominator")
    b = np.pad(tf.num.coeffs, (0, n + 1 - len(tf.num.coeffs)))
    d = b[n]
    rem = Polynomial(b[:n + 1]) - d * tf.den
    cs = [None] * len(sections)
    for k in range(len(sections) - 1, -1, -1):
        rem, cs[k] = divmod(rem, sections[k])
    A = np.zeros((n, n))
    B = np.zeros((n, 1))
    C = np.zeros((1, n))
    pos, prev_out = 0, None
    for sec, c in zip(sections, cs):
        if sec.degree == 1:
            A[pos, pos] = -sec.coeff(0)
            entry, out = pos, pos
            C[0, pos] = c.coeff(0)
        else:
            A[pos, pos] = -sec.coeff(1)
            A[pos, pos + 1] = -sec.coeff(0)
            A[pos + 1, pos] = 1.0
            entry, out = pos, pos + 1
            C[0, pos] = c.coeff(1)
            C[0, pos + 1] = c.coeff(0)
        if prev_out is None:
            B[entry, 0] = 1.0
        else:
            A[entry, prev_out] = 1.0
        prev_out = out
        pos += sec.degree
    return StateSpace(A, B, C, [[d]], tf.period)


def c2d_zoh(sys: StateSpace, T: float) -> StateSpace:
    """Zero-order-hold discretization via the augmented matrix exponential.

    ``expm([[A, B], [0, 0]] * T) = [[A_d, B_d], [0, I]]``.
    """
    if sys.is_discrete:
        raise ValueError("c2d_zoh expects a continuous-time system (period 0)")
    if not (T > 0 and np.isfinite(T)):
        raise ValueError("T must be a positive finite number")
    n, m = sys.n_states, sys.n_inputs
    M = np.zeros((n + m, n + m))
    M[:n, :n] = sys.A
    M[:n, n:] = sys.B
    E = expm(M * T)
    if not np.all(np.isfinite(E)):
        raise ValueError("matrix exponential produced non-finite entries")
    return StateSpace(E[:n, :n], E[:n, n:], sys.C, sys.D, T)


def eval_tf(tf: RationalTF, z) -> complex:
    """``num(z) / den(z)``; raises :class:`PoleEvaluationError` at a pole."""
    z = complex(z)
    if tf.has_exact_poles:
        dist = np.abs(z - tf._pole_hint)
        if dist.size and dist.min() <= 1e-13 * max(1.0, abs(z)):
            raise PoleEvaluationError(f"{tf!r} evaluated at a pole z={z}")
        if tf.has_exact_zeros:
            return complex(tf.num.lead * np.prod(z - tf._zero_hint) / np.prod(z - tf._pole_hint))
        return complex(tf.num(z) / np.prod(z - tf._pole_hint))
    den = tf.den(z)
    scale = float(np.sum(np.abs(tf.den.coeffs) * np.abs(z) ** np.arange(len(tf.den.coeffs))))
    if abs(den) <= 1e-13 * scale:
        raise PoleEvaluationError(f"{tf!r} evaluated at a pole z={z}")
    return complex(tf.num(z) / den)


def hold_resample(sys: StateSpace, N: int) -> StateSpace:
    """Re-discretize a ZOH model at ``N`` times its period.

    The input is held for ``N`` steps: ``A_N = A**N`` and
    ``B_N = (A**(N-1) + ... + A + I) B``.  This equals the ZOH
    discretization of the underlying continuous plant at ``N*T``.
    """
    if not sys.is_discrete:
        raise ValueError("hold_resample expects a discrete-time system")
    if N < 1:
        raise ValueError("N must be >= 1")
    n = sys.n_states
    A_N = np.eye(n)
    S = np.zeros((n, n))
    for _ in range(N):
        S = S + A_N
        A_N = A_N @ sys.A
    return StateSpace(A_N, S @ sys.B, sys.C, sys.D, sys.period * N)
