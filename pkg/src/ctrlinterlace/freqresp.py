"""Exact frequency response of dual-rate lifted systems.

Driving a lifted system (input period ``Tu``, output period ``Ty``,
``Nu*Tu = Ny*Ty = T0``) with ``u(k) = exp(j w Tu k)`` produces ``Ny``
output components ``ybar_r exp(j w_r Ty k)`` at ``w_r = w + 2 pi r / T0``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularResponse
from .lifting import LiftedSystem, solve_shifted

__all__ = [
    "FreqComponents",
    "BodeData",
    "MarginReport",
    "dual_rate_response",
    "t0_sum_response",
    "bode_sweep",
    "default_grid",
    "margins",
    "bandwidth",
    "ripple_index",
    "write_bode_csv",
    "bode_columns",
]

SINGULAR_RCOND = 1e-13


@dataclass(frozen=True)
class FreqComponents:
    omega: float
    components: np.ndarray      # ybar_r, r = 0..Ny-1
    omegas_r: np.ndarray

    def __len__(self):
        return len(self.components)


def dual_rate_response(sys: LiftedSystem, omega: float) -> FreqComponents:
    """Output components of a SISO lifted system for input frequency ``omega``.

    ``ybar_r = (1/Ny) [1, z^-1, ..., z^-(Ny-1)] G(z^Ny) [1, v, ..., v^(Nu-1)]^T``
    with ``z = exp(j w_r Ty)`` on the left and ``v = exp(j w Tu)`` on the right.
    """
    if sys.m != 1 or sys.p != 1:
        raise ValueError("dual_rate_response handles single-input single-output lifts")
    Nu, Ny, Tu, Ty = sys.Nu, sys.Ny, sys.Tu, sys.Ty
    z0 = np.exp(1j * omega * sys.T0)
    if sys.n_states:
        M = z0 * np.eye(sys.n_states) - sys.A
        s = np.linalg.svd(M, compute_uv=False)
        if s[-1] <= SINGULAR_RCOND * max(1.0, s[0]):
            raise SingularResponse(f"lifted model has a unit-circle pole at omega={omega}")
        G = sys.C @ solve_shifted(sys.A, z0, sys.B) + sys.D
    else:
        G = sys.D.astype(complex)
    right = np.exp(1j * omega * Tu * np.arange(Nu))
    Gv = G @ right
    omegas_r = omega + 2.0 * np.pi * np.arange(Ny) / sys.T0
    left = np.exp(-1j * np.outer(omegas_r, Ty * np.arange(Ny)))
    comps = left @ Gv / Ny
    return FreqComponents(float(omega), comps, omegas_r)


def t0_sum_response(fc: FreqComponents) -> complex:
    """Complex gain of the output downsampled to the metaperiod.

    At ``t = k T0`` every component ``r`` advances by ``exp(j w_r T0) =
    exp(j w T0)``, so the samples form a single sinusoid whose gain is the
    sum of the components.
    """
    return complex(np.sum(fc.components))


def ripple_index(fc: FreqComponents) -> float:
    """``sum_{r>=1} |ybar_r| / |ybar_0|``; zero for single-rate systems.

    Raises ``ZeroDivisionError`` when the fundamental vanishes.
    """
    c = np.abs(fc.components)
    if c[0] < 1e-15:
        raise ZeroDivisionError("fundamental component vanishes; ripple index undefined")
    return float(np.sum(c[1:]) / c[0])


def default_grid(T: float, n: int = 400, decades: float = 3.0) -> np.ndarray:
    """Logarithmic grid ending at the fast Nyquist frequency ``pi/T``."""
    top = np.pi / T
    return np.logspace(np.log10(top) - decades, np.log10(top), n)


def _unwrap_deg(ph):
    out = np.full(ph.shape, np.nan)
    ok = np.isfinite(ph)
    if ok.any():
        out[ok] = np.degrees(np.unwrap(np.radians(ph[ok])))
    return out


@dataclass
class BodeData:
    omega: np.ndarray
    components: np.ndarray           # (len(omega), Ny), NaN where singular
    t0: np.ndarray                   # T0-sum gain per omega
    T0: float
    singular: list = field(default_factory=list)

    @property
    def Ny(self):
        return self.components.shape[1]

    @staticmethod
    def _db(x):
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(x))

    def mag_db(self, r=None):
        return self._db(self.t0 if r is None else self.components[:, r])

    def phase_deg(self, r=None):
        x = self.t0 if r is None else self.components[:, r]
        return _unwrap_deg(np.degrees(np.angle(x)))

    def fc(self, i) -> FreqComponents:
        w = float(self.omega[i])
        return FreqComponents(w, self.components[i],
                              w + 2.0 * np.pi * np.arange(self.Ny) / self.T0)


def bode_sweep(sys: LiftedSystem, grid) -> BodeData:
    """Components and T0-sum gain at every grid frequency.

    Singular frequencies are recorded in ``BodeData.singular`` and filled
    with NaN; the sweep continues.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D array")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[0] <= 0 or grid[-1] > np.pi / sys.T0 * sys.Ny * (1 + 1e-12):
        raise ValueError("grid must lie in (0, pi*Ny/T0]")
    comps = np.full((grid.size, sys.Ny), np.nan + 0j)
    t0 = np.full(grid.size, np.nan + 0j)
    singular = []
    for i, w in enumerate(grid):
        try:
            fc = dual_rate_response(sys, w)
        except SingularResponse:
            singular.append(float(w))
            continue
        comps[i] = fc.components
        t0[i] = t0_sum_response(fc)
    return BodeData(grid, comps, t0, sys.T0, singular)


@dataclass(frozen=True)
class MarginReport:
    phase_margin: float          # degrees, inf if no gain crossover
    gain_margin_db: float        # dB, inf if no phase crossover
    gain_crossover: float        # rad/s, nan if none
    phase_crossover: float       # rad/s, nan if none
    infinite: bool = False

    def __str__(self):
        pm = "inf" if np.isinf(self.phase_margin) else f"{self.phase_margin:.2f} deg"
        gm = "inf" if np.isinf(self.gain_margin_db) else f"{self.gain_margin_db:.2f} dB"
        return (f"PM {pm} at {self.gain_crossover:.4g} rad/s, "
                f"GM {gm} at {self.phase_crossover:.4g} rad/s")


def _interp_log(w0, w1, f0, f1, target=0.0):
    t = (target - f0) / (f1 - f0)
    return float(np.exp(np.log(w0) + t * (np.log(w1) - np.log(w0)))), t


def margins(open_loop: BodeData) -> MarginReport:
    """Classical margins read off the T0-sum curve.

    Phase margin at the first 0 dB crossing; gain margin at the first
    frequency above it where the unwrapped phase crosses -180 deg (mod 360).
    The phase at the crossing is wrapped to (-360, 0] before taking
    ``180 + phase``.
    """
    w = open_loop.omega
    mag = open_loop.mag_db()
    ph = open_loop.phase_deg()
    ok = np.isfinite(mag) & np.isfinite(ph)
    w, mag, ph = w[ok], mag[ok], ph[ok]
    wc, pm = np.nan, np.inf
    for i in range(len(w) - 1):
        if (mag[i] >= 0.0) != (mag[i + 1] >= 0.0):
            wc, t = _interp_log(w[i], w[i + 1], mag[i], mag[i + 1])
            phc = ph[i] + t * (ph[i + 1] - ph[i])
            phc = phc - 360.0 * np.ceil(phc / 360.0)     # into (-360, 0]
            pm = 180.0 + phc
            start = i
            break
    else:
        start = 0
    wp, gm = np.nan, np.inf
    for i in range(start, len(w) - 1):
        k0 = np.floor((ph[i] + 180.0) / 360.0)
        k1 = np.floor((ph[i + 1] + 180.0) / 360.0)
        if k0 != k1:
            level = 360.0 * max(k0, k1) - 180.0
            wp, t = _interp_log(w[i], w[i + 1], ph[i], ph[i + 1], level)
            magp = mag[i] + t * (mag[i + 1] - mag[i])
            gm = -magp
            break
    return MarginReport(float(pm), float(gm), float(wc), float(wp),
                        infinite=bool(np.isinf(pm) or np.isinf(gm)))


def bandwidth(closed_loop: BodeData, drop_db: float = 3.0) -> float:
    """First frequency where the T0-sum gain falls ``drop_db`` below its low-frequency value."""
    mag = closed_loop.mag_db()
    w = closed_loop.omega
    ok = np.isfinite(mag)
    w, mag = w[ok], mag[ok]
    level = mag[0] - drop_db
    below = np.flatnonzero(mag < level)
    if below.size == 0:
        return float("inf")
    i = below[0]
    if i == 0:
        return float(w[0])
    wb, _ = _interp_log(w[i - 1], w[i], mag[i - 1], mag[i], level)
    return wb


def bode_columns(Ny: int) -> list:
    cols = ["omega_rad_s"]
    for r in range(Ny):
        cols += [f"mag_db_{r}", f"phase_deg_{r}"]
    return cols + ["t0_mag_db", "t0_phase_deg"]


def write_bode_csv(data: BodeData, path) -> None:
    """Columns: ``omega_rad_s``, then ``mag_db_r, phase_deg_r`` per component, then
    ``t0_mag_db, t0_phase_deg``.  Singular rows hold ``nan``."""
    mags = [data.mag_db(r) for r in range(data.Ny)]
    phs = [data.phase_deg(r) for r in range(data.Ny)]
    t0m, t0p = data.mag_db(), data.phase_deg()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(bode_columns(data.Ny))
        for i, om in enumerate(data.omega):
            row = [f"{om:.10g}"]
            for r in range(data.Ny):
                row += [f"{mags[r][i]:.12g}", f"{phs[r][i]:.12g}"]
            row += [f"{t0m[i]:.12g}", f"{t0p[i]:.12g}"]
            w.writerow(row)
