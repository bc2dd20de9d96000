"""Command-line front end.

Usage::

    ctrlinterlace {decompose,interlace,bode,margins,simulate} --config FILE
                  [--out DIR] [--strategy S] [--order 2,0,1] [--all-orders]

Exit codes: 0 success, 2 configuration error, 3 numeric failure (unstable
loop, divergence, singular response, ill-posed or ill-conditioned split).

Configuration file (INI syntax, ``;`` or ``#`` comments).  Coefficient lists
are comma separated and written highest power first::

    [plant]
    domain = continuous        ; or discrete (then at period T)
    num = 1, 1
    den = 1, 2, 1.5

    [controller]               ; always discrete, at period T
    form = zpk                 ; or tf (keys num, den)
    zeros = 0.9976, 0.9937, 0.9368
    zero_factors = 1, -1.806, 0.8191      ; extra zeros: roots of each factor,
    poles = 1, 1, 0.9072, 0.7056          ; factors separated by ';'
    pole_factors = 1, -1.973, 0.9732
    gain = 0.46177

    [timing]
    T = 0.1
    N = 3

    [decomposition]
    threshold = 0.85

    [schedule]
    order = 2, 0, 1            ; slow block run at phase 0, 1, ...
    strategy = i1o1

    [sweep]                    ; either an explicit list ...
    omega = 0.5, 1, 2
    ; ... or a log grid up to pi/T:  points = 400 / decades = 3

    [simulate]
    steps = 600
    amplitude = 1

    [output]
    dir = out

Every section except ``plant``, ``controller`` and ``timing`` is optional.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import itertools
import os
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from .decomposition import DEFAULT_THRESHOLD, BlockSet, decompose, slow_controller
from .errors import DivergenceError, InterlaceError, ScheduleError
from .freqresp import bandwidth, bode_sweep, default_grid, margins, write_bode_csv
from .interlace import (InterlaceSchedule, compute_load_profile, default_order, mac_cost,
                        parse_strategy, to_slow_block, validate_schedule)
from .lifting import interlaced_loops, spectral_radius
from .sim import (overshoot, run_interlaced, run_single_rate, settling_time, step_reference,
                  write_simrun_csv)
from .tfcore import RationalTF, StateSpace, c2d_zoh, tf_to_ss

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

STRATEGIES = ("i1o1", "i1o2", "i2o1", "i2o2")


class ConfigError(Exception):
    """Problem in the configuration file or command-line options."""


@dataclass
class ProjectConfig:
    plant: StateSpace
    controller: RationalTF
    T: float
    N: int
    threshold: float = DEFAULT_THRESHOLD
    order: list | None = None
    strategy: str = "i1o1"
    grid: np.ndarray | None = None
    steps: int = 600
    amplitude: float = 1.0
    out_dir: str = "out"
    source: str = ""
    notes: list = field(default_factory=list)


# ---------------------------------------------------------------- parsing

def _line_of(text, section, key):
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[(.+)\]", s)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return i
    return None


class _Reader:
    def __init__(self, parser, text, path):
        self.p, self.text, self.path = parser, text, path

    def where(self, section, key):
        line = _line_of(self.text, section, key)
        loc = f"{self.path}:{line}" if line else self.path
        return f"{loc}: [{section}] {key}"

    def fail(self, section, key, msg):
        raise ConfigError(f"{self.where(section, key)}: {msg}")

    def has(self, section, key):
        return self.p.has_option(section, key)

    def raw(self, section, key, default=None, required=False):
        if not self.p.has_section(section):
            if required:
                raise ConfigError(f"{self.path}: missing section [{section}]")
            return default
        if not self.p.has_option(section, key):
            if required:
                raise ConfigError(f"{self.path}: [{section}] missing required key {key!r}")
            return default
        return self.p.get(section, key).strip()

    def floats(self, section, key, required=False, default=()):
        s = self.raw(section, key, None, required)
        if s is None:
            return list(default)
        if not s:
            return []
        try:
            return [float(v) for v in s.split(",")]
        except ValueError:
            self.fail(section, key, f"malformed coefficient list {s!r}")

    def factors(self, section, key):
        s = self.raw(section, key)
        if not s:
            return []
        out = []
        for part in s.split(";"):
            try:
                out.append([float(v) for v in part.split(",")])
            except ValueError:
                self.fail(section, key, f"malformed factor {part.strip()!r}")
        return out

    def number(self, section, key, kind=float, default=None, required=False):
        s = self.raw(section, key, None, required)
        if s is None:
            return default
        try:
            return kind(s)
        except ValueError:
            self.fail(section, key, f"expected {kind.__name__}, got {s!r}")


def _parse_order(text, where):
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"{where}: malformed order {text!r}") from None


def load_config(path) -> ProjectConfig:
    """Read and validate a project file; raises ``ConfigError``."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str.lower
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    r = _Reader(parser, text, path)

    T = r.number("timing", "t", float, required=True)
    if not T > 0:
        r.fail("timing", "t", "period must be positive")
    N = r.number("timing", "n", int, required=True)
    if N < 1:
        r.fail("timing", "n", "N must be >= 1")

    pnum = r.floats("plant", "num", required=True)
    domain = r.raw("plant", "domain", "continuous").lower()
    pden = r.floats("plant", "den", required=True)
    if not pden or not any(pden):
        r.fail("plant", "den", "denominator must be nonzero")
    if domain == "continuous":
        ptf = RationalTF.from_descending(pnum, pden, period=0.0)
        if not ptf.is_proper:
            r.fail("plant", "num", "plant must be proper")
        plant = c2d_zoh(tf_to_ss(ptf), T)
    elif domain == "discrete":
        ptf = RationalTF.from_descending(pnum, pden, period=T)
        if not ptf.is_proper:
            r.fail("plant", "num", "plant must be proper")
        plant = tf_to_ss(ptf)
    else:
        r.fail("plant", "domain", f"expected continuous or discrete, got {domain!r}")

    if not parser.has_section("controller"):
        raise ConfigError(f"{path}: missing section [controller]")
    form = r.raw("controller", "form", "tf").lower()
    if form == "zpk":
        zeros = r.floats("controller", "zeros")
        for f in r.factors("controller", "zero_factors"):
            zeros += list(np.roots(f))
        poles = r.floats("controller", "poles")
        for f in r.factors("controller", "pole_factors"):
            poles += list(np.roots(f))
        if not poles:
            r.fail("controller", "poles", "controller needs at least one pole")
        gain = r.number("controller", "gain", float, required=True)
        ctrl = RationalTF.from_zpk(zeros, poles, gain, T)
    elif form == "tf":
        cden = r.floats("controller", "den", required=True)
        if not any(cden):
            r.fail("controller", "den", "denominator must be nonzero")
        ctrl = RationalTF.from_descending(r.floats("controller", "num", required=True), cden, T)
    else:
        r.fail("controller", "form", f"expected zpk or tf, got {form!r}")
    if not ctrl.is_proper:
        r.fail("controller", "form", "controller must be proper")

    cfg = ProjectConfig(plant, ctrl, T, N, source=str(path))
    cfg.threshold = r.number("decomposition", "threshold", float, DEFAULT_THRESHOLD)
    order = r.raw("schedule", "order")
    if order:
        cfg.order = _parse_order(order, r.where("schedule", "order"))
    strat = r.raw("schedule", "strategy", "i1o1")
    try:
        parse_strategy(strat)
    except ValueError as exc:
        r.fail("schedule", "strategy", str(exc))
    cfg.strategy = strat.lower()
    if r.has("sweep", "omega"):
        grid = np.array(r.floats("sweep", "omega"))
        if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
            r.fail("sweep", "omega", "grid must be positive and strictly increasing")
        cfg.grid = grid
    else:
        pts = r.number("sweep", "points", int, 400)
        dec = r.number("sweep", "decades", float, 3.0)
        if pts < 1 or not dec > 0:
            r.fail("sweep", "points", "need points >= 1 and decades > 0")
        cfg.grid = default_grid(T, pts, dec)
    cfg.steps = r.number("simulate", "steps", int, 600)
    if cfg.steps < 0:
        r.fail("simulate", "steps", "steps must be >= 0")
    cfg.amplitude = r.number("simulate", "amplitude", float, 1.0)
    cfg.out_dir = r.raw("output", "dir", "out")
    return cfg


# ---------------------------------------------------------------- helpers

def _coeffs(p):
    return " ".join(f"{c:.10g}" for c in p.descending())


def _blocks(cfg) -> BlockSet:
    return decompose(cfg.controller, cfg.threshold)


def _orders(cfg, args, blocks):
    n = len(blocks.slow_blocks)
    if args.all_orders:
        return [list(p) for p in itertools.permutations(range(n))]
    if args.order is not None:
        order = _parse_order(args.order, "--order")
    elif cfg.order is not None:
        order = cfg.order
    else:
        order = default_order(blocks)
    if sorted(order) != list(range(n)):
        raise ConfigError(f"order {order} must be a permutation of the slow block indices 0..{n - 1}")
    return [order]


def _schedule(blocks, order, N, strategy):
    i, o = parse_strategy(strategy)
    sched = InterlaceSchedule.from_order(order, N, i, o)
    report = validate_schedule(sched, blocks)
    if not report.ok:
        raise ConfigError("invalid schedule: " + "; ".join(report.violations))
    return sched


def _tag(strategy, order, many):
    return strategy + ("_" + "".join(str(b) for b in order) if many else "")


def _outdir(cfg, args):
    d = args.out or cfg.out_dir
    os.makedirs(d, exist_ok=True)
    return d


# ---------------------------------------------------------------- commands

def cmd_decompose(cfg, args):
    """Split the controller into fast and slow parallel terms."""
    blocks = _blocks(cfg)
    groups = [("fast", g) for g in blocks.fast_groups] + [("slow", g) for g in blocks.slow_groups]
    print(f"threshold {cfg.threshold:g}: {len(blocks.fast_groups)} fast group(s), "
          f"{len(blocks.slow_groups)} slow group(s)")
    print(f"{'class':<6}{'kind':<15}{'mult':>5}{'|p|':>10}  pole")
    for cls, g in groups:
        p = g.poles[0]
        ps = f"{p.real:.6g}" if p.imag == 0 else f"{p.real:.6g} +/- {abs(p.imag):.6g}j"
        print(f"{cls:<6}{g.kind:<15}{g.multiplicity:>5}{g.magnitude:>10.6f}  {ps}")
    print(f"fast part: {blocks.fast}")
    for i, b in enumerate(blocks.slow_blocks):
        print(f"slow block {i}: {b}")
    path = os.path.join(_outdir(cfg, args), "blocks.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["block", "role", "num_desc", "den_desc", "period"])
        w.writerow(["fast", "fast", _coeffs(blocks.fast.num), _coeffs(blocks.fast.den),
                    f"{cfg.T:.10g}"])
        for i, b in enumerate(blocks.slow_blocks):
            w.writerow([i, "slow", _coeffs(b.num), _coeffs(b.den), f"{cfg.T:.10g}"])
    print(f"wrote {path}")
    return EXIT_OK


def cmd_interlace(cfg, args):
    """Slow-rate blocks and per-instant MAC load of the schedule."""
    blocks = _blocks(cfg)
    N = cfg.N
    out = _outdir(cfg, args)
    slow = [to_slow_block(b, N).tf for b in blocks.slow_blocks]
    for i, s in enumerate(slow):
        print(f"slow block {i} at {N}T: {s}  ({mac_cost(s)} MAC)")
    path = os.path.join(out, "slow_blocks.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["block", "num_desc", "den_desc", "period", "mac"])
        for i, s in enumerate(slow):
            w.writerow([i, _coeffs(s.num), _coeffs(s.den), f"{s.period:.10g}", mac_cost(s)])
    print(f"wrote {path}")
    orders = _orders(cfg, args, blocks)
    path = os.path.join(out, "load_profile.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["order", "phase", "monolithic_mac", "interlaced_mac"])
        for order in orders:
            prof = compute_load_profile(blocks, _schedule(blocks, order, N, "i1o1"))
            label = "-".join(map(str, order))
            print(f"order {label}: MAC per phase {prof.interlaced.tolist()} "
                  f"(monolithic {int(prof.monolithic[0])}, uniform={prof.uniform})")
            for q in range(N):
                w.writerow([label, q, int(prof.monolithic[q]), int(prof.interlaced[q])])
    print(f"wrote {path}")
    return EXIT_OK


def _loops(cfg, args):
    blocks = _blocks(cfg)
    orders = _orders(cfg, args, blocks)
    if args.strategy:
        strategies = [args.strategy]
    else:
        strategies = list(STRATEGIES) if args.every else [cfg.strategy]
    many = len(orders) > 1
    for order in orders:
        for strat in strategies:
            sched = _schedule(blocks, order, cfg.N, strat)
            ol, cl = interlaced_loops(blocks, sched, cfg.plant)
            yield _tag(strat, order, many), order, strat, ol, cl


def _margin_rows(cfg, args, write_curves):
    out = _outdir(cfg, args)
    rows, status = [], EXIT_OK
    for tag, order, strat, ol, cl in _loops(cfg, args):
        top = np.pi / cfg.T
        grid = cfg.grid[cfg.grid <= top * (1 + 1e-12)]
        bo = bode_sweep(ol, grid)
        bc = bode_sweep(cl, grid)
        rho = spectral_radius(cl)
        m = margins(bo)
        bw = bandwidth(bc)
        stable = rho < 1.0
        if not stable:
            status = EXIT_NUMERIC
        if write_curves:
            write_bode_csv(bo, os.path.join(out, f"bode_open_{tag}.csv"))
            write_bode_csv(bc, os.path.join(out, f"bode_closed_{tag}.csv"))
        rows.append((tag, m, bw, rho, stable, len(bo.singular) + len(bc.singular)))
    print(f"{'loop':<14}{'PM[deg]':>9}{'wc[rad/s]':>11}{'GM[dB]':>9}{'wp[rad/s]':>11}"
          f"{'BW[rad/s]':>11}{'rho':>10}  status")
    for tag, m, bw, rho, stable, nsing in rows:
        flag = "ok" if stable else "UNSTABLE closed loop"
        if m.infinite:
            flag += ", no crossover (infinite margin)"
        if nsing:
            flag += f", {nsing} singular point(s)"
        print(f"{tag:<14}{m.phase_margin:>9.2f}{m.gain_crossover:>11.4g}{m.gain_margin_db:>9.2f}"
              f"{m.phase_crossover:>11.4g}{bw:>11.4g}{rho:>10.6f}  {flag}")
    path = os.path.join(out, "margins.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["loop", "phase_margin_deg", "gain_crossover_rad_s", "gain_margin_db",
                    "phase_crossover_rad_s", "bandwidth_rad_s", "spectral_radius", "stable"])
        for tag, m, bw, rho, stable, _ in rows:
            w.writerow([tag, f"{m.phase_margin:.10g}", f"{m.gain_crossover:.10g}",
                        f"{m.gain_margin_db:.10g}", f"{m.phase_crossover:.10g}",
                        f"{bw:.10g}", f"{rho:.10g}", int(stable)])
    return status


def cmd_bode(cfg, args):
    """Dual-rate Bode data of the open and closed lifted loops."""
    return _margin_rows(cfg, args, write_curves=True)


def cmd_margins(cfg, args):
    """Margin and bandwidth table without the Bode curves."""
    return _margin_rows(cfg, args, write_curves=False)


def _run_guarded(label, fn, out, name, summary):
    try:
        run = fn()
        diverged = False
    except DivergenceError as exc:
        run, diverged = exc.run, True
        print(f"{label}: DIVERGED ({exc})")
    write_simrun_csv(run, os.path.join(out, name))
    summary.append((label, run, diverged))
    return diverged


def cmd_simulate(cfg, args):
    """Step responses of the interlaced and single-rate loops."""
    blocks = _blocks(cfg)
    out = _outdir(cfg, args)
    ref = step_reference(cfg.steps, cfg.T, cfg.amplitude)
    summary = []
    failed = False
    for tag, order, strat, _, _ in _loops(cfg, args):
        sched = _schedule(blocks, order, cfg.N, strat)
        failed |= _run_guarded(f"interlaced {tag}",
                               lambda: run_interlaced(blocks, sched, cfg.plant, ref),
                               out, f"sim_interlaced_{tag}.csv", summary)
    failed |= _run_guarded("single-rate fast",
                           lambda: run_single_rate(cfg.controller, cfg.plant, ref),
                           out, "sim_single_fast.csv", summary)
    failed |= _run_guarded("single-rate slow",
                           lambda: run_single_rate(slow_controller(blocks, cfg.N), cfg.plant, ref),
                           out, "sim_single_slow.csv", summary)
    print(f"{'run':<28}{'settling[s]':>12}{'overshoot[%]':>14}{'max MAC':>9}")
    for label, run, diverged in summary:
        if len(run) == 0 or diverged:
            st = ov = float("nan")
        else:
            st, ov = settling_time(run), 100.0 * overshoot(run)
        mac = int(run.mac_count.max()) if len(run) else 0
        print(f"{label:<28}{st:>12.4g}{ov:>14.4g}{mac:>9d}")
    return EXIT_NUMERIC if failed else EXIT_OK


COMMANDS = {
    "decompose": cmd_decompose,
    "interlace": cmd_interlace,
    "bode": cmd_bode,
    "margins": cmd_margins,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ctrlinterlace",
                                 description="Interlaced execution of digital controllers.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
        p.add_argument("--strategy", choices=STRATEGIES)
        p.add_argument("--order", metavar="LIST", help="comma-separated block per phase")
        p.add_argument("--all-orders", action="store_true",
                       help="one result per permutation of the slow blocks")
        if name in ("bode", "margins", "simulate"):
            p.add_argument("--every-strategy", dest="every", action="store_true",
                           help="all four input/output strategies (ignored with --strategy)")
        else:
            p.set_defaults(every=False)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.order is not None and args.all_orders:
            raise ConfigError("--order and --all-orders are mutually exclusive")
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ScheduleError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InterlaceError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
