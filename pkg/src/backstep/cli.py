"""Command-line harness: ``backstep <subcommand> [--config FILE] [--out DIR] [--seed S]``.

Every subcommand writes CSV files into the output directory together with
``effective_config.json``, prints a short summary and exits 1 when one of its
invariant checks fails (2 on a configuration or numerical error).
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import acceptance
from .closed_loop import (NormKind, assemble_closed_loop, closed_loop_spectrum, decay_rate,
                          pole_shift_mismatch, simulate)
from .config import RunConfig, load_config
from .controllability import ingham_gap_report, minimal_norm_control, verify_null_control
from .errors import BackstepError
from .feedback import build_T, operator_equality_residual, solve_feedback, tbb_residual
from .riesz import riesz_bounds, riesz_family, sum_bound_check
from .spectral import Spectrum, random_state, validate_multiplier

log = logging.getLogger("backstep")

THREADS_ENV = "SPECTRAL_BACKSTEP_THREADS"
SUBCOMMANDS = ("spectrum", "riesz", "feedback", "poleshift", "simulate", "control", "sweep",
               "acceptance")

POLE_TOL = acceptance.POLE_TOL
DNORM_TOL = acceptance.DNORM_TOL
SOLVE_TOL = 1e-10


@dataclass
class Outcome:
    """Invariant results collected by a subcommand."""

    checks: list = field(default_factory=list)
    files: list = field(default_factory=list)

    def check(self, name: str, ok: bool, detail: str):
        self.checks.append((name, bool(ok), detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)


class CsvWriter:
    def __init__(self, directory: Path, seed: int, timestamp: bool):
        self.directory = directory
        self.seed = seed
        self.timestamp = timestamp

    def write(self, name: str, header, rows) -> Path:
        path = self.directory / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            if self.timestamp:
                fh.write(f"# generated {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}\n")
            fh.write(f"# seed={self.seed}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
        return path

    def sub(self, name: str) -> "CsvWriter":
        return CsvWriter(self.directory / name, self.seed, self.timestamp)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return x


def _split(z):
    z = np.asarray(z)
    return z.real, z.imag


def _lowest_pow2_grid(N: int):
    sizes = [16]
    while sizes[-1] * 2 <= N:
        sizes.append(sizes[-1] * 2)
    if sizes[-1] != N:
        sizes.append(N)
    return [n for n in sizes if n <= N]


# subcommands -----------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, out: CsvWriter) -> Outcome:
    res = Outcome()
    sp = cfg.spectrum()
    re, im = _split(sp.values)
    alpha = sp.alpha
    scale = np.where(sp.modes > 0, np.abs(sp.values) / np.maximum(sp.modes, 1) ** alpha, np.nan)
    res.files.append(out.write("spectrum.csv", ["n", "re_lambda", "im_lambda", "abs_over_n_alpha"],
                               zip(sp.modes, re, im, scale)))
    gaps = ingham_gap_report(sp)
    res.files.append(out.write("gaps.csv", ["N0", "gamma", "horizon"], gaps.rows()))
    res.check("imaginary spectrum", np.all(re == 0), f"max |Re lambda| = {np.abs(re).max():.1e}")
    res.check("positive gap", gaps.passed, f"uniform gap {gaps.omega:.6g}")
    rep = validate_multiplier(cfg.system(), cfg.N)
    res.check("multiplier hypotheses", rep.passed,
              "; ".join(rep.reasons) or f"gap {rep.gap_lower:.4g}, growth "
                                         f"[{rep.growth_lower:.4g}, {rep.growth_upper:.4g}]")
    return res


def cmd_riesz(cfg: RunConfig, out: CsvWriter) -> Outcome:
    res = Outcome()
    rows = []
    for n in _lowest_pow2_grid(cfg.N):
        sp = Spectrum.from_spec(cfg.system(), n, cfg.spectrum().parity)
        b = riesz_bounds(riesz_family(sp, cfg.lam, cfg.r))
        rows.append((n, b.C1, b.C2, b.cond))
        res.check(f"frame bounds N={n}", not b.degenerate, f"cond {b.cond:.4g}")
    res.files.append(out.write("riesz_bounds.csv", ["N", "C1", "C2", "cond"], rows))
    alpha = cfg.system().growth_exponent
    s = min(0.0, alpha - 1.0 - 0.1)
    table = sum_bound_check(s, cfg.system(), min(cfg.N, 128))
    res.files.append(out.write("sum_bound.csv", ["p", "lhs", "rhs", "ratio"], table.rows()))
    res.check("sum estimate finite", np.isfinite(table.sup_ratio), f"s={s:g}, sup ratio {table.sup_ratio:.4g}")
    return res


def _synthesis(cfg: RunConfig, lam: float = None):
    lam = cfg.lam if lam is None else lam
    sp, B = cfg.spectrum(), cfg.profile()
    return sp, B, solve_feedback(B, sp, lam)


def cmd_feedback(cfg: RunConfig, out: CsvWriter) -> Outcome:
    res = Outcome()
    sp, B, gains = _synthesis(cfg)
    bundle = build_T(gains, B, sp, cfg.lam, cfg.r)
    reK, imK = _split(gains.K)
    rek, imk = _split(gains.k)
    res.files.append(out.write("gains.csv", ["n", "re_K", "im_K", "re_k", "im_k", "abs_K"],
                               zip(sp.modes, reK, imK, rek, imk, np.abs(gains.K))))
    tbb = tbb_residual(gains, B, sp, cfg.lam)
    opeq = operator_equality_residual(bundle, gains, B, sp, cfg.lam)
    tnorm = float(np.linalg.norm(bundle.T, 2))
    res.files.append(out.write("transform.csv", ["quantity", "value"], [
        ("solve_condition", gains.condition), ("solve_residual", gains.residual),
        ("tbb_residual", tbb), ("opeq_residual", opeq), ("T_norm", tnorm),
        ("T_sigma_min", bundle.sigma_min), ("T_cond", bundle.cond),
        ("factorization_error", bundle.factorization_error)]))
    res.check("TB = B solve", gains.residual <= SOLVE_TOL and tbb <= SOLVE_TOL * max(1.0, np.linalg.norm(B.b)),
              f"residual {gains.residual:.2e}, ||Tb - b|| {tbb:.2e}")
    res.check("operator equality", opeq <= SOLVE_TOL * tnorm, f"{opeq:.2e} vs ||T|| {tnorm:.3g}")
    res.check("T invertible", bundle.sigma_min > 0, f"sigma_min {bundle.sigma_min:.3e}")
    return res


def cmd_poleshift(cfg: RunConfig, out: CsvWriter) -> Outcome:
    res = Outcome()
    sp, B, gains = _synthesis(cfg)
    eigs = closed_loop_spectrum(assemble_closed_loop(sp, B, gains, cfg.r))
    target, mismatch = pole_shift_mismatch(eigs, sp, cfg.lam)
    order = np.argsort(-target.imag, kind="stable")
    mode_of = {complex(v - cfg.lam): int(n) for n, v in zip(sp.modes, sp.values)}
    rows = [(mode_of[complex(target[i])], eigs[i].real, eigs[i].imag, target[i].real, target[i].imag,
             mismatch[i]) for i in order]
    res.files.append(out.write("poleshift.csv", ["n", "re_eig", "im_eig", "re_target", "im_target",
                                                 "abs_mismatch"], rows))
    rel = float(mismatch.max() / (1.0 + np.abs(sp.values).max()))
    res.check("pole shift", rel <= POLE_TOL, f"max relative mismatch {rel:.2e}")
    return res


def _trajectories(cfg: RunConfig, lam: float):
    sp, B, gains = _synthesis(cfg, lam)
    bundle = build_T(gains, B, sp, lam, cfg.r)
    mat = assemble_closed_loop(sp, B, gains, cfg.r)
    t = np.linspace(0.0, cfg.horizon, cfg.grid_points)
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.n_states):
        yield simulate(mat, random_state(cfg.N, rng, sp.parity), t, bundle, cfg.r_norm)


def _trajectory_rows(tr, width: int):
    width = min(width, tr.states.shape[1])
    for i, t in enumerate(tr.times):
        row = [t, tr.norm_L2[i], tr.norm_Hr[i], tr.norm_d[i]]
        for z in tr.states[i, :width]:
            row += [z.real, z.imag]
        yield row


def _trajectory_header(cfg: RunConfig, modes):
    head = ["t", "norm_L2", "norm_Hr", "norm_d"]
    for n in modes[:cfg.dump_width]:
        head += [f"re_u{n}", f"im_u{n}"]
    return head


def _dnorm_defect(tr, lam):
    return float(np.max(np.abs(np.log(tr.norm_d) + lam * tr.times - np.log(tr.norm_d[0]))))


def _fit_window(cfg, lam):
    return (min(1.0 / lam, cfg.horizon), min(6.0 / lam, cfg.horizon))


def cmd_simulate(cfg: RunConfig, out: CsvWriter) -> Outcome:
    res = Outcome()
    modes = cfg.spectrum().modes
    worst, fits = 0.0, []
    for j, tr in enumerate(_trajectories(cfg, cfg.lam)):
        res.files.append(out.write(f"trajectory_{j:02d}.csv", _trajectory_header(cfg, modes),
                                   _trajectory_rows(tr, cfg.dump_width)))
        worst = max(worst, _dnorm_defect(tr, cfg.lam))
        for kind in (NormKind.L2, NormKind.HR):
            f = decay_rate(tr, kind, _fit_window(cfg, cfg.lam))
            fits.append((j, kind.value, f.rate, abs(f.rate + cfg.lam) / cfg.lam, f.r2))
    res.files.append(out.write("decay_fits.csv", ["state", "norm", "fitted_rate", "rel_err", "r2"], fits))
    res.check("d-norm decay", worst <= DNORM_TOL, f"max log defect {worst:.2e}")
    return res


def cmd_control(cfg: RunConfig, out: CsvWriter) -> Outcome:
    res = Outcome()
    sp, B = cfg.spectrum(), cfg.profile()
    u0 = random_state(cfg.N, np.random.default_rng(cfg.seed), sp.parity)
    plan = minimal_norm_control(u0, B, sp, cfg.T_horizon)
    rep = verify_null_control(u0, plan, B, sp)
    c = plan.c.astype(complex)
    res.files.append(out.write("control_coefficients.csv", ["m", "re_c", "im_c"],
                               zip(sp.modes, c.real, c.imag)))
    t = np.linspace(0.0, cfg.T_horizon, cfg.grid_points)
    v = plan.control(t)
    res.files.append(out.write("control_signal.csv", ["t", "re_v", "im_v"], zip(t, v.real, v.imag)))
    res.files.append(out.write("control_summary.csv", ["quantity", "value"], [
        ("gram_cond", plan.gram_cond), ("control_norm", plan.control_norm),
        ("final_relative_norm", rep.final_relative_norm),
        ("max_moment_residual", rep.max_moment_residual),
        ("quadrature_discrepancy", rep.quadrature_discrepancy)]))
    res.check("null state", rep.final_relative_norm <= acceptance.NULL_TOL,
              f"||u(T)||/||u0|| {rep.final_relative_norm:.2e}")
    res.check("moments", rep.max_moment_residual <= acceptance.MOMENT_TOL,
              f"max residual {rep.max_moment_residual:.2e}")
    res.check("quadrature", rep.quadrature_discrepancy <= acceptance.QUAD_TOL,
              f"discrepancy {rep.quadrature_discrepancy:.2e}")
    return res


def _sweep_one(cfg: RunConfig, lam: float, out: CsvWriter):
    sub = out.sub(f"lambda_{lam:g}")
    run = replace(cfg, lam=lam, n_states=1)
    tr = next(_trajectories(run, lam))
    path = sub.write("trajectory.csv", _trajectory_header(run, run.spectrum().modes),
                     _trajectory_rows(tr, run.dump_width))
    fit = decay_rate(tr, NormKind.L2, _fit_window(run, lam))
    return lam, fit, _dnorm_defect(tr, lam), path


def thread_cap(default: int = None) -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise BackstepError(f"{THREADS_ENV}={raw!r} is not an integer") from None
        return max(1, n)
    return default or min(4, os.cpu_count() or 1)


def cmd_sweep(cfg: RunConfig, out: CsvWriter) -> Outcome:
    res = Outcome()
    lams = list(cfg.sweep_lambdas)
    with ThreadPoolExecutor(max_workers=min(thread_cap(), len(lams))) as pool:
        results = list(pool.map(lambda lam: _sweep_one(cfg, lam, out), lams))
    rows = []
    for lam, fit, defect, path in results:
        res.files.append(path)
        rows.append((lam, fit.rate, abs(fit.rate + lam) / lam, fit.r2, defect))
        res.check(f"d-norm decay lambda={lam:g}", defect <= DNORM_TOL, f"max log defect {defect:.2e}")
    res.files.append(out.write("summary.csv", ["lambda", "fitted_rate", "rel_err", "r2", "dnorm_defect"], rows))
    return res


def cmd_acceptance(cfg: RunConfig, out: CsvWriter) -> Outcome:
    res = Outcome()
    rows = []
    for number in sorted(acceptance.CRITERIA):
        r = acceptance.run_criterion(number, cfg.seed)
        print(r.line())
        rows.append((r.number, r.title, "PASS" if r.passed else "FAIL", r.detail))
        res.check(f"criterion {r.number}", r.passed, r.detail)
    res.files.append(out.write("acceptance.csv", ["criterion", "title", "result", "detail"], rows))
    return res


COMMANDS = {
    "spectrum": cmd_spectrum, "riesz": cmd_riesz, "feedback": cmd_feedback,
    "poleshift": cmd_poleshift, "simulate": cmd_simulate, "control": cmd_control,
    "sweep": cmd_sweep, "acceptance": cmd_acceptance,
}


def run_subcommand(name: str, cfg: RunConfig, timestamp: bool = True) -> tuple[int, Outcome]:
    out_dir = Path(cfg.output_dir)
    cfg.echo(out_dir)
    outcome = COMMANDS[name](cfg, CsvWriter(out_dir, cfg.seed, timestamp))
    return (0 if outcome.passed else 1), outcome


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="backstep", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=SUBCOMMANDS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--seed", type=int, help="random seed (overrides seed)")
    p.add_argument("--no-header-timestamp", action="store_true",
                   help="omit the timestamp comment line from CSV files")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, output_dir=args.out, seed=args.seed)
        code, outcome = run_subcommand(args.command, cfg, timestamp=not args.no_header_timestamp)
    except (BackstepError, OSError, ValueError) as exc:
        print(f"backstep {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for name, ok, detail in outcome.checks:
        if args.command != "acceptance" or not ok:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    for path in outcome.files:
        log.debug("wrote %s", path)
    if code:
        failed = [n for n, ok, _ in outcome.checks if not ok]
        print(f"backstep {args.command}: invariant check failed: {', '.join(failed)}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
