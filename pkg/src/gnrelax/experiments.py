"""Experiment runners: convergence in lambda, preparedness sweep, FG-vs-GN cost, toy demos, single runs.

Each runner takes an :class:`~gnrelax.config.ExperimentConfig` and returns a
list of :class:`~gnrelax.results.ResultTable`. Sweep points are independent
and may run in worker processes; rows are always sorted by parameter.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import time

import numpy as np

from . import diagnostics, elliptic, prep, solvers, toy
from .errors import GNRelaxError
from .results import ResultTable, save_snapshot
from .spectral import ScalarField
from .state import balanced_array

WALL_COLUMNS_PREFIX = "wall"


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    degenerate: bool
    n_points: int


def fit_loglog_slope(xs, ys):
    """Least-squares slope of ``log y`` against ``log x``.

    Non-positive ``y`` values are dropped; the fit is flagged degenerate when
    fewer than two points survive (for example an identically zero error).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = (ys > 0) & np.isfinite(ys) & (xs > 0)
    if keep.sum() < 2:
        return SlopeFit(float("nan"), float("nan"), True, int(keep.sum()))
    slope, intercept = np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)
    return SlopeFit(float(slope), float(intercept), False, int(keep.sum()))


def _map(fn, items, jobs):
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def _h1_pair(grid, a, b):
    return grid.norm(a[0] - b[0], 1.0) + grid.norm(a[1] - b[1], 1.0)


# ---------------------------------------------------------------------------
# convergence in lambda
# ---------------------------------------------------------------------------


def reference_solution(cfg):
    """GN solution at ``t_end`` from the configured data (RK4, reference CFL)."""
    grid = cfg.grid.build()
    p = cfg.params.build()
    zeta0, u0 = cfg.initial_data.build(grid)
    policy = cfg.policy.build(scheme="rk4_explicit", cfl_number=cfg.reference.cfl_number, snapshot_interval=None)
    return solvers.integrate((zeta0, u0), p, policy, "gn")


def _convergence_point(args):
    cfg, lam, ref_final = args
    grid = cfg.grid.build()
    p = cfg.params.build(lam)
    zeta0, u0 = cfg.initial_data.build(grid)
    row = {"lam": lam, "mu": p.mu, "prep_order": cfg.prep_order}
    tic = time.perf_counter()
    try:
        U0 = prep.prepare(zeta0, u0, cfg.prep_order, p).U0
        traj = solvers.integrate(U0, p, cfg.policy.build(), "fg")
    except GNRelaxError as err:
        row.update(status="failed", message=str(err))
        return row
    final = traj.states[-1]
    ref = final if ref_final is None else ref_final
    err = _h1_pair(grid, final, ref)
    res = diagnostics.residual_series(traj)
    row.update(
        status="ok",
        message="",
        error_h1=err,
        lam_times_error=lam * err,
        residual_l2_sup=float(res.max()),
        residual_l2_end=float(res[-1]),
        lam_dev_h1_sup=float(prep.preparedness_report(traj, p, 1.0).max()),
        margin_min=float(diagnostics.margin_series(traj).min()),
        mass_drift=float(abs(grid.integral(final[0]) - grid.integral(traj.states[0][0]))),
        steps=traj.n_steps,
        dt=traj.dt,
        wall_total_s=time.perf_counter() - tic,
        wall_per_step_s=float(np.median(traj.step_wall)) if traj.n_steps else 0.0,
    )
    return row


CONVERGENCE_COLUMNS = [
    "lam",
    "mu",
    "prep_order",
    "status",
    "message",
    "error_h1",
    "lam_times_error",
    "residual_l2_sup",
    "residual_l2_end",
    "lam_dev_h1_sup",
    "margin_min",
    "mass_drift",
    "steps",
    "dt",
    "wall_total_s",
    "wall_per_step_s",
]


def run_convergence_lambda(cfg, jobs=1):
    """Prepared FG runs over ``params.lam_sweep`` against one reference; fits ``log e`` vs ``log lam``.

    With ``reference.system == "fg"`` each run is compared with itself (a
    harness self-check whose error is identically zero and whose fit is
    reported as degenerate).
    """
    ref_final = None
    ref_meta = {}
    if cfg.reference.system == "gn":
        ref = reference_solution(cfg)
        ref_final = ref.states[-1]
        ref_meta = {"reference_steps": ref.n_steps, "reference_elliptic_iterations": ref.elliptic_iterations}
    rows = _map(_convergence_point, [(cfg, lam, ref_final) for lam in cfg.params.lam_sweep], jobs)
    table = ResultTable("convergence_lambda", CONVERGENCE_COLUMNS)
    for r in rows:
        table.add(**r)
    table.sorted_by("lam")
    ok = [r for r in table.rows if r["status"] == "ok"]
    fit = fit_loglog_slope([r["lam"] for r in ok], [r["error_h1"] for r in ok])
    rfit = fit_loglog_slope([r["lam"] for r in ok], [r["residual_l2_sup"] for r in ok])
    table.meta.update(
        slope=fit.slope,
        degenerate=fit.degenerate,
        residual_slope=rfit.slope,
        failed=[r["lam"] for r in table.rows if r["status"] != "ok"],
        reference=cfg.reference.system,
        **ref_meta,
    )
    return [table]


# ---------------------------------------------------------------------------
# preparedness sweep
# ---------------------------------------------------------------------------


PREP_COLUMNS = [
    "prep_order",
    "lam",
    "mu",
    "status",
    "message",
    "lam_dev_h1_sup",
    "lam_dev_h1_initial",
    "triple_norm_sup",
    "margin_min",
    "steps",
    "wall_total_s",
]


def _prep_point(args):
    cfg, m, lam = args
    grid = cfg.grid.build()
    p = cfg.params.build(lam)
    zeta0, u0 = cfg.initial_data.build(grid)
    row = {"prep_order": m, "lam": lam, "mu": p.mu}
    tic = time.perf_counter()
    try:
        U0 = prep.prepare(zeta0, u0, m, p).U0
        traj = solvers.integrate(U0, p, cfg.policy.build(), "fg")
    except GNRelaxError as err:
        row.update(status="failed", message=str(err))
        return row
    rep = prep.preparedness_report(traj, p, 1.0)
    spec = diagnostics.NormSpec(s=2, m=1, lambda_tilde=max(1.0, p.lam * p.mu))
    tn = max(diagnostics.triple_norm(traj, i, spec, method="tendency").value for i in range(len(traj)))
    row.update(
        status="ok",
        message="",
        lam_dev_h1_sup=float(rep.max()),
        lam_dev_h1_initial=float(rep[0]),
        triple_norm_sup=float(tn),
        margin_min=float(diagnostics.margin_series(traj).min()),
        steps=traj.n_steps,
        wall_total_s=time.perf_counter() - tic,
    )
    return row


def run_preparedness_sweep(cfg, jobs=1):
    """``sup_t lam ||eta - h||_{H^1}`` for every ``(m, lam)`` in ``prep_orders x lam_sweep``.

    ``meta`` carries, per order, the log-log slope and the max/min ratio over
    the sweep.
    """
    items = [(cfg, m, lam) for m in cfg.prep_orders for lam in cfg.params.lam_sweep]
    table = ResultTable("preparedness_sweep", PREP_COLUMNS)
    for r in _map(_prep_point, items, jobs):
        table.add(**r)
    table.sorted_by("prep_order", "lam")
    for m in cfg.prep_orders:
        ok = [r for r in table.rows if r["prep_order"] == m and r["status"] == "ok"]
        vals = [r["lam_dev_h1_sup"] for r in ok]
        fit = fit_loglog_slope([r["lam"] for r in ok], vals)
        pos = [v for v in vals if v > 0]
        table.meta[f"m{m}_slope"] = fit.slope
        table.meta[f"m{m}_ratio"] = (max(pos) / min(pos)) if pos else float("nan")
    return [table]


# ---------------------------------------------------------------------------
# cost benchmark
# ---------------------------------------------------------------------------


BENCH_COLUMNS = [
    "system",
    "scheme",
    "n_points",
    "lam",
    "mu",
    "dt",
    "steps",
    "repeats",
    "wall_step_median_s",
    "wall_step_var_s2",
    "wall_per_time_unit_s",
    "elliptic_calls",
    "elliptic_iterations",
]


def _time_steps(grid, U, p, dt, scheme, system, n_steps):
    walls = []
    for _ in range(n_steps):
        tic = time.perf_counter()
        U = solvers.step_array(grid, U, p, dt, scheme, system)
        walls.append(time.perf_counter() - tic)
    return U, walls


def run_benchmark_cost(cfg, jobs=1):
    """Per-step wall clock of FG (Strang) and GN (RK4 + elliptic solves) on the same scenario.

    Elliptic solves are counted separately for each system; FG must report
    zero.
    """
    grid = cfg.grid.build()
    p = cfg.params.build()
    zeta0, u0 = cfg.initial_data.build(grid)
    U_fg = prep.prepare(zeta0, u0, cfg.prep_order, p).U0.as_array()
    U_gn = U_fg[:2].copy()
    fg_policy = cfg.policy.build(scheme="strang_split")
    gn_policy = cfg.policy.build(scheme="rk4_explicit")
    table = ResultTable("benchmark_cost", BENCH_COLUMNS)
    for system, U, policy in (("fg", U_fg, fg_policy), ("gn", U_gn, gn_policy)):
        dt = solvers.stable_dt(U, grid, p, policy, system)
        # Warm-up step (JIT compilation, FFT plans) is excluded from the timings.
        solvers.step_array(grid, U, p, dt, policy.scheme, system)
        elliptic.reset_solve_stats()
        walls = []
        for _ in range(cfg.benchmark.repeats):
            _, w = _time_steps(grid, U, p, dt, policy.scheme, system, cfg.benchmark.n_steps)
            walls.extend(w)
        stats = elliptic.solve_stats()
        med = float(np.median(walls))
        table.add(
            system=system,
            scheme=policy.scheme,
            n_points=grid.n_points,
            lam=p.lam,
            mu=p.mu,
            dt=dt,
            steps=cfg.benchmark.n_steps,
            repeats=cfg.benchmark.repeats,
            wall_step_median_s=med,
            wall_step_var_s2=float(np.var(walls)),
            wall_per_time_unit_s=med / dt,
            elliptic_calls=stats.calls,
            elliptic_iterations=stats.iterations,
        )
    return [table]


# ---------------------------------------------------------------------------
# toy models
# ---------------------------------------------------------------------------


TOY_COLUMNS = ["model", "epsilon", "mu", "m", "quantity", "value", "reference"]


def toy_profiles(grid, delta):
    """``h = 1 + delta cos x`` and a smooth complex profile ``exp(sin x)`` on the grid."""
    x = 2.0 * np.pi * grid.x / grid.domain_length
    return ScalarField(grid, 1.0 + delta * np.cos(x)), ScalarField(grid, np.exp(np.sin(x)).astype(complex))


def oscillator_slope(spec, t1, t2):
    """Finite-difference slope of ``t -> ||d_x u(t)||`` between ``t1`` and ``t2``."""
    n1 = toy.derivative_norm(toy.toy_oscillator_exact(spec, t1), 1)
    n2 = toy.derivative_norm(toy.toy_oscillator_exact(spec, t2), 1)
    return (n2 - n1) / (t2 - t1)


def combined_ratio(grid, h, phi, eps, mu, m, t_max, n_times):
    """``mu^{m/2} sup_t ||d_x^m u|| / ||u0||`` for data ``u0 = mu^{m/2} phi``."""
    u0 = ScalarField(grid, mu ** (m / 2.0) * phi.values)
    spec = toy.ToySpec("combined", eps, h, u0, mu)
    ts = np.linspace(0.0, t_max, n_times)
    sup = max(toy.derivative_norm(toy.toy_combined_solve(spec, t), m) for t in ts)
    return mu ** (m / 2.0) * sup / grid.norm(u0.values)


def run_toy_demo(cfg, jobs=1):
    """Derivative growth and conservation for the configured toy models."""
    grid = cfg.grid.build()
    tc = cfg.toy
    h, phi = toy_profiles(grid, tc.delta)
    eps = tc.epsilon
    t_max = 1.0 / tc.delta
    table = ResultTable("toy_demo", TOY_COLUMNS)
    for model in tc.models:
        if model == "oscillator":
            spec = toy.ToySpec("oscillator", eps, h, phi)
            t2 = 100.0 * eps
            table.add(
                model=model,
                epsilon=eps,
                mu=0.0,
                m=1,
                quantity="gradient_growth_slope",
                value=oscillator_slope(spec, 0.99 * t2, t2),
                reference=toy.oscillator_growth_rate(spec),
            )
            u_end = toy.toy_oscillator_exact(spec, t_max)
        elif model == "transport":
            spec = toy.ToySpec("transport", eps, h, phi)
            u_end = toy.toy_transport_solve(spec, min(t_max, 10.0 * eps))
            table.add(
                model=model,
                epsilon=eps,
                mu=0.0,
                m=1,
                quantity="gradient_ratio",
                value=toy.derivative_norm(u_end, 1) / toy.derivative_norm(spec.u0, 1),
                reference=None,
            )
        else:
            for mu in tc.mu_values:
                for m in tc.m_values:
                    table.add(
                        model=model,
                        epsilon=eps,
                        mu=mu,
                        m=m,
                        quantity="prepared_derivative_ratio",
                        value=combined_ratio(grid, h, phi, eps, mu, m, t_max, tc.n_times),
                        reference=None,
                    )
            spec = toy.ToySpec("combined", eps, h, phi, tc.mu_values[-1])
            u_end = toy.toy_combined_solve(spec, t_max)
        w0 = toy.weighted_l2(spec.u0, h)
        table.add(
            model=model,
            epsilon=eps,
            mu=spec.mu,
            m=0,
            quantity="weighted_l2_drift",
            value=abs(toy.weighted_l2(u_end, h) - w0) / w0,
            reference=0.0,
        )
    return [table]


# ---------------------------------------------------------------------------
# single run
# ---------------------------------------------------------------------------


SINGLE_COLUMNS = ["t", "mass", "min_depth", "lam_dev_h1", "residual_l2", "st_energy", "margin"]


def single_run(cfg, jobs=1, out_dir=None):
    """One integration with per-snapshot monitors; snapshots optionally written to ``out_dir``.

    Raises
    ------
    CavitationError
        Propagated from the integrator (the CLI maps it to exit code 3).
    """
    grid = cfg.grid.build()
    p = cfg.params.build()
    zeta0, u0 = cfg.initial_data.build(grid)
    policy = cfg.policy.build()
    table = ResultTable("single_run", SINGLE_COLUMNS)
    if cfg.system == "fg":
        U0 = prep.prepare(zeta0, u0, cfg.prep_order, p).U0
        traj = solvers.integrate(U0, p, policy, "fg")
        res = diagnostics.residual_series(traj)
        dev = prep.preparedness_report(traj, p, 1.0)
        margins = diagnostics.margin_series(traj)
        energies = diagnostics.energy_series(traj)
    else:
        traj = solvers.integrate((zeta0, u0), p, policy, "gn")
        res = dev = margins = energies = [None] * len(traj)
    for i, t in enumerate(traj.times):
        st = traj.states[i]
        table.add(
            t=float(t),
            mass=grid.integral(st[0]),
            min_depth=float(np.min(1.0 + st[0])),
            lam_dev_h1=None if dev[i] is None else float(dev[i]),
            residual_l2=None if res[i] is None else float(res[i]),
            st_energy=None if energies[i] is None else float(energies[i]),
            margin=None if margins[i] is None else float(margins[i]),
        )
    table.meta.update(system=cfg.system, scheme=traj.scheme, steps=traj.n_steps, dt=traj.dt)
    if out_dir is not None and cfg.save_snapshots:
        save_snapshot(traj.states, f"{out_dir}/snapshots", times=list(map(float, traj.times)))
        if cfg.system == "fg":
            save_snapshot(balanced_array(traj.states, p), f"{out_dir}/snapshots_balanced")
    return [table]


RUNNERS = {
    "convergence_lambda": run_convergence_lambda,
    "preparedness_sweep": run_preparedness_sweep,
    "benchmark_cost": run_benchmark_cost,
    "toy_demo": run_toy_demo,
    "single_run": single_run,
}


def run_experiment(cfg, jobs=1, out_dir=None):
    if cfg.experiment == "single_run":
        return single_run(cfg, jobs, out_dir)
    return RUNNERS[cfg.experiment](cfg, jobs)


__all__ = [
    "SlopeFit",
    "fit_loglog_slope",
    "run_benchmark_cost",
    "run_convergence_lambda",
    "run_experiment",
    "run_preparedness_sweep",
    "run_toy_demo",
    "single_run",
]

