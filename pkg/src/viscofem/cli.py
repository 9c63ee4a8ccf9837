"""Command line front end: solve, estimate, adapt, convergence, verify."""
from __future__ import annotations

import argparse
import inspect
import os
import sys

from .config import ConfigError, RunConfig, dump_config, load_config


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _apply_threads(n):
    n = n or os.environ.get("VISCOFEM_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(int(n))
    return int(n) if n else None


def build_problem(cfg: RunConfig):
    from .problems import PROBLEMS, ProblemError

    ctor = PROBLEMS.get(cfg.problem.name)
    if ctor is None:
        raise ConfigError(f"problem.name: unknown problem {cfg.problem.name!r}")
    sig = inspect.signature(ctor).parameters
    kw = {"kernel": cfg.kernel_spec()}
    if "dim" in sig:
        kw["dim"] = cfg.problem.dim
    if cfg.params() is not None:
        kw["params"] = cfg.params()
    if "T" in sig:
        kw["T"] = cfg.time.T
    try:
        return ctor(**kw)
    except (ProblemError, ValueError) as exc:
        raise ConfigError(f"problem: {exc}") from None


def _setup(cfg):
    from .timegrid import TimePartition

    prob = build_problem(cfg)
    part = TimePartition.uniform(prob.T, cfg.time.slabs)
    return prob, part, prob.mesh(cfg.mesh.n)


def _goal(cfg, prob):
    from .dual import GoalFunctional
    from .problems import goal_weight

    if cfg.goal.preset != "end_time_displacement":
        raise ConfigError(f"goal.preset: only end_time_displacement is configurable, got {cfg.goal.preset!r}")
    return GoalFunctional(weight=goal_weight(cfg.goal.weight, prob.dim, prob.info.get("length", 2.0)))


def _out(cfg, name):
    os.makedirs(cfg.output.dir, exist_ok=True)
    return os.path.join(cfg.output.dir, name)


# ------------------------------------------------------------------ commands


def cmd_solve(cfg):
    from .io import save_checkpoint, solution_fields, write_vtk
    from .primal import solve_primal

    prob, part, mesh = _setup(cfg)
    sol = solve_primal(prob, part, mesh)
    save_checkpoint(_out(cfg, "solution.npz"), sol)
    u1, u2 = solution_fields(sol, sol.N)
    write_vtk(_out(cfg, "solution_T.vtk"), sol.spaces[-1].mesh, {"displacement": u1, "velocity": u2})
    print(f"solved {prob.name}: {sol.N} slabs, {sol.n_dofs()} space-time dofs")
    return 0


def cmd_estimate(cfg):
    from .bounds import global_estimate, local_estimate
    from .dual import goal_error, solve_dual
    from .estimators import compute_thetas, theta_representation
    from .io import write_csv
    from .primal import solve_primal

    prob, part, mesh = _setup(cfg)
    e = cfg.estimator
    sol = solve_primal(prob, part, mesh)
    goal = _goal(cfg, prob)
    dual = solve_dual(goal.dual_data(), part, mesh, prob.kernel, prob.params, e.refine_h, e.refine_k)
    pieces = compute_thetas(sol, dual.z, prob)
    br = theta_representation(sol, dual.z, prob, e.rep, pieces=pieces)
    rows = []
    for n, th in enumerate(br.theta, start=1):
        t5 = br.theta5.get(n) if e.rep == 2 else None
        for c in range(th.shape[1]):
            v5 = 0.0 if t5 is None else t5[c]
            rows.append([n, c, *th[:, c], v5, th[:, c].sum() + v5])
    write_csv(_out(cfg, "theta.csv"), ["slab", "cell", "theta1", "theta2", "theta3", "theta4", "theta5", "total"], rows)
    if e.kind == "global":
        rep = global_estimate(sol, prob, dual, e.alpha, e.beta, e.gamma, e.mode, grid=pieces["grid"])
    elif e.kind == "local":
        rep = local_estimate(sol, prob, dual, e.alpha, e.kernel_mode, grid=pieces["grid"])
    else:
        raise ConfigError(f"estimator.kind: unknown estimator {e.kind!r}")
    names = sorted(rep.terms)
    write_csv(_out(cfg, "upsilon.csv"), ["slab", *names, "slab_total"],
              [[n + 1, *(rep.terms[k][n] for k in names), rep.per_slab[n]] for n in range(sol.N)])
    err = goal_error(sol, goal.weight, prob.exact_u1) if prob.has_exact else None
    summary = [["theta_total", br.total], ["theta5_total", br.theta5_total()], ["upsilon0", rep.upsilon0],
               ["dual_factor", rep.dual_factor], ["bound", rep.bound], ["true_goal_error", err]]
    write_csv(_out(cfg, "summary.csv"), ["quantity", "value"], summary)
    for k, v in summary:
        print(f"{k:16s} {'n/a' if v is None else format(v, '.6e')}")
    return 0


def cmd_adapt(cfg):
    from .adaptivity import AdaptConfig, adapt_loop
    from .io import write_csv

    prob, part, mesh = _setup(cfg)
    a = cfg.adapt
    ac = AdaptConfig(_goal(cfg, prob), a.tolerance, a.theta, a.max_iter, a.split, cfg.estimator.rep,
                     cfg.estimator.refine_h, cfg.estimator.refine_k, a.strategy)
    res = adapt_loop(prob, part, mesh, ac, raise_on_budget=False)
    write_csv(_out(cfg, "adapt_history.csv"),
              ["iteration", "dofs_space", "dofs_time", "dofs_total", "estimate", "true_error"],
              [[s.iteration, s.dofs_space, s.dofs_time, s.dofs_total, s.estimate, s.true_error] for s in res.history])
    for s in res.history:
        print(f"iter {s.iteration}: dofs {s.dofs_total}, estimate {s.estimate:.3e}")
    print("converged" if res.converged else "budget exhausted")
    return 0 if res.converged else 1


def convergence_table(cfg, levels):
    from .assembly import l2_error
    from .primal import solve_primal
    from .projections import observed_orders
    from .timegrid import TimePartition

    prob = build_problem(cfg)
    if not prob.has_exact:
        raise ConfigError("convergence needs a problem with an exact solution")
    rows, hs, errs = [], [], []
    for lvl in range(levels):
        n = cfg.mesh.n * 2**lvl
        part = TimePartition.uniform(prob.T, cfg.time.slabs * 2**lvl)
        sol = solve_primal(prob, part, prob.mesh(n))
        err = max(l2_error(s, c, prob.exact_u1, t) for s, c, t in zip(sol.spaces, sol.U1, part.nodes))
        hs.append(float(sol.spaces[-1].mesh.h.max()))
        errs.append(err)
    orders = observed_orders(hs, errs)
    for lvl in range(levels):
        rows.append([lvl, hs[lvl], prob.T / (cfg.time.slabs * 2**lvl), errs[lvl], orders[lvl]])
    return rows


def cmd_convergence(cfg, levels=None):
    from .io import write_csv

    rows = convergence_table(cfg, levels or cfg.convergence.levels)
    write_csv(_out(cfg, "convergence.csv"), ["level", "h", "k", "error_linf_l2", "order"], rows)
    for r in rows:
        print(f"level {r[0]}: h={r[1]:.4g} k={r[2]:.4g} err={r[3]:.4e} order={r[4]:.3f}")
    return 0


def cmd_verify(cfg):
    from .verify import run_suites

    results = run_suites(cfg)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


# ------------------------------------------------------------------ entry


def make_parser():
    p = _Parser(prog="viscofem", description=__doc__)
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one configuration key")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, help="worker cap (falls back to VISCOFEM_THREADS)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("solve", "estimate", "adapt", "verify", "show-config"):
        sub.add_parser(name)
    c = sub.add_parser("convergence")
    c.add_argument("--levels", type=int)
    return p


def run(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
        _apply_threads(args.threads)
        cfg = load_config(args.config, args.set)
        if args.out:
            cfg.output.dir = args.out
        if args.command == "show-config":
            print(dump_config(cfg))
            return 0
        if args.command == "convergence":
            return cmd_convergence(cfg, args.levels)
        return {"solve": cmd_solve, "estimate": cmd_estimate, "adapt": cmd_adapt,
                "verify": cmd_verify}[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
