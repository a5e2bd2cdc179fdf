"""Command-line interface: one binary, scriptable subcommands.

Data subcommands emit line-delimited JSON; report subcommands (experiment,
table1) emit CSV and render the matching figure next to it.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .assign import (EXHAUSTIVE_CAP, HEURISTICS, assign_heuristic,
                     exhaustive_search, heuristic_order, opa, sampled_fraction)
from .experiments import (ALGORITHMS, ExperimentConfig, Table1Config,
                          replicate_table1, run_experiment,
                          write_experiment_csv, write_table1_csv)
from .generate import GenConfig, child_seed, gen_tasksets
from .model import load_many, save_many, to_dict, validate
from .plots import plot_experiment, plot_table1
from .rta import DA_LC, RTA_LC, RTA_UNI, rta_lc, rta_uniprocessor
from .service import serve_stdio, serve_tcp
from .sim import ArrivalPattern, default_horizon, simulate

TESTS = (RTA_LC, RTA_UNI, DA_LC)


@click.group()
@click.option("--seed", type=int, default=0, envvar="FPGS_SEED", show_default=True,
              help="Root RNG seed (env FPGS_SEED).")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker count for parallel stages.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output path; stdout when omitted.")
@click.pass_context
def main(ctx, seed, jobs, out):
    """Fixed-priority global scheduling toolkit."""
    ctx.obj = {"seed": seed, "jobs": jobs, "out": out}


def _emit_lines(ctx, lines):
    out = ctx.obj["out"]
    text = "".join(line + "\n" for line in lines)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _parse_order(text, n):
    order = [int(x) for x in text.split(",")]
    if sorted(order) != list(range(n)):
        raise click.UsageError(f"--order must be a permutation of 0..{n - 1}")
    return order


def _parse_range(text):
    lo, hi = (int(x) for x in text.split(","))
    return lo, hi


@main.command()
@click.option("--n", required=True, type=int, help="Tasks per set.")
@click.option("--m", required=True, type=int, help="Processor count.")
@click.option("--target-u", "-u", required=True, type=float, help="Total utilization.")
@click.option("--count", default=1, show_default=True, help="Number of tasksets.")
@click.option("--period-range", default="10,1000", show_default=True)
@click.option("--deadline-model", type=click.Choice(["implicit", "constrained"]),
              default="implicit", show_default=True)
@click.pass_context
def gen(ctx, n, m, target_u, count, period_range, deadline_model):
    """Generate seeded random tasksets as line-delimited JSON."""
    cfg = GenConfig(n=n, m=m, target_u=target_u,
                    period_range=_parse_range(period_range),
                    deadline_model=deadline_model, seed=ctx.obj["seed"])
    tasksets = gen_tasksets(cfg, count)
    _emit_lines(ctx, [json.dumps(to_dict(ts)) for ts in tasksets])


@main.command("test")
@click.option("--tasksets", "tasksets_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--test", "test_name", type=click.Choice(TESTS), default=RTA_LC,
              show_default=True)
@click.option("--algorithm", type=click.Choice(HEURISTICS), default="DM",
              show_default=True, help="Heuristic producing the order under test.")
@click.option("--order", default=None, help="Explicit order, comma-separated ids.")
@click.pass_context
def test_cmd(ctx, tasksets_path, test_name, algorithm, order):
    """Evaluate a schedulability test on each taskset."""
    lines = []
    for index, ts in enumerate(load_many(tasksets_path)):
        ord_ = (_parse_order(order, ts.n) if order
                else heuristic_order(ts, algorithm, seed=ctx.obj["seed"]))
        if test_name == RTA_UNI:
            verdict = rta_uniprocessor(ts, ord_)
        elif test_name == RTA_LC:
            verdict = rta_lc(ts, ord_)
        else:
            from .assign import _da_verdict
            verdict = _da_verdict(ts, ord_)
        lines.append(json.dumps({
            "index": index,
            "test": verdict.test_name,
            "order": ord_,
            "schedulable": verdict.schedulable,
            "per_task_ok": list(verdict.per_task_ok),
            "response_bound": list(verdict.response_bound),
        }))
    _emit_lines(ctx, lines)


@main.command()
@click.option("--tasksets", "tasksets_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--algorithm", type=click.Choice(HEURISTICS + ("OPA",)), required=True)
@click.pass_context
def assign(ctx, tasksets_path, algorithm):
    """Assign priorities per taskset and report the verdict."""
    lines = []
    for index, ts in enumerate(load_many(tasksets_path)):
        if algorithm == "OPA":
            result = opa(ts)
        else:
            result = assign_heuristic(ts, algorithm, seed=ctx.obj["seed"])
        lines.append(json.dumps({
            "index": index,
            "algorithm": result.algorithm,
            "order": result.order,
            "schedulable": result.verdict.schedulable,
        }))
    _emit_lines(ctx, lines)


@main.command()
@click.option("--tasksets", "tasksets_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["exhaustive", "sampled"]),
              default="exhaustive", show_default=True)
@click.option("--test", "test_name", type=click.Choice(TESTS), default=RTA_LC,
              show_default=True)
@click.option("--samples", "-k", default=100, show_default=True,
              help="Permutations per set in sampled mode.")
@click.pass_context
def enumerate(ctx, tasksets_path, mode, test_name, samples):
    """Schedulable-order fractions, exact (n <= 9) or Monte-Carlo."""
    lines = []
    for index, ts in enumerate(load_many(tasksets_path)):
        if mode == "exhaustive":
            found, witness, fraction = exhaustive_search(ts, test_name,
                                                         cap=EXHAUSTIVE_CAP)
            lines.append(json.dumps({
                "index": index, "found": found, "order": witness,
                "fraction": float(fraction),
            }))
        else:
            fraction = sampled_fraction(ts, test_name, samples,
                                        child_seed(ctx.obj["seed"], index))
            lines.append(json.dumps({"index": index, "fraction": float(fraction)}))
    _emit_lines(ctx, lines)


@main.command("simulate")
@click.option("--tasksets", "tasksets_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--algorithm", type=click.Choice(HEURISTICS), default="DM",
              show_default=True)
@click.option("--order", default=None, help="Explicit order, comma-separated ids.")
@click.option("--pattern", type=click.Choice(["synchronous", "random_sporadic"]),
              default="synchronous", show_default=True)
@click.option("--trials", default=0, show_default=True,
              help="Extra random sporadic patterns after the first.")
@click.option("--horizon", default=None, type=int,
              help="Simulated ticks; default min(lcm of periods, 1e6).")
@click.pass_context
def simulate_cmd(ctx, tasksets_path, algorithm, order, pattern, trials, horizon):
    """Simulate arrival patterns and report the first deadline miss."""
    seed = ctx.obj["seed"]
    lines = []
    for index, ts in enumerate(load_many(tasksets_path)):
        ord_ = (_parse_order(order, ts.n) if order
                else heuristic_order(ts, algorithm, seed=seed))
        h = default_horizon(ts) if horizon is None else horizon
        patterns = [ArrivalPattern(pattern, h, seed=child_seed(seed, index)
                                   if pattern == "random_sporadic" else None)]
        patterns += [ArrivalPattern("random_sporadic", h,
                                    seed=child_seed(seed, index, 1 + j))
                     for j in range(trials)]
        miss, first_miss = False, None
        for pat in patterns:
            res = simulate(ts, ord_, pat)
            if res.miss:
                miss, first_miss = True, list(res.first_miss)
                break
        lines.append(json.dumps({"index": index, "miss": miss,
                                 "first_miss": first_miss}))
    _emit_lines(ctx, lines)


def _report_paths(ctx):
    out = ctx.obj["out"]
    if out is None:
        return None, None
    return out, str(Path(out).with_suffix(".png"))


@main.command()
@click.option("--n", required=True, type=int)
@click.option("--m", required=True, type=int)
@click.option("--grid", required=True,
              help="Comma-separated total utilizations, e.g. 0.8,1.2,1.6.")
@click.option("--sets-per-point", default=500, show_default=True)
@click.option("--algorithms", default="DM,DM_DS,DkC,OPA", show_default=True)
@click.option("--test", "test_name", type=click.Choice(TESTS), default=RTA_LC,
              show_default=True)
@click.option("--period-range", default="10,1000", show_default=True)
@click.option("--deadline-model", type=click.Choice(["implicit", "constrained"]),
              default="implicit", show_default=True)
@click.option("--policy-orders", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Greedy-decode order file for POLICY rows.")
@click.option("--plot/--no-plot", default=True, show_default=True)
@click.pass_context
def experiment(ctx, n, m, grid, sets_per_point, algorithms, test_name,
               period_range, deadline_model, policy_orders, plot):
    """Schedulability-ratio curves over a utilization grid (CSV + figure)."""
    cfg = ExperimentConfig(
        n=n, m=m, grid=tuple(float(x) for x in grid.split(",")),
        sets_per_point=sets_per_point,
        algorithms=tuple(algorithms.split(",")),
        test=test_name, seed=ctx.obj["seed"],
        period_range=_parse_range(period_range),
        deadline_model=deadline_model, policy_orders=policy_orders)
    rows = run_experiment(cfg)
    csv_path, png_path = _report_paths(ctx)
    if csv_path is None:
        sys.stdout.write("utilization,algorithm,schedulable_count,total,ratio\n")
        for u, algorithm, count, total, ratio in rows:
            sys.stdout.write(f"{u:g},{algorithm},{count},{total},{ratio:.4f}\n")
        return
    write_experiment_csv(rows, csv_path)
    if plot:
        plot_experiment(rows, png_path, title=f"n={n}, m={m}")


@main.command()
@click.option("--n-list", default="4,6,8", show_default=True)
@click.option("--mode", type=click.Choice(["exhaustive", "sampled"]),
              default="exhaustive", show_default=True)
@click.option("--m", default=2, show_default=True)
@click.option("--target-u", "-u", default=1.3, show_default=True)
@click.option("--sets-per-n", default=500, show_default=True)
@click.option("--samples", "-k", default=100, show_default=True)
@click.option("--test", "test_name", type=click.Choice(TESTS), default=RTA_LC,
              show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
@click.pass_context
def table1(ctx, n_list, mode, m, target_u, sets_per_n, samples, test_name, plot):
    """Schedulable-fraction table over taskset sizes (CSV + figure)."""
    cfg = Table1Config(
        n_list=tuple(int(x) for x in n_list.split(",")), mode=mode, m=m,
        target_u=target_u, sets_per_n=sets_per_n, K=samples, test=test_name,
        seed=ctx.obj["seed"])
    rows = replicate_table1(cfg, jobs=ctx.obj["jobs"])
    csv_path, png_path = _report_paths(ctx)
    if csv_path is None:
        column = "all_perm_fraction" if mode == "exhaustive" else "sampled_fraction"
        sys.stdout.write(f"n,{column},dm_fraction\n")
        for n, fraction, dm_fraction in rows:
            sys.stdout.write(f"{n},{fraction:.4f},{dm_fraction:.4f}\n")
        return
    write_table1_csv(rows, csv_path, mode)
    if plot:
        plot_table1(rows, png_path, mode)


@main.command()
@click.option("--transport", type=click.Choice(["stdio", "tcp"]), default="stdio",
              show_default=True)
@click.option("--port", default=7451, show_default=True)
@click.pass_context
def serve(ctx, transport, port):
    """Run the evaluation service (line-delimited JSON protocol)."""
    jobs = ctx.obj["jobs"]
    if transport == "stdio":
        code = serve_stdio(jobs=jobs)
    else:
        code = serve_tcp(port, jobs=jobs)
    sys.exit(code)


if __name__ == "__main__":
    main()
