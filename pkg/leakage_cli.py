#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
α-leakage 命令行工具：读入信道/先验 → 计算度量或泄露 → 输出数值 / CSV / 检查结果

使用方法:
    python leakage_cli.py compute maxl --channel bsc.csv
    python leakage_cli.py compute sibson --channel bsc.csv --alpha 2 --nats
    python leakage_cli.py sweep --channel bsc.csv --alpha 1,2,inf
    python leakage_cli.py verify --random 20 --seed 7
    python leakage_cli.py compose a.csv b.csv --alpha inf

退出码:
    0 成功；2 输入解析/校验/维度错误；3 α 超出范围；4 --strict 下求解器未收敛；
    5 存在未通过的检查（或组合界被违反）；6 最大 α-leakage 扫描结果不单调
"""

import argparse
import csv
import io
import logging
import os
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np

from leakage.alpha_measures import (
    arimoto_cond_entropy,
    arimoto_mi,
    renyi_divergence,
    renyi_entropy,
    sibson_mi,
)
from leakage.capacity_solver import SolverOptions, maximal_alpha_leakage, maxl
from leakage.channel_io import load_channel, load_distribution
from leakage.errors import AlphaOutOfRange, DimensionMismatch, LeakageError
from leakage.leakage_engine import alpha_leakage
from leakage.prob_core import joint_from, product_channel, uniform
from models.prob_model import AlphaOrder, Channel, Distribution
from models.results import LN2
from theorem_suite.checks import (
    check_alpha_one_gap,
    check_bounds,
    check_composition,
    check_dpi,
    check_monotonicity,
    check_quasiconvexity,
    check_shatter_capacity,
    check_sibson_infimum,
    shatter_construction,
)
from theorem_suite.engine import post_order_traversal, run_suite, save_tree_structure
from theorem_suite.instances import random_instances
from theorem_suite.schema import check_tree
from theorem_suite.witness_store import WitnessStore
from utils import DEFAULT_SEED, DEFAULT_TOL, DEFAULT_UNITS, OUTPUT_DIR, configure_logging, gather_bounded

logger = logging.getLogger(__name__)

# ==================== 配置 ====================
MEASURES = ["renyi-entropy", "renyi-div", "sibson", "arimoto", "cond-entropy",
            "alpha-leakage", "max-alpha-leakage", "maxl"]
CHECK_NAMES = ["quasiconvexity", "dpi", "composition", "bounds", "sibson-infimum",
               "shatter", "shatter-capacity", "monotonicity", "alpha-one-gap"]
COMPOSE_SLACK = 1e-8
MONOTONE_SLACK = 1e-8

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ALPHA = 3
EXIT_NOT_CONVERGED = 4
EXIT_FAILED = 5
EXIT_NOT_MONOTONE = 6
# ==============================================


def _status(message: str):
    # 进度/状态信息写到 stderr，stdout 只放结果数据
    print(message, file=sys.stderr)


def _format(value: float) -> str:
    return f"{value:.12g}"


def parse_alpha_list(text: str) -> List[AlphaOrder]:
    """逗号分隔的 α 列表，支持 inf；1 映射为精确的 One 标签"""
    items = [item for item in (part.strip() for part in text.split(",")) if item]
    if not items:
        raise AlphaOutOfRange("empty alpha list")
    return [AlphaOrder.of(item) for item in items]


def parse_alpha_grid(text: str) -> List[AlphaOrder]:
    """start:stop:points，对数等距"""
    try:
        start, stop, points = text.split(":")
        start, stop, points = float(start), float(stop), int(points)
    except ValueError:
        raise AlphaOutOfRange(f"alpha grid must look like start:stop:points, got {text!r}")
    if start <= 0 or stop <= 0 or points < 1 or not np.isfinite(stop):
        raise AlphaOutOfRange(f"alpha grid needs 0 < start, finite stop and points ≥ 1, got {text!r}")
    values = np.geomspace(start, stop, points)
    return [AlphaOrder.of(float(v)) for v in values]


def _alphas(args, default: Optional[str] = None) -> List[AlphaOrder]:
    if getattr(args, "alpha_grid", None):
        return parse_alpha_grid(args.alpha_grid)
    if args.alpha:
        return parse_alpha_list(args.alpha)
    if default is not None:
        return parse_alpha_list(default)
    raise AlphaOutOfRange("no alpha given (use --alpha or --alpha-grid)")


def _units(args) -> str:
    return args.units or (DEFAULT_UNITS if DEFAULT_UNITS in ("bits", "nats") else "bits")


def _convert(nats: float, units: str) -> float:
    return nats / LN2 if units == "bits" else nats


def _solver_options(args) -> SolverOptions:
    return SolverOptions(kkt_tol=args.tol, seed=args.seed)


def _load_prior(path: Optional[str], channel: Optional[Channel]) -> Distribution:
    if path:
        return load_distribution(path)
    if channel is None:
        raise LeakageError("a prior is required (use --prior)")
    return uniform(channel.in_size)


def _open_output(path: Optional[str]):
    if path:
        return open(path, "w", encoding="utf-8", newline="")
    return sys.stdout


def evaluate_measure(measure: str, alpha: AlphaOrder, prior: Distribution, channel: Optional[Channel],
                     other: Optional[Distribution], options: SolverOptions) -> Tuple[float, bool]:
    """
    计算一个度量

    Returns:
        (nats, converged)，只有 max-alpha-leakage 可能返回 converged=False
    """
    if measure == "renyi-entropy":
        return renyi_entropy(prior, alpha).nats, True
    if measure == "renyi-div":
        if other is None:
            raise LeakageError("renyi-div needs --other")
        return renyi_divergence(prior, other, alpha).nats, True
    if channel is None:
        raise LeakageError(f"{measure} needs --channel")
    if measure == "sibson":
        return sibson_mi(prior, channel, alpha).nats, True
    if measure == "arimoto":
        return arimoto_mi(prior, channel, alpha).nats, True
    if measure == "cond-entropy":
        return arimoto_cond_entropy(joint_from(prior, channel), alpha).nats, True
    if measure == "alpha-leakage":
        return alpha_leakage(prior, channel, alpha).nats, True
    if measure == "max-alpha-leakage":
        result = maximal_alpha_leakage(prior, channel, alpha, options)
        logger.info("alpha=%s diagnostics: %s", alpha, result.flat_diagnostics())
        return result.nats, result.converged
    if measure == "maxl":
        return maxl(channel, prior.support), True
    raise LeakageError(f"unknown measure {measure!r}")


# ---------- compute ----------

def cmd_compute(args) -> int:
    channel = load_channel(args.channel) if args.channel else None
    prior = _load_prior(args.prior, channel)
    other = load_distribution(args.other) if args.other else None
    units = _units(args)
    options = _solver_options(args)
    alphas = [AlphaOrder.of("inf")] if args.measure == "maxl" and not args.alpha else _alphas(args)

    exit_code = EXIT_OK
    out = _open_output(args.output)
    try:
        for alpha in alphas:
            nats, converged = evaluate_measure(args.measure, alpha, prior, channel, other, options)
            value = _format(_convert(nats, units))
            out.write(f"{value}\n" if len(alphas) == 1 else f"{alpha}\t{value}\n")
            if not converged:
                _status(f"⚠️  solver did not converge at alpha={alpha}")
                if args.strict:
                    exit_code = EXIT_NOT_CONVERGED
    finally:
        if out is not sys.stdout:
            out.close()
    return exit_code


# ---------- sweep ----------

def _non_monotone_pairs(alphas: Sequence[AlphaOrder], values: Sequence[float]) -> List[Tuple[AlphaOrder, AlphaOrder]]:
    ordered = sorted(zip(alphas, values), key=lambda item: item[0].value)
    return [(ordered[i][0], ordered[i + 1][0]) for i in range(len(ordered) - 1)
            if ordered[i + 1][1] < ordered[i][1] - MONOTONE_SLACK]


def cmd_sweep(args) -> int:
    channel = load_channel(args.channel)
    prior = _load_prior(args.prior, channel)
    other = load_distribution(args.other) if args.other else None
    options = _solver_options(args)
    alphas = _alphas(args)

    # 按 α 并发计算，输出顺序与网格顺序一致
    results = gather_bounded(lambda a: evaluate_measure(args.measure, a, prior, channel, other, options), alphas)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["alpha", "value_nats", "value_bits", "converged"])
    for alpha, (nats, converged) in zip(alphas, results):
        writer.writerow([str(alpha), _format(nats), _format(nats / LN2), "true" if converged else "false"])

    exit_code = EXIT_OK
    if args.measure == "max-alpha-leakage":
        bad = _non_monotone_pairs(alphas, [nats for nats, _ in results])
        for lo, hi in bad:
            buffer.write(f"# warning: value decreases from alpha={lo} to alpha={hi}\n")
        if bad:
            _status(f"⚠️  sweep is not monotone at {len(bad)} place(s)")
            exit_code = EXIT_NOT_MONOTONE
    if args.strict and not all(converged for _, converged in results):
        _status("❌ at least one solver call did not converge")
        exit_code = EXIT_NOT_CONVERGED

    out = _open_output(args.output)
    try:
        out.write(buffer.getvalue())
    finally:
        if out is not sys.stdout:
            out.close()
    return exit_code


# ---------- verify ----------

def _verdicts_from_files(args, alphas: List[AlphaOrder]):
    channel = load_channel(args.channel)
    prior = _load_prior(args.prior, channel)
    channel2 = load_channel(args.channel2) if args.channel2 else None
    check = args.check or "bounds"
    copies = [int(k) for k in args.copies.split(",")] if args.copies else [1] * channel.in_size

    def need_second():
        if channel2 is None:
            raise LeakageError(f"check {check!r} needs --channel2")
        return channel2

    verdicts = []
    if check == "monotonicity":
        return [check_monotonicity(channel, prior)]
    if check == "alpha-one-gap":
        return [check_alpha_one_gap(channel, prior)]
    for alpha in alphas:
        if check == "quasiconvexity":
            verdicts.append(check_quasiconvexity(channel, need_second(), prior, alpha))
        elif check == "dpi":
            verdicts.extend(check_dpi(channel, need_second(), prior, alpha))
        elif check == "composition":
            verdicts.append(check_composition(channel, need_second(), prior, alpha))
        elif check == "bounds":
            verdicts.extend(check_bounds(channel, prior, alpha))
        elif check == "sibson-infimum":
            verdicts.append(check_sibson_infimum(prior, channel, alpha, trials=args.trials, seed=args.seed))
        elif check == "shatter":
            target = load_distribution(args.other) if args.other else prior
            verdicts.append(shatter_construction(prior, channel, target, copies, alpha)[1])
        elif check == "shatter-capacity":
            verdicts.append(check_shatter_capacity(prior, channel, copies, alpha))
    for verdict in verdicts:
        verdict.seed = args.seed
    return verdicts


def _print_counts(counts):
    for node, depth in sorted(post_order_traversal(check_tree), key=lambda item: item[1]):
        c = counts.get(node.key, {"passed": 0, "failed": 0})
        mark = "✅" if c["failed"] == 0 else "❌"
        _status(f"{'  ' * depth}{mark} {node.name}: {c['passed']} passed, {c['failed']} failed")


def cmd_verify(args) -> int:
    store = WitnessStore(args.output_dir)
    if args.random:
        _status(f"[verify] {args.random} random instances, seed {args.seed}")
        report = run_suite(check_tree, random_instances(args.random, args.seed), store=store)
        save_tree_structure(check_tree, os.path.join(args.output_dir, "check_tree.json"))
        verdicts = report.verdicts
        _print_counts(report.counts)
        witness_file = report.witness_file
    else:
        if not args.channel:
            raise LeakageError("verify needs --random N or --channel")
        verdicts = _verdicts_from_files(args, _alphas(args, default="1,2,inf"))
        failed = [v for v in verdicts if not v.passed]
        witness_file = store.save(failed) if failed else None

    out = _open_output(args.output)
    try:
        for verdict in verdicts:
            out.write(verdict.to_json_line() + "\n")
    finally:
        if out is not sys.stdout:
            out.close()

    failed = [v for v in verdicts if not v.passed]
    if failed:
        _status(f"❌ {len(failed)} of {len(verdicts)} checks failed; witnesses saved to {witness_file}")
        return EXIT_FAILED
    _status(f"✅ all {len(verdicts)} checks passed")
    return EXIT_OK


# ---------- compose ----------

def cmd_compose(args) -> int:
    channels = [load_channel(path) for path in args.channels]
    sizes = {c.in_size for c in channels}
    if len(sizes) != 1:
        raise DimensionMismatch(f"releases disagree on the input size: {sorted(sizes)}")
    prior = _load_prior(args.prior, channels[0])
    units = _units(args)
    options = _solver_options(args)

    joint_channel = channels[0]
    for c in channels[1:]:
        joint_channel = product_channel(joint_channel, c)

    exit_code = EXIT_OK
    out = _open_output(args.output)
    try:
        for alpha in _alphas(args, default="inf"):
            parts = [maximal_alpha_leakage(prior, c, alpha, options).nats for c in channels]
            exact = maximal_alpha_leakage(prior, joint_channel, alpha, options).nats
            bound = sum(parts)
            out.write(f"alpha={alpha} units={units}\n")
            for path, value in zip(args.channels, parts):
                out.write(f"  release {path}: {_format(_convert(value, units))}\n")
            out.write(f"  sum: {_format(_convert(bound, units))}\n")
            out.write(f"  exact: {_format(_convert(exact, units))}\n")
            if exact > bound + COMPOSE_SLACK:
                _status(f"❌ composition bound violated at alpha={alpha}: {exact} > {bound}")
                exit_code = EXIT_FAILED
    finally:
        if out is not sys.stdout:
            out.close()
    return exit_code


# ---------- 参数 ----------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", help="alpha value or comma list, e.g. 1,2,inf")
    units = common.add_mutually_exclusive_group()
    units.add_argument("--bits", dest="units", action="store_const", const="bits")
    units.add_argument("--nats", dest="units", action="store_const", const="nats")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="solver KKT tolerance")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--strict", action="store_true", help="fail when a solver call does not converge")
    common.add_argument("--output", help="write results here instead of stdout")
    common.add_argument("--prior", help="prior distribution file (default: uniform over the channel input)")
    common.add_argument("--log-level", default=None)

    parser = argparse.ArgumentParser(description="alpha-leakage and maximal alpha-leakage calculator")
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser("compute", parents=[common], help="compute one measure")
    compute.add_argument("measure", choices=MEASURES)
    compute.add_argument("--channel")
    compute.add_argument("--other", help="second distribution (Q for renyi-div)")
    compute.set_defaults(handler=cmd_compute)

    sweep = sub.add_parser("sweep", parents=[common], help="evaluate a measure over an alpha grid as CSV")
    sweep.add_argument("measure", nargs="?", default="max-alpha-leakage", choices=MEASURES)
    sweep.add_argument("--channel", required=True)
    sweep.add_argument("--other")
    sweep.add_argument("--alpha-grid", help="start:stop:points, log-spaced")
    sweep.set_defaults(handler=cmd_sweep)

    verify = sub.add_parser("verify", parents=[common], help="run the property checks")
    verify.add_argument("--random", type=int, default=0, help="number of seeded random instances")
    verify.add_argument("--channel")
    verify.add_argument("--channel2", help="second channel for quasiconvexity/dpi/composition")
    verify.add_argument("--check", choices=CHECK_NAMES)
    verify.add_argument("--other", help="target distribution for shatter")
    verify.add_argument("--copies", help="comma list of copies per x for shatter")
    verify.add_argument("--trials", type=int, default=50)
    verify.add_argument("--output-dir", default=OUTPUT_DIR, help="where failing witnesses are saved")
    verify.set_defaults(handler=cmd_verify)

    compose = sub.add_parser("compose", parents=[common], help="account leakage of several releases")
    compose.add_argument("channels", nargs="+")
    compose.set_defaults(handler=cmd_compose)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主函数"""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except AlphaOutOfRange as e:
        _status(f"❌ {e}")
        return EXIT_ALPHA
    except LeakageError as e:
        _status(f"❌ {e}")
        return EXIT_INPUT
    except OSError as e:
        _status(f"❌ cannot read input: {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
