"""Command-line entry point: ``delayarb <subcommand> ...``.

Exit status is 0 on success and 2 when an input fails validation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .bribery import (
    BriberyScenario,
    InfeasibleBribery,
    bribery_cost_proposer,
    bribery_cost_validators,
    min_validator_fee,
    proposer_fee_bound,
    required_bribed_fraction,
)
from .consensus import run_scenario
from .fixtures import load_mempool, load_pool_stats, load_scenario, load_snapshots, load_strategy_file
from .replay import pbs_simulate, replay, select_pools, select_pools_random
from .rewards import NetworkParams, RewardSchedule
from .units import fmt, gwei_to_eth, to_fraction

EXIT_INVALID = 2


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_sim_consensus(args) -> int:
    config = load_scenario(args.scenario)
    outcome = run_scenario(config.sim_scenario(seed=args.seed))
    payload = outcome.to_dict()
    Path(args.out).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    _dump({k: payload[k] for k in ("head", "attack_succeeded", "delayed_block", "fork_weights")}
          | {"slashing_violations": len(outcome.slashing_violations)})
    return 0


def cmd_bribery_cost(args) -> int:
    params = NetworkParams(N=args.n)
    scenario = BriberyScenario.canonical(
        params, to_fraction(args.alpha_a), to_fraction(args.alpha_b),
        rho=args.rho_gwei, theta=args.theta_gwei,
    )
    schedule: RewardSchedule = scenario.schedule
    proposer = bribery_cost_proposer(scenario)
    result = {
        "N": params.N,
        "R_A_gwei": fmt(schedule.R_A),
        "R_P_gwei": fmt(schedule.R_P),
        "required_fraction": str(required_bribed_fraction(scenario)),
        "min_fee_per_validator_gwei": fmt(min_validator_fee(scenario)),
        "min_proposer_fee_gwei": fmt(proposer_fee_bound(scenario)),
        "tau_p_gwei": fmt(proposer.total_cost),
        "tau_p_eth": fmt(gwei_to_eth(proposer.total_cost)),
    }
    try:
        validators = bribery_cost_validators(scenario)
    except InfeasibleBribery:
        result.update(tau_v_gwei=None, tau_v_eth=None, bribee_count=None, cheaper="proposer")
    else:
        result.update(
            tau_v_gwei=fmt(validators.total_cost),
            tau_v_eth=fmt(gwei_to_eth(validators.total_cost)),
            bribee_count=validators.bribee_count,
            cheaper="validators" if validators.total_cost < proposer.total_cost else "proposer",
        )
    _dump(result)
    return 0


def cmd_replay(args) -> int:
    snapshots = load_snapshots(args.pools)
    mempool = load_mempool(args.mempool)
    config = load_scenario(args.scenario)
    report = replay(snapshots, mempool, config, parallel=args.parallel)
    report.write(args.out)
    _dump(report.to_dict()["totals"])
    return 0


def cmd_pbs(args) -> int:
    sf = load_strategy_file(args.strategy)
    gas = gwei_to_eth(sf.gas_price_gwei) * sf.gas_per_hop * sf.strategy.hops
    summary = pbs_simulate(sf.strategy, sf.state, args.trials, args.seed, gas)
    _dump(summary.to_dict())
    return 0


def cmd_select_pools(args) -> int:
    stats = load_pool_stats(args.stats)
    if args.random:
        chosen = select_pools_random(stats, args.top, args.seed)
    else:
        chosen = select_pools(stats, args.top)
    for pool_id in chosen:
        print(pool_id)
    return 0


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _fraction(text: str) -> Fraction:
    try:
        return to_fraction(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="delayarb", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim-consensus", help="simulate a bribery attack and write the outcome and trace")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sim_consensus)

    p = sub.add_parser("bribery-cost", help="costs of bribing validators versus the proposer")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha-a", type=_fraction, required=True)
    p.add_argument("--alpha-b", type=_fraction, required=True)
    p.add_argument("--rho-gwei", type=int, required=True)
    p.add_argument("--theta-gwei", type=int, default=501)
    p.set_defaults(func=cmd_bribery_cost)

    p = sub.add_parser("replay", help="replay delayed arbitrage over per-slot snapshots")
    p.add_argument("--pools", required=True)
    p.add_argument("--mempool", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--parallel", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("pbs", help="profit distribution under random builder ordering")
    p.add_argument("--strategy", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.set_defaults(func=cmd_pbs)

    p = sub.add_parser("select-pools", help="rank pools by volume over liquidity")
    p.add_argument("--stats", required=True)
    p.add_argument("--top", type=int, required=True)
    p.add_argument("--random", action="store_true")
    p.add_argument("--seed", type=_u64, default=0)
    p.set_defaults(func=cmd_select_pools)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
