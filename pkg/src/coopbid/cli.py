"""Command line entry point: ``coopbid {optimize,simulate,nucleolus,game}``."""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path

from .bargaining import build_game
from .config import ConfigError, RunConfig, parse_config, with_overrides
from .lef import map_to_correlated
from .nucleolus import compute_nucleolus
from .output import metrics_csv, profile_json, write_game, write_utilities
from .simulation import MECHANISMS, run_simulation


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML run configuration")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--seed", type=int, metavar="U64", help="master seed")
    common.add_argument("--rounds", type=int, metavar="N", help="auction rounds per seed")
    common.add_argument("--mechanism", choices=MECHANISMS + ("both",),
                        help="mechanism(s) to simulate")
    common.add_argument("--seeds", type=int, metavar="N", help="number of seeds")
    common.add_argument("--weighting", choices=("on", "off"),
                        help="valuation-weighted mapping objective")
    common.add_argument("--figures", metavar="DIR",
                        help="simulate: also render PNG curves into DIR")

    p = argparse.ArgumentParser(prog="coopbid", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("optimize", parents=[common], help="emit the correlated bid profile")
    sub.add_parser("simulate", parents=[common], help="run repeated auctions, emit CSV metrics")
    sub.add_parser("nucleolus", parents=[common], help="print the nucleolus utility vector")
    sub.add_parser("game", parents=[common], help="dump the characteristic function")
    return p


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = parse_config(text)
    mech = None
    if args.mechanism:
        mech = MECHANISMS if args.mechanism == "both" else (args.mechanism,)
    weighting = None if args.weighting is None else args.weighting == "on"
    return with_overrides(cfg, master_seed=args.seed, rounds=args.rounds, mechanisms=mech,
                          seeds=args.seeds, weighting=weighting, out=args.out,
                          figures=args.figures)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _game(cfg: RunConfig):
    if cfg.game is not None:
        return cfg.game.build()
    return build_game(cfg.simulation.market_for_seed(0))


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "optimize":
            market = cfg.simulation.market_for_seed(0)
            x = compute_nucleolus(build_game(market))
            result = map_to_correlated(market, x, weighting=cfg.simulation.weighting)
            _emit(profile_json(result), cfg.out)
        elif args.command == "simulate":
            table = run_simulation(cfg.simulation)
            _emit(metrics_csv(table), cfg.out)
            if cfg.figures:
                from .plotting import render_figures
                render_figures(table, cfg.figures)
        elif args.command == "nucleolus":
            game = _game(cfg)
            buf = io.StringIO()
            write_utilities(compute_nucleolus(game), buf, game.bidders)
            _emit(buf.getvalue(), cfg.out)
        elif args.command == "game":
            buf = io.StringIO()
            write_game(_game(cfg), buf)
            _emit(buf.getvalue(), cfg.out)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"coopbid: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
