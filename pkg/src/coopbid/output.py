"""Delimited and JSON serialisation of results."""

from __future__ import annotations

import csv
import io
import json
import os
from typing import TextIO

from .bargaining import CharacteristicGame, members
from .lef import MappingResult
from .simulation import MetricsTable

CSV_HEADER = ("round", "mechanism", "mean_cum_revenue", "mean_active_bidders", "mean_round_revenue")


def metrics_csv(table: MetricsTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in table.rows:
        w.writerow([r.round, r.mechanism, f"{r.mean_cum_revenue:.6f}",
                    f"{r.mean_active_bidders:.6f}", f"{r.mean_round_revenue:.6f}"])
    return buf.getvalue()


def _write(path: str | os.PathLike, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def emit_metrics_csv(table: MetricsTable, path: str | os.PathLike) -> None:
    _write(path, metrics_csv(table))


def profile_document(result: MappingResult) -> dict:
    prof = result.profile
    return {
        "schema": 1,
        "active_bidders": list(prof.active),
        "nucleolus": list(result.x),
        "residuals": list(result.residuals),
        "objective": result.objective,
        "expected_revenue": prof.expected_revenue,
        "expected_utility": [prof.expected_utility[i] for i in prof.active],
        "entries": [
            {
                "members": list(e.members),
                "slots": list(e.winners),
                "probability": e.probability,
                "bids": list(e.lef.bids),
                "payments": list(e.lef.payments),
            }
            for e in prof.entries
        ],
    }


def profile_json(result: MappingResult) -> str:
    return json.dumps(profile_document(result), indent=2) + "\n"


def emit_profile(result: MappingResult, path: str | os.PathLike) -> None:
    _write(path, profile_json(result))


def write_game(game: CharacteristicGame, out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("mask", "players", "value"))
    for mask, v in game.items():
        w.writerow((mask, " ".join(map(str, members(mask))), f"{v:.6f}"))


def write_utilities(x, out: TextIO, bidders=None) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("player", "bidder", "utility"))
    for p, v in enumerate(x):
        if p == 0:
            who = "auctioneer"
        else:
            who = bidders[p - 1] if bidders is not None else p - 1
        w.writerow((p, who, f"{float(v) + 0.0:.6f}"))
