"""Command line front end: batch runs, reports, replay checks, live serving."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .gateway import GatewayConfig
from .gateway import main as gateway_main
from .harness import (
    SignallingConfig,
    raster_rows,
    read_trial_log,
    replay_trial,
    run_experiment,
    summary_rows,
    write_trial_log,
)

ALGO_NAMES = {"td0": "td0", "td-lambda": "td_lambda", "gtd": "gtd", "la-td": "la_td"}


@click.group()
def main() -> None:
    """Contact-warning signalling experiments for a simulated robot arm."""


@main.command()
@click.option("--algo", type=click.Choice(list(ALGO_NAMES)), default="td-lambda", show_default=True)
@click.option("--lambda", "lam", type=float, default=0.9, show_default=True, help="Trace decay.")
@click.option("--lookahead", "lookahead", type=int, default=0, show_default=True,
              help="Query shift in bins (la-td only).")
@click.option("--trials", type=int, default=5, show_default=True)
@click.option("--motions", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jitter-bins", type=int, default=0, show_default=True)
@click.option("--settle-ticks", type=int, default=12, show_default=True)
@click.option("--backoff-bins", type=int, default=3, show_default=True)
@click.option("--pilot-speed", type=float, default=1.0, show_default=True)
@click.option("--token-delay-ms", type=int, default=0, show_default=True)
@click.option("--reaction-ms", type=(int, int), default=(0, 0),
              help="Scripted pilot reaction range (lo hi), ms.")
@click.option("--out", type=click.Path(path_type=Path), default=Path("trial-logs"),
              show_default=True)
def run(algo, lam, lookahead, trials, motions, seed, jitter_bins, settle_ticks,
        backoff_bins, pilot_speed, token_delay_ms, reaction_ms, out) -> None:
    """Run an automated experiment and write one JSONL log per trial."""
    algorithm = ALGO_NAMES[algo]
    if algorithm == "la_td" and lookahead == 0:
        lookahead = 2
    cfg = SignallingConfig(
        algorithm=algorithm,
        lam=lam,
        lookahead_bins=lookahead,
        trials=trials,
        motions_per_trial=motions,
        seed=seed,
        jitter_bins=jitter_bins,
        settle_ticks=settle_ticks,
        backoff_bins=backoff_bins,
        pilot_speed=pilot_speed,
        token_delay_ms=token_delay_ms,
        pilot_reaction_ms=tuple(reaction_ms),
    )
    out.mkdir(parents=True, exist_ok=True)
    logs = run_experiment(cfg)
    for log in logs:
        path = out / f"{algo}-seed{seed}-trial{log.trial}.jsonl"
        write_trial_log(log, path)
        click.echo(f"trial {log.trial}: contacts={log.contacts_total} "
                   f"tokens={log.tokens_total} motions={log.motions} -> {path}")


@main.command()
@click.option("--in", "in_dir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default="csv",
              show_default=True)
def report(in_dir: Path, fmt: str) -> None:
    """Summarize the trial logs in a directory (stdout)."""
    logs = sorted(in_dir.glob("*.jsonl"))
    if not logs:
        raise click.ClickException(f"no .jsonl logs in {in_dir}")
    parsed = [read_trial_log(p) for p in logs]
    if fmt == "csv":
        for row in summary_rows(parsed):
            click.echo(row)
    else:
        for row in raster_rows(parsed):
            click.echo(json.dumps(row, separators=(",", ":")))


@main.command()
@click.option("--log", "log_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write the replayed log here; defaults to stdout summary only.")
def replay(log_path: Path, out: Path | None) -> None:
    """Re-run a recorded trial from its commands; verify it reproduces."""
    source = read_trial_log(log_path)
    replayed = replay_trial(source)
    identical = replayed.to_jsonl() == source.to_jsonl()
    if out is not None:
        write_trial_log(replayed, out)
    click.echo(f"replayed {log_path}: ticks={replayed.duration_ticks} "
               f"contacts={replayed.contacts_total} identical={identical}")
    if not identical:
        sys.exit(1)


@main.command()
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--delay-ms", type=int, default=0, show_default=True,
              help="Token onset delay before wire delivery.")
@click.option("--tick-ms", type=int, default=25, show_default=True)
@click.option("--no-pace", is_flag=True, help="Run ticks as fast as possible.")
@click.option("--out", type=click.Path(path_type=Path), default=Path("trial-logs"),
              show_default=True)
def serve(port: int, delay_ms: int, tick_ms: int, no_pace: bool, out: Path) -> None:
    """Serve live trials over a websocket for the pilot console."""
    gateway_main(GatewayConfig(port=port, delay_ms=delay_ms, tick_ms=tick_ms,
                               pace=not no_pace, out_dir=out))


if __name__ == "__main__":
    main()
