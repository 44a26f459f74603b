"""Command line administration.

The CLI is the administrator's console: it creates the election, walks the
phases, publishes artifacts, and runs the simulation harness. Voters never
touch it; they go through the HTTP service (`pvv serve`).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .audit import canonical_json
from .harness import Scenario, matrix_csv, run_matrix, run_scenario, standard_scenarios
from .model import ElectionPhase
from .phrases import collision_probability
from .service import RoleAssignment, Session, VotingService
from .store import KeyValueStore

DEFAULT_STORE = "pvv-store.json"

_OPEN_TARGETS = {
    "absentee": ElectionPhase.ABSENTEE_OPEN,
    "voting": ElectionPhase.VOTING_OPEN,
    "verification": ElectionPhase.VERIFICATION_OPEN,
}
_CLOSE_TARGETS = {
    "voting": ElectionPhase.VOTING_CLOSED,
    "verification": ElectionPhase.VERIFICATION_CLOSED,
}
_ADVANCE_TARGETS = {
    "reported": ElectionPhase.REPORTED,
    "dispute-window": ElectionPhase.DISPUTE_WINDOW,
    "final": ElectionPhase.FINAL,
}


def _service(store_path: str) -> VotingService:
    return VotingService(store=KeyValueStore(Path(store_path)))


def _ea_session(service: VotingService) -> Session:
    if service.roles is None or not service.roles.ea:
        raise click.ClickException("store has no role assignment; run `pvv init` first")
    return service.create_session(sorted(service.roles.ea)[0])


def _referendum_id(service: VotingService, referendum_id: str | None) -> str:
    if referendum_id is not None:
        return referendum_id
    ids = service.referendum_ids()
    if len(ids) == 1:
        return ids[0]
    if not ids:
        raise click.ClickException("store has no referenda; run `pvv init` first")
    raise click.ClickException(
        f"store has several referenda, pick one with -r: {', '.join(ids)}"
    )


store_option = click.option(
    "--store",
    envvar="PVV_STORE",
    default=DEFAULT_STORE,
    show_default=True,
    help="Path of the persistent store file.",
)
ref_option = click.option(
    "-r", "--referendum", "referendum_id", default=None,
    help="Referendum id (defaults to the only one in the store).",
)


@click.group()
def main():
    """Phrase-verified voting for small self-hosted elections."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file with the referendum and role assignment.")
@store_option
def init(config_path: str, store: str):
    """Create a referendum (and store the role assignment) from a config file."""
    config = json.loads(Path(config_path).read_text(encoding="utf-8"))
    roles = RoleAssignment(
        ea=frozenset(config["roles"]["ea"]),
        chair=config["roles"]["chair"],
        t1=config["roles"]["t1"],
        t2=config["roles"]["t2"],
        panel=frozenset(config["roles"].get("panel", ())),
    )
    service = VotingService(store=KeyValueStore(Path(store)), roles=roles)
    session = _ea_session(service)
    referendum = service.create_referendum(session, config["referendum"])
    click.echo(f"created {referendum.referendum_id} (phase Setup)")


@main.command()
@store_option
@ref_option
def status(store: str, referendum_id: str | None):
    """Show phase and counts for a referendum."""
    service = _service(store)
    rid = _referendum_id(service, referendum_id)
    election = service.election(rid)
    click.echo(f"referendum: {rid}")
    click.echo(f"phase: {election.phase.value}")
    click.echo(f"eligible: {len(election.referendum.eligible_voters)}")
    click.echo(f"ballots: {len(election.vote_table.entries)}")
    click.echo(
        "prompt: published"
        if election.current_prompt_text is not None
        else "prompt: not published"
    )


def _advance(store: str, referendum_id: str | None, target: ElectionPhase):
    service = _service(store)
    rid = _referendum_id(service, referendum_id)
    phase = service.advance_phase(_ea_session(service), rid, target)
    click.echo(f"{rid} is now in phase {phase.value}")


@main.command("open")
@click.argument("stage", type=click.Choice(sorted(_OPEN_TARGETS)))
@store_option
@ref_option
def open_stage(stage: str, store: str, referendum_id: str | None):
    """Open a stage: absentee, voting, or verification."""
    _advance(store, referendum_id, _OPEN_TARGETS[stage])


@main.command("close")
@click.argument("stage", type=click.Choice(sorted(_CLOSE_TARGETS)))
@store_option
@ref_option
def close_stage(stage: str, store: str, referendum_id: str | None):
    """Close a stage: voting or verification."""
    _advance(store, referendum_id, _CLOSE_TARGETS[stage])


@main.command()
@click.argument("stage", type=click.Choice(["reported", "dispute-window", "final"]))
@store_option
@ref_option
def advance(stage: str, store: str, referendum_id: str | None):
    """Advance to the reporting stages: reported, dispute-window, final."""
    _advance(store, referendum_id, _ADVANCE_TARGETS[stage])


@main.command()
@store_option
@ref_option
def publish(store: str, referendum_id: str | None):
    """Build and publish the verification prompt (after voting closes)."""
    service = _service(store)
    rid = _referendum_id(service, referendum_id)
    text = service.publish_prompt(_ea_session(service), rid)
    click.echo(text, nl=False)


@main.command()
@store_option
@ref_option
def prompt(store: str, referendum_id: str | None):
    """Print the published verification prompt."""
    service = _service(store)
    rid = _referendum_id(service, referendum_id)
    click.echo(service.get_prompt(rid), nl=False)


@main.command()
@store_option
@ref_option
def bundle(store: str, referendum_id: str | None):
    """Print the latest published audit bundle as JSON."""
    service = _service(store)
    rid = _referendum_id(service, referendum_id)
    click.echo(canonical_json(service.get_bundle(rid)))


@main.command("verify-chain")
@store_option
@ref_option
def verify_chain_command(store: str, referendum_id: str | None):
    """Check the audit log hash chain; exit 1 if it is broken."""
    service = _service(store)
    rid = _referendum_id(service, referendum_id)
    result = service.verify_chain(rid)
    if result.ok:
        click.echo(f"chain ok ({rid})")
    else:
        click.echo(
            f"chain BROKEN at index {result.first_invalid_index}: {result.reason}"
        )
        sys.exit(1)


@main.command()
@click.argument("scenario_file", required=False,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--trials", default=1, show_default=True,
              help="Trials per scenario; 1 prints the transcript instead of rates.")
@click.option("--seed", default=0, show_default=True)
@click.option("--csv", "csv_path", default=None, type=click.Path(dir_okay=False),
              help="Also write the detection matrix as CSV.")
def simulate(scenario_file: str | None, trials: int, seed: int, csv_path: str | None):
    """Run adversary scenarios (default: the standard five-attack matrix)."""
    if scenario_file is None:
        scenarios = standard_scenarios()
    else:
        data = json.loads(Path(scenario_file).read_text(encoding="utf-8"))
        entries = data if isinstance(data, list) else [data]
        scenarios = [Scenario.from_dict(entry) for entry in entries]

    if trials == 1 and len(scenarios) == 1:
        result = run_scenario(
            Scenario.from_dict({**scenarios[0].to_dict(), "seed": seed})
        )
        for line in result.transcript:
            click.echo(line)
        return

    rows = run_matrix(scenarios, n_trials=trials, seed=seed)
    click.echo(f"{'action':<24}{'trials':>8}{'detected':>10}{'rate':>8}")
    for row in rows:
        click.echo(f"{row.action:<24}{row.trials:>8}{row.detected:>10}{row.rate:>8.2f}")
    if csv_path is not None:
        Path(csv_path).write_text(matrix_csv(rows), encoding="utf-8")
        click.echo(f"wrote {csv_path}")


@main.command("collision-prob")
@click.argument("n_voters", type=int)
@click.argument("wordlist_size", type=int)
def collision_prob(n_voters: int, wordlist_size: int):
    """Probability that any two of N voters pick the same two-word phrase."""
    p = collision_probability(n_voters, wordlist_size)
    click.echo(f"{p:.6e}")


@main.command()
@click.option("--bind", envvar="PVV_BIND", default="127.0.0.1:8000", show_default=True,
              help="host:port to listen on.")
@store_option
@click.option("--static", "static_dir", default=None,
              type=click.Path(file_okay=False),
              help="Directory of web UI assets to serve under /ui.")
def serve(bind: str, store: str, static_dir: str | None):
    """Run the HTTP service."""
    import uvicorn

    from .http_api import create_app

    host, _, port = bind.rpartition(":")
    app = create_app(_service(store), static_dir=static_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
