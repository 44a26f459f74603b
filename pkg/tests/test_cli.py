import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from pvv.cli import main
from pvv.model import Vote
from pvv.service import VotingService
from pvv.store import KeyValueStore


@pytest.fixture()
def runner():
    return CliRunner()


def write_config(path: Path, rid="CLI-TEST", roster=("m1", "m2", "m3")):
    config = {
        "referendum": {
            "referendum_id": rid,
            "question": "Adopt?",
            "date": "2026-03-02",
            "eligible_voters": list(roster),
        },
        "roles": {
            "ea": ["alice"], "chair": "carol", "t1": "tom", "t2": "tina",
            "panel": ["pat"],
        },
    }
    path.write_text(json.dumps(config), encoding="utf-8")
    return path


def invoke(runner, store, *args):
    result = runner.invoke(main, [*args, "--store", str(store)])
    assert result.exit_code == 0, result.output
    return result.output


def cast_ballots(store, rid="CLI-TEST"):
    service = VotingService(store=KeyValueStore(store))
    for voter, phrase, vote in [
        ("m1", "quiet harbor", Vote.YES),
        ("m2", "solid brook", Vote.NO),
        ("m3", "amber ledge", Vote.YES),
    ]:
        token = service.issue_token(service.create_session(voter), rid)
        service.cast_ballot(rid, token.value, phrase, vote)


class TestAdminFlow:
    def test_init_and_status(self, runner, tmp_path):
        store = tmp_path / "store.json"
        config = write_config(tmp_path / "cfg.json")
        result = runner.invoke(main, ["init", "--config", str(config), "--store", str(store)])
        assert result.exit_code == 0
        assert "created CLI-TEST" in result.output
        out = invoke(runner, store, "status")
        assert "phase: Setup" in out

    def test_whole_election_from_the_console(self, runner, tmp_path):
        store = tmp_path / "store.json"
        config = write_config(tmp_path / "cfg.json")
        runner.invoke(main, ["init", "--config", str(config), "--store", str(store)])
        invoke(runner, store, "open", "voting")
        cast_ballots(store)
        invoke(runner, store, "close", "voting")
        prompt_out = invoke(runner, store, "publish")
        assert prompt_out.startswith("Referendum: CLI-TEST\n")
        invoke(runner, store, "open", "verification")
        invoke(runner, store, "close", "verification")
        invoke(runner, store, "advance", "reported")
        bundle_out = invoke(runner, store, "bundle")
        assert json.loads(bundle_out)["revision"] == 0
        assert "chain ok" in invoke(runner, store, "verify-chain")

    def test_prompt_before_publish_fails(self, runner, tmp_path):
        store = tmp_path / "store.json"
        config = write_config(tmp_path / "cfg.json")
        runner.invoke(main, ["init", "--config", str(config), "--store", str(store)])
        result = runner.invoke(main, ["prompt", "--store", str(store)])
        assert result.exit_code != 0

    def test_broken_chain_exits_nonzero(self, runner, tmp_path):
        store = tmp_path / "store.json"
        config = write_config(tmp_path / "cfg.json")
        runner.invoke(main, ["init", "--config", str(config), "--store", str(store)])
        invoke(runner, store, "open", "voting")
        data = json.loads(store.read_text())
        key = "referendum/CLI-TEST/audit"
        data["election"][key]["events"][0]["payload"] = '{"forged":true}'
        store.write_text(json.dumps(data))
        result = runner.invoke(main, ["verify-chain", "--store", str(store)])
        assert result.exit_code == 1
        assert "BROKEN" in result.output

    def test_missing_store_is_a_clean_error(self, runner, tmp_path):
        result = runner.invoke(main, ["status", "--store", str(tmp_path / "none.json")])
        assert result.exit_code != 0
        assert "pvv init" in result.output


class TestSimulate:
    def test_matrix_output_and_csv(self, runner, tmp_path):
        csv_path = tmp_path / "matrix.csv"
        result = runner.invoke(main, ["simulate", "--trials", "3", "--seed", "9",
                                      "--csv", str(csv_path)])
        assert result.exit_code == 0, result.output
        assert "flip-vote-verified" in result.output
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "action,trials,detected,rate"
        assert len(lines) == 6

    def test_single_scenario_transcript(self, runner, tmp_path):
        scenario = {
            "schema_id": "pvv-scenario-v1",
            "name": "one-flip",
            "n_voters": 6,
            "adversary_action": {"kind": "flip_vote", "target": 0},
        }
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(scenario), encoding="utf-8")
        result = runner.invoke(main, ["simulate", str(path), "--seed", "4"])
        assert result.exit_code == 0, result.output
        assert "adversary flip_vote" in result.output
        assert "detector=VoterPairCheck" in result.output


class TestCollisionProb:
    def test_reference_value(self, runner):
        result = runner.invoke(main, ["collision-prob", "26", "7776"])
        assert result.exit_code == 0
        assert result.output.strip() == "5.374892e-06"

    def test_certainty_case(self, runner):
        result = runner.invoke(main, ["collision-prob", "5", "2"])
        assert result.output.strip() == "1.000000e+00"
