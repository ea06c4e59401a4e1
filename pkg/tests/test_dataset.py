import json
from importlib.resources import files

import pytest

from corgi.dataset import (CommandRecord, EvalReport, ReplayScript,
                           dataset_stats, evaluate, insert_presumptions,
                           load_dataset, load_scripts, write_report)
from corgi.dialog import start_session
from corgi.errors import ValidationError
from corgi.logic import parse_program


def _data_path(tmp_path, name):
    p = tmp_path / name
    p.write_text(files("corgi.data").joinpath(name).read_text())
    return p


@pytest.fixture()
def records(tmp_path):
    return load_dataset(_data_path(tmp_path, "commands.jsonl"))


def test_seed_corpus_loads(records):
    assert len(records) >= 16
    stats = dataset_stats(records)
    assert stats["restricted"] + stats["everyday"] == stats["total"]


def test_snow_wake_insertion(records):
    record = next(r for r in records
                  if r.command.startswith("If it snows tonight")
                  and r.presumptions)
    assert insert_presumptions(record) == (
        "If it snows more than two inches tonight and it is a working day "
        "then wake me up early because I want to arrive to work early")


def test_insertion_no_presumptions_is_identity():
    record = CommandRecord(command="If a then b because c", domain="everyday",
                           because_type="goal", template=1)
    assert insert_presumptions(record) == "If a then b because c"


def test_same_index_keeps_listed_order():
    record = CommandRecord(command="a b", domain="everyday",
                           because_type="goal", template=1,
                           presumptions=[(1, "first"), (1, "second")])
    assert insert_presumptions(record) == "a first second b"


def test_election_double_index(records):
    record = next(r for r in records if "election" in r.command)
    out = insert_presumptions(record)
    assert ("an upcoming election in the next few months and I am eligible "
            "to vote then") in out
    assert "register to vote and vote in the election because" in out


def test_negative_index_rejected():
    record = CommandRecord(command="a b", domain="everyday",
                           because_type="goal", template=1,
                           presumptions=[(-1, "x")])
    with pytest.raises(ValidationError):
        record.validate()


def test_unknown_tag_rejected():
    record = CommandRecord(command="a", domain="weird",
                           because_type="goal", template=1)
    with pytest.raises(ValidationError):
        record.validate()


def test_empty_file_loads_empty(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text("")
    assert load_dataset(p) == []


def test_loader_roundtrip(records, tmp_path):
    out = tmp_path / "again.jsonl"
    out.write_text("\n".join(r.to_json() for r in records) + "\n")
    again = load_dataset(out)
    assert [r.to_json() for r in again] == [r.to_json() for r in records]


def test_insertion_order_safety(records):
    # splicing high-to-low matches simultaneous insertion on original indices
    for record in records:
        words = record.command.split()
        simultaneous = []
        for pos in range(len(words) + 1):
            for index, text in record.presumptions:
                if index == pos:
                    simultaneous.extend(text.split())
            if pos < len(words):
                simultaneous.append(words[pos])
        assert insert_presumptions(record) == " ".join(simultaneous)


@pytest.fixture()
def main_kb(tmp_path):
    kb = parse_program(files("corgi.data").joinpath("kb/main.pl").read_text())
    kb.load_types(_data_path(tmp_path, "types.tsv"))
    return kb


def test_replay_scripts_evaluate(tmp_path, main_kb):
    scripts = load_scripts(_data_path(tmp_path, "replays_main.jsonl"))
    report = evaluate(scripts, lambda cmd: start_session(main_kb, cmd))
    outcomes = {o.task_id: o for o in report.outcomes}
    assert outcomes["umbrella-success"].outcome == "succeed"
    assert outcomes["umbrella-failure"].outcome == "fail"
    assert all(o.matched for o in report.outcomes)
    assert report.success_rate == 0.5
    assert report.rules_contributed == 2
    assert report.unique_rules == 2


def test_script_exhaustion_counts_as_fail(main_kb):
    script = ReplayScript(task_id="starved",
                          command="If it rains then remind me to stop "
                                  "because I want to win", turns=[],
                          expected="fail")
    report = evaluate([script], lambda cmd: start_session(main_kb, cmd))
    assert report.outcomes[0].outcome == "fail"
    assert report.outcomes[0].note == "exhausted"


def test_empty_task_list_warns():
    report = evaluate([], lambda cmd: (_ for _ in ()).throw(RuntimeError()))
    assert report.success_rate == 0.0
    assert report.warnings


def test_evaluate_deterministic(tmp_path, main_kb):
    scripts = load_scripts(_data_path(tmp_path, "replays_main.jsonl"))
    a = evaluate(scripts, lambda cmd: start_session(main_kb, cmd))
    b = evaluate(scripts, lambda cmd: start_session(main_kb, cmd))
    assert json.dumps(a.to_record()) == json.dumps(b.to_record())


def test_write_report_renders_figures(tmp_path, main_kb):
    scripts = load_scripts(_data_path(tmp_path, "replays_main.jsonl"))
    report = evaluate(scripts, lambda cmd: start_session(main_kb, cmd))
    paths = write_report(report, tmp_path / "out")
    assert (tmp_path / "out" / "report.json").exists()
    tsv = (tmp_path / "out" / "outcomes.tsv").read_text().splitlines()
    assert tsv[0].startswith("task_id\t")
    assert len(tsv) == 3
    assert (tmp_path / "out" / "figures" / "outcomes.png").stat().st_size > 0
    assert (tmp_path / "out" / "figures" / "rules.png").stat().st_size > 0
