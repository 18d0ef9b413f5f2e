import json

import pytest

from bolmoufang import finder, magma as mg, paperlab
from bolmoufang.finder import Status
from bolmoufang.paperlab import Checkpoint, CheckpointError
from bolmoufang.term import all_codes, decode_bm, holds


def test_fixtures_all_pass():
    claims = paperlab.reproduce_fixtures()
    assert len(claims) == 5
    for c in claims:
        assert c.passed, (c.claim_id, c.expectation, c.observed)


def test_code_lists_are_disjoint_and_valid():
    listed = set(paperlab.YES_CODES) | set(paperlab.NO_CODES) | set(paperlab.THEOREM_ROWS) | set(paperlab.OPEN_CODES)
    sizes = len(paperlab.YES_CODES) + len(paperlab.NO_CODES) + len(paperlab.THEOREM_ROWS) + len(paperlab.OPEN_CODES)
    assert len(listed) == sizes
    assert listed <= {str(c) for c in all_codes()}
    rows = paperlab.classification_codes(include_unlisted=True)
    assert len(rows) == 60
    assert list(rows) == sorted(rows)
    assert set(paperlab.NUCLEAR_SQUARE.values()) <= {c for c, a in rows.items() if a == "unlisted"}


@pytest.mark.parametrize("code", ["A12", "C13", "D12", "F45"])
def test_no_rows_have_small_counterexamples(code):
    row = paperlab.classify(code, "no", 6)
    assert row.consistent
    assert row.status is Status.WITNESS and row.witness_order <= 6
    assert holds(decode_bm(code), row.witness) and not mg.is_loop(row.witness)
    assert row.observed == f"counterexample(order {row.witness_order})"


@pytest.mark.parametrize("code", ["A24", "B34", "F24"])
def test_yes_rows_exhausted_small(code):
    row = paperlab.classify(code, "yes", 4)
    assert row.exhausted_through == 4 and row.observed == "exhausted(4)"
    # exhaustion below the mandatory order does not count as agreement
    assert not row.consistent


def test_yes_row_consistent_at_mandatory_order():
    row = paperlab.classify("A24", "yes", 5)
    assert row.consistent and row.observed == "exhausted(5)"


def test_open_rows_use_non_group_target():
    row = paperlab.classify("B25", "open", 5)
    assert row.status is Status.EXHAUSTED and row.consistent


@pytest.mark.parametrize("budget", [0.005, 0.3])
def test_budget_row_consistent_only_past_mandatory_order(budget):
    row = paperlab.classify("E14", "yes", 8, budget=budget)
    assert row.status is Status.BUDGET and row.observed == "budget"
    # order 6 is best effort; exhaustion through the mandatory order is what counts
    assert row.consistent == (row.exhausted_through >= paperlab.MANDATORY_ORDER)


def test_onesided_suite_order4():
    claims = paperlab.run_onesided_suite(4)
    assert len(claims) == len(paperlab.ONESIDED_CASES)
    assert all(c.passed for c in claims), [(c.claim_id, c.observed) for c in claims if not c.passed]
    assert claims[-1].observed == "counterexample(3)"


# ---------------------------------------------------------------- B25 and checkpoints

def test_b25_full_run():
    result, ckpt = paperlab.b25_campaign(5)
    assert result.passed
    assert result.details["searched_orders"] == [2, 3, 4, 5]
    assert ckpt.done_orders == {2, 3, 4, 5}


def test_b25_max_order_1_is_trivial():
    result, ckpt = paperlab.b25_campaign(1)
    assert result.passed and result.details["searched_orders"] == []


def test_b25_resume_in_two_halves(tmp_path):
    path = tmp_path / "b25.ckpt"
    full, _ = paperlab.b25_campaign(6)
    first, ckpt = paperlab.b25_campaign(4, checkpoint_path=path)
    assert first.passed and path.exists()
    second, ckpt2 = paperlab.b25_campaign(6, resume=path, checkpoint_path=path)
    assert second.details["searched_orders"] == [5, 6]
    assert second.passed == full.passed
    assert second.observed.replace("6", "") == full.observed.replace("6", "")
    assert ckpt2.done_orders == {2, 3, 4, 5, 6}
    assert ckpt2.nodes == full.details["nodes"]


def test_b25_resume_after_budget_interrupt(tmp_path):
    path = tmp_path / "b25.ckpt"
    full, _ = paperlab.b25_campaign(6)
    partial, ckpt = paperlab.b25_campaign(6, budget=0.15, checkpoint_path=path)
    if partial.passed:
        pytest.skip("machine finished the whole campaign within the interrupt budget")
    assert partial.observed.startswith("budget exceeded")
    saved = Checkpoint.loads(path.read_text())
    assert saved.done_orders == ckpt.done_orders
    resumed, final = paperlab.b25_campaign(6, resume=path, checkpoint_path=path)
    assert resumed.passed == full.passed
    assert final.done_orders == {2, 3, 4, 5, 6}
    assert min(resumed.details["searched_orders"]) == max(ckpt.done_orders, default=1) + 1
    # every completed subtree is counted once across the two runs
    assert final.nodes == full.details["nodes"]


def test_checkpoint_round_trip():
    ck = Checkpoint("abc", 3, {2, 3}, {4: {(1, 2, 0), (2, 0, 1)}}, 17)
    assert Checkpoint.loads(ck.dumps()) == ck


@pytest.mark.parametrize("text", [
    "",
    "hello\n",
    paperlab.CHECKPOINT_HEADER + "\nproblem x\n",
    paperlab.CHECKPOINT_HEADER + "\nproblem x\nsplit-depth three\n",
    paperlab.CHECKPOINT_HEADER + "\nproblem x\nsplit-depth 3\nprefix 4 1.a\n",
    paperlab.CHECKPOINT_HEADER + "\nproblem x\nsplit-depth 3\nbogus 1\n",
])
def test_corrupt_checkpoint(text):
    with pytest.raises(CheckpointError):
        Checkpoint.loads(text)


def test_checkpoint_for_other_problem(tmp_path):
    path = tmp_path / "other.ckpt"
    Checkpoint("0" * 16, 3).save(path)
    with pytest.raises(CheckpointError, match="different problem"):
        paperlab.b25_campaign(4, resume=path)
    with pytest.raises(CheckpointError):
        paperlab.b25_campaign(4, resume=tmp_path / "missing.ckpt")


def test_e14_by_duality():
    c = paperlab.e14_by_duality()
    assert c.passed
    p = paperlab.b25_problem()
    assert p.dual().identities[0].same_equation(decode_bm("E14"))
    assert p.dual().spec == p.spec


def test_records_round_trip(tmp_path):
    path = tmp_path / "out.jsonl"
    rows = [paperlab.classify("A12", "no", 4), paperlab.classify("A24", "yes", 3)]
    claims = paperlab.reproduce_fixtures()
    paperlab.write_records(path, rows + claims)
    back = paperlab.read_records(path)
    assert [r["record"] for r in back] == ["classification"] * 2 + ["claim"] * 5
    assert back[0]["code"] == "A12" and back[0]["paper_answer"] == "no"
    assert back[0]["observed"] == rows[0].observed
    assert back[2]["pass"] is True
    for line in path.read_text().splitlines():
        json.loads(line)


def test_unlisted_rows_report_something():
    row = paperlab.classify(paperlab.NUCLEAR_SQUARE["MN"], "unlisted", 3)
    assert row.consistent
    assert row.status in (Status.WITNESS, Status.EXHAUSTED)


def test_theorem_row_counterexamples_and_loops():
    assert paperlab.classify("D23", "no", 4).witness_order == 3
    assert paperlab.classify("B14", "yes", 4).status is finder.Status.EXHAUSTED
