"""Named reproduction runs: fixture tables, classification, one-sided suite, B25.

Every run returns plain records (``ClaimResult`` / ``ClassificationRow``)
that serialize one per line as JSON objects carrying a ``"record"`` key; see
``write_records``.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Union

from . import magma as mg
from . import tables
from .finder import SearchProblem, Status, Target, search, search_order
from .magma import Magma, Sided, StructureSpec
from .term import decode_bm, dual_identity, holds, label, named_identity

log = logging.getLogger(__name__)

MAGMA_WITH_INVERSES = StructureSpec(Sided.TWO, Sided.TWO)

YES_CODES = ("A24", "A25", "B34", "B35", "E13", "E23", "F14", "F24")
NO_CODES = ("A12", "A23", "B12", "B13", "B24", "C13", "C23", "C34", "C35", "D12", "D13", "D14",
            "D25", "D35", "D45", "E24", "E35", "E45", "F34", "F45")
# LB, RB, C, M1, M2 are loops; M3, M4 are not
THEOREM_ROWS = {"B14": "yes", "E25": "yes", "C15": "yes", "B15": "yes", "E15": "yes",
                "D23": "no", "D34": "no"}
OPEN_CODES = ("B25", "E14")
MAX_COUNTEREXAMPLE_ORDER = 6
MANDATORY_ORDER = 5

# bracket-shift forms of the nuclear square laws
NUCLEAR_SQUARE = {"LN": "A35", "MN": "C24", "RN": "F13"}


@dataclass
class ClaimResult:
    claim_id: str
    expectation: str
    observed: str
    passed: bool
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)

    def record(self) -> dict:
        return {"record": "claim", "claim_id": self.claim_id, "expectation": self.expectation,
                "observed": self.observed, "pass": self.passed, "elapsed": round(self.elapsed, 3),
                "details": self.details}


@dataclass
class ClassificationRow:
    code: str
    config: StructureSpec
    paper_answer: str  # yes | no | open | unlisted
    status: Status
    witness_order: Optional[int] = None
    exhausted_through: int = 0
    nodes: int = 0
    elapsed: float = 0.0
    witness: Optional[Magma] = None

    @property
    def observed(self) -> str:
        if self.witness_order is not None:
            return f"counterexample(order {self.witness_order})"
        if self.status is Status.EXHAUSTED:
            return f"exhausted({self.exhausted_through})"
        return "budget"

    @property
    def consistent(self) -> bool:
        """Does the observation agree with the published answer?"""
        if self.paper_answer == "no":
            return self.witness_order is not None and self.witness_order <= MAX_COUNTEREXAMPLE_ORDER
        if self.paper_answer in ("yes", "open"):
            return self.witness_order is None and self.exhausted_through >= MANDATORY_ORDER
        return True

    def record(self) -> dict:
        return {"record": "classification", "code": self.code, "config": str(self.config),
                "paper_answer": self.paper_answer, "observed": self.observed,
                "consistent": self.consistent, "exhausted_through": self.exhausted_through, "nodes": self.nodes, "elapsed": round(self.elapsed, 3),
                "witness": None if self.witness is None else [list(r) for r in self.witness.table]}


def _timed(claim_id: str, expectation: str, observe: Callable[[], str]) -> ClaimResult:
    start = time.monotonic()
    observed = observe()
    return ClaimResult(claim_id, expectation, observed, observed == expectation, time.monotonic() - start)


def _yn(b: bool) -> str:
    return "yes" if b else "no"


def _set(s) -> str:
    return "{" + ",".join(map(str, sorted(s))) + "}"


# ---------------------------------------------------------------- fixtures


def reproduce_fixtures() -> list[ClaimResult]:
    """Check every stated property of each published fixture table."""
    la = named_identity("LA")
    out = []

    def q1():
        r = mg.analyze(tables.Q1)
        return (f"loop={_yn(r.is_loop)} LA={_yn(holds(la, tables.Q1))} "
                f"two-sided-inverses={_yn(r.inverse_map_two_sided is not None)}")

    out.append(_timed("Q1-left-alternative-loop-no-inverses", "loop=yes LA=yes two-sided-inverses=no", q1))

    def q2():
        r = mg.analyze(tables.Q2)
        laws = " ".join(f"{name}={_yn(holds(decode_bm(code), tables.Q2))}"
                        for name, code in NUCLEAR_SQUARE.items())
        return f"loop={_yn(r.is_loop)} {laws} two-sided-inverses={_yn(r.inverse_map_two_sided is not None)}"

    out.append(_timed("Q2-nuclear-square-loop-no-inverses",
                      "loop=yes LN=yes MN=yes RN=yes two-sided-inverses=no", q2))

    def m3m4():
        m = tables.M3M4
        r = mg.analyze(m)
        inv = r.inverse_map_two_sided
        return (f"M3={_yn(holds(named_identity('M3'), m))} M4={_yn(holds(named_identity('M4'), m))} "
                f"neutral={r.two_sided_neutral} inverses={'absent' if inv is None else _map(inv)} "
                f"loop={_yn(r.is_loop)}")

    out.append(_timed("M3M4-order3-not-loop", "M3=yes M4=yes neutral=0 inverses=0>0,1>1,2>2 loop=no", m3m4))

    def right_lb():
        m = tables.RIGHT_NEUTRAL_LB
        r = mg.analyze(m)
        w = mg.satisfies_structure(m, StructureSpec(Sided.RIGHT, Sided.TWO))
        inv = "absent" if w is None else f"{w.neutral}:" + _map(dict(enumerate(w.inverses)))
        return (f"right-neutrals={_set(r.right_neutrals)} two-sided-neutral={r.two_sided_neutral} "
                f"inverses={inv} LB={_yn(holds(named_identity('LB'), m))} loop={_yn(r.is_loop)}")

    out.append(_timed("S6-right-neutral-LB-not-loop",
                      "right-neutrals={0} two-sided-neutral=None inverses=0:0>0,1>1,2>2 LB=yes loop=no",
                      right_lb))

    def left_zero():
        m = tables.LEFT_ZERO
        r = mg.analyze(m)
        left_inv = mg.satisfies_structure(m, StructureSpec(Sided.RIGHT, Sided.LEFT)) is not None
        all_bm = all(holds(decode_bm(c), m) for c in _all_code_strings())
        return (f"associative={_yn(r.is_associative)} right-neutrals={_set(r.right_neutrals)} "
                f"left-neutrals={_set(r.left_neutrals)} left-inverses={_yn(left_inv)} "
                f"all-bol-moufang={_yn(all_bm)} group={_yn(r.is_group)}")

    out.append(_timed("Hall-xy=x-not-group",
                      "associative=yes right-neutrals={0,1} left-neutrals={} left-inverses=yes "
                      "all-bol-moufang=yes group=no", left_zero))
    return out


def _map(d: dict) -> str:
    return ",".join(f"{k}>{v}" for k, v in sorted(d.items()))


def _all_code_strings() -> list[str]:
    from .term import all_codes
    return [str(c) for c in all_codes()]


# ---------------------------------------------------------------- classification


def classification_codes(include_unlisted: bool = False) -> dict[str, str]:
    """Row code -> paper answer, in code order."""
    rows = {c: "yes" for c in YES_CODES}
    rows.update({c: "no" for c in NO_CODES})
    rows.update(THEOREM_ROWS)
    rows.update({c: "open" for c in OPEN_CODES})
    if include_unlisted:
        for c in _all_code_strings():
            rows.setdefault(c, "unlisted")
    return dict(sorted(rows.items()))


def classify(code: str, paper_answer: str, max_order: int, budget: Optional[float] = None,
             spec: StructureSpec = MAGMA_WITH_INVERSES) -> ClassificationRow:
    # loops satisfying B25 or E14 are groups, so the open rows ask for a non-group
    target = Target.NON_GROUP if paper_answer == "open" else Target.NON_LOOP
    problem = SearchProblem((1, max_order), spec, (decode_bm(code),), target, budget=budget)
    out = search(problem)
    through = 0
    for s in out.per_order:
        if s.status is Status.EXHAUSTED:
            through = s.order
    return ClassificationRow(code, spec, paper_answer, out.status, out.order, through,
                             out.nodes_explored, out.elapsed, out.witness)


def _classify_star(args):
    return classify(*args)


def run_classification(max_order: int = 6, budget: Optional[float] = None, workers: int = 1,
                       include_unlisted: bool = False) -> list[ClassificationRow]:
    """One row per listed code.  ``budget`` is per row, in seconds."""
    jobs = [(code, answer, max_order, budget) for code, answer in classification_codes(include_unlisted).items()]
    return _map_jobs(_classify_star, jobs, workers)


def _map_jobs(fn, jobs, workers):
    if workers > 1:
        import multiprocessing
        with multiprocessing.get_context("fork").Pool(workers) as pool:
            return pool.map(fn, jobs)
    return [fn(j) for j in jobs]


# ---------------------------------------------------------------- one-sided


ONESIDED_CASES = (
    # (code, neutral, inverses, expected)
    ("B14", Sided.LEFT, Sided.LEFT, "exhausted"),
    ("B15", Sided.LEFT, Sided.LEFT, "exhausted"),
    ("E15", Sided.LEFT, Sided.LEFT, "exhausted"),
    ("C15", Sided.LEFT, Sided.LEFT, "exhausted"),
    ("E25", Sided.RIGHT, Sided.RIGHT, "exhausted"),
    ("B15", Sided.RIGHT, Sided.RIGHT, "exhausted"),
    ("E15", Sided.RIGHT, Sided.RIGHT, "exhausted"),
    ("C15", Sided.RIGHT, Sided.RIGHT, "exhausted"),
    ("B14", Sided.TWO, Sided.RIGHT, "exhausted"),
    ("B14", Sided.RIGHT, Sided.TWO, "counterexample(3)"),
)


def _onesided_case(args) -> ClaimResult:
    code, neutral, inverses, expected, max_order, budget = args
    spec = StructureSpec(neutral, inverses)
    start = time.monotonic()
    out = search(SearchProblem((1, max_order), spec, (decode_bm(code),), Target.NON_LOOP, budget=budget))
    if out.witness is not None:
        observed = f"counterexample({out.order})"
    elif out.status is Status.EXHAUSTED:
        observed = "exhausted"
    else:
        done = max((s.order for s in out.per_order if s.status is Status.EXHAUSTED), default=0)
        observed = f"budget(exhausted {done})"
    claim_id = f"{code}-{neutral.value}-neutral-{inverses.value}-inverses"
    return ClaimResult(claim_id, expected, observed, observed == expected, time.monotonic() - start)


def run_onesided_suite(max_order: int = 5, budget: Optional[float] = None, workers: int = 1) -> list[ClaimResult]:
    jobs = [case + (max_order, budget) for case in ONESIDED_CASES]
    return _map_jobs(_onesided_case, jobs, workers)


# ---------------------------------------------------------------- B25 campaign


class CheckpointError(ValueError):
    """Raised for an unreadable or mismatched checkpoint."""


CHECKPOINT_HEADER = "# bolmoufang checkpoint v1"


@dataclass
class Checkpoint:
    """Completed orders plus completed subtree prefixes of the order in progress."""

    problem: str
    split_depth: int
    done_orders: set[int] = field(default_factory=set)
    prefixes: dict[int, set[tuple[int, ...]]] = field(default_factory=dict)
    nodes: int = 0

    def dumps(self) -> str:
        lines = [CHECKPOINT_HEADER, f"problem {self.problem}", f"split-depth {self.split_depth}",
                 f"nodes {self.nodes}"]
        lines += [f"done-order {n}" for n in sorted(self.done_orders)]
        for n in sorted(self.prefixes):
            lines += [f"prefix {n} {'.'.join(map(str, p))}" for p in sorted(self.prefixes[n])]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Checkpoint":
        lines = [l.strip() for l in text.splitlines() if l.strip()]
        if not lines or lines[0] != CHECKPOINT_HEADER:
            raise CheckpointError("missing checkpoint header")
        fields: dict = {}
        done, prefixes = set(), {}
        try:
            for line in lines[1:]:
                key, _, rest = line.partition(" ")
                if key in ("problem", "split-depth", "nodes"):
                    fields[key] = rest
                elif key == "done-order":
                    done.add(int(rest))
                elif key == "prefix":
                    n, _, p = rest.partition(" ")
                    values = tuple(int(v) for v in p.split(".")) if p else ()
                    prefixes.setdefault(int(n), set()).add(values)
                else:
                    raise CheckpointError(f"unknown checkpoint line {line!r}")
            return cls(fields["problem"], int(fields["split-depth"]), done, prefixes, int(fields.get("nodes", 0)))
        except (KeyError, ValueError) as exc:
            if isinstance(exc, CheckpointError):
                raise
            raise CheckpointError(f"corrupt checkpoint: {exc}") from None

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(self.dumps())
        os.replace(tmp, path)


def b25_problem(split_depth: int = 3) -> SearchProblem:
    return SearchProblem((2, 2), MAGMA_WITH_INVERSES, (decode_bm("B25"),), Target.NON_GROUP,
                         split_depth=split_depth)


def b25_campaign(max_order: int, budget: Optional[float] = None,
                 resume: Union[None, str, Path, Checkpoint] = None,
                 checkpoint_path: Union[None, str, Path] = None,
                 save_every: float = 30.0, split_depth: int = 3) -> tuple[ClaimResult, Checkpoint]:
    """Search orders 2..max_order for a non-group magma with inverses satisfying B25.

    Progress is recorded per completed subtree; ``resume`` continues a previous
    run (a ``Checkpoint`` or a path to one).
    """
    base = b25_problem(split_depth)
    if isinstance(resume, Checkpoint):
        ckpt = resume
    elif resume is not None:
        try:
            ckpt = Checkpoint.loads(Path(resume).read_text())
        except OSError as exc:
            raise CheckpointError(f"cannot read checkpoint: {exc}") from None
    else:
        ckpt = Checkpoint(base.digest(), split_depth)
    if ckpt.problem != base.digest() or ckpt.split_depth != split_depth:
        raise CheckpointError("checkpoint belongs to a different problem or split depth")

    start = time.monotonic()
    deadline = None if budget is None else start + budget
    last_save = [start]

    def save():
        if checkpoint_path is not None:
            ckpt.save(checkpoint_path)
        last_save[0] = time.monotonic()

    def on_prefix(n, prefix, nodes):
        ckpt.prefixes.setdefault(n, set()).add(prefix)
        ckpt.nodes += nodes
        if time.monotonic() - last_save[0] > save_every:
            save()

    expectation = f"no counterexample through order {max_order}"
    observed = None
    searched = []
    for n in range(2, max_order + 1):
        if n in ckpt.done_orders:
            continue
        searched.append(n)
        status, m, nodes, _ = search_order(base.at_order(n), n, deadline, skip=ckpt.prefixes.get(n, ()),
                                           on_prefix_done=lambda p, k, n=n: on_prefix(n, p, k))
        if status is Status.WITNESS:
            observed = f"counterexample of order {n}:\n{mg.format_table(m)}"
            break
        if status is Status.BUDGET:
            done = max([k for k in ckpt.done_orders if k <= max_order], default=1)
            observed = f"budget exceeded at order {n}; exhausted through order {done}"
            break
        ckpt.done_orders.add(n)
        ckpt.prefixes.pop(n, None)
        log.info("B25 order %d exhausted", n)
    if observed is None:
        observed = expectation
    save()
    result = ClaimResult("B25-no-counterexample", expectation, observed, observed == expectation,
                         time.monotonic() - start, {"searched_orders": searched, "nodes": ckpt.nodes})
    return result, ckpt


def e14_by_duality() -> ClaimResult:
    """E14 is the mirror image of B25 and the structure is self-dual."""
    start = time.monotonic()
    dual = dual_identity(decode_bm("B25"))
    observed = f"dual(B25)={label(dual)} spec-dual={MAGMA_WITH_INVERSES.dual()}"
    expectation = f"dual(B25)=E14 spec-dual={MAGMA_WITH_INVERSES}"
    return ClaimResult("E14-covered-by-duality", expectation, observed, observed == expectation,
                       time.monotonic() - start)


# ---------------------------------------------------------------- records


def write_records(path: Union[str, Path], records: Iterable) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r.record(), sort_keys=True) + "\n")


def read_records(path: Union[str, Path]) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
