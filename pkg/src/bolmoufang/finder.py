"""Exhaustive backtracking search for finite models.

The engine fills a Cayley table cell by cell.  Every ground instance of a
required identity is evaluated as far as the partial table allows and then
*watches* the unknown cell it is blocked on; assigning that cell resumes the
instance.  An instance whose sides are both known and differ is a conflict;
an instance with one side known and the other missing only its outermost
product forces that cell (unit propagation).

Symmetry is broken by placing the demanded neutral element at 0.  Inverses
are chosen before any cell: each element ``x > 0`` gets the smallest
inverse ``x'`` (of the demanded side) as a decision variable, which
assigns the one or two cells ``x*x'`` / ``x'*x`` to 0.  Choosing the smallest
inverse keeps every labeled model reachable along exactly one branch.
"""

from __future__ import annotations

import enum
import hashlib
import itertools
import logging
import multiprocessing
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from . import magma as mg
from .magma import Magma, Sided, StructureSpec, StructureWitness
from .term import Identity, Inv, One, Prod, Term, Var, holds, label

log = logging.getLogger(__name__)


class ConfigurationError(ValueError):
    """Raised for a search problem that cannot be run."""


class Target(str, enum.Enum):
    NON_LOOP = "non-loop"
    NON_GROUP = "non-group"
    ANY = "any-model"


class Status(str, enum.Enum):
    WITNESS = "witness"
    EXHAUSTED = "exhausted"
    BUDGET = "budget-exceeded"


@dataclass(frozen=True)
class SearchProblem:
    orders: tuple[int, int]
    spec: StructureSpec = StructureSpec()
    identities: tuple[Identity, ...] = ()
    target: Target = Target.NON_LOOP
    deterministic: bool = True
    budget: Optional[float] = None  # wall-clock seconds for the whole problem
    workers: int = 1
    split_depth: int = 2

    def __post_init__(self):
        orders = self.orders
        if isinstance(orders, int):
            orders = (orders, orders)
        elif isinstance(orders, range):
            orders = (orders.start, orders.stop - 1)
        lo, hi = (int(v) for v in orders)
        if lo < 1 or hi < lo:
            raise ConfigurationError(f"bad order range {lo}..{hi}")
        object.__setattr__(self, "orders", (lo, hi))
        object.__setattr__(self, "identities", tuple(self.identities))
        object.__setattr__(self, "target", Target(self.target))
        if not isinstance(self.spec, StructureSpec):
            raise ConfigurationError("spec must be a StructureSpec")
        if not self.identities and self.target is not Target.ANY:
            raise ConfigurationError(f"target {self.target.value} needs at least one required identity")
        for ident in self.identities:
            if _contains_inverse(ident.lhs) or _contains_inverse(ident.rhs):
                raise ConfigurationError(f"{label(ident)}: formal inverses are not supported by the search")

    def at_order(self, n: int) -> "SearchProblem":
        return SearchProblem((n, n), self.spec, self.identities, self.target, self.deterministic,
                             self.budget, self.workers, self.split_depth)

    def dual(self) -> "SearchProblem":
        from .term import dual_identity
        return SearchProblem(self.orders, self.spec.dual(), tuple(dual_identity(i) for i in self.identities),
                             self.target, self.deterministic, self.budget, self.workers, self.split_depth)

    def digest(self) -> str:
        """Stable hash of everything except the order range, budget and worker count."""
        parts = [self.spec.neutral.value, self.spec.inverses.value, self.target.value, str(self.split_depth)]
        parts += sorted(str(i) for i in self.identities)
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()[:16]


@dataclass
class OrderStats:
    order: int
    status: Status
    nodes: int
    models: int
    elapsed: float


@dataclass
class SearchOutcome:
    status: Status
    witness: Optional[Magma] = None
    structure: Optional[StructureWitness] = None
    nodes_explored: int = 0
    elapsed: float = 0.0
    per_order: list[OrderStats] = field(default_factory=list)

    @property
    def order(self) -> Optional[int]:
        return None if self.witness is None else self.witness.order


class BudgetExceeded(Exception):
    pass


def _contains_inverse(term: Term) -> bool:
    if isinstance(term, Inv):
        return True
    if isinstance(term, Prod):
        return _contains_inverse(term.left) or _contains_inverse(term.right)
    return False


# ---------------------------------------------------------------- compilation

_SIDE_CACHE: dict = {}


def _compile_side(term: Term, n: int) -> Callable:
    """Generate ``f(T, x, y, z)`` for one side of an identity at order ``n``.

    Returns the value when every product is known; otherwise ``-1 - c`` when
    the missing cell ``c`` is the outermost product, and ``-1 - c - n*n``
    when it is an inner one.
    """
    key = (term, n)
    fn = _SIDE_CACHE.get(key)
    if fn is not None:
        return fn
    nn = n * n
    lines = ["def side(T, x, y, z):"]
    counter = itertools.count()

    def emit(t: Term, final: bool) -> str:
        if isinstance(t, Var):
            return t.name
        if isinstance(t, One):
            return "0"
        a = emit(t.left, False)
        b = emit(t.right, False)
        k = next(counter)
        lines.append(f"    c{k} = {a} * {n} + {b}")
        lines.append(f"    t{k} = T[c{k}]")
        bias = "" if final else f" - {nn}"
        lines.append(f"    if t{k} < 0: return -1 - c{k}{bias}")
        return f"t{k}"

    result = emit(term, True)
    lines.append(f"    return {result}")
    namespace: dict = {}
    exec("\n".join(lines), namespace)
    fn = namespace["side"]
    _SIDE_CACHE[key] = fn
    return fn


# ---------------------------------------------------------------- engine


class _Engine:
    """Search state for one order.  Not thread-safe; one per worker."""

    def __init__(self, n: int, spec: StructureSpec, identities: Sequence[Identity], target: Target,
                 deadline: Optional[float] = None):
        self.n = n
        self.nn = n * n
        self.spec = spec
        self.target = target
        self.deadline = deadline
        self.nodes = 0
        self.T = [-1] * self.nn
        self.watch: list[list[int]] = [[] for _ in range(self.nn)]
        self.trail: list[int] = []
        self.wtrail: list[int] = []
        self.queue: list[int] = []
        self.inv = [-1] * n
        self.inv_side = spec.inverses
        self.inv_vars = list(range(1, n)) if spec.inverses is not Sided.NONE else []
        self.inv_count = 0

        instances = []
        for ident in identities:
            fl = _compile_side(ident.lhs, n)
            fr = _compile_side(ident.rhs, n)
            names = ident.variables
            for values in itertools.product(range(n), repeat=len(names)):
                env = dict(zip(names, values))
                instances.append((fl, fr, env.get("x", 0), env.get("y", 0), env.get("z", 0)))
        self.instances = instances
        self.ok = self._setup()

    # -- assignment & propagation

    def _assign(self, c: int, v: int) -> bool:
        self.T[c] = v
        self.trail.append(c)
        self.queue.append(c)
        if v == 0 and self.inv_side is not Sided.NONE:
            return self._inverse_order_ok(c)
        return True

    def _inverse_order_ok(self, c: int) -> bool:
        """Cell ``c`` just became 0; reject if it reveals an inverse smaller than the chosen one."""
        n, inv, side = self.n, self.inv, self.inv_side
        a, b = divmod(c, n)
        if side is Sided.RIGHT:
            return not (0 <= b < inv[a])
        if side is Sided.LEFT:
            return not (0 <= a < inv[b])
        if self.T[b * n + a] != 0:
            return True
        return not (b < inv[a] or a < inv[b])

    def _propagate(self) -> bool:
        T, watch, queue, instances = self.T, self.watch, self.queue, self.instances
        wtrail = self.wtrail
        nn = self.nn
        while queue:
            c = queue.pop()
            for e in watch[c]:
                fl, fr, x, y, z = instances[e >> 1]
                l = fl(T, x, y, z)
                r = fr(T, x, y, z)
                if l >= 0:
                    if r >= 0:
                        if l != r:
                            queue.clear()
                            return False
                        continue
                    k = -1 - r
                    if k < nn:
                        if not self._assign(k, l):
                            queue.clear()
                            return False
                    elif e & 1:
                        k -= nn
                        watch[k].append(e)
                        wtrail.append(k)
                elif r >= 0:
                    k = -1 - l
                    if k < nn:
                        if not self._assign(k, r):
                            queue.clear()
                            return False
                    elif not e & 1:
                        k -= nn
                        watch[k].append(e)
                        wtrail.append(k)
                else:
                    k = -1 - (r if e & 1 else l)
                    if k >= nn:
                        k -= nn
                    watch[k].append(e)
                    wtrail.append(k)
        return True

    def _setup(self) -> bool:
        n, T = self.n, self.T
        forced = {}
        if self.spec.neutral in (Sided.LEFT, Sided.TWO):
            forced.update({x: x for x in range(n)})  # row 0
        if self.spec.neutral in (Sided.RIGHT, Sided.TWO):
            forced.update({x * n: x for x in range(n)})  # column 0
        for c, v in sorted(forced.items()):
            T[c] = v
            self.trail.append(c)
        nn = self.nn
        for idx, (fl, fr, x, y, z) in enumerate(self.instances):
            l = fl(T, x, y, z)
            r = fr(T, x, y, z)
            if l >= 0 and r >= 0:
                if l != r:
                    return False
                continue
            if l >= 0 and -1 - r < nn:
                c = -1 - r
                if T[c] < 0 and not self._assign(c, l):
                    return False
                if T[c] != l:
                    return False
                continue
            if r >= 0 and -1 - l < nn:
                c = -1 - l
                if T[c] < 0 and not self._assign(c, r):
                    return False
                if T[c] != r:
                    return False
                continue
            for side, val in ((0, l), (1, r)):
                if val < 0:
                    k = -1 - val
                    if k >= nn:
                        k -= nn
                    self.watch[k].append(2 * idx + side)
        self.wtrail.clear()
        return self._propagate()

    # -- decisions

    def _mark(self):
        return len(self.trail), len(self.wtrail), self.inv_count

    def _undo(self, mark):
        tlen, wlen, icount = mark
        T, trail, watch, wtrail = self.T, self.trail, self.watch, self.wtrail
        while len(trail) > tlen:
            T[trail.pop()] = -1
        while len(wtrail) > wlen:
            watch[wtrail.pop()].pop()
        while self.inv_count > icount:
            self.inv_count -= 1
            self.inv[self.inv_vars[self.inv_count]] = -1
        self.queue.clear()

    def _select(self, depth: int) -> Optional[int]:
        """Next decision variable: inverse choices first, then cells.

        Cells are taken most-constrained-first (fewest admissible values) with
        row-major tie-break.  Returns ``None`` when the table is complete.
        """
        if depth < len(self.inv_vars):
            return self.nn + self.inv_vars[depth]
        T, n = self.T, self.n
        best, best_count = None, n + 1
        for c in range(self.nn):
            if T[c] < 0:
                count = n - (0 if self._zero_allowed(c) else 1)
                if count < best_count:
                    best, best_count = c, count
                    if count < n:
                        break
        return best

    def _zero_allowed(self, c: int) -> bool:
        if self.inv_side is Sided.NONE:
            return True
        n, inv = self.n, self.inv
        a, b = divmod(c, n)
        if self.inv_side is Sided.RIGHT:
            return not b < inv[a]
        if self.inv_side is Sided.LEFT:
            return not a < inv[b]
        if self.T[b * n + a] != 0:
            return True
        return not (b < inv[a] or a < inv[b])

    def _try(self, var: int, v: int) -> bool:
        """Apply ``var := v`` and propagate; False on conflict (caller undoes)."""
        self.nodes += 1
        if self.deadline is not None and not self.nodes & 1023 and time.monotonic() > self.deadline:
            raise BudgetExceeded
        if var < self.nn:
            if not self._assign(var, v):
                return False
            return self._propagate()
        x = var - self.nn
        n, T = self.n, self.T
        side = self.inv_side
        cells = []
        if side in (Sided.RIGHT, Sided.TWO):
            cells.append(x * n + v)
        if side in (Sided.LEFT, Sided.TWO):
            cells.append(v * n + x)
        if any(T[c] > 0 for c in cells):
            return False
        # no smaller inverse may already be fully present
        for w in range(v):
            if side is Sided.RIGHT and T[x * n + w] == 0:
                return False
            if side is Sided.LEFT and T[w * n + x] == 0:
                return False
            if side is Sided.TWO and T[x * n + w] == 0 and T[w * n + x] == 0:
                return False
        self.inv[x] = v
        self.inv_count += 1
        for c in cells:
            if T[c] < 0 and not self._assign(c, 0):
                return False
        return self._propagate()

    def _leaf(self) -> Optional[tuple[int, ...]]:
        """Complete table: final consistency and target check."""
        T, n = self.T, self.n
        if self.inv_side is not Sided.NONE:
            m = Magma.from_flat(T, n)
            ws = mg.inverse_witnesses(m, 0, self.inv_side)
            for x in range(1, n):
                if not ws[x] or min(ws[x]) != self.inv[x]:
                    return None
            if not ws[0]:
                return None
        if self.target is not Target.ANY and not _meets_target(T, n, self.target):
            return None
        return tuple(T)

    def run(self, prefix: Sequence[int] = (), max_depth: Optional[int] = None) -> Iterator[tuple]:
        """Depth-first search below ``prefix`` (a list of decision values).

        Yields ``("model", table)`` for each model meeting the target and, when
        ``max_depth`` is given, ``("prefix", values)`` for each open node at
        that depth (or shallower complete node) instead of descending further.
        """
        if not self.ok:
            return
        depth = 0
        for v in prefix:
            var = self._select(depth)
            if var is None or not self._try(var, v):
                return
            depth += 1
        base = depth
        values = list(prefix)
        frames: list[list] = []  # [var, next value, mark] per decision level below base
        descend = True
        n = self.n
        while True:
            if descend:
                var = self._select(depth)
                if var is None:
                    if max_depth is not None:
                        yield ("prefix", tuple(values))
                    else:
                        leaf = self._leaf()
                        if leaf is not None:
                            yield ("model", leaf)
                elif max_depth is not None and depth >= max_depth:
                    yield ("prefix", tuple(values))
                else:
                    frames.append([var, 0, self._mark()])
            descend = False
            while frames:
                frame = frames[-1]
                self._undo(frame[2])
                depth = base + len(frames) - 1
                del values[depth:]
                v = frame[1]
                if v >= n:
                    frames.pop()
                    continue
                frame[1] = v + 1
                if self._try(frame[0], v):
                    values.append(v)
                    depth += 1
                    descend = True
                    break
            if not descend:
                return


def _meets_target(T: Sequence[int], n: int, target: Target) -> bool:
    m = Magma.from_flat(T, n)
    if target is Target.NON_LOOP:
        return not mg.is_loop(m)
    return not mg.is_group(m)


# ---------------------------------------------------------------- driver


def _engine_for(problem: SearchProblem, n: int, deadline: Optional[float]) -> _Engine:
    return _Engine(n, problem.spec, problem.identities, problem.target, deadline)


def frontier(problem: SearchProblem, n: int, depth: int) -> list[tuple[int, ...]]:
    """Open decision prefixes at ``depth``, in depth-first order."""
    eng = _engine_for(problem, n, None)
    return [p for kind, p in eng.run(max_depth=depth) if kind == "prefix"]


def _run_subtask(args) -> tuple[Optional[tuple[int, ...]], int, int, bool]:
    """Worker entry: search one prefix. Returns (first model, nodes, models, budget_hit)."""
    problem, n, prefix, deadline, stop_at_first = args
    eng = _engine_for(problem, n, deadline)
    first, count = None, 0
    try:
        for kind, table in eng.run(prefix):
            count += 1
            if first is None:
                first = table
            if stop_at_first:
                break
    except BudgetExceeded:
        return first, eng.nodes, count, True
    return first, eng.nodes, count, False


def _verify_witness(problem: SearchProblem, m: Magma) -> StructureWitness:
    sw = mg.satisfies_structure(m, problem.spec)
    if sw is None or sw.neutral != 0:
        raise AssertionError(f"witness violates {problem.spec}:\n{m}")
    for ident in problem.identities:
        if not holds(ident, m, neutral=0):
            raise AssertionError(f"witness violates {label(ident)}:\n{m}")
    rep = mg.analyze(m)
    if problem.target is Target.NON_LOOP and rep.is_loop:
        raise AssertionError(f"witness is a loop:\n{m}")
    if problem.target is Target.NON_GROUP and rep.is_group:
        raise AssertionError(f"witness is a group:\n{m}")
    return sw


def search_order(problem: SearchProblem, n: int, deadline: Optional[float] = None,
                 skip: Iterable[tuple[int, ...]] = (),
                 on_prefix_done: Optional[Callable[[tuple[int, ...], int], None]] = None,
                 ) -> tuple[Status, Optional[Magma], int, float]:
    """Search a single order.  Returns (status, witness, nodes, elapsed).

    With ``skip`` or ``on_prefix_done`` (checkpointing) or several workers the
    tree is split at ``problem.split_depth`` decision levels and the subtrees
    are searched independently, in depth-first order.
    """
    start = time.monotonic()
    skip = set(skip)
    split = problem.workers > 1 or skip or on_prefix_done is not None
    if not split:
        eng = _engine_for(problem, n, deadline)
        try:
            for _, table in eng.run():
                m = Magma.from_flat(table, n)
                _verify_witness(problem, m)
                return Status.WITNESS, m, eng.nodes, time.monotonic() - start
        except BudgetExceeded:
            return Status.BUDGET, None, eng.nodes, time.monotonic() - start
        return Status.EXHAUSTED, None, eng.nodes, time.monotonic() - start

    prefixes = [p for p in frontier(problem, n, problem.split_depth) if p not in skip]
    nodes = 0
    tasks = [(problem, n, p, deadline, True) for p in prefixes]
    found: Optional[tuple[int, ...]] = None
    budget_hit = False
    if problem.workers > 1:
        ctx = multiprocessing.get_context("spawn" if os.name == "nt" else "fork")
        with ctx.Pool(problem.workers) as pool:
            if problem.deterministic:
                results = pool.imap(_run_subtask, tasks)
            else:
                results = pool.imap_unordered(_run_subtask, tasks)
            for prefix, (first, k, _, hit) in zip(prefixes if problem.deterministic else itertools.repeat(None),
                                                   results):
                nodes += k
                budget_hit |= hit
                if first is not None:
                    found = first
                    pool.terminate()
                    break
                if not hit and prefix is not None and on_prefix_done:
                    on_prefix_done(prefix, k)
    else:
        for task in tasks:
            first, k, _, hit = _run_subtask(task)
            nodes += k
            if first is not None:
                found = first
                break
            if hit:
                budget_hit = True
                break
            if on_prefix_done:
                on_prefix_done(task[2], k)
    elapsed = time.monotonic() - start
    if found is not None:
        m = Magma.from_flat(found, n)
        _verify_witness(problem, m)
        return Status.WITNESS, m, nodes, elapsed
    if budget_hit:
        return Status.BUDGET, None, nodes, elapsed
    return Status.EXHAUSTED, None, nodes, elapsed


def search(problem: SearchProblem) -> SearchOutcome:
    """Smallest-order model of the problem meeting the target, or exhaustion."""
    start = time.monotonic()
    deadline = None if problem.budget is None else start + problem.budget
    lo, hi = problem.orders
    out = SearchOutcome(Status.EXHAUSTED)
    for n in range(lo, hi + 1):
        status, m, nodes, elapsed = search_order(problem, n, deadline)
        out.nodes_explored += nodes
        out.per_order.append(OrderStats(n, status, nodes, int(m is not None), elapsed))
        log.debug("order %d: %s after %d nodes (%.2fs)", n, status.value, nodes, elapsed)
        if status is not Status.EXHAUSTED:
            out.status = status
            if m is not None:
                out.witness = m
                out.structure = mg.satisfies_structure(m, problem.spec)
            break
    out.elapsed = time.monotonic() - start
    return out


def enumerate_models(problem: SearchProblem, up_to_iso: bool = False) -> Iterator[Magma]:
    """Every model at each order in range, labeled with the neutral at 0.

    With ``up_to_iso`` one canonical representative per isomorphism class is
    yielded instead, in order of first discovery.
    """
    lo, hi = problem.orders
    if up_to_iso and hi > mg.CANONICAL_MAX_ORDER:
        raise ConfigurationError(f"isomorph rejection supports orders up to {mg.CANONICAL_MAX_ORDER}")
    deadline = None if problem.budget is None else time.monotonic() + problem.budget
    for n in range(lo, hi + 1):
        seen: set[Magma] = set()
        eng = _engine_for(problem, n, deadline)
        for _, table in eng.run():
            m = Magma.from_flat(table, n)
            if up_to_iso:
                m = mg.canonical_form(m)
                if m in seen:
                    continue
                seen.add(m)
            yield m


@dataclass
class AbsenceReport:
    identities: tuple[str, ...]
    spec: StructureSpec
    max_order: int
    status: Status
    per_order: list[OrderStats]
    witness: Optional[Magma] = None

    @property
    def exhausted_through(self) -> int:
        done = 0
        for s in self.per_order:
            if s.status is not Status.EXHAUSTED:
                break
            done = s.order
        return done


def verify_absence(identities: Sequence[Identity], spec: StructureSpec, max_order: int,
                   budget: Optional[float] = None, target: Target = Target.NON_LOOP,
                   workers: int = 1) -> AbsenceReport:
    """Look for a non-loop model through ``max_order``; exhaustion supports the loop claim."""
    problem = SearchProblem((1, max_order), spec, tuple(identities), target, budget=budget, workers=workers)
    out = search(problem)
    return AbsenceReport(tuple(label(i) for i in identities), spec, max_order, out.status, out.per_order,
                         out.witness)


def parse_orders(text: Union[str, int]) -> tuple[int, int]:
    """``"5"`` or ``"1..5"``."""
    if isinstance(text, int):
        return text, text
    s = text.strip()
    if ".." in s:
        a, b = s.split("..", 1)
        return int(a), int(b)
    return int(s), int(s)
