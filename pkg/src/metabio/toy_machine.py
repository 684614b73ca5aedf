"""A small self-delimiting register machine and its halting-domain enumerator.

Programs are read three bits at a time, only when the instruction pointer
first lands on an unread position, so every halting program is exactly the
set of bits consumed before HALT.  That makes the domain prefix-free.

Opcodes (registers A, B start at 0)::

    000 HALT     output A
    001 INC A
    010 INC B
    011 DBL A    A <- 2A
    100 ADD      A <- A + B
    101 MOVE     B <- A
    110 LOOP j   j is the next 3 bits; if B > 0: B -= 1, jump j back
    111 SWAP     A <-> B

Everything computed here is a lower bound under a step budget: the omega
value, Busy Beaver numbers and universal probabilities, and an upper bound
for complexities.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NamedTuple

from metabio.dyadic import SparseDyadic

HALT, INC_A, INC_B, DBL, ADD, MOVE, LOOP, SWAP = range(8)
OPCODES = ("HALT", "INC_A", "INC_B", "DBL_A", "ADD", "MOVE", "LOOP", "SWAP")

_CYCLE_VALUE_BITS = 256
_CYCLE_MEMORY = 50_000


class Status(enum.Enum):
    HALTED = "halted"
    BUDGET_EXCEEDED = "budget_exceeded"
    NEEDS_MORE_BITS = "needs_more_bits"


@dataclass(frozen=True)
class RunResult:
    status: Status
    output: int | None
    bits_consumed: int
    steps_used: int


class Machine:
    """Resumable machine state.  ``feed`` bits, then ``resume`` until it stops."""

    __slots__ = ("a", "b", "ip", "code", "steps", "bits", "pending", "budget", "_seen", "_last",
                 "diverged")

    def __init__(self, step_budget: int):
        if step_budget < 1:
            raise ValueError("step budget must be >= 1")
        self.a = 0
        self.b = 0
        self.ip = 0
        self.code: tuple[tuple[int, int], ...] = ()
        self.steps = 0
        self.bits = ""
        self.pending = ""
        self.budget = step_budget
        self._seen: set | None = None
        self._last: dict | None = None
        # set when the machine is proven to loop forever without reading another bit
        self.diverged = False

    def clone(self) -> "Machine":
        m = Machine.__new__(Machine)
        m.a, m.b, m.ip, m.code = self.a, self.b, self.ip, self.code
        m.steps, m.bits, m.pending, m.budget = self.steps, self.bits, self.pending, self.budget
        m._seen = None if self._seen is None else set(self._seen)
        m._last = None if self._last is None else dict(self._last)
        m.diverged = self.diverged
        return m

    def feed(self, bit: str) -> None:
        self.bits += bit
        self.pending += bit

    def resume(self) -> Status:
        a, b, ip, code, steps, budget = self.a, self.b, self.ip, self.code, self.steps, self.budget
        status = None
        while True:
            if steps >= budget:
                status = Status.BUDGET_EXCEEDED
                break
            if ip == len(code):
                p = self.pending
                if len(p) < 3:
                    status = Status.NEEDS_MORE_BITS
                    break
                op = int(p[:3], 2)
                if op == LOOP:
                    if len(p) < 6:
                        status = Status.NEEDS_MORE_BITS
                        break
                    code = code + ((op, int(p[3:6], 2)),)
                    self.pending = p[6:]
                else:
                    code = code + ((op, 0),)
                    self.pending = p[3:]
                self._seen = None
                self._last = None
            op, arg = code[ip]
            if op == HALT:
                steps += 1
                status = Status.HALTED
                break
            if op == LOOP:
                if arg == 0:
                    # self-loop: drains B, then falls through
                    need = b + 1
                    if steps + need > budget:
                        steps = budget
                        status = Status.BUDGET_EXCEEDED
                        break
                    steps += need
                    b = 0
                    ip += 1
                    continue
                steps += 1
                if b > 0:
                    target = max(0, ip - arg)
                    if _straight(code, target, ip):
                        # Body ops are monotone in (A, B); a non-decreasing state at
                        # the loop test therefore never reaches B == 0.
                        last = self._last
                        if last is None:
                            last = self._last = {}
                        prev = last.get(ip)
                        if prev is not None and a >= prev[0] and b >= prev[1]:
                            self.diverged = True
                            steps = budget
                            status = Status.BUDGET_EXCEEDED
                            break
                        last[ip] = (a, b)
                    b -= 1
                    if a.bit_length() < _CYCLE_VALUE_BITS and b.bit_length() < _CYCLE_VALUE_BITS:
                        key = (ip, a, b)
                        seen = self._seen
                        if seen is None:
                            seen = self._seen = set()
                        if key in seen:
                            # same state at the same backward jump with no new reads: runs forever
                            self.diverged = True
                            steps = budget
                            status = Status.BUDGET_EXCEEDED
                            break
                        if len(seen) < _CYCLE_MEMORY:
                            seen.add(key)
                    ip = target
                else:
                    ip += 1
                continue
            steps += 1
            if op == INC_A:
                a += 1
            elif op == INC_B:
                b += 1
            elif op == DBL:
                a <<= 1
            elif op == ADD:
                a += b
            elif op == MOVE:
                b = a
            else:  # SWAP
                a, b = b, a
            ip += 1
        self.a, self.b, self.ip, self.code, self.steps = a, b, ip, code, steps
        return status


def _straight(code, start: int, stop: int) -> bool:
    return all(op != LOOP and op != HALT for op, _ in code[start:stop])


def run(bits: Iterable, step_budget: int) -> RunResult:
    """Run on a bit source, pulling bits only when an instruction must be read."""
    m = Machine(step_budget)
    source = iter(bits)
    while True:
        status = m.resume()
        if status is Status.NEEDS_MORE_BITS:
            try:
                bit = next(source)
            except StopIteration:
                return RunResult(status, None, len(m.bits), m.steps)
            m.feed("1" if bit in (1, "1", True) else "0")
            continue
        out = m.a if status is Status.HALTED else None
        return RunResult(status, out, len(m.bits), m.steps)


class HaltingProgram(NamedTuple):
    bits: str
    output: int
    steps: int


@dataclass
class Domain:
    """Halting programs of length < ``max_len`` found under ``step_budget``.

    ``unresolved`` maps a prefix length to the number of subtrees of that
    length left undecided: programs still running at the budget, and
    prefixes that would need to grow to ``max_len`` or beyond.  Prefixes
    proven to loop forever without reading again are counted in
    ``diverged`` and carry no halting mass.
    """

    max_len: int
    step_budget: int
    programs: list[HaltingProgram]
    unresolved: dict[int, int] = field(default_factory=dict)
    censored: int = 0
    frontier: int = 0
    diverged: int = 0

    def outputs(self) -> list[int]:
        return [p.output for p in self.programs]

    def omega(self) -> SparseDyadic:
        return _mass(len(p.bits) for p in self.programs)

    def tail(self) -> SparseDyadic:
        total = SparseDyadic.zero()
        for length, count in sorted(self.unresolved.items()):
            total = total.add_multiple(count, length)
        return total


def _mass(lengths: Iterable[int]) -> SparseDyadic:
    counts: dict[int, int] = {}
    for n in lengths:
        counts[n] = counts.get(n, 0) + 1
    total = SparseDyadic.zero()
    for n, c in sorted(counts.items()):
        total = total.add_multiple(c, n)
    return total


def _explore(root: Machine, max_len: int):
    programs: list[HaltingProgram] = []
    unresolved: dict[int, int] = {}
    censored = frontier = diverged = 0
    stack = [root]
    while stack:
        m = stack.pop()
        status = m.resume()
        n = len(m.bits)
        if status is Status.HALTED:
            programs.append(HaltingProgram(m.bits, m.a, m.steps))
        elif status is Status.BUDGET_EXCEEDED and m.diverged:
            diverged += 1
        elif status is Status.BUDGET_EXCEEDED:
            censored += 1
            unresolved[n] = unresolved.get(n, 0) + 1
        elif n + 1 >= max_len:
            frontier += 1
            unresolved[n] = unresolved.get(n, 0) + 1
        else:
            one = m.clone()
            one.feed("1")
            m.feed("0")
            stack.append(one)
            stack.append(m)
    return programs, unresolved, censored, frontier, diverged


def _explore_prefix(args):
    prefix, max_len, step_budget = args
    m = Machine(step_budget)
    for bit in prefix:
        m.feed(bit)
    return _explore(m, max_len)


def enumerate_domain(max_len: int, step_budget: int, jobs: int = 1) -> Domain:
    """Exhaustively explore the bit-request tree for programs shorter than ``max_len``."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if jobs <= 1 or max_len <= 4:
        parts = [_explore(Machine(step_budget), max_len)]
    else:
        tasks = [(format(i, "03b"), max_len, step_budget) for i in range(8)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_explore_prefix, tasks))
    programs: list[HaltingProgram] = []
    unresolved: dict[int, int] = {}
    censored = frontier = diverged = 0
    for progs, unres, c, f, d in parts:
        programs.extend(progs)
        for n, k in unres.items():
            unresolved[n] = unresolved.get(n, 0) + k
        censored += c
        frontier += f
        diverged += d
    programs.sort(key=lambda p: (len(p.bits), p.bits))
    return Domain(max_len, step_budget, programs, dict(sorted(unresolved.items())),
                  censored, frontier, diverged)


@lru_cache(maxsize=32)
def _domain(max_len: int, step_budget: int) -> Domain:
    return enumerate_domain(max_len, step_budget)


def omega_lower_bound(max_len: int, step_budget: int) -> SparseDyadic:
    return _domain(max_len, step_budget).omega()


def busy_beaver(n: int, step_budget: int) -> int:
    """Largest output of a program of length <= n that halts within the budget."""
    outs = _domain(n + 1, step_budget).outputs()
    if not outs:
        raise ValueError(f"no program of length <= {n} halts")
    return max(outs)


def universal_probability(target: int, max_len: int, step_budget: int) -> SparseDyadic:
    progs = _domain(max_len, step_budget).programs
    return _mass(len(p.bits) for p in progs if p.output == target)


def complexity_upper(target: int, max_len: int, step_budget: int) -> int | None:
    lengths = [len(p.bits) for p in _domain(max_len, step_budget).programs if p.output == target]
    return min(lengths) if lengths else None


def format_domain(domain: Domain) -> str:
    """Golden-file text: ``bits<TAB>output<TAB>steps`` per program."""
    return "".join(f"{p.bits}\t{p.output}\t{p.steps}\n" for p in domain.programs)


@dataclass(frozen=True)
class CodingTheoremRow:
    target: int
    complexity: int
    minus_log2_prob: float
    gap: float
    within_slack: bool


def coding_theorem_report(max_len: int, step_budget: int, slack: float = 8.0) -> list[CodingTheoremRow]:
    """Compare the shortest program for each output with ``-log2`` of its probability."""
    dom = _domain(max_len, step_budget)
    best: dict[int, int] = {}
    for p in dom.programs:
        best[p.output] = min(best.get(p.output, len(p.bits)), len(p.bits))
    rows = []
    for t in sorted(best):
        prob = universal_probability(t, max_len, step_budget)
        mlp = -math.log2(prob.to_fraction())
        gap = best[t] - mlp
        rows.append(CodingTheoremRow(t, best[t], mlp, gap, abs(gap) <= slack))
    return rows
