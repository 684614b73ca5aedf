"""Organisms as lower bounds on Omega, mutations, and the three classical scenarios.

An organism's phenotype is a dyadic value ``v`` that must stay strictly
below Omega.  A mutation of size ``k`` proposes ``v + 2**-k``; the oracle
keeps it only if the result is still below Omega.  Evolution time ``T`` is
the number of proposals made until the first ``N`` digits of ``v`` agree
with Omega's.

Cumulative runs have two interchangeable engines:

``simulate``
    Flip a fair coin, decode one integer codeword per proposal, ask the
    oracle.  A proposal whose flips do not spell a valid mutation is a
    wasted attempt.

``fast_forward``
    The set of acceptable mutations is always an up-set ``[k0, kmax]``
    (smaller steps are safer), so between acceptances the process is a run
    of i.i.d. failures.  The waiting time is drawn from the geometric law and
    the accepted mutation from the conditional distribution, which is exact
    in distribution and touches the oracle only O(accepted) times.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from metabio.dyadic import SparseDyadic
from metabio.oracle import OmegaOracle, OracleUnknown, Verdict
from metabio.prefix_code import FairCoin, draw_integer, integer_code_length

ORGANISM_HEADER = "10110010"
HEADER_BITS = len(ORGANISM_HEADER)

EXHAUSTIVE_MAX_N = 22
SIMULATE_MAX_N = 512
FAST_FORWARD_MAX_N = 4096
KMAX_MARGIN = 64

_RNG_TAG = 0x6D7574  # separates the sampler stream from other uses of a seed


class GuardError(ValueError):
    """A request exceeded a documented size guard."""


class SamplerCapExceeded(RuntimeError):
    pass


class Scenario(enum.Enum):
    EXHAUSTIVE = "exhaustive"
    INTELLIGENT_DESIGN = "id"
    CUMULATIVE = "cumulative"


class Mode(enum.Enum):
    SIMULATE = "simulate"
    FAST_FORWARD = "fast_forward"


MODELS = ("classical", "q-sep", "q-ent")


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: Scenario
    N: int
    mode: Mode | None = None
    model: str = "classical"
    kmax: int | None = None

    def __post_init__(self):
        if self.mode is None:
            default = Mode.FAST_FORWARD if self.scenario is Scenario.CUMULATIVE else Mode.SIMULATE
            object.__setattr__(self, "mode", default)
        elif self.mode is Mode.FAST_FORWARD and self.scenario is not Scenario.CUMULATIVE:
            raise ValueError("fast_forward mode applies only to cumulative runs")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")


@dataclass(frozen=True)
class EvolutionState:
    value: SparseDyadic = field(default_factory=SparseDyadic.zero)
    attempts: int = 0
    accepted: int = 0
    last_k: int = 0


@dataclass(frozen=True)
class Organism:
    header: str
    payload: str

    def encode(self) -> str:
        return self.header + "1" * len(self.payload) + "0" + self.payload

    @classmethod
    def decode(cls, bits: str, header_bits: int = HEADER_BITS) -> "Organism":
        header, rest = bits[:header_bits], bits[header_bits:]
        if len(header) != header_bits:
            raise ValueError("organism shorter than its header")
        n = rest.find("0")
        if n < 0:
            raise ValueError("unterminated length prefix")
        payload = rest[n + 1:]
        if len(payload) != n:
            raise ValueError(f"length prefix says {n} bits, found {len(payload)}")
        return cls(header, payload)


def mutate_point(x: str, n0: int) -> str:
    """Flip bit ``n0`` (1-based)."""
    if not 1 <= n0 <= len(x):
        raise IndexError(f"position {n0} outside 1..{len(x)}")
    i = n0 - 1
    return x[:i] + ("1" if x[i] == "0" else "0") + x[i + 1:]


def mutate_bitwise(x: str) -> str:
    return x.translate(str.maketrans("01", "10"))


def organism_encode(state: EvolutionState, k: int) -> Organism:
    return Organism(ORGANISM_HEADER, state.value.prefix_bits(k))


def organism_decode(org: Organism | str) -> str:
    if isinstance(org, str):
        org = Organism.decode(org)
    return org.payload


def below(oracle: OmegaOracle, v: SparseDyadic) -> bool:
    verdict = oracle.query(v)
    if verdict is Verdict.UNKNOWN:
        raise OracleUnknown(f"oracle cannot decide {v}")
    return verdict is Verdict.BELOW


def attempt_mutation(state: EvolutionState, k: int, oracle: OmegaOracle,
                     exponent: int | None = None) -> tuple[EvolutionState, bool]:
    """Propose ``value + 2**-exponent`` (``exponent`` defaults to ``k``)."""
    if k < 1:
        raise ValueError("mutation size k must be >= 1")
    e = k if exponent is None else exponent
    proposal = state.value.add_power(e)
    if below(oracle, proposal):
        return EvolutionState(proposal, state.attempts + 1, state.accepted + 1, k), True
    return replace(state, attempts=state.attempts + 1, last_k=k), False


def sampler_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), _RNG_TAG]))


# -- samplers ----------------------------------------------------------------


def _identity(k: int) -> int:
    return k


@dataclass(frozen=True)
class MutationSampler:
    """Mutations named by integers drawn from the self-delimiting integer code.

    ``name(k)`` is the integer whose codeword requests mutation ``k``.  A
    decoding trial that yields anything else (a non-codeword, 0, an integer
    out of range, or one that names no mutation) is a wasted attempt.
    """

    kmax: int
    name: Callable[[int], int] = _identity
    resolve_name: Callable[[int], int | None] | None = None

    def prob(self, k: int) -> float:
        return 2.0 ** -integer_code_length(self.name(k))

    def probs(self) -> np.ndarray:
        """``p[k]`` for ``k = 0..kmax`` with ``p[0] = 0``."""
        p = np.zeros(self.kmax + 1)
        for k in range(1, self.kmax + 1):
            p[k] = self.prob(k)
        return p

    def resolve(self, m: int | None) -> int | None:
        if m is None:
            return None
        k = m if self.resolve_name is None else self.resolve_name(m)
        if k is None or not 1 <= k <= self.kmax:
            return None
        return k

    def draw(self, coin) -> int | None:
        return self.resolve(draw_integer(coin, max_value=self.name(self.kmax)))


def classical_sampler(N: int, kmax: int | None = None) -> MutationSampler:
    return MutationSampler(N + KMAX_MARGIN if kmax is None else kmax)


# -- scenario runners --------------------------------------------------------


def run_exhaustive(N: int, oracle: OmegaOracle) -> int:
    """Test payloads in length-then-lexicographic order from the blank word.

    Every candidate counts as one attempt; a candidate of the wrong length
    can never match, so whole shorter blocks are charged without a loop.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > EXHAUSTIVE_MAX_N:
        raise GuardError(f"exhaustive search limited to N <= {EXHAUSTIVE_MAX_N}")
    target = int(oracle.true_bits(N), 2)
    T = (1 << N) - 1  # lengths 0..N-1
    for candidate in range(1 << N):
        T += 1
        if candidate == target:
            return T
    raise AssertionError("target lies inside the length-N block")


@dataclass
class DesignTrace:
    """States after each of the steps ``k = 1..N``.

    ``digits[k-1]`` is Omega's digit at the step's exponent, the digit that
    step settles.
    """

    states: list[EvolutionState]
    digits: list[int]

    @property
    def T(self) -> int:
        return self.states[-1].attempts if self.states else 0

    def T_at(self, n: int) -> int:
        """T for a run stopped after ``n`` steps (the runs are prefix-consistent)."""
        return self.states[n - 1].attempts


def run_intelligent_design(N: int, oracle: OmegaOracle,
                           step: Callable[[int], int] = _identity) -> DesignTrace:
    if N < 1:
        raise ValueError("N must be >= 1")
    state = EvolutionState()
    states, digits = [], []
    bit = getattr(oracle, "bit", None)
    for k in range(1, N + 1):
        e = step(k)
        state, _ = attempt_mutation(state, k, oracle, exponent=e)
        states.append(state)
        digits.append(bit(e) if bit is not None else int(state.value.bit_at(e)))
    return DesignTrace(states, digits)


@dataclass(frozen=True)
class CumulativeResult:
    T: int
    accepted: int
    value: SparseDyadic


def run_cumulative(N: int, oracle: OmegaOracle, seed: int = 0,
                   mode: Mode | str = Mode.FAST_FORWARD,
                   sampler: MutationSampler | None = None,
                   rng: np.random.Generator | None = None,
                   max_attempts: int | None = None) -> CumulativeResult:
    """Random mutations until the first ``N`` digits of the value match Omega's."""
    mode = Mode(mode)
    if N < 1:
        raise ValueError("N must be >= 1")
    cap = SIMULATE_MAX_N if mode is Mode.SIMULATE else FAST_FORWARD_MAX_N
    if N > cap:
        raise GuardError(f"{mode.value} cumulative runs limited to N <= {cap}")
    sampler = sampler or classical_sampler(N)
    rng = rng or sampler_rng(seed)
    target = SparseDyadic.from_bits(oracle.true_bits(N))
    if mode is Mode.SIMULATE:
        return simulate_engine(oracle, sampler, _identity, rng, max_attempts,
                         done=lambda v, covered: v >= target)
    return fast_forward_prefix(oracle, sampler, _identity, target, rng)


def simulate_engine(oracle, sampler, step, rng, max_attempts, done) -> CumulativeResult:
    coin = FairCoin(rng)
    v = SparseDyadic.zero()
    T = accepted = 0
    covered: set[int] = set()
    finished = done(v, covered)
    while not finished:
        if max_attempts is not None and T >= max_attempts:
            raise SamplerCapExceeded(f"no success within {max_attempts} attempts")
        T += 1
        k = sampler.draw(coin)
        if k is None:
            continue
        proposal = v.add_power(step(k))
        if below(oracle, proposal):
            v = proposal
            accepted += 1
            covered.add(k)
            # the state only moves on acceptance, so that is the only time to recheck
            finished = done(v, covered)
    return CumulativeResult(T, accepted, v)


def first_acceptable(oracle, v, step, k0, kmax) -> int:
    """Smallest ``k >= k0`` with ``v + 2**-step(k)`` below Omega, or ``kmax + 1``."""
    while k0 <= kmax and not below(oracle, v.add_power(step(k0))):
        k0 += 1
    return k0


def fast_forward_prefix(oracle: OmegaOracle, sampler: MutationSampler,
                        step: Callable[[int], int], target: SparseDyadic,
                        rng: np.random.Generator) -> CumulativeResult:
    """Geometric-wait engine that stops once the value reaches ``target``.

    The stop must be observed at the exact attempt, and the acceptable set
    only shrinks after an acceptance, so each accepted mutation is drawn
    individually.
    """
    p = sampler.probs()
    tail = np.cumsum(p[::-1])[::-1]  # tail[k] = sum p[k:]
    kmax = sampler.kmax
    v = SparseDyadic.zero()
    T = accepted = 0
    k0 = 1
    while v < target:
        k0 = first_acceptable(oracle, v, step, k0, kmax)
        if k0 > kmax:
            raise OracleUnknown("no acceptable mutation left below the target")
        p_acc = tail[k0]
        T += int(rng.geometric(p_acc))
        cond = p[k0:] / p_acc
        k = k0 + int(np.searchsorted(np.cumsum(cond), rng.random() * cond.sum(), side="right"))
        k = min(k, kmax)
        v = v.add_power(step(k))
        accepted += 1
    return CumulativeResult(T, accepted, v)


def fast_forward_coverage(oracle: OmegaOracle, sampler: MutationSampler,
                          step: Callable[[int], int], needed: set[int],
                          rng: np.random.Generator) -> CumulativeResult:
    """Geometric-wait engine that stops once every ``k`` in ``needed`` is settled.

    A needed mutation is settled once it has been accepted, or once the
    oracle blocks it for good (the value is too close to Omega for its step).
    Between two hits on the unsettled set every acceptance adds at most
    ``2**-step(k0)``, so a run of ``j`` acceptances is safe in any order as long
    as ``value + j * 2**-step(k0)`` is still below Omega.  Such runs are drawn
    as one multinomial batch.
    """
    p = sampler.probs()
    kmax = sampler.kmax
    tail = np.cumsum(p[::-1])[::-1]
    unsettled = {k for k in needed if 1 <= k <= kmax}
    v = SparseDyadic.zero()
    T = accepted = 0
    k0 = 1
    while True:
        k0 = first_acceptable(oracle, v, step, k0, kmax)
        unsettled = {k for k in unsettled if k >= k0}
        if not unsettled:
            break
        p_acc = tail[k0]
        u_keys = sorted(unsettled)
        p_u = p[u_keys]
        r = min(1.0, float(p_u.sum()) / p_acc)
        g = int(rng.geometric(r))  # acceptances up to and including the next hit
        e0 = step(k0)

        def safe(j: int) -> bool:
            return below(oracle, v.add_multiple(j, e0))

        if safe(g):
            n_other, hit = g - 1, True
        else:
            lo, hi = 1, g - 1  # safe(1) holds because k0 is acceptable
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if safe(mid):
                    lo = mid
                else:
                    hi = mid - 1
            n_other, hit = lo, False
        n_acc = n_other + hit
        T += n_acc + int(rng.negative_binomial(n_acc, p_acc))
        if n_other:
            other = [k for k in range(k0, kmax + 1) if k not in unsettled]
            weights = p[other]
            counts = rng.multinomial(n_other, weights / weights.sum())
            for k, c in zip(other, counts):
                if c:
                    v = v.add_multiple(int(c), step(k))
            accepted += n_other
        if hit:
            k = u_keys[int(rng.choice(len(u_keys), p=p_u / p_u.sum()))]
            v = v.add_power(step(k))
            unsettled.discard(k)
            accepted += 1
    return CumulativeResult(T, accepted, v)
