"""Quantum organisms: truncated quantum Omegas, separable and entangled mutations.

A separable organism on ``k`` qubits needs about ``k`` bits to describe, an
entangled one about ``k * 2**k``, so the natural mutation step is
``2**-k`` in the first regime and ``2**-(k * 2**k)`` in the second.  A quantum
mutation is requested by drawing the integer ``2**k`` from the
self-delimiting integer code; its probability is therefore
``2**-|encode_integer(2**k)|``, close to ``1 / (2**k * k**2)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from metabio import evolution
from metabio.dyadic import SparseDyadic
from metabio.evolution import (CumulativeResult, DesignTrace, EvolutionState, GuardError, Mode,
                               MutationSampler, attempt_mutation, below, sampler_rng)
from metabio.oracle import OmegaOracle
from metabio.prefix_code import integer_code_length

ENTANGLED_MAX_N = 24
Q_EXHAUSTIVE_SIM_MAX_N = 4
Q_EXHAUSTIVE_ANALYTIC_MAX_N = 16
Q_SIMULATE_MAX_N = 14
Q_FAST_FORWARD_MAX_N = 22
Q_KMAX = 64


class QuantumRegime(enum.Enum):
    SEPARABLE = "separable"
    ENTANGLED = "entangled"

    def step_exponent(self, k: int) -> int:
        return k if self is QuantumRegime.SEPARABLE else k << k

    def complexity_model(self, n: int) -> int:
        return n if self is QuantumRegime.SEPARABLE else n << n


@dataclass(frozen=True)
class QOmegaTruncation:
    regime: QuantumRegime
    N: int
    value: SparseDyadic


def q_omega_truncation(regime: QuantumRegime, N: int) -> QOmegaTruncation:
    """``sum 2**-complexity_model(n)`` over ``1 <= n < N``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if regime is QuantumRegime.ENTANGLED and N > ENTANGLED_MAX_N:
        raise GuardError(f"entangled truncations limited to N <= {ENTANGLED_MAX_N}")
    value = SparseDyadic(0, [regime.complexity_model(n) for n in range(1, N)])
    return QOmegaTruncation(regime, N, value)


def q_mutation_complexity(k: int) -> int:
    """Length of the self-delimiting code for ``2**k``, i.e. ``k + 2*ceil(log2(k+2)) + 2``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return integer_code_length(1 << k)


def q_mutation_probability(k: int) -> SparseDyadic:
    return SparseDyadic.power(q_mutation_complexity(k))


def closed_form_estimate(k: int) -> float:
    """The textbook estimate ``1 / (2**k * k**2)`` for comparison tables."""
    return 1.0 / (2.0 ** k * k * k)


def _power_of_two_exponent(m: int) -> int | None:
    if m >= 2 and m & (m - 1) == 0:
        return m.bit_length() - 1
    return None


def _name(k: int) -> int:
    return 1 << k


def quantum_sampler(kmax: int = Q_KMAX) -> MutationSampler:
    return MutationSampler(kmax, name=_name, resolve_name=_power_of_two_exponent)


def attempt_q_mutation(state: EvolutionState, k: int, regime: QuantumRegime,
                       oracle: OmegaOracle) -> tuple[EvolutionState, bool]:
    return attempt_mutation(state, k, oracle, exponent=regime.step_exponent(k))


@dataclass(frozen=True)
class QExhaustiveResult:
    T: int
    analytic: bool
    M: int


def run_q_exhaustive(N: int, oracle: OmegaOracle | None = None,
                     analytic: bool | None = None) -> QExhaustiveResult:
    """Search over ``M = 2**N``-bit organisms.

    Simulation enumerates candidates exactly like the classical search with
    window ``M``.  Analytic mode returns the exact expectation
    ``1.5 * 2**M`` of that enumeration and says so; by default it is used
    only where simulation is infeasible (N >= 5).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    M = 1 << N
    if analytic is None:
        analytic = N > Q_EXHAUSTIVE_SIM_MAX_N
    if analytic:
        if N > Q_EXHAUSTIVE_ANALYTIC_MAX_N:
            raise GuardError(f"analytic count limited to N <= {Q_EXHAUSTIVE_ANALYTIC_MAX_N}")
        return QExhaustiveResult(3 << (M - 1), True, M)
    if N > Q_EXHAUSTIVE_SIM_MAX_N:
        raise GuardError(f"simulated quantum exhaustive search limited to N <= {Q_EXHAUSTIVE_SIM_MAX_N}")
    if oracle is None:
        raise ValueError("simulation needs an oracle")
    return QExhaustiveResult(evolution.run_exhaustive(M, oracle), False, M)


def run_q_intelligent_design(N: int, regime: QuantumRegime, oracle: OmegaOracle) -> DesignTrace:
    if regime is QuantumRegime.ENTANGLED and N > ENTANGLED_MAX_N:
        raise GuardError(f"entangled runs limited to N <= {ENTANGLED_MAX_N}")
    return evolution.run_intelligent_design(N, oracle, step=regime.step_exponent)


def run_q_cumulative(N: int, regime: QuantumRegime, oracle: OmegaOracle, seed: int = 0,
                     mode: Mode | str = Mode.FAST_FORWARD,
                     max_attempts: int | None = None) -> CumulativeResult:
    """Random quantum mutations until the first ``N`` of them are settled.

    Separable runs are the classical cumulative runs verbatim.  Entangled
    runs stop once every ``k <= N`` has either been accepted or been blocked
    by the oracle, because the later mutations' steps lie far below digit
    ``N`` and no prefix criterion can see them.
    """
    mode = Mode(mode)
    if N < 1:
        raise ValueError("N must be >= 1")
    cap = Q_SIMULATE_MAX_N if mode is Mode.SIMULATE else Q_FAST_FORWARD_MAX_N
    if N > cap:
        raise GuardError(f"quantum {mode.value} runs limited to N <= {cap}")
    if regime is QuantumRegime.SEPARABLE:
        return evolution.run_cumulative(N, oracle, seed, mode, max_attempts=max_attempts)
    sampler = quantum_sampler(max(Q_KMAX, N))
    step = regime.step_exponent
    rng = sampler_rng(seed)
    needed = set(range(1, N + 1))
    if mode is Mode.FAST_FORWARD:
        return evolution.fast_forward_coverage(oracle, sampler, step, needed, rng)

    blocked: set[int] = set()

    def done(v: SparseDyadic, covered: set[int]) -> bool:
        for k in sorted(needed - covered - blocked):
            if below(oracle, v.add_power(step(k))):
                return False
            blocked.add(k)
        return True

    return evolution.simulate_engine(oracle, sampler, step, rng, max_attempts, done)


def complexity_table(kmax: int = 64) -> list[tuple[int, int, float, float]]:
    """Rows ``(k, complexity, k + 2*log2(k), probability / closed form)``."""
    rows = []
    for k in range(1, kmax + 1):
        c = q_mutation_complexity(k)
        rows.append((k, c, k + 2 * math.log2(k), 2.0 ** -c / closed_form_estimate(k)))
    return rows
