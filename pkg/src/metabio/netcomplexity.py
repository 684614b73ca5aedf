"""Network complexity of small quantum states.

A state's network complexity is bounded by the length of the shortest
self-delimiting description of a circuit over {H, T, CNOT} that prepares it
from ``|0...0>`` to fidelity ``1 - eps``.  Circuits are found by exhaustive
search, so everything here is limited to at most four qubits.

Qubit 0 is the most significant bit of a basis-state index, so
``amplitudes[0b10]`` on two qubits is ``|10>`` (qubit 0 set).
"""

from __future__ import annotations

import enum
import heapq
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from metabio.prefix_code import ceil_log2, decode_efficient, encode_efficient, efficient_length

MAX_QUBITS = 4
DEFAULT_EPSILON = 0.01
NORM_TOL = 1e-12
RANK_TOL = 1e-9
_KEY_DECIMALS = 9

_SQ = 1 / np.sqrt(2)
H_MATRIX = np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex)
T_MATRIX = np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex)

OPCODE = {"H": "00", "T": "01", "CNOT": "10"}
_OPNAME = {v: k for k, v in OPCODE.items()}


class Gate(NamedTuple):
    name: str
    target: int
    control: int | None = None


@dataclass(frozen=True)
class Circuit:
    ops: tuple[Gate, ...] = ()

    def __len__(self):
        return len(self.ops)

    def validate(self, n: int) -> None:
        for g in self.ops:
            if g.name not in OPCODE:
                raise ValueError(f"unknown gate {g.name}")
            if not 0 <= g.target < n:
                raise ValueError(f"target {g.target} outside 0..{n - 1}")
            if g.name == "CNOT":
                if g.control is None or not 0 <= g.control < n or g.control == g.target:
                    raise ValueError(f"bad CNOT control {g.control}")
            elif g.control is not None:
                raise ValueError(f"{g.name} takes no control")


@dataclass(frozen=True)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"n must be in 1..{MAX_QUBITS}")
        if amps.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes")
        if abs(np.vdot(amps, amps).real - 1) > NORM_TOL * 1e3:
            raise ValueError("state is not normalized")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, n: int, index: int = 0) -> "StateVector":
        amps = np.zeros(1 << n, dtype=complex)
        amps[index] = 1
        return cls(n, amps)

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex]) -> "StateVector":
        a = np.asarray(amps, dtype=complex)
        n = int(np.log2(len(a)))
        return cls(n, a / np.linalg.norm(a))


@dataclass(frozen=True)
class SynthesisConfig:
    n: int
    epsilon: float = DEFAULT_EPSILON
    max_gates: int | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"n must be in 1..{MAX_QUBITS}")
        if self.max_gates is None:
            object.__setattr__(self, "max_gates", default_max_gates(self.n))


def default_max_gates(n: int) -> int:
    return {1: 10, 2: 10, 3: 8, 4: 6}[n]


# -- simulation ---------------------------------------------------------------


def _apply_1q(batch: np.ndarray, mat: np.ndarray, q: int, n: int) -> np.ndarray:
    m = batch.shape[0]
    t = batch.reshape(m, 1 << q, 2, 1 << (n - q - 1))
    return np.einsum("ij,axjy->axiy", mat, t).reshape(m, 1 << n)


def _apply_cnot(batch: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    cbit = 1 << (n - 1 - control)
    tbit = 1 << (n - 1 - target)
    perm = np.where(idx & cbit, idx ^ tbit, idx)
    return batch[:, perm]


def _apply_gate(batch: np.ndarray, g: Gate, n: int) -> np.ndarray:
    if g.name == "H":
        return _apply_1q(batch, H_MATRIX, g.target, n)
    if g.name == "T":
        return _apply_1q(batch, T_MATRIX, g.target, n)
    return _apply_cnot(batch, g.control, g.target, n)


def apply_circuit(c: Circuit, n: int) -> StateVector:
    """Apply the gates left to right to ``|0...0>``."""
    c.validate(n)
    batch = np.zeros((1, 1 << n), dtype=complex)
    batch[0, 0] = 1
    for g in c.ops:
        batch = _apply_gate(batch, g, n)
    return StateVector(n, batch[0])


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|``, blind to global phase."""
    if a.n != b.n:
        raise ValueError("states live on different qubit counts")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes))))


# -- encoding -----------------------------------------------------------------


def gate_bits(g: Gate, n: int) -> str:
    w = ceil_log2(n)
    fmt = (lambda q: format(q, f"0{w}b")) if w else (lambda q: "")
    body = OPCODE[g.name] + fmt(g.target)
    if g.name == "CNOT":
        body += fmt(g.control)
    return body


def gate_cost(name: str, n: int) -> int:
    w = ceil_log2(n)
    return 2 + w * (2 if name == "CNOT" else 1)


def encode_circuit(c: Circuit, n: int) -> str:
    c.validate(n)
    return encode_efficient("".join(gate_bits(g, n) for g in c.ops))


def decode_circuit(bits, n: int) -> Circuit:
    body, _ = decode_efficient(bits)
    w = ceil_log2(n)
    ops = []
    i = 0
    while i < len(body):
        code = body[i:i + 2]
        if code not in _OPNAME:
            raise ValueError(f"bad opcode {code!r} at body bit {i}")
        name = _OPNAME[code]
        i += 2
        args = []
        for _ in range(2 if name == "CNOT" else 1):
            if i + w > len(body):
                raise ValueError("truncated gate")
            args.append(int(body[i:i + w], 2) if w else 0)
            i += w
        ops.append(Gate(name, args[0], args[1] if name == "CNOT" else None))
    c = Circuit(tuple(ops))
    c.validate(n)
    return c


def all_gates(n: int) -> list[Gate]:
    """Every gate on ``n`` qubits, sorted by its encoding."""
    gates = [Gate("H", q) for q in range(n)] + [Gate("T", q) for q in range(n)]
    gates += [Gate("CNOT", t, c) for t in range(n) for c in range(n) if c != t]
    return sorted(gates, key=lambda g: gate_bits(g, n))


# -- search -------------------------------------------------------------------


def _keys(batch: np.ndarray) -> list[bytes]:
    """Hashable keys equal for states that differ only by a global phase."""
    first = np.argmax(np.abs(batch) > 1e-6, axis=1)
    lead = batch[np.arange(len(batch)), first]
    phase = np.conj(lead) / np.abs(lead)
    canon = batch * phase[:, None]
    r = np.round(np.concatenate([canon.real, canon.imag], axis=1), _KEY_DECIMALS) + 0.0
    return [row.tobytes() for row in r]


class CostMode(enum.Enum):
    GATES = "gates"
    BITS = "bits"


@dataclass
class Explored:
    """States reachable within the gate cap, each with its cheapest circuit, in cost order."""

    states: np.ndarray
    circuits: list[tuple[Gate, ...]]
    costs: list[int]


@lru_cache(maxsize=16)
def explore(n: int, max_gates: int, mode: CostMode = CostMode.GATES) -> Explored:
    gates = all_gates(n)
    start = np.zeros((1, 1 << n), dtype=complex)
    start[0, 0] = 1
    if mode is CostMode.GATES:
        return _explore_layers(n, max_gates, gates, start)
    return _explore_bits(n, max_gates, gates, start)


def _explore_layers(n, max_gates, gates, start) -> Explored:
    seen = set(_keys(start))
    states = [start]
    circuits: list[tuple[Gate, ...]] = [()]
    costs = [0]
    layer, layer_circ = start, [()]
    for depth in range(1, max_gates + 1):
        # children ordered by (parent, gate) keep each layer in lexicographic encoding order
        kids = np.stack([_apply_gate(layer, g, n) for g in gates], axis=1).reshape(-1, 1 << n)
        keep, kid_circ = [], []
        for i, key in enumerate(_keys(kids)):
            if key not in seen:
                seen.add(key)
                keep.append(i)
                kid_circ.append(layer_circ[i // len(gates)] + (gates[i % len(gates)],))
        if not keep:
            break
        layer, layer_circ = kids[keep], kid_circ
        states.append(layer)
        circuits.extend(layer_circ)
        costs.extend([depth] * len(keep))
    return Explored(np.concatenate(states), circuits, costs)


def _explore_bits(n, max_gates, gates, start) -> Explored:
    """Uniform-cost search on encoded body length, ties broken by encoding."""
    cost = {g: gate_cost(g.name, n) for g in gates}
    bits = {g: gate_bits(g, n) for g in gates}
    counter = itertools.count()
    heap = [(0, "", next(counter), (), start[0])]
    done: set[bytes] = set()
    states, circuits, costs = [], [], []
    while heap:
        c, enc, _, circ, psi = heapq.heappop(heap)
        key = _keys(psi[None, :])[0]
        if key in done:
            continue
        done.add(key)
        states.append(psi)
        circuits.append(circ)
        costs.append(c)
        if len(circ) >= max_gates:
            continue
        for g in gates:
            child = _apply_gate(psi[None, :], g, n)[0]
            heapq.heappush(heap, (c + cost[g], enc + bits[g], next(counter), circ + (g,), child))
    return Explored(np.array(states), circuits, costs)


def _first_match(ex: Explored, target: StateVector, epsilon: float) -> int | None:
    fid = np.abs(ex.states @ np.conj(target.amplitudes))
    hits = np.nonzero(fid >= 1 - epsilon)[0]
    return int(hits[0]) if len(hits) else None


def synthesize(target: StateVector, cfg: SynthesisConfig) -> Circuit | None:
    """A fewest-gate circuit reaching fidelity ``1 - eps``; lexicographically first among ties."""
    if cfg.n != target.n:
        raise ValueError("config and target disagree on qubit count")
    ex = explore(cfg.n, cfg.max_gates, CostMode.GATES)
    i = _first_match(ex, target, cfg.epsilon)
    return None if i is None else Circuit(ex.circuits[i])


def synthesize_shortest_encoding(target: StateVector, cfg: SynthesisConfig) -> Circuit | None:
    """A circuit with the shortest encoding among those within the gate cap."""
    if cfg.n != target.n:
        raise ValueError("config and target disagree on qubit count")
    ex = explore(cfg.n, cfg.max_gates, CostMode.BITS)
    i = _first_match(ex, target, cfg.epsilon)
    return None if i is None else Circuit(ex.circuits[i])


def h_net_upper(target: StateVector, cfg: SynthesisConfig) -> int | None:
    """Upper bound on network complexity in bits, or None past the gate cap.

    Minimizing encoded length directly (rather than gate count) keeps the
    bound nonincreasing in ``eps``.
    """
    c = synthesize_shortest_encoding(target, cfg)
    return None if c is None else len(encode_circuit(c, cfg.n))


def censored_bound(cfg: SynthesisConfig) -> int:
    """Lower bound on the encoded length of any circuit reaching a target the search missed.

    Such a circuit needs at least ``max_gates + 1`` gates, each costing at
    least a single-qubit gate's bits.
    """
    cheapest = gate_cost("H", cfg.n)
    return efficient_length((cfg.max_gates + 1) * cheapest)


# -- entanglement -------------------------------------------------------------


class Entanglement(enum.Enum):
    PRODUCT = "product"
    ENTANGLED = "entangled"
    MAX_RANK_ALL_CUTS = "max_rank_all_cuts"


@dataclass(frozen=True)
class EntanglementReport:
    ranks: dict[tuple[int, ...], int]
    classification: Entanglement


def schmidt_coefficients(s: StateVector, cut: Sequence[int]) -> np.ndarray:
    a = tuple(sorted(set(cut)))
    if not a or len(a) >= s.n or any(not 0 <= q < s.n for q in a):
        raise ValueError("cut must be a nontrivial subset of the qubits")
    b = tuple(q for q in range(s.n) if q not in a)
    t = s.amplitudes.reshape((2,) * s.n).transpose(a + b)
    return np.linalg.svd(t.reshape(1 << len(a), 1 << len(b)), compute_uv=False)


def schmidt_rank(s: StateVector, cut: Sequence[int]) -> int:
    return int(np.sum(schmidt_coefficients(s, cut) > RANK_TOL))


def bipartitions(n: int) -> list[tuple[int, ...]]:
    """One side of every nontrivial cut, always the side holding qubit 0."""
    rest = range(1, n)
    cuts = []
    for r in range(0, n - 1):
        for combo in itertools.combinations(rest, r):
            cuts.append((0,) + combo)
    return cuts


def classify_entanglement(s: StateVector) -> EntanglementReport:
    ranks = {cut: schmidt_rank(s, cut) for cut in bipartitions(s.n)}
    if all(r == 1 for r in ranks.values()):
        kind = Entanglement.PRODUCT
    elif all(r == 1 << min(len(c), s.n - len(c)) for c, r in ranks.items()):
        kind = Entanglement.MAX_RANK_ALL_CUTS
    else:
        kind = Entanglement.ENTANGLED
    return EntanglementReport(ranks, kind)


def schmidt_measure_two_qubits(s: StateVector) -> float:
    """``log2`` of the Schmidt rank, the exact measure for two qubits."""
    if s.n != 2:
        raise ValueError("exact measure implemented for two qubits only")
    return float(np.log2(schmidt_rank(s, (0,))))


# -- random states ------------------------------------------------------------


def haar_state(n: int, rng: np.random.Generator) -> StateVector:
    z = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, z / np.linalg.norm(z))


def random_product_state(n: int, rng: np.random.Generator) -> StateVector:
    psi = np.ones(1, dtype=complex)
    for _ in range(n):
        psi = np.kron(psi, haar_state(1, rng).amplitudes)
    return StateVector(n, psi / np.linalg.norm(psi))


def random_circuit(n: int, length: int, rng: np.random.Generator) -> Circuit:
    gates = all_gates(n)
    return Circuit(tuple(gates[i] for i in rng.integers(0, len(gates), size=length)))
