"""
catrepeater/core/graph_states.py
================================

Hybrid matter-light graph states, built and pruned exactly.

Construction
------------
``build_hybrid_chain(n)`` places ``n`` matter qubits in ``|+>`` and links
neighbours with CZ to form a cluster (a ring when ``closed``).  Each qubit
then drives a logical flip on its own cat mode (initially ``|0̄>``), which
gives ``|↑>|0̄> + |↓>|1̄>`` per node.  Measuring every matter qubit in the X
basis transfers the graph onto the light.  A ``-`` outcome is not
corrected; it is recorded as a logical Z in the Pauli frame of the partner
light node.

Register order in the joint tensor is matter qubits first, then light
modes: ``(m_0, ..., m_{n-1}, p_0, ..., p_{n-1})``.

Pruning
-------
After transmission every light node shows a loss residue.  Nodes with an
undesired residue are measured in the logical Z basis (USD on the damped
pair) and drop out of the graph.  Outcome 1 on node ``v`` puts a Z in the
frame of every neighbour of ``v``.  USD failures are discarded and the
branch is renormalized.

Two channels of one link form the four-node ring ``0-1-2-3-0``, with left
side ``{0, 2}`` and right side ``{1, 3}``.  Pruning nodes 1 and 2 leaves the
edge ``0-3``: a two-node graph state, which ``equivalence_check`` compares
against sending that two-node state directly.

Memory
------
A four-mode tensor unravelled on every mode at once does not fit in
memory.  ``LossyGraph`` therefore records the channel (transmittance and
residues) and the pruning pipeline applies loss one mode at a time,
measuring each pruned mode immediately after its loss.  The channels act on
distinct modes, so this ordering is exact.
"""

import logging
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Dict, List, Literal, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from ..errors import DimensionBudgetError, NumericDomainError
from .cat_codes import CatCode, codeword
from .fock import (
    DEFAULT_K_MAX,
    FockState,
    WeightedEnsemble,
    apply_loss_unraveled,
    measure_mode,
    phase_rotation,
    project_loss_residue,
    truncation_cutoff,
)
from .link_model import (
    LinkParams,
    link_oracle,
    read_out_modes,
    readout_measurement,
)

logger = logging.getLogger(__name__)

MAX_PHOTONIC_NODES = 4
DIMENSION_BUDGET = 2**24
"""Largest joint tensor (in amplitudes) the builder will allocate."""

EQUIVALENCE_TOLERANCE = 1e-8

NodeKind = Literal["matter", "photonic"]
Side = Literal["left", "right"]


@dataclass(frozen=True)
class GraphNode:
    label: str
    kind: NodeKind
    side: Side = "left"


@dataclass(frozen=True, eq=False)
class HybridGraph:
    """Graph state over matter qubits and cat modes.

    ``frame`` holds one ``(x, z)`` logical Pauli bit pair per node.
    """

    nodes: Tuple[GraphNode, ...]
    edges: Tuple[Tuple[int, int], ...]
    state: FockState
    code: CatCode
    frame: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.state.n_modes != len(self.nodes):
            raise NumericDomainError(f"{len(self.nodes)} nodes but a {self.state.n_modes}-register state")
        if not self.frame:
            object.__setattr__(self, "frame", tuple((0, 0) for _ in self.nodes))

    @property
    def photonic(self) -> Tuple[int, ...]:
        return tuple(i for i, node in enumerate(self.nodes) if node.kind == "photonic")

    @property
    def matter(self) -> Tuple[int, ...]:
        return tuple(i for i, node in enumerate(self.nodes) if node.kind == "matter")

    def topology(self) -> nx.Graph:
        """Undirected graph over node indices; isolated nodes included."""
        topology = nx.Graph()
        topology.add_nodes_from(range(len(self.nodes)))
        topology.add_edges_from(self.edges)
        return topology

    def neighbours(self, index: int) -> Tuple[int, ...]:
        return tuple(sorted(self.topology().neighbors(index)))


def cluster_state(n: int, closed: bool = False) -> np.ndarray:
    """Amplitudes of the ``n``-qubit linear (or ring) cluster state as a tensor."""
    state = np.full((2,) * n, 2.0 ** (-n / 2.0))
    for a, b in _chain_edges(n, closed):
        index = [slice(None)] * n
        index[a], index[b] = 1, 1
        state[tuple(index)] *= -1.0
    return state


def _chain_edges(n: int, closed: bool) -> List[Tuple[int, int]]:
    topology = nx.cycle_graph(n) if closed and n > 2 else nx.path_graph(n)
    return _sorted_edges(topology)


def _sorted_edges(topology: nx.Graph) -> List[Tuple[int, int]]:
    return sorted((min(a, b), max(a, b)) for a, b in topology.edges)


def logical_amplitudes(graph: HybridGraph) -> np.ndarray:
    """Logical graph-state amplitudes on the photonic nodes, frame applied."""
    photonic = graph.photonic
    position = {node: i for i, node in enumerate(photonic)}
    edges = [(position[a], position[b]) for a, b in graph.edges if a in position and b in position]
    amplitudes = np.full((2,) * len(photonic), 2.0 ** (-len(photonic) / 2.0))
    for a, b in edges:
        index = [slice(None)] * len(photonic)
        index[a], index[b] = 1, 1
        amplitudes[tuple(index)] *= -1.0
    for node in photonic:
        x_bit, z_bit = graph.frame[node]
        axis = position[node]
        if z_bit:
            index = [slice(None)] * len(photonic)
            index[axis] = 1
            amplitudes[tuple(index)] *= -1.0
        if x_bit:
            amplitudes = np.flip(amplitudes, axis=axis)
    return amplitudes


def framed_target(graph: HybridGraph) -> FockState:
    """Cat-encoded logical graph state on the photonic nodes, frame applied."""
    cutoff = graph.state.dims[graph.photonic[0]] - 1
    words = np.stack([codeword(graph.code, 0, cutoff).amplitudes, codeword(graph.code, 1, cutoff).amplitudes])
    tensor = logical_amplitudes(graph).astype(complex)
    for axis in range(tensor.ndim):
        tensor = np.moveaxis(np.tensordot(words.T, tensor, axes=([1], [axis])), 0, axis)
    return FockState(tensor, normalized=False).normalize()


def build_hybrid_chain(
    n_photonic: int, code: CatCode, cutoff: Optional[int] = None, closed: bool = False
) -> HybridGraph:
    """Matter cluster of ``n_photonic`` qubits, each coupled to its own cat mode.

    Raises
    ------
    DimensionBudgetError
        If the joint tensor would exceed ``DIMENSION_BUDGET`` amplitudes or
        more than ``MAX_PHOTONIC_NODES`` light modes are requested.
    """
    if n_photonic < 2:
        raise NumericDomainError(f"a hybrid chain needs at least two photonic nodes, got {n_photonic}")
    cutoff = truncation_cutoff(code.alpha, headroom=0) if cutoff is None else cutoff
    size = 2**n_photonic * (cutoff + 1) ** n_photonic
    if n_photonic > MAX_PHOTONIC_NODES or size > DIMENSION_BUDGET:
        raise DimensionBudgetError(
            f"{n_photonic} photonic nodes at cutoff {cutoff} need {size} amplitudes (budget {DIMENSION_BUDGET})"
        )

    n = n_photonic
    vacuum_word = codeword(code, 0, cutoff).amplitudes
    flip = np.diag(phase_rotation(code.flip_angle, cutoff).matrix)
    tensor = cluster_state(n, closed).astype(complex)
    for _ in range(n):
        tensor = np.multiply.outer(tensor, vacuum_word)
    for i in range(n):
        index = [slice(None)] * (2 * n)
        index[i] = 1
        shape = [1] * (2 * n - 1)
        shape[n - 1 + i] = cutoff + 1
        tensor[tuple(index)] *= flip.reshape(shape)

    nodes = tuple(GraphNode(f"m{i}", "matter", "left" if i % 2 == 0 else "right") for i in range(n)) + tuple(
        GraphNode(f"p{i}", "photonic", "left" if i % 2 == 0 else "right") for i in range(n)
    )
    edges = tuple(_chain_edges(n, closed)) + tuple((i, n + i) for i in range(n))
    logger.debug("built hybrid %s of %d nodes at cutoff %d", "ring" if closed else "chain", n, cutoff)
    return HybridGraph(nodes, edges, FockState(tensor), code)


def measure_matter_x(graph: HybridGraph, outcomes: Sequence[int]) -> HybridGraph:
    """Measure every matter qubit in the X basis; ``outcomes`` are 0 (+) or 1 (-).

    The result keeps only the photonic nodes.  Edges between matter qubits
    are inherited by their partner light nodes.
    """
    matter = graph.matter
    if not matter:
        raise NumericDomainError("graph has no matter nodes to measure")
    if len(outcomes) != len(matter):
        raise NumericDomainError(f"{len(outcomes)} outcomes for {len(matter)} matter nodes")

    partner: Dict[int, int] = {}
    for a, b in graph.edges:
        if graph.nodes[a].kind == "matter" and graph.nodes[b].kind == "photonic":
            partner[a] = b
        elif graph.nodes[b].kind == "matter" and graph.nodes[a].kind == "photonic":
            partner[b] = a
    frame = [list(bits) for bits in graph.frame]
    tensor = graph.state.amplitudes
    for offset, (node, outcome) in enumerate(zip(matter, outcomes)):
        if outcome not in (0, 1):
            raise NumericDomainError(f"X outcome must be 0 or 1, got {outcome}")
        # The "-" branch equals the "+" branch up to a logical Z on the partner.
        bra = np.array([1.0, -1.0 if outcome else 1.0]) / np.sqrt(2.0)
        tensor = np.tensordot(bra, tensor, axes=([0], [node - offset]))
        if outcome:
            frame[partner[node]][1] ^= 1

    photonic = graph.photonic
    position = {node: i for i, node in enumerate(photonic)}
    edges = tuple(
        sorted(
            (min(position[partner[a]], position[partner[b]]), max(position[partner[a]], position[partner[b]]))
            for a, b in graph.edges
            if graph.nodes[a].kind == "matter" and graph.nodes[b].kind == "matter"
        )
    )
    return HybridGraph(
        nodes=tuple(graph.nodes[i] for i in photonic),
        edges=edges,
        state=FockState(tensor, normalized=False).normalize(),
        code=graph.code,
        frame=tuple(tuple(frame[i]) for i in photonic),
    )


def photonic_graph(n: int, code: CatCode, closed: bool = False, cutoff: Optional[int] = None) -> HybridGraph:
    """Build the hybrid chain and measure out its matter with all ``+`` outcomes."""
    return measure_matter_x(build_hybrid_chain(n, code, cutoff, closed), [0] * n)


# ── Transmission and pruning ──────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class LossyGraph:
    """A photonic graph after loss, with the observed residue of every node."""

    graph: HybridGraph
    eta: float
    residues: Tuple[int, ...]
    k_max: int = DEFAULT_K_MAX


def transmit_graph(graph: HybridGraph, eta: float, residues: Sequence[int], k_max: int = DEFAULT_K_MAX) -> LossyGraph:
    if graph.matter:
        raise NumericDomainError("measure out the matter nodes before transmission")
    if len(residues) != len(graph.nodes):
        raise NumericDomainError(f"{len(residues)} residues for {len(graph.nodes)} nodes")
    if not 0.0 < eta <= 1.0:
        raise NumericDomainError(f"transmittance must lie in (0, 1], got {eta}")
    return LossyGraph(graph, eta, tuple(residues), k_max)


@dataclass(frozen=True, eq=False)
class PrunedGraph:
    """Surviving nodes after Z-pruning one outcome branch.

    ``probability`` is the joint probability of the observed residues and
    the Z outcomes.  ``ensemble`` keeps one register per original node;
    pruned registers have length 1.
    """

    ensemble: WeightedEnsemble
    graph: HybridGraph
    survivors: Tuple[int, ...]
    edges: Tuple[Tuple[int, int], ...]
    frame: Tuple[Tuple[int, int], ...]
    probability: float
    z_outcomes: Mapping[int, int] = field(default_factory=dict)

    def logical_target(self) -> np.ndarray:
        """Frame-adjusted logical graph state on the survivors."""
        survivor_graph = replace(
            self.graph,
            nodes=tuple(self.graph.nodes[i] for i in self.survivors),
            edges=tuple(
                (self.survivors.index(a), self.survivors.index(b)) for a, b in self.edges
            ),
            state=FockState(np.ones((1,) * len(self.survivors))),
            frame=tuple(self.frame[i] for i in self.survivors),
        )
        return logical_amplitudes(survivor_graph)


def prune_undesired_nodes(lossy: LossyGraph, z_outcomes: Mapping[int, int]) -> PrunedGraph:
    """Read the nodes in ``z_outcomes`` in the logical Z basis and drop them.

    Raises
    ------
    NumericDomainError
        If pruning would leave a side of the graph without a node.
    """
    graph = lossy.graph
    s = graph.code.modulus
    survivors = tuple(i for i in range(len(graph.nodes)) if i not in z_outcomes)
    for side in ("left", "right"):
        if not any(graph.nodes[i].side == side for i in survivors):
            raise NumericDomainError(f"pruning leaves no surviving node on the {side} side")

    cutoff = graph.state.dims[0] - 1
    frame = [list(bits) for bits in graph.frame]
    topology = graph.topology()
    ensemble = WeightedEnsemble.from_state(graph.state)
    probability = 1.0
    for node in sorted(z_outcomes):
        residue = lossy.residues[node]
        ensemble = apply_loss_unraveled(ensemble, node, lossy.eta, lossy.k_max)
        ensemble, p_residue = project_loss_residue(ensemble, node, s, residue)
        measurement = readout_measurement(graph.code, lossy.eta, residue, cutoff) if p_residue > 0.0 else None
        if measurement is None:
            return PrunedGraph(ensemble, graph, survivors, (), tuple(map(tuple, frame)), 0.0, dict(z_outcomes))
        ensemble, p_outcome = measure_mode(ensemble, node, measurement.bra(z_outcomes[node]))
        probability *= p_residue * p_outcome
        # A frame X on the node flips the logical meaning of its readout.
        logical = z_outcomes[node] ^ frame[node][0]
        if logical:
            for neighbour in topology.neighbors(node):
                frame[neighbour][1] ^= 1
        topology.remove_node(node)
        if probability == 0.0:
            break

    for node in survivors:
        if probability == 0.0:
            break
        ensemble = apply_loss_unraveled(ensemble, node, lossy.eta, lossy.k_max)
        ensemble, p_residue = project_loss_residue(ensemble, node, s, lossy.residues[node])
        probability *= p_residue

    logger.debug("pruned %s with outcomes %s: probability %.6g", sorted(z_outcomes), dict(z_outcomes), probability)
    return PrunedGraph(
        ensemble=ensemble,
        graph=graph,
        survivors=survivors,
        edges=tuple(_sorted_edges(topology)),
        frame=tuple(tuple(bits) for bits in frame),
        probability=probability,
        z_outcomes=dict(z_outcomes),
    )


def pruning_branches(lossy: LossyGraph, pruned: Sequence[int]) -> Dict[Tuple[int, ...], PrunedGraph]:
    """Every Z-outcome branch of pruning ``pruned``, keyed by outcome tuple."""
    return {
        outcomes: prune_undesired_nodes(lossy, dict(zip(pruned, outcomes)))
        for outcomes in product((0, 1), repeat=len(pruned))
    }


# ── Equivalence ───────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class EquivalenceReport:
    alpha: float
    eta: float
    max_deviation: float
    tolerance: float
    branches: int

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def equivalence_check(
    alpha: float,
    eta: float,
    pruned_residues: Optional[Tuple[int, int]] = None,
    cutoff: Optional[int] = None,
    k_max: int = DEFAULT_K_MAX,
    tolerance: float = EQUIVALENCE_TOLERANCE,
) -> EquivalenceReport:
    """Compare the pruned four-node ring against sending the two-node graph directly.

    For every Z-outcome branch and every residue pair of the survivors, the
    conditional residue-pair distribution, the USD-success fidelity and the
    readout success must match the direct path.  The pruned nodes show odd
    residues by default (even when ``eta = 1``, where odd is impossible).
    """
    code = CatCode(alpha, 1)
    cutoff = truncation_cutoff(alpha, headroom=0) if cutoff is None else cutoff
    if pruned_residues is None:
        pruned_residues = (1, 1) if eta < 1.0 else (0, 0)

    direct = link_oracle(LinkParams(alpha, 1, transmittance=eta), target="graph", cutoff=cutoff, k_max=k_max)
    ring = photonic_graph(4, code, closed=True, cutoff=cutoff)
    survivors = (0, 3)
    pruned = (1, 2)
    measurements = {j: readout_measurement(code, eta, j, cutoff) for j in range(code.modulus)}

    deviation = 0.0
    branches = 0
    for z_values in product((0, 1), repeat=len(pruned)):
        joint: Dict[Tuple[int, int], float] = {}
        rows: Dict[Tuple[int, int], Tuple[float, float]] = {}
        for pair in product(range(code.modulus), repeat=2):
            residues = [0, 0, 0, 0]
            residues[pruned[0]], residues[pruned[1]] = pruned_residues
            residues[survivors[0]], residues[survivors[1]] = pair
            branch = prune_undesired_nodes(transmit_graph(ring, eta, residues, k_max), dict(zip(pruned, z_values)))
            joint[pair] = branch.probability
            if branch.probability > 0.0 and all(measurements[j] is not None for j in pair):
                rows[pair] = read_out_modes(
                    branch.ensemble,
                    survivors,
                    (measurements[pair[0]], measurements[pair[1]]),
                    code,
                    pair,
                    branch.logical_target(),
                )
        total = sum(joint.values())
        if total == 0.0:
            continue
        branches += 1
        for pair, expected in direct.outcomes.items():
            deviation = max(deviation, abs(joint[pair] / total - expected.probability))
            if expected.reachable and pair in rows:
                fidelity, success = rows[pair]
                deviation = max(deviation, abs(fidelity - expected.fidelity), abs(success - expected.usd_success))

    logger.info("equivalence at alpha=%.4g eta=%.4g: max deviation %.3e over %d branches", alpha, eta, deviation, branches)
    return EquivalenceReport(alpha, eta, deviation, tolerance, branches)
