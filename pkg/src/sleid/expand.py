"""Dataset expansion: grow an illicit seed set outward through the graph.

Starting from known illicit seeds, each layer evaluates the order-1
neighbors of the previously admitted accounts and admits those that are
either reliably normal (all risk criteria under the threshold) or DeFi
involved. The loop stops once the illicit share of the core set falls to
the target ratio, the frontier is exhausted, or the layer bound is hit.
"""

import csv
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ExhaustedFrontier, NotFound
from .riskrate import batch_risk_profiles
from .txgraph import LabelState, LedgerGraph, normalize_address

DEFAULT_RATIO_THRESHOLD = 0.01
DEFAULT_MAX_LAYERS = 10


@dataclass
class CoreEntry:
    address: str
    label: LabelState
    layer: int
    reason: str  # "seed", "low_risk" or "defi"


@dataclass
class ExpansionState:
    entries: list[CoreEntry] = field(default_factory=list)
    layer_index: int = 0
    illicit_count: int = 0
    admitted_per_layer: list[dict[str, int]] = field(default_factory=list)

    @property
    def core_size(self) -> int:
        return len(self.entries)

    @property
    def illicit_ratio(self) -> float:
        if not self.entries:
            return 0.0
        return self.illicit_count / len(self.entries)

    def addresses(self) -> list[str]:
        return [e.address for e in self.entries]


def _ratio_above(state: ExpansionState, threshold: Fraction) -> bool:
    return Fraction(state.illicit_count, max(state.core_size, 1)) > threshold


def expand_dataset(
    graph: LedgerGraph,
    seeds,
    defi_registry,
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
    risk_threshold: float = 0.2,
    max_layers: int = DEFAULT_MAX_LAYERS,
    ground_truth: dict[str, LabelState] | None = None,
    **risk_kwargs,
) -> ExpansionState:
    """Run the expansion loop and return the final core set.

    Admitted candidates are labeled unknown unless ``ground_truth`` supplies
    a label for them. Raises ExhaustedFrontier (with the partial state
    attached) when the frontier dries up while the ratio is still above the
    threshold.
    """
    seeds = sorted({normalize_address(s) for s in seeds})
    if not seeds:
        raise NotFound("seed set is empty")
    for s in seeds:
        if not graph.has_account(s):
            raise NotFound(f"seed {s} not present in graph")
    ground_truth = ground_truth or {}
    threshold = Fraction(str(ratio_threshold))

    state = ExpansionState()
    for s in seeds:
        state.entries.append(CoreEntry(s, LabelState.illicit, 0, "seed"))
    state.illicit_count = len(seeds)

    visited = set(seeds)
    previous_admitted = list(seeds)

    while _ratio_above(state, threshold):
        if state.layer_index >= max_layers:
            break
        frontier = set()
        for addr in previous_admitted:
            frontier.update(graph.neighbors(addr, order=1))
        frontier -= visited
        if not frontier:
            raise ExhaustedFrontier(
                f"no candidates left at illicit ratio {state.illicit_ratio:.4f}",
                state=state,
            )
        candidates = sorted(frontier)
        visited.update(candidates)
        state.layer_index += 1

        profiles = batch_risk_profiles(
            graph, candidates, defi_registry,
            threshold=risk_threshold, **risk_kwargs,
        )
        counts = {"low_risk": 0, "defi": 0}
        admitted = []
        for profile in profiles:
            if profile.is_normal:
                reason = "low_risk"
            elif profile.defi_involved:
                reason = "defi"
            else:
                continue
            counts[reason] += 1
            label = ground_truth.get(profile.address, LabelState.unknown)
            state.entries.append(
                CoreEntry(profile.address, label, state.layer_index, reason)
            )
            if label is LabelState.illicit:
                state.illicit_count += 1
            admitted.append(profile.address)
        state.admitted_per_layer.append(counts)
        previous_admitted = admitted

    return state


def write_core_csv(state: ExpansionState, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["address", "label", "layer", "reason"])
        for e in state.entries:
            writer.writerow([e.address, e.label.value, e.layer, e.reason])


def read_core_csv(path) -> ExpansionState:
    state = ExpansionState()
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            entry = CoreEntry(
                address=normalize_address(row["address"]),
                label=LabelState(row["label"]),
                layer=int(row["layer"]),
                reason=row["reason"],
            )
            state.entries.append(entry)
            state.layer_index = max(state.layer_index, entry.layer)
            if entry.label is LabelState.illicit:
                state.illicit_count += 1
    return state
