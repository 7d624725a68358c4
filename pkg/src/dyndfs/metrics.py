"""Counters for one update or one reroot."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field


def ceil_log2(n: int) -> int:
    return max(0, (n - 1).bit_length())


def batch_bound(n0: int) -> int:
    """Per-reroot cap on query batches: 12 * (ceil(log2 n0) + 1)^2."""
    return 12 * (ceil_log2(n0) + 1) ** 2


@dataclass
class RerootStats:
    n0: int
    batches: int = 0
    phases: int = 0  # highest phase index in which something was traversed
    max_stage: int = 0  # highest stage index in which something was traversed
    max_stage_rounds: int = 0
    max_traversal_batches: int = 0
    traversals: dict[str, int] = field(default_factory=dict)

    def bump(self, kind: str) -> None:
        self.traversals[kind] = self.traversals.get(kind, 0) + 1


@dataclass
class Metrics:
    """Per-update counters; reset for every update."""

    kind: str = ""
    phases: int = 0
    stages: int = 0
    query_batches: int = 0
    reduction_batches: int = 0
    passes: int = 0
    reroots: int = 0
    max_reroot_size: int = 0
    max_reroot_batches: int = 0
    valid: bool | None = None  # None when the update was not verified
    wall_time: float = 0.0
    traversals: dict[str, int] = field(default_factory=dict)

    def absorb(self, s: RerootStats) -> None:
        self.reroots += 1
        self.phases = max(self.phases, s.phases)
        self.stages = max(self.stages, s.max_stage)
        self.max_reroot_size = max(self.max_reroot_size, s.n0)
        self.max_reroot_batches = max(self.max_reroot_batches, s.batches)
        for k, v in s.traversals.items():
            self.traversals[k] = self.traversals.get(k, 0) + v

    def as_dict(self) -> dict:
        return asdict(self)
