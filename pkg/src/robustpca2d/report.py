"""Per-iteration convergence traces shared by the R1 and L1 fitters."""
import csv
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

R1_COLUMNS = ("iteration", "update_norm", "change_norm", "objective")
L1_COLUMNS = ("iteration", "objective", "flipped_count")


@dataclass(frozen=True)
class PolarityState:
    """Sign pattern (and, for 2-D fits, peak column per image) at iteration t."""

    p: np.ndarray
    q: Optional[np.ndarray]
    t: int


@dataclass
class FitReport:
    method: str
    iterations: int = 0
    converged: bool = False
    objective_trace: List[float] = field(default_factory=list)
    update_norms: List[float] = field(default_factory=list)
    change_norms: List[float] = field(default_factory=list)
    flipped_counts: List[int] = field(default_factory=list)
    weight_min: List[float] = field(default_factory=list)
    weight_max: List[float] = field(default_factory=list)
    initial_objective: Optional[float] = None
    iterates: List[np.ndarray] = field(default_factory=list)
    polarity: Optional[PolarityState] = None
    components: List["FitReport"] = field(default_factory=list)

    @property
    def columns(self):
        return R1_COLUMNS if self.method in ("r1pca", "2dr1pca") else L1_COLUMNS

    @property
    def final_objective(self) -> Optional[float]:
        return self.objective_trace[-1] if self.objective_trace else self.initial_objective

    def rows(self):
        for t in range(self.iterations):
            row = {"iteration": t + 1, "objective": self.objective_trace[t]}
            if self.method in ("r1pca", "2dr1pca"):
                row["update_norm"] = self.update_norms[t]
                row["change_norm"] = self.change_norms[t]
            else:
                row["flipped_count"] = self.flipped_counts[t]
            yield row

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(self.columns), lineterminator="\n")
            writer.writeheader()
            for row in self.rows():
                writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})

    @classmethod
    def merge(cls, method: str, parts: List["FitReport"]) -> "FitReport":
        """Concatenate per-component traces of a deflation run."""
        out = cls(method, converged=all(p.converged for p in parts), components=list(parts))
        for p in parts:
            out.iterations += p.iterations
            out.objective_trace += p.objective_trace
            out.change_norms += p.change_norms
            out.flipped_counts += p.flipped_counts
        return out
