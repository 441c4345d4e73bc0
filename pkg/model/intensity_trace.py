from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from scipy import integrate

EXCITATION_SLACK = 1e-6


@dataclass(frozen=True)
class IntensityTrace:
    """Sampled radiated intensity I(t) and atomic excitation <n>(t).

    meta carries the solver path tag under "solver" and the parameter
    snapshot under "params"; solver specific entries (tolerances, step
    counts, stop reason) are added alongside.
    """
    times: np.ndarray
    intensity: np.ndarray
    excitation: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)
    total_excitation: Optional[np.ndarray] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("times must be a non-empty 1D grid")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        for name in ("intensity", "excitation"):
            if np.shape(getattr(self, name)) != times.shape:
                raise ValueError(f"{name} must match the time grid")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "intensity", np.asarray(self.intensity, dtype=float))
        object.__setattr__(self, "excitation", np.asarray(self.excitation, dtype=float))
        if self.total_excitation is not None:
            object.__setattr__(self, "total_excitation", np.asarray(self.total_excitation, dtype=float))
        self._check_excitation_range()

    def _check_excitation_range(self):
        # excitation in [0, N]; the upper end needs the params snapshot
        n_atoms = self.meta.get("params", {}).get("n_atoms")
        slack = EXCITATION_SLACK * max(n_atoms or 1, 1)
        low = float(np.min(self.excitation))
        if low < -slack:
            raise ValueError(f"excitation {low:.6g} is negative")
        if n_atoms is not None:
            high = float(np.max(self.excitation))
            if high > n_atoms + slack:
                raise ValueError(f"excitation {high:.6g} exceeds N = {n_atoms}")

    @property
    def solver(self) -> str:
        return self.meta.get("solver", "unknown")

    def __len__(self) -> int:
        return self.times.size

    def emitted_energy(self) -> float:
        """Cumulative radiated energy over the sampled window."""
        if self.times.size < 3:
            return float(integrate.trapezoid(self.intensity, self.times))
        return float(integrate.simpson(self.intensity, x=self.times))

    def truncated(self, t_end: float) -> "IntensityTrace":
        keep = self.times <= t_end
        total = None if self.total_excitation is None else self.total_excitation[keep]
        return IntensityTrace(self.times[keep], self.intensity[keep], self.excitation[keep],
                              dict(self.meta), total)
