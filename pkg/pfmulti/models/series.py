from dataclasses import dataclass, field
from typing import List

import numpy as np


@dataclass
class ProbeSeries:
    name: str
    times: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)

    def __repr__(self):
        return f"<ProbeSeries {self.name} n={len(self.times)}>"

    def __len__(self):
        return len(self.times)

    def append(self, t: float, value: float) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError(f"probe '{self.name}': time {t} does not increase")
        self.times.append(float(t))
        self.values.append(float(value))

    def as_arrays(self):
        return np.asarray(self.times, dtype=float), np.asarray(self.values, dtype=float)

    def peak(self):
        """(time, value) of the maximum value"""
        if not self.values:
            raise ValueError(f"probe '{self.name}' is empty")
        i = int(np.argmax(self.values))
        return self.times[i], self.values[i]

    def to_dict(self):
        return {"name": self.name, "times": list(self.times), "values": list(self.values)}
