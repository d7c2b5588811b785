"""Floating-point operation counter shared by every kernel."""

from contextlib import contextmanager
from dataclasses import dataclass, field


@dataclass
class FlopCounter:
    """Tallies adds, multiplies and divide/sqrt operations.

    A fused multiply-add counts as one add plus one mul. Counts can be
    attributed to a named phase with :meth:`phase`; anything counted outside
    a phase block lands under ``None`` in ``by_phase``.
    """

    adds: int = 0
    muls: int = 0
    divs_sqrts: int = 0
    by_phase: dict = field(default_factory=dict)
    _current: str = field(default=None, repr=False)

    @property
    def total(self):
        return self.adds + self.muls + self.divs_sqrts

    def count(self, adds=0, muls=0, divs_sqrts=0):
        if adds < 0 or muls < 0 or divs_sqrts < 0:
            raise ValueError("flop counts are non-negative")
        self.adds += int(adds)
        self.muls += int(muls)
        self.divs_sqrts += int(divs_sqrts)
        key = self._current
        self.by_phase[key] = self.by_phase.get(key, 0) + int(adds + muls + divs_sqrts)

    def fma(self, n):
        """Count ``n`` multiply-adds."""
        self.count(adds=n, muls=n)

    @contextmanager
    def phase(self, name):
        outer = self._current
        self._current = name
        self.by_phase.setdefault(name, 0)
        try:
            yield self
        finally:
            self._current = outer

    def reset(self):
        self.adds = self.muls = self.divs_sqrts = 0
        self.by_phase = {}
        self._current = None

    def snapshot(self):
        return {"adds": self.adds, "muls": self.muls, "divs_sqrts": self.divs_sqrts}
