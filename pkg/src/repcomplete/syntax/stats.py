"""Token repetition statistics per node class and parent kind."""

from collections import defaultdict
from dataclasses import dataclass, field

from ..errors import EmptyCorpusError
from .filters import NodeClass


@dataclass
class BucketCount:
    total: int = 0
    repeated: int = 0

    @property
    def rate(self):
        return self.repeated / self.total if self.total else 0.0

    def to_json(self):
        return {"total": self.total, "repeated": self.repeated, "rate": self.rate}


@dataclass
class RepetitionReport:
    window: int
    total_events: int = 0
    content_events: int = 0
    cared_events: int = 0
    buckets: dict = field(default_factory=lambda: defaultdict(BucketCount))
    classes: dict = field(default_factory=lambda: defaultdict(BucketCount))
    variables: BucketCount = field(default_factory=BucketCount)

    @property
    def cared_fraction(self):
        return self.cared_events / self.total_events if self.total_events else 0.0

    @property
    def cared_node_fraction(self):
        """Cared share of AST nodes: a leaf is one node but two events."""
        nodes = self.total_events - self.content_events
        return self.cared_events / nodes if nodes else 0.0

    def bucket(self, node_class, parent_kind):
        return self.buckets.get((NodeClass(node_class), parent_kind), BucketCount())

    def to_json(self):
        return {
            "window": self.window,
            "total_events": self.total_events,
            "content_events": self.content_events,
            "cared_events": self.cared_events,
            "cared_fraction": self.cared_fraction,
            "cared_node_fraction": self.cared_node_fraction,
            "classes": {c.value: self.classes[c].to_json() for c in NodeClass if c in self.classes},
            "variables": self.variables.to_json(),
            "buckets": [
                {"class": c.value, "parent": p, **b.to_json()}
                for (c, p), b in sorted(self.buckets.items(), key=lambda kv: (kv[0][0].value, kv[0][1]))
            ],
        }


def repetition_stats(functions, window):
    """Measure how often each kind of content token repeats recent history.

    A content token counts as repeated when its text equals the text of a
    content token of the same node class among the previous ``window``
    events of the same function. ``functions`` is an iterable of event
    sequences.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    report = RepetitionReport(window)
    for events in functions:
        report.total_events += len(events)
        for t, ev in enumerate(events):
            if not ev.is_content:
                continue
            report.content_events += 1
            if ev.node_class is NodeClass.CARED:
                report.cared_events += 1
            lo = max(0, t - window)
            repeated = any(
                prev.is_content and prev.node_class is ev.node_class and prev.text == ev.text
                for prev in events[lo:t]
            )
            for b in (report.buckets[(ev.node_class, ev.parent_kind)], report.classes[ev.node_class]):
                b.total += 1
                b.repeated += repeated
            if ev.is_variable:
                report.variables.total += 1
                report.variables.repeated += repeated
    if report.total_events == 0:
        raise EmptyCorpusError("repetition statistics need at least one token event")
    return report
