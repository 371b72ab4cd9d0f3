"""
Centralized Run Analytics.

This module keeps an in-process event log of training activity: each trained or
fine-tuned layer, each classifier fit, and each divergence abort. The CLI reads it
back at the end of a run to print a summary. Nothing here influences the numbers
being computed; it is bookkeeping only.
"""

from collections import defaultdict
from datetime import datetime


class RunAnalytics:
    """
    Singleton class for recording and summarizing training events.

    All trainers in the process write to the same event log, so a CLI invocation
    that trains a feature stack and a classifier sees both phases in one summary.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(RunAnalytics, cls).__new__(cls)
            cls._instance.events = []
        return cls._instance

    def log_event(self, event_type: str, phase: str, details: dict = None):
        """
        Record a new event.

        Args:
            event_type (str): Category of event (e.g., 'LAYER_TRAINED').
            phase (str): Pipeline phase that emitted it (e.g., 'layer-1', 'classifier').
            details (dict, optional): Extra payload such as final loss or iteration count.
        """
        event = {
            "timestamp": datetime.now(),
            "type": event_type,
            "phase": phase,
            "details": details or {},
        }
        self.events.append(event)

    def reset(self):
        self.events = []

    def get_stats(self) -> dict:
        """
        Computes aggregate statistics from the raw event log.

        Returns:
            dict: Totals per event type, the last reported loss per phase, and the
            ten most recent events.
        """
        stats = {
            "total_events": len(self.events),
            "by_type": defaultdict(int),
            "final_loss": {},
            "recent_events": [],
        }

        for event in self.events:
            stats["by_type"][event["type"]] += 1
            if "final_loss" in event["details"]:
                stats["final_loss"][event["phase"]] = event["details"]["final_loss"]

        stats["by_type"] = dict(stats["by_type"])
        stats["recent_events"] = self.events[-10:]

        return stats
