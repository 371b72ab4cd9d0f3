from .analytics import RunAnalytics
