"""Dark-web threat intelligence toolkit.

Collects candidate pages from seeded sources, scores them for threat
relevance, clusters and summarizes the survivors, queries an
internet-device search service for exposed IoT devices, and correlates
forum interest with device exposure into prioritized risk reports.
"""

__version__ = "0.1.0"
