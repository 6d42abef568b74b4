"""
Per-(transform, alpha) cache of gamma estimates, optionally kept on disk.

Estimates are keyed by the transform fingerprint, alpha and every estimator
setting that changes the numbers (M, sample count, seed, chunk size and
the degenerate-lattice jitter and threshold), so a cached value
is always the value a fresh run would produce. Transform independence is
something we test, not something the cache assumes.
"""

import json
import logging
import os
from dataclasses import asdict
from typing import Dict, Optional

from analysis.theory import GammaEstimate, GammaEstimator
from coding.transform import OrthogonalTransform


def cache_key(t: OrthogonalTransform, alpha: float, estimator: GammaEstimator) -> str:
    return (f"{t.fingerprint}|alpha={alpha:.9g}|M={estimator.m_range}"
            f"|n={estimator.samples}|seed={estimator.seed}|chunk={estimator.chunk}"
            f"|jitter={estimator.jitter:.9g}|degenerate={estimator.degenerate_threshold:.9g}")


class GammaCache:
    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.entries: Dict[str, GammaEstimate] = {}
        self.hits = 0
        self.logger = logging.getLogger(self.__class__.__name__)
        if path and os.path.exists(path):
            self.load(path)

    def get_or_estimate(self, t: OrthogonalTransform, alpha: float,
                        estimator: GammaEstimator) -> GammaEstimate:
        key = cache_key(t, alpha, estimator)
        if key in self.entries:
            self.hits += 1
            return self.entries[key]
        est = estimator.estimate(t, alpha)
        self.entries[key] = est
        return est

    # --------------------------------------------------------------- io

    def save(self, path: Optional[str] = None) -> str:
        path = path or self.path
        if not path:
            raise ValueError("no cache path to save to")
        data = {k: asdict(v) for k, v in sorted(self.entries.items())}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2)
        self.logger.info("saved %d gamma estimates to %s", len(data), path)
        return path

    def load(self, path: str) -> None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
            self.entries.update({k: GammaEstimate(**v) for k, v in data.items()})
        except (OSError, TypeError, ValueError) as exc:
            # A damaged cache only costs a recomputation.
            self.logger.warning("ignoring unreadable gamma cache %s: %s", path, exc)
