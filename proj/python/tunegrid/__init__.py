"""Histogram scoring, toy generator, interpolation cache and headless simulation."""

import json

from . import _core
from ._core import Error

__all__ = [
    "Error",
    "InterpolationCache",
    "default_model",
    "expected_reference",
    "fit_score",
    "generate_chunk",
    "merge",
    "simulate",
]


def _dump(doc):
    return "" if doc is None else json.dumps(doc)


def default_model():
    return json.loads(_core.default_model())


def generate_chunk(params, n_events, seed, model=None):
    """HistogramSet dict for n_events sampled at params."""
    return json.loads(_core.generate_chunk(list(params), n_events, seed, _dump(model)))


def expected_reference(params, model=None):
    """Exact bin probabilities per observable."""
    return json.loads(_core.expected_reference(list(params), _dump(model)))


def merge(partials):
    return json.loads(_core.merge([json.dumps(p) for p in partials]))


def fit_score(observed, reference):
    """{"chi2", "ndf", "reduced"} of a HistogramSet against a reference dict."""
    return json.loads(_core.fit_score(json.dumps(observed), json.dumps(reference)))


class InterpolationCache:
    def __init__(self, space=None, max_samples=1024):
        if space is None:
            space = default_model()["space"]
        self._cache = _core.InterpolationCache(json.dumps(space), max_samples)

    def add_sample(self, params, result):
        self._cache.add_sample(list(params), json.dumps(result))

    def estimate(self, params):
        """(HistogramSet dict, quality)."""
        doc, quality = self._cache.estimate(list(params))
        return json.loads(doc), quality

    def __len__(self):
        return len(self._cache)


def simulate(workers=8, budget=30, seed=1, target_events=20000, chunk_events=2000, churn=0.0, speed_spread=0.0):
    """Report dict of a headless run with the scripted coordinate-scan player."""
    return json.loads(_core.simulate(workers, budget, seed, target_events, chunk_events, churn, speed_spread))
