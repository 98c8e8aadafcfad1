"""Specularity reconstruction and prediction on curved surfaces."""

import json

from . import _core
from ._core import JolimasError, dispatch, ellipse_error, metric_definition, render, spearman

__all__ = [
    "JolimasError",
    "detect",
    "dispatch",
    "ellipse_error",
    "main",
    "metric_definition",
    "predict",
    "reconstruct",
    "render",
    "spearman",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def detect(image, view_id="view", config=None):
    """Detection of the main specularity in `image` as a dict."""
    return json.loads(_core.detect(image, view_id, _text(config) if config else ""))


def reconstruct(scene, images, mode="canonical", base_dir="."):
    """Model dict reconstructed from {view_id: image} for the views of `scene`."""
    return json.loads(_core.reconstruct(_text(scene), dict(images), mode, base_dir))


def predict(model, scene, view_id, mode="canonical", base_dir="."):
    """Predicted specularity of `view_id` as a dict."""
    return json.loads(_core.predict(_text(model), _text(scene), view_id, mode, base_dir))


def main(argv=None):
    import sys

    return dispatch(list(sys.argv[1:] if argv is None else argv))
