"""Python access to the rallyviz engine.

Every function takes file paths or plain Python values and returns decoded
JSON documents in the same shapes the CLI and HTTP service produce.
"""

import json
import os

from . import _core
from ._core import RallyvizError

__all__ = [
    "RallyvizError",
    "analyze",
    "pyramid",
    "corpus_stats",
    "recommend",
    "compile_schedule",
    "render",
    "run_cli",
]


def analyze(tracking_path, tactics_path=None):
    """Event and tactic documents of a rally, plus rule diagnostics and the import report."""
    return json.loads(_core.analyze(os.fspath(tracking_path), _opt_path(tactics_path)))


def pyramid(tracking_path, tactics_path=None, span=None):
    """The data pyramid, optionally brushed to an inclusive (start, end) frame span."""
    return json.loads(_core.pyramid(os.fspath(tracking_path), _opt_path(tactics_path), span))


def corpus_stats(corpus_path):
    return json.loads(_core.corpus_stats(os.fspath(corpus_path)))


def recommend(corpus_path, attribute, order):
    return json.loads(_core.recommend(os.fspath(corpus_path), attribute, order))


def compile_schedule(script, tracking_path):
    """Schedule for a script given as a dict (or JSON text) against a tracking file's video."""
    text = script if isinstance(script, str) else json.dumps(script)
    return json.loads(_core.compile_schedule(text, os.fspath(tracking_path)))


def render(script_path, tracking_path, out_dir, tactics_path=None, frames_dir=None):
    """Writes overlays (and composited frames when frames_dir is given); returns the manifest."""
    return json.loads(
        _core.render(
            os.fspath(script_path),
            os.fspath(tracking_path),
            os.fspath(out_dir),
            _opt_path(tactics_path),
            _opt_path(frames_dir),
        )
    )


def run_cli(*args):
    """Runs the rallyviz command in-process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([os.fspath(a) for a in args])


def _opt_path(p):
    return None if p is None else os.fspath(p)
