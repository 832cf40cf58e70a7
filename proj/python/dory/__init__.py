"""Prompt recovery from LLM outputs and token logprobs.

Thin wrapper over the compiled extension. The bundled example banks live in
``asset_dir()``; set DORY_ASSETS to point somewhere else.
"""

import os
from pathlib import Path

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401


def asset_dir() -> Path:
    """Directory holding the example banks (clue/draft/key-sentence/jailbreak)."""
    env = os.environ.get("DORY_ASSETS")
    if env:
        return Path(env)
    packaged = Path(__file__).resolve().parent / "assets"
    if packaged.is_dir():
        return packaged
    # source checkout fallback
    return Path(__file__).resolve().parents[2] / "assets"


def load_banks():
    """ExampleBank loaded from :func:`asset_dir`."""
    from ._core import ExampleBank

    return ExampleBank.load(str(asset_dir()))
