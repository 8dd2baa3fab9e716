"""Access to the frozen empirical constants shipped with the package.

The rate theory leaves absolute constants unspecified; the package pins them
empirically once (see ``scripts/calibrate_fixtures.py``) and ships the result
as package data.  ``c_star`` is the Chebyshev envelope constant calibrated at
d=256, s=16.
"""

from __future__ import annotations

import json
from importlib import resources


def load_calibration() -> dict:
    text = resources.files("sparsefunc").joinpath("data/calibration.json").read_text()
    return json.loads(text)


def c_star() -> float:
    return float(load_calibration()["c_star"])
