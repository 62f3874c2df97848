"""Bundled calibration fixtures: a four-module product page and two user scripts.

The product page splits 589,371 script bytes so that the shared runtime plus
the two immediately hydrated modules (header, productDetail) come to 104,938.
"""

from importlib import resources

from .manifest import PageManifest, parse_manifest
from .scenario import UserScenario, parse_scenario

SCENARIOS = ("idle", "walkthrough")


def _read(name: str) -> str:
    return resources.files("hydrasim").joinpath("data", name).read_text(encoding="utf-8")


def product_page() -> PageManifest:
    return parse_manifest(_read("product_page.json"))


def scenario(name: str = "idle") -> UserScenario:
    """``idle``: the user never scrolls or clicks. ``walkthrough``: scroll to
    the recommendations at 3 s, click one at 5 s."""
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; expected one of {SCENARIOS}")
    return parse_scenario(_read(f"scenario_{name}.json"))


def data_path(name: str):
    return resources.files("hydrasim").joinpath("data", name)
