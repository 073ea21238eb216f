"""Scenario configuration, runners, CSV export and run manifests."""

from .config import Scenario, load_config, parse_config
from .manifest import RunManifest, verify_manifest
from .scenarios import RUNNERS
