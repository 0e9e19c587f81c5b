"""Python access to the proof-tutoring experiment core."""

import re
from pathlib import Path

from ._core import (
    Config,
    ScaffoldError,
    bkt_update,
    check_rule_application,
    compute_reward,
    entails,
    nlg,
    normalize_formula,
    report_from_trial,
    run_pipeline,
    stats,
    validate_bank,
)
from ._core import default_bank_dir as _compiled_bank_dir
from ._core import parse_config as _parse_config

__all__ = [
    "Config",
    "ScaffoldError",
    "bank_dir",
    "bkt_update",
    "check_rule_application",
    "compute_reward",
    "default_config",
    "entails",
    "load_config",
    "nlg",
    "normalize_formula",
    "parse_config",
    "report_from_trial",
    "run_pipeline",
    "stats",
    "validate_bank",
]


def bank_dir() -> Path:
    """Problem bank installed with the package, else the one from the source tree."""
    shipped = Path(__file__).parent / "bank"
    return shipped if shipped.is_dir() else Path(_compiled_bank_dir())


def parse_config(text: str, base_dir=None) -> Config:
    """Parse experiment TOML. Without a `bank` key the packaged bank is used."""
    base = Path.cwd() if base_dir is None else Path(base_dir)
    config = _parse_config(text, base)
    if not _sets_bank(text):
        config.bank = bank_dir().resolve()
    return config


def load_config(path) -> Config:
    path = Path(path)
    return parse_config(path.read_text(), path.resolve().parent)


def default_config() -> Config:
    return parse_config("")


_BANK_KEY = re.compile(r"^\s*bank\s*=", re.MULTILINE)
_SECTION = re.compile(r"^\s*\[", re.MULTILINE)


def _sets_bank(text: str) -> bool:
    section = _SECTION.search(text)
    root = text if section is None else text[: section.start()]
    return _BANK_KEY.search(root) is not None
