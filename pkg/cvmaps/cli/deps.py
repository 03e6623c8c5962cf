import argparse
import json
import logging
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from cvmaps.core.config import settings
from cvmaps.core.exceptions import ConfigError
from cvmaps.schemas.experiment import ExperimentConfig

logger = logging.getLogger(__name__)


def _field_path(loc) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate an experiment config, mapping every failure to ``ConfigError``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(f"{_field_path(err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"{source}: {problems}") from e


def load_config(path: Optional[Path] = None) -> ExperimentConfig:
    path = Path(path or settings.DEFAULT_CONFIG)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    config = parse_config(text, str(path))
    logger.debug(f"Loaded config {path}")
    return config


def get_config(args: argparse.Namespace) -> ExperimentConfig:
    return load_config(args.config)


def get_output_dir(args: argparse.Namespace, config: Optional[ExperimentConfig] = None) -> Path:
    """``--out`` wins over the config's ``output_dir``, which wins over the settings default."""
    if getattr(args, "out", None):
        return Path(args.out)
    if config is not None and config.output_dir is not None:
        return config.output_dir
    return settings.OUTPUT_DIR


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help=f"experiment config (default {settings.DEFAULT_CONFIG})")
    parser.add_argument("--out", type=Path, default=None, help="output directory, overrides the config")
