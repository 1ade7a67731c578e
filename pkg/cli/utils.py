"""
Shared helpers for CLI commands: error mapping, config loading and output.
"""
import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Type, TypeVar

if sys.version_info >= (3, 11):
    import tomllib
else:  # Python 3.10: tomli is the backport tomllib was taken from
    import tomli as tomllib

import click
from pydantic import BaseModel, ValidationError

from core.errors import ConfigurationError, PivqError

logger = logging.getLogger("pivq.cli")

# Exit codes
EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_USAGE_ERROR = 2

ModelT = TypeVar("ModelT", bound=BaseModel)


class DataError(click.ClickException):
    """Bad input data or failed precondition; exits with code 1."""

    exit_code = EXIT_DATA_ERROR


def handle_data_error(command: Callable) -> Callable:
    """
    Map library exceptions raised inside a command to exit codes.

    PivqError, OSError and pydantic ValidationError become DataError (exit 1)
    with a one-line message. click's own usage errors pass through (exit 2).
    Anything else is logged with its traceback and reported as an internal
    error (exit 1).
    """

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except click.ClickException:
            raise
        except ValidationError as e:
            first = e.errors()[0]
            location = ".".join(str(part) for part in first.get("loc", ())) or "config"
            raise DataError(f"invalid configuration: {location}: {first.get('msg')}") from e
        except PivqError as e:
            logger.warning("%s failed: %s", command.__name__, e)
            raise DataError(str(e)) from e
        except OSError as e:
            raise DataError(f"{e.strerror or e}: {e.filename}" if e.filename else str(e)) from e
        except Exception as e:
            logger.exception("Unhandled exception in %s", command.__name__)
            raise DataError("internal error, run with PIVQ_LOG_LEVEL=DEBUG for details") from e

    return wrapper


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """
    Read a JSON or TOML config file into a dict (TOML when the suffix is .toml).

    Raises:
        ConfigurationError: the file is not valid JSON/TOML or not a mapping
    """
    if path is None:
        return {}
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = tomllib.loads(text) if path.suffix.lower() == ".toml" else json.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigurationError(f"{path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a mapping of config keys")
    return data


def build_config(model: Type[ModelT], path: Optional[str], **overrides) -> ModelT:
    """Config file values overridden by every flag that was given."""
    values = load_config_file(path)
    values.update({key: value for key, value in overrides.items() if value is not None})
    return model.model_validate(values)


def write_report(report: BaseModel, path: Optional[str]) -> None:
    """Write a report as indented JSON to `path`, or to stdout when no path is given."""
    text = report.model_dump_json(indent=2)
    if path is None:
        click.echo(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")
        logger.info("Wrote %s", path)


def write_text(text: str, path: Optional[str]) -> None:
    if path is None:
        click.echo(text, nl=False)
    else:
        Path(path).write_text(text, encoding="utf-8")
        logger.info("Wrote %s", path)
