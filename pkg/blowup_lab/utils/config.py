"""
Configuration utilities for the blow-up laboratory.
Parses the sectioned key-value experiment file and exposes dotted access to its values.
"""

import configparser
import re
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from blowup_lab.utils.errors import ConfigError

# Value types understood by the schema
INT = "int"
FLOAT = "float"
STR = "str"
FLOATS = "floats"
INTS = "ints"
STRS = "strs"

FUNCTION_PARAMS: Dict[str, str] = {
    "kind": STR,
    "value": FLOAT,
    "base": FLOAT,
    "amp": FLOAT,
    "center": FLOAT,
    "width": FLOAT,
    "nodes": FLOATS,
    "values": FLOATS,
}

SCHEMA: Dict[str, Dict[str, str]] = {
    "problem": {
        "N": INT,
        "p": FLOAT,
        "domain_kind": STR,
        "extent": FLOAT,
        "potential_floor": FLOAT,
        "M": FLOAT,
        **{f"V.{key}": kind for key, kind in FUNCTION_PARAMS.items()},
        **{f"phi.{key}": kind for key, kind in FUNCTION_PARAMS.items()},
    },
    "solver": {
        "m": INT,
        "cfl_safety": FLOAT,
        "reaction_safety": FLOAT,
        "u_stop": FLOAT,
        "max_steps": INT,
        "series_resolution": FLOAT,
        "decay_ratio": FLOAT,
    },
    "sweep": {
        "Ms": FLOATS,
        "workers": INT,
        "theorem2_tolerance": FLOAT,
    },
    "selfsim": {
        "y_max": FLOAT,
        "m_y": INT,
        "k_list": INTS,
        "frame_count": INT,
        "resolve_cells": FLOAT,
        "cutoff_R": FLOAT,
    },
    "output": {
        "dir": STR,
        "formats": STRS,
    },
}

REQUIRED_PROBLEM_KEYS = ("N", "p", "domain_kind", "extent", "V.kind", "phi.kind")

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")


class Config:
    """
    Manages the settings of one experiment.

    Values live in a two-level mapping, section -> key -> typed value. Keys
    are addressed with a dotted path whose first component is the section,
    so ``get("problem.V.kind")`` reads the ``V.kind`` key of ``[problem]``.
    """

    def __init__(self, values: Optional[Dict[str, Dict[str, Any]]] = None):
        """
        Initialize the configuration.

        Args:
            values: Parsed section values; defaults fill every missing key.
        """
        self.config: Dict[str, Dict[str, Any]] = self._get_default_config()
        for section, entries in (values or {}).items():
            self.config.setdefault(section, {}).update(entries)

    @classmethod
    def load(cls, config_file: Union[str, Path]) -> "Config":
        """
        Load a configuration file.

        Args:
            config_file: Path of the INI-style experiment file.

        Returns:
            The validated configuration.
        """
        try:
            text = Path(config_file).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigError(f"cannot read {config_file}: {e}") from e
        return parse_config(text)

    def save(self, config_file: Union[str, Path]) -> None:
        """Write the configuration to a file."""
        Path(config_file).write_text(self.serialize(), encoding="utf-8")

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value.

        Args:
            key: Dotted key, ``section.key``.
            default: Returned when the key is absent.

        Returns:
            The configuration value, or the default if not found.
        """
        section, _, name = key.partition(".")
        if not name:
            return self.config.get(section, default)
        return self.config.get(section, {}).get(name, default)

    def set(self, key: str, value: Any) -> None:
        """
        Set a configuration value.

        Args:
            key: Dotted key, ``section.key``.
            value: The value to set; it is checked against the schema.
        """
        section, _, name = key.partition(".")
        kind = _schema_type(section, name)
        if kind is None:
            raise ConfigError(f"unknown key '{key}'", key=key)
        self.config.setdefault(section, {})[name] = value

    def get_all(self) -> Dict[str, Dict[str, Any]]:
        """
        Get all configuration values.

        Returns:
            A deep copy of every section.
        """
        return deepcopy(self.config)

    def reset(self) -> None:
        """Reset every section except ``[problem]`` to the defaults."""
        problem = self.config.get("problem", {})
        self.config = self._get_default_config()
        self.config["problem"] = problem

    def section(self, name: str) -> Dict[str, Any]:
        """Return a copy of one section."""
        return dict(self.config.get(name, {}))

    def function_params(self, prefix: str) -> Dict[str, Any]:
        """
        Collect the parameters of a function spec from ``[problem]``.

        Args:
            prefix: ``V`` or ``phi``.

        Returns:
            Parameter mapping without the prefix, e.g. ``{"kind": "constant", "value": 1.0}``.
        """
        marker = f"{prefix}."
        return {
            key[len(marker):]: value
            for key, value in self.config.get("problem", {}).items()
            if key.startswith(marker)
        }

    def serialize(self) -> str:
        """
        Render the configuration as INI text.

        Returns:
            Text that ``parse_config`` maps back to an equal configuration.
        """
        lines: List[str] = []
        for section in SCHEMA:
            entries = self.config.get(section, {})
            if not entries:
                continue
            lines.append(f"[{section}]")
            for key, value in entries.items():
                lines.append(f"{key} = {_format_value(value)}")
            lines.append("")
        return "\n".join(lines)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Config):
            return NotImplemented
        return self.config == other.config

    def __repr__(self) -> str:
        return f"Config({self.config!r})"

    def _get_default_config(self) -> Dict[str, Dict[str, Any]]:
        """
        Get the default configuration.

        Returns:
            The documented defaults for every section except ``[problem]``.
        """
        return {
            "problem": {},
            "solver": {
                "m": 512,
                "cfl_safety": 0.4,
                "reaction_safety": 0.05,
                "u_stop": 1e8,
                "max_steps": 50_000_000,
                "series_resolution": 1e-3,
                "decay_ratio": 1e-3,
            },
            "sweep": {
                "Ms": [8.0, 16.0, 32.0, 64.0],
                "workers": 1,
                "theorem2_tolerance": 0.1,
            },
            "selfsim": {
                "y_max": 16.0,
                "m_y": 1024,
                "k_list": [1, 2, 3],
                "frame_count": 8,
                "resolve_cells": 10.0,
                "cutoff_R": 2.0,
            },
            "output": {
                "dir": "blowup_out",
                "formats": ["csv", "json"],
            },
        }


def parse_config(text: str) -> Config:
    """
    Parse experiment text into a validated configuration.

    Args:
        text: INI-style text with ``[problem]``, ``[solver]``, ``[sweep]``,
            ``[selfsim]`` and ``[output]`` sections.

    Returns:
        The configuration with defaults applied to every omitted key.

    Raises:
        ConfigError: On unknown sections or keys, duplicate keys, type
            mismatches or a missing ``[problem]`` section; the error carries
            the 1-based line number of the first offending line.
    """
    parser = configparser.ConfigParser(
        interpolation=None,
        strict=True,
        comment_prefixes=("#", ";"),
        inline_comment_prefixes=("#",),
        default_section="__defaults__",
    )
    parser.optionxform = str  # keys are case-sensitive (V vs phi, Ms)

    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"duplicate key '{e.option}' in [{e.section}]", line=e.lineno, key=e.option) from e
    except configparser.DuplicateSectionError as e:
        raise ConfigError(f"duplicate section [{e.section}]", line=e.lineno) from e
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("key outside of any section", line=e.lineno) from e
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigError("malformed line", line=line) from e

    locations = _index_lines(text)
    values: Dict[str, Dict[str, Any]] = {}

    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", line=locations.get((section, None)))
        values[section] = {}
        for key, raw in parser.items(section):
            line = locations.get((section, key))
            kind = _schema_type(section, key)
            if kind is None:
                raise ConfigError(f"unknown key '{key}' in [{section}]", line=line, key=key)
            values[section][key] = _coerce(raw, kind, key, line)

    if "problem" not in values:
        raise ConfigError("missing [problem] section")

    for key in REQUIRED_PROBLEM_KEYS:
        if key not in values["problem"]:
            raise ConfigError(
                f"missing required key '{key}' in [problem]",
                line=locations.get(("problem", None)),
                key=key,
            )

    return Config(values)


def _schema_type(section: str, key: str) -> Optional[str]:
    """Look up the declared type of a key, None when unknown."""
    return SCHEMA.get(section, {}).get(key)


def _index_lines(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    """Map (section, key) and (section, None) to 1-based line numbers."""
    index: Dict[Tuple[str, Optional[str]], int] = {}
    section: Optional[str] = None
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION_RE.match(line)
        if header:
            section = header.group(1).strip()
            index.setdefault((section, None), number)
            continue
        match = _KEY_RE.match(line)
        if match and section is not None:
            index.setdefault((section, match.group(1).strip()), number)
    return index


def _is_quoted(raw: str) -> bool:
    return len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in ("'", '"')


def _coerce(raw: str, kind: str, key: str, line: Optional[int]) -> Any:
    """Convert a raw string to the schema type."""
    raw = raw.strip()

    def mismatch(expected: str) -> ConfigError:
        return ConfigError(f"key '{key}' expects {expected}, got {raw!r}", line=line, key=key)

    if kind == STR:
        return raw[1:-1] if _is_quoted(raw) else raw
    if kind == STRS:
        return [item.strip() for item in raw.split(",") if item.strip()]
    if _is_quoted(raw):
        raise mismatch(kind)

    if kind in (FLOATS, INTS):
        items = [item.strip() for item in raw.split(",") if item.strip()]
        if not items:
            raise mismatch("a non-empty list")
        scalar = INT if kind == INTS else FLOAT
        return [_coerce(item, scalar, key, line) for item in items]

    try:
        number = float(raw)
    except ValueError:
        raise mismatch("an integer" if kind == INT else "a number") from None

    if kind == INT:
        if not number.is_integer():
            raise mismatch("an integer")
        return int(number)
    return number


def _format_value(value: Any) -> str:
    """Format a typed value for INI output."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(item) for item in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)
