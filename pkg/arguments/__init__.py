"""
Command-line and config-file parameters for the simulation front end.

Each ParamGroup declares its options as attributes; an attribute named with
a leading underscore also gets a one-letter shorthand. Values come from three
layers: group defaults, an optional line-oriented ``key = value`` file, and
explicit flags, later layers winning.
"""

import math
from argparse import ArgumentError, ArgumentParser, Namespace
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from model import ConfigError, SystemParams, validate_params
from model.system_params import DEFAULT_GAMMA0, EXCITATION_EPSILON

COMMANDS = ("simulate", "analytic", "critical-lambda", "exponent", "reabsorption", "eternal-nm", "sweep")


class GroupParams:
    """Empty class to hold extracted parameter groups."""
    pass


def _parse_list(item_type):
    def parse(text: str) -> List:
        text = text.strip().strip("[]")
        return [item_type(item) for item in text.replace(";", ",").split(",") if item.strip()]
    parse.__name__ = f"list[{item_type.__name__}]"
    return parse


def _parse_bool(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


class ParamGroup:
    """Base class for parameter groups with automatic argument parsing.

    Options whose default is None take their type from the class-level
    OPTIONAL mapping; list defaults take the element type from LISTS.
    """
    OPTIONAL: Dict[str, type] = {}
    LISTS: Dict[str, type] = {}

    def __init__(self, parser: ArgumentParser, name: str, fill_none: bool = False):
        group = parser.add_argument_group(name)
        self._converters: Dict[str, Any] = {}
        self._defaults: Dict[str, Any] = {}
        for attr_name, default_value in list(vars(self).items()):
            if attr_name in ("_converters", "_defaults"):
                continue
            self._add_argument(group, attr_name, default_value, fill_none)

    def _add_argument(self, group, attr_name: str, default_value: Any, fill_none: bool):
        has_shorthand = attr_name.startswith("_")
        clean_name = attr_name[1:] if has_shorthand else attr_name

        if isinstance(default_value, bool):
            converter = _parse_bool
        elif isinstance(default_value, list):
            converter = _parse_list(self.LISTS.get(clean_name, str))
        elif default_value is None:
            converter = self.OPTIONAL[clean_name]
        else:
            converter = type(default_value)
        self._converters[clean_name] = converter
        self._defaults[clean_name] = default_value
        final_default = None if fill_none else default_value

        arg_names = [f"--{clean_name}"]
        if "_" in clean_name:
            arg_names.append(f"--{clean_name.replace('_', '-')}")
        if has_shorthand:
            arg_names.append(f"-{clean_name[0]}")

        if isinstance(default_value, bool):
            group.add_argument(*arg_names, dest=clean_name, default=final_default, action="store_true")
        else:
            group.add_argument(*arg_names, dest=clean_name, default=final_default, type=converter)

    @property
    def defaults(self) -> Dict[str, Any]:
        return dict(self._defaults)

    @property
    def converters(self) -> Dict[str, Any]:
        return dict(self._converters)

    def extract(self, args: Namespace) -> GroupParams:
        group = GroupParams()
        for arg_name, arg_value in vars(args).items():
            if arg_name in self._defaults:
                setattr(group, arg_name, arg_value)
        return group


class SystemParamGroup(ParamGroup):
    OPTIONAL = {"lambda_abs": float, "abs_tol": float, "rel_tol": float}

    def __init__(self, parser: ArgumentParser, sentinel: bool = False):
        self._n = 1
        self.gamma0 = DEFAULT_GAMMA0
        # lambda in units of gamma0 unless lambda_abs is given
        self.lambda_over_gamma0 = 0.0
        self.lambda_abs = None
        self.omega0 = 1.0
        self.abs_tol = None
        self.rel_tol = None
        self.excitation_epsilon = EXCITATION_EPSILON
        super().__init__(parser, "System Parameters", sentinel)


class GridParamGroup(ParamGroup):
    OPTIONAL = {"t_end": float}

    def __init__(self, parser: ArgumentParser, sentinel: bool = False):
        self.t_start = 0.0
        self.t_end = None
        self.n_samples = 4001
        self.adaptive = False
        self.solver = "auto"
        super().__init__(parser, "Grid Parameters", sentinel)


class SweepParamGroup(ParamGroup):
    OPTIONAL = {"threads": int}
    LISTS = {"n_list": int, "lambda_list": float}

    def __init__(self, parser: ArgumentParser, sentinel: bool = False):
        self.n_list = []
        # spectral widths in units of gamma0
        self.lambda_list = []
        self.threads = None
        self.rel_width = 1e-3
        self.dps = 50
        super().__init__(parser, "Sweep Parameters", sentinel)


class OutputParamGroup(ParamGroup):
    def __init__(self, parser: ArgumentParser, sentinel: bool = False):
        self._output = ""
        self.format = "csv"
        self.rates = ""
        self.quiet = False
        self.verbosity = 0
        super().__init__(parser, "Output Parameters", sentinel)


@dataclass(frozen=True)
class GridSpec:
    t_start: float = 0.0
    t_end: Optional[float] = None
    n_samples: int = 4001
    adaptive: bool = False


@dataclass(frozen=True)
class RunConfig:
    """One fully resolved invocation."""
    command: str
    params: SystemParams
    grid: GridSpec = field(default_factory=GridSpec)
    solver: str = "auto"
    n_list: Tuple[int, ...] = ()
    lambda_list: Tuple[float, ...] = ()
    threads: Optional[int] = None
    rel_width: float = 1e-3
    dps: int = 50
    output: str = ""
    format: str = "csv"
    rates: str = ""
    quiet: bool = False
    verbosity: int = 0
    sources: Dict[str, str] = field(default_factory=dict)

    @property
    def lambdas(self) -> Tuple[float, ...]:
        """Sweep spectral widths in absolute units."""
        return tuple(ratio * self.params.gamma0 for ratio in self.lambda_list)


def build_parser(fill_none: bool = True) -> Tuple[ArgumentParser, List[ParamGroup]]:
    parser = ArgumentParser(prog="superrad", description="Exact cooperative radiation in a lossy cavity",
                            exit_on_error=False)
    parser.add_argument("command", nargs="?", default=None, help=" | ".join(COMMANDS))
    parser.add_argument("--config", "-c", default=None, help="key = value configuration file")
    groups = [SystemParamGroup(parser, fill_none), GridParamGroup(parser, fill_none),
              SweepParamGroup(parser, fill_none), OutputParamGroup(parser, fill_none)]
    return parser, groups


def read_config_text(text: str, converters: Dict[str, Any]) -> Dict[str, Any]:
    """Parse ``key = value`` lines; '#' starts a comment, keys accept dashes."""
    values: Dict[str, Any] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_number}: expected 'key = value'", line=line_number, field=None)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "command":
            if value not in COMMANDS:
                raise ConfigError(f"line {line_number}: unknown command {value!r}", line=line_number, field=key)
            values[key] = value
            continue
        if key not in converters:
            raise ConfigError(f"line {line_number}: unknown key {key!r}", line=line_number, field=key)
        try:
            values[key] = converters[key](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"line {line_number}: {key} = {value!r}: {exc}", line=line_number, field=key) from None
    return values


def parse_config(argv: Optional[Sequence[str]] = None, text: Optional[str] = None) -> RunConfig:
    """Resolve flags, an optional config file (or text) and defaults into a RunConfig.

    An explicitly given flag wins over the file, the file wins over defaults.
    """
    parser, groups = build_parser(fill_none=True)
    try:
        cmdline, unknown = parser.parse_known_args(list(argv) if argv is not None else None)
    except ArgumentError as exc:
        field_name = exc.argument_name.lstrip("-").replace("-", "_") if exc.argument_name else None
        raise ConfigError(str(exc), line=None, field=field_name) from None
    if unknown:
        raise ConfigError(f"unknown arguments: {' '.join(unknown)}", line=None, field=unknown[0].lstrip("-"))

    defaults: Dict[str, Any] = {}
    converters: Dict[str, Any] = {}
    for group in groups:
        defaults.update(group.defaults)
        converters.update(group.converters)

    if text is None and cmdline.config:
        path = Path(cmdline.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}", line=None, field="config")
        text = path.read_text(encoding="utf-8")
    file_values = read_config_text(text, converters) if text else {}

    merged = dict(defaults)
    sources = {key: "default" for key in defaults}
    for key, value in file_values.items():
        merged[key] = value
        sources[key] = "file"
    for key, value in vars(cmdline).items():
        if key in defaults and value is not None:
            merged[key] = value
            sources[key] = "flag"

    command = cmdline.command or file_values.get("command")
    if command is None:
        raise ConfigError("missing command", line=None, field="command")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}, expected one of {', '.join(COMMANDS)}",
                          line=None, field="command")

    if merged["lambda_abs"] is not None:
        lam = merged["lambda_abs"]
    else:
        lam = merged["lambda_over_gamma0"] * merged["gamma0"]
    if isinstance(lam, float) and not math.isfinite(lam):
        raise ConfigError("lambda must be finite", line=None, field="lambda_over_gamma0")
    params = validate_params(SystemParams(
        n_atoms=merged["n"],
        gamma0=merged["gamma0"],
        lam=lam,
        omega0=merged["omega0"],
        abs_tol=merged["abs_tol"],
        rel_tol=merged["rel_tol"],
        excitation_epsilon=merged["excitation_epsilon"],
    ))
    grid = GridSpec(merged["t_start"], merged["t_end"], merged["n_samples"], merged["adaptive"])
    if grid.n_samples < 2:
        raise ConfigError("n_samples must be at least 2", line=None, field="n_samples")
    if grid.t_end is not None and grid.t_end <= grid.t_start:
        raise ConfigError("t_end must exceed t_start", line=None, field="t_end")
    if merged["format"] not in ("csv", "json"):
        raise ConfigError(f"unknown format {merged['format']!r}", line=None, field="format")
    if merged["rates"] not in ("", "canonical", "noncanonical"):
        raise ConfigError(f"unknown rate kind {merged['rates']!r}", line=None, field="rates")

    return RunConfig(
        command=command,
        params=params,
        grid=grid,
        solver=merged["solver"],
        n_list=tuple(merged["n_list"]),
        lambda_list=tuple(merged["lambda_list"]),
        threads=merged["threads"],
        rel_width=merged["rel_width"],
        dps=merged["dps"],
        output=merged["output"],
        format=merged["format"],
        rates=merged["rates"],
        quiet=merged["quiet"],
        verbosity=merged["verbosity"],
        sources=sources,
    )
