"""TOML run configurations.

A run file has an optional top-level ``format_version`` and ``command`` and one
table per parameter block.  Unknown tables or keys are rejected.  Numeric
values may be written as short expressions such as ``"pi/2"`` or
``"sqrt(4000)*1e-4"``.  Command-line ``--set table.key=value`` overrides are
applied on top of the file.
"""
import ast
from dataclasses import dataclass
import math
import operator
from pathlib import Path
import sys

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .errors import ConfigError

FORMAT_VERSION = 1

_PARAMS = {"kappa": "float", "gamma": "float", "epsilon": "float",
           "n_total": "float", "truncation": "int"}
_INTEGRATOR = {"method": "str", "t_end": "float", "sampling_stride": "float", "dt": "float",
               "rtol": "float", "atol": "float", "guard": "float", "kernel": "str",
               "max_steps": "int"}

SCHEMAS = {
    "simulate": {
        "params": _PARAMS,
        "initial": {"n": "int", "z0": "float", "dphi0": "float",
                    "perturbation_amplitude": "float", "perturbation_span": "int"},
        "integrator": _INTEGRATOR,
        "growth": {"m": "int", "window": "floats", "ring": "str"},
        "output": {"store_amplitudes": "bool"},
    },
    "bogoliubov-map": {
        "axes": {"kappa": "axis", "epsilon": "axis", "modes": "ints"},
    },
    "portrait": {
        "params": _PARAMS,
        "two_state": {"m": "int", "x_points": "int", "zeta_points": "int"},
    },
    "critical-points": {
        "params": _PARAMS,
        "two_state": {"m": "int", "x_points": "int", "zeta_points": "int"},
    },
    "regime-map": {
        "axes": {"kappa": "axis", "epsilon": "axis"},
        "sweep": {"z0": "float", "n_total": "float", "truncation": "int", "n": "int",
                  "dphi0": "float", "perturbation_amplitude": "float",
                  "perturbation_span": "int", "tau_max": "float", "threshold": "float"},
        "integrator": {k: v for k, v in _INTEGRATOR.items() if k != "t_end"},
    },
    "josephson": {
        "trajectory": {"z0": "float", "dphi0": "float", "lambdas": "floats",
                       "s_end": "float", "stride": "float"},
        "boundary": {"z0": "axis", "dphi0": "floats"},
    },
}

# -- safe arithmetic for expression-valued fields ------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt, "cos": math.cos, "sin": math.sin, "exp": math.exp}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval_node(node.operand))
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise ConfigError(f"unsupported expression element: {ast.dump(node)}")


def evaluate(expr):
    """Evaluate a numeric expression string (``pi``, ``sqrt``, ``+ - * / **``)."""
    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {expr!r}") from exc
    try:
        return _eval_node(tree)
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise ConfigError(f"cannot evaluate {expr!r}: {exc}") from exc


# -- coercion ------------------------------------------------------------------

def _float(v, where):
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        return float(evaluate(v))
    raise ConfigError(f"{where}: expected a number, got {type(v).__name__}")


def _int(v, where):
    f = _float(v, where)
    if f != int(f):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    return int(f)


def _axis(v, where):
    """A list of numbers or a ``{start, stop, num}`` table (inclusive linspace)."""
    if isinstance(v, dict):
        extra = set(v) - {"start", "stop", "num"}
        if extra or not {"start", "stop", "num"} <= set(v):
            raise ConfigError(f"{where}: axis table needs exactly start, stop, num")
        num = _int(v["num"], where + ".num")
        if num < 1:
            raise ConfigError(f"{where}: num must be >= 1")
        return np.linspace(_float(v["start"], where), _float(v["stop"], where), num)
    if isinstance(v, list):
        return np.array([_float(x, where) for x in v], dtype=float)
    return np.array([_float(v, where)])


def _coerce(kind, v, where):
    if kind == "float":
        return _float(v, where)
    if kind == "int":
        return _int(v, where)
    if kind == "bool":
        if not isinstance(v, bool):
            raise ConfigError(f"{where}: expected true/false")
        return v
    if kind == "str":
        if not isinstance(v, str):
            raise ConfigError(f"{where}: expected a string")
        return v
    if kind == "floats":
        if not isinstance(v, list):
            v = [v]
        return [_float(x, where) for x in v]
    if kind == "ints":
        if not isinstance(v, list):
            v = [v]
        return [_int(x, where) for x in v]
    if kind == "axis":
        return _axis(v, where)
    raise AssertionError(kind)


@dataclass(frozen=True)
class RunConfig:
    command: str
    sections: dict            # {table: {key: coerced value}}
    raw: dict                 # the uncoerced merged document, for provenance headers

    def section(self, name):
        return dict(self.sections.get(name, {}))

    def get(self, table, key, default=None):
        return self.sections.get(table, {}).get(key, default)

    def has(self, table):
        return table in self.sections


def _parse_override(text):
    if "=" not in text:
        raise ConfigError(f"override {text!r} must look like table.key=value")
    path, value = text.split("=", 1)
    parts = path.strip().split(".")
    if len(parts) != 2 or not all(parts):
        raise ConfigError(f"override path {path!r} must be table.key")
    try:
        parsed = tomllib.loads(f"v = {value.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        parsed = value.strip()
    return parts[0], parts[1], parsed


def build(command, document=None, overrides=()):
    """Validate ``document`` (a dict from TOML) plus overrides for ``command``."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    doc = {k: (dict(v) if isinstance(v, dict) else v) for k, v in (document or {}).items()}
    for table, key, value in (_parse_override(o) for o in overrides):
        doc.setdefault(table, {})
        if not isinstance(doc[table], dict):
            raise ConfigError(f"{table} is not a table")
        doc[table][key] = value

    version = doc.pop("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ConfigError(f"unsupported format_version {version!r}; expected {FORMAT_VERSION}")
    declared = doc.pop("command", command)
    if declared != command:
        raise ConfigError(f"config is for command {declared!r}, not {command!r}")

    schema = SCHEMAS[command]
    sections = {}
    for table, body in doc.items():
        if table not in schema:
            raise ConfigError(f"unknown table [{table}] for {command}; "
                              f"allowed: {sorted(schema)}")
        if not isinstance(body, dict):
            raise ConfigError(f"[{table}] must be a table")
        allowed = schema[table]
        out = {}
        for key, value in body.items():
            if key not in allowed:
                raise ConfigError(f"unknown key {table}.{key}; allowed: {sorted(allowed)}")
            out[key] = _coerce(allowed[key], value, f"{table}.{key}")
        sections[table] = out
    raw = {"command": command, **doc}
    return RunConfig(command, sections, raw)


def load(command, path=None, overrides=()):
    document = {}
    if path is not None:
        p = Path(path)
        try:
            with open(p, "rb") as fh:
                document = tomllib.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {p}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{p}: invalid TOML: {exc}") from exc
    return build(command, document, overrides)


def make_params_from(section):
    """SystemParams from a [params] table holding either gamma or epsilon."""
    from .model import SystemParams
    if "kappa" not in section:
        raise ConfigError("params.kappa is required")
    has_g, has_e = "gamma" in section, "epsilon" in section
    if has_g == has_e:
        raise ConfigError("give exactly one of params.gamma or params.epsilon")
    n_total = section.get("n_total", 4000.0)
    truncation = section.get("truncation", 15)
    if has_e:
        return SystemParams.from_epsilon(section["kappa"], section["epsilon"], n_total, truncation)
    return SystemParams(section["kappa"], section["gamma"], n_total, truncation)
