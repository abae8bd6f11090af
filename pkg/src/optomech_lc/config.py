"""Run configuration: an INI document read with :mod:`configparser`.

Example::

    [params]
    omega_m = 5
    g = 1.5
    gamma_m = 3e-5
    delta = 5
    omega_drive = 0.05

    [run]
    engine = semiclassical
    rng_seed = 0

    [sweep]
    param = delta
    start = 3.5
    stop = 6.5
    count = 61

Sections ``[semiclassical]``, ``[langevin]``, ``[lindblad]`` and
``[spectrum]`` hold the engine options; keys are the field names of the
corresponding option classes.  ``[series]`` (``param`` and a comma-separated
``values`` list) repeats the sweep for several values of a second parameter.
Unknown sections or keys raise :class:`~optomech_lc.errors.UnknownField`.
"""
import configparser
import dataclasses
import hashlib
import re
import typing
from dataclasses import dataclass, field
from typing import Optional

from .errors import ParseError, UnknownField
from .langevin import SdeConfig
from .lindblad.liouvillian import HilbertConfig
from .params import PARAM_FIELDS, SystemParams
from .semiclassical.options import SemiclassicalOptions

ENGINES = ("semiclassical", "langevin", "lindblad")
REQUIRED_PARAMS = ("omega_m", "g", "gamma_m", "delta", "omega_drive")


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: float
    stop: float
    count: int = 1

    def __post_init__(self):
        if self.param not in PARAM_FIELDS:
            raise ValueError(f"cannot sweep unknown parameter {self.param!r}")
        if self.count < 1:
            raise ValueError("sweep count must be >= 1")
        if self.start > self.stop:
            raise ValueError("sweep start must not exceed stop")

    def values(self):
        if self.count == 1:
            return [float(self.start)]
        step = (self.stop - self.start) / (self.count - 1)
        return [float(self.start + i * step) for i in range(self.count)]


@dataclass(frozen=True)
class SeriesSpec:
    param: str
    values: tuple

    def __post_init__(self):
        if self.param not in PARAM_FIELDS:
            raise ValueError(f"unknown series parameter {self.param!r}")
        if not self.values:
            raise ValueError("series needs at least one value")


@dataclass(frozen=True)
class SpectrumConfig:
    """Linewidth extraction for the lindblad engine (off by default: slow)."""

    enabled: bool = False
    points: int = 60
    half_widths: float = 5.0


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    engine: str = "semiclassical"
    rng_seed: int = 0
    sweep: Optional[SweepSpec] = None
    series: Optional[SeriesSpec] = None
    semiclassical: SemiclassicalOptions = field(default_factory=SemiclassicalOptions)
    langevin: SdeConfig = field(default_factory=SdeConfig)
    lindblad: HilbertConfig = field(default_factory=HilbertConfig)
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)

    def __post_init__(self):
        if self.engine != "all" and self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES + ('all',)}, got {self.engine!r}")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be an unsigned 64-bit integer")

    @property
    def engines(self):
        return ENGINES if self.engine == "all" else (self.engine,)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def fingerprint(self):
        """Short SHA-256 of the canonical text form."""
        return hashlib.sha256(dump_config(self).encode()).hexdigest()[:16]


# Sections whose keys map one-to-one onto dataclass fields.
_OPTION_SECTIONS = {
    "semiclassical": SemiclassicalOptions,
    "langevin": SdeConfig,
    "lindblad": HilbertConfig,
    "spectrum": SpectrumConfig,
}
# rng_seed lives in [run] and is shared by every engine
_SKIP = {"langevin": {"rng_seed"}}
_SECTIONS = ("params", "run", "sweep", "series") + tuple(_OPTION_SECTIONS)


def _key_lines(text):
    """Map ``(section, key)`` to its 1-based line number."""
    lines = {}
    section = None
    for no, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = no
            continue
        m = re.match(r"\s*([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), no)
    return lines


def _coerce(raw, hint, where):
    origin = typing.get_origin(hint)
    if origin is typing.Union:
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        if raw.strip().lower() in ("", "none", "auto"):
            return None
        hint = args[0]
    text = raw.strip()
    try:
        if hint is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if hint is int:
            return int(text, 0)
        if hint is float:
            return float(text)
        return text
    except ValueError as exc:
        raise ParseError(str(exc), *where) from None


def _build(cls, items, section, lines, skip=()):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)} - set(skip)
    kwargs = {}
    for key, raw in items:
        where = (lines.get((section, key)), f"{section}.{key}")
        if key not in names:
            raise UnknownField(f"unknown key {key!r} in [{section}]", *where)
        kwargs[key] = _coerce(raw, hints[key], where)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), lines.get((section, None)), section) from None


def load_config(text, strict=True):
    """Parse an INI document into a :class:`RunConfig`.

    With ``strict=False`` unknown keys and sections are ignored.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("document must start with a [section] header", exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.option!r}", exc.lineno,
                         f"{exc.section}.{exc.option}") from None
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", exc.lineno, exc.section) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ParseError("malformed line (expected key = value)", line) from None
    lines = _key_lines(text)

    for section in parser.sections():
        if section not in _SECTIONS and strict:
            raise UnknownField(f"unknown section [{section}]", lines.get((section, None)),
                               section)

    def items(section):
        if not parser.has_section(section):
            return []
        return list(parser.items(section))

    def pick(section, allowed):
        out = []
        for key, raw in items(section):
            if key in allowed:
                out.append((key, raw))
            elif strict:
                raise UnknownField(f"unknown key {key!r} in [{section}]",
                                   lines.get((section, key)), f"{section}.{key}")
        return out

    if not parser.has_section("params"):
        raise ParseError("missing [params] section")
    params = _build(SystemParams, pick("params", PARAM_FIELDS), "params", lines)

    run = dict(pick("run", ("engine", "rng_seed")))
    kwargs = {"params": params}
    if "engine" in run:
        kwargs["engine"] = run["engine"].strip()
    if "rng_seed" in run:
        kwargs["rng_seed"] = _coerce(run["rng_seed"], int,
                                     (lines.get(("run", "rng_seed")), "run.rng_seed"))
    if parser.has_section("sweep"):
        kwargs["sweep"] = _build(SweepSpec, pick("sweep", ("param", "start", "stop", "count")),
                                 "sweep", lines)
    if parser.has_section("series"):
        raw = dict(pick("series", ("param", "values")))
        where = (lines.get(("series", "values")), "series.values")
        if "param" not in raw or "values" not in raw:
            raise ParseError("[series] needs both param and values", *where)
        vals = tuple(_coerce(v, float, where) for v in raw["values"].split(",") if v.strip())
        try:
            kwargs["series"] = SeriesSpec(raw["param"].strip(), vals)
        except ValueError as exc:
            raise ParseError(str(exc), *where) from None
    for section, cls in _OPTION_SECTIONS.items():
        if parser.has_section(section):
            skip = _SKIP.get(section, ())
            allowed = {f.name for f in dataclasses.fields(cls)} - set(skip)
            kwargs[section] = _build(cls, pick(section, allowed), section, lines, skip)
    try:
        return RunConfig(**kwargs)
    except ValueError as exc:
        raise ParseError(str(exc), lines.get(("run", None)), "run") from None


def _fmt(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(cfg):
    """Canonical INI text; ``load_config(dump_config(c)) == c``."""
    out = ["[params]"]
    out += [f"{k} = {_fmt(v)}" for k, v in cfg.params.as_dict().items()]
    out += ["", "[run]", f"engine = {cfg.engine}", f"rng_seed = {cfg.rng_seed}"]
    if cfg.sweep is not None:
        out += ["", "[sweep]"] + [f"{k} = {_fmt(v)}"
                                  for k, v in dataclasses.asdict(cfg.sweep).items()]
    if cfg.series is not None:
        vals = ", ".join(repr(float(v)) for v in cfg.series.values)
        out += ["", "[series]", f"param = {cfg.series.param}", f"values = {vals}"]
    for section in _OPTION_SECTIONS:
        obj = getattr(cfg, section)
        skip = _SKIP.get(section, ())
        out += ["", f"[{section}]"]
        out += [f"{f.name} = {_fmt(getattr(obj, f.name))}" for f in dataclasses.fields(obj)
                if f.name not in skip]
    return "\n".join(out) + "\n"


def read_config(path, strict=True):
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read(), strict=strict)


def apply_overrides(cfg, params=None, engine=None, rng_seed=None):
    """Return `cfg` with command-line values taking precedence."""
    changes = {}
    if params:
        changes["params"] = cfg.params.replace(**params)
    if engine is not None:
        changes["engine"] = engine
    if rng_seed is not None:
        changes["rng_seed"] = rng_seed
    return cfg.replace(**changes) if changes else cfg
