"""Run configuration: sectioned key-value text with explicit schema version.

The format is INI-style for human-diffable experiment provenance.  Unknown
sections or keys are rejected, defaults are filled explicitly, and a config
serializes back to canonical text that reloads to an equal RunConfig.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field as dataclass_field

from .errors import ParseError, ValidationError, WedgeCMCError
from .model import Segment, build_model
from .solver import SolverConfig
from .spectra import CurveClass, MultiCurve

SCHEMA_VERSION = 1

_KNOWN = {
    "meta": {"schema_version"},
    "model": {"n", "closure", "outer_boundary"},
    "solver": {
        "resolution",
        "points_per_unit",
        "tolerance",
        "max_iterations",
        "initial_guess",
    },
    "ladder": {"lambdas", "start", "ratio", "count"},
    "diagnostics": {"oracle", "conformal", "monotonicity", "spectra", "distances"},
    "output": {"directory", "emit"},
    "seed": {"value"},
}
_SEGMENT_KEYS = {"kind", "width", "volume", "loci"}


@dataclass(frozen=True)
class Diagnostics:
    oracle: bool = True
    conformal: bool = False
    monotonicity: bool = True
    spectra: bool = True
    distances: bool = True


@dataclass(frozen=True)
class RunConfig:
    """Validated experiment description (see load_config for the file format)."""

    n: int
    segments: tuple
    closure: str = "truncated"
    outer_boundary: str = "neumann"
    solver: SolverConfig = dataclass_field(default_factory=SolverConfig)
    ladder: tuple = (10.0, 100.0, 1000.0, 10000.0)
    classes: tuple = ()
    diagnostics: Diagnostics = dataclass_field(default_factory=Diagnostics)
    output_dir: str = "runs/out"
    emit: str = "all"
    seed: int = 0
    schema_version: int = SCHEMA_VERSION

    def build_model(self):
        return build_model(self.n, list(self.segments), self.closure, self.outer_boundary)

    def multicurve(self):
        return MultiCurve.from_model(self.build_model())

    def to_text(self):
        """Canonical serialization; load_config(to_text()) == self."""
        out = io.StringIO()

        def sec(name, pairs):
            out.write(f"[{name}]\n")
            for k, v in pairs:
                out.write(f"{k} = {v}\n")
            out.write("\n")

        sec("meta", [("schema_version", self.schema_version)])
        sec(
            "model",
            [("n", self.n), ("closure", self.closure), ("outer_boundary", self.outer_boundary)],
        )
        for s in self.segments:
            pairs = [("kind", s.kind), ("width", repr(s.width)), ("volume", repr(s.cross_section_volume))]
            if s.geodesic_loci is not None:
                pairs.append(("loci", " ".join(repr(x) for x in s.geodesic_loci)))
            sec(f"segment.{s.label}", pairs)
        sec(
            "solver",
            [
                ("resolution", self.solver.resolution),
                ("points_per_unit", repr(self.solver.points_per_unit)),
                ("tolerance", repr(self.solver.tolerance)),
                ("max_iterations", self.solver.max_iterations),
                ("initial_guess", self.solver.initial_guess),
            ],
        )
        sec("ladder", [("lambdas", " ".join(repr(x) for x in self.ladder))])
        if self.classes:
            pairs = []
            for c in self.classes:
                toks = list(c.crossings)
                if c.winding:
                    toks.append(f"winding:{c.winding}")
                pairs.append((c.label, " ".join(toks)))
            sec("classes", pairs)
        d = self.diagnostics
        sec(
            "diagnostics",
            [
                ("oracle", str(d.oracle).lower()),
                ("conformal", str(d.conformal).lower()),
                ("monotonicity", str(d.monotonicity).lower()),
                ("spectra", str(d.spectra).lower()),
                ("distances", str(d.distances).lower()),
            ],
        )
        sec("output", [("directory", self.output_dir), ("emit", self.emit)])
        sec("seed", [("value", self.seed)])
        return out.getvalue()


def _parse_bool(raw, fieldname):
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValidationError(fieldname, f"expected boolean, got {raw!r}")


def _get(parser, section, key, fieldname, conv, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ValidationError(fieldname, "missing required key")
        return default
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except ValidationError:
        raise
    except Exception as exc:
        raise ValidationError(fieldname, f"bad value {raw!r}: {exc}") from exc


def loads_config(text):
    """Parse and validate config text; see load_config."""
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=(";", "#"), strict=True
    )
    try:
        parser.read_string(text)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if getattr(exc, "errors", None) else None
        raise ParseError(str(exc), line=line) from exc
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError(str(exc), line=exc.lineno) from exc
    except configparser.Error as exc:
        raise ParseError(str(exc)) from exc

    segments = []
    for section in parser.sections():
        if section.startswith("segment."):
            label = section.split(".", 1)[1]
            for key in parser.options(section):
                if key not in _SEGMENT_KEYS:
                    raise ValidationError(f"{section}.{key}", "unknown key")
            kind = _get(parser, section, "kind", f"{section}.kind", str, required=True)
            width = _get(parser, section, "width", f"{section}.width", float, required=True)
            vol = _get(parser, section, "volume", f"{section}.volume", float, required=True)
            loci = _get(
                parser,
                section,
                "loci",
                f"{section}.loci",
                lambda raw: tuple(float(t) for t in raw.split()),
            )
            try:
                segments.append(Segment(kind, width, vol, label, loci))
            except ValueError as exc:
                raise ValidationError(section, str(exc)) from exc
        elif section == "classes":
            pass  # free-form class labels, validated below
        elif section not in _KNOWN:
            raise ValidationError(section, "unknown section")
        else:
            for key in parser.options(section):
                if key not in _KNOWN[section]:
                    raise ValidationError(f"{section}.{key}", "unknown key")

    schema = _get(parser, "meta", "schema_version", "meta.schema_version", int, default=SCHEMA_VERSION) if parser.has_section("meta") else SCHEMA_VERSION
    if schema != SCHEMA_VERSION:
        raise ValidationError("meta.schema_version", f"unsupported version {schema}")

    if not parser.has_section("model"):
        raise ValidationError("model", "missing section")
    n = _get(parser, "model", "n", "model.n", int, required=True)
    closure = _get(parser, "model", "closure", "model.closure", str, default="truncated")
    outer = _get(
        parser, "model", "outer_boundary", "model.outer_boundary", str, default="neumann"
    )
    if not segments:
        raise ValidationError("model", "no segment.* sections")

    solver_kwargs = {}
    if parser.has_section("solver"):
        for key, fieldname, conv in (
            ("resolution", "solver.resolution", int),
            ("points_per_unit", "solver.points_per_unit", float),
            ("tolerance", "solver.tolerance", float),
            ("max_iterations", "solver.max_iterations", int),
            ("initial_guess", "solver.initial_guess", str),
        ):
            val = _get(parser, "solver", key, fieldname, conv)
            if val is not None:
                solver_kwargs[key if key != "max_iterations" else "max_iterations"] = val
    try:
        solver = SolverConfig(**solver_kwargs)
    except ValueError as exc:
        raise ValidationError("solver", str(exc)) from exc

    ladder = (10.0, 100.0, 1000.0, 10000.0)
    if parser.has_section("ladder"):
        if parser.has_option("ladder", "lambdas"):
            ladder = tuple(
                _get(
                    parser,
                    "ladder",
                    "lambdas",
                    "ladder.lambdas",
                    lambda raw: [float(t) for t in raw.split()],
                )
            )
        else:
            start = _get(parser, "ladder", "start", "ladder.start", float, required=True)
            ratio = _get(parser, "ladder", "ratio", "ladder.ratio", float, required=True)
            count = _get(parser, "ladder", "count", "ladder.count", int, required=True)
            if not ratio > 1:
                raise ValidationError("ladder.ratio", f"must be > 1, got {ratio}")
            if count < 1:
                raise ValidationError("ladder.count", "must be >= 1")
            ladder = tuple(start * ratio**k for k in range(count))
    if any(b <= a for a, b in zip(ladder[:-1], ladder[1:])) or any(
        x <= 0 for x in ladder
    ):
        raise ValidationError("ladder.lambdas", "must be positive and strictly increasing")

    wedge_labels = {s.label for s in segments if s.kind == "wedge"}
    classes = []
    if parser.has_section("classes"):
        for name in parser.options("classes"):
            toks = parser.get("classes", name).split()
            crossings = []
            winding = 0
            for t in toks:
                if t.startswith("winding:"):
                    try:
                        winding = int(t.split(":", 1)[1])
                    except ValueError as exc:
                        raise ValidationError(f"classes.{name}", f"bad winding {t!r}") from exc
                else:
                    if t not in wedge_labels:
                        raise ValidationError(
                            f"classes.{name}", f"unknown wedge label {t!r}"
                        )
                    crossings.append(t)
            try:
                classes.append(CurveClass(name, tuple(crossings), winding))
            except ValueError as exc:
                raise ValidationError(f"classes.{name}", str(exc)) from exc

    diag_kwargs = {}
    if parser.has_section("diagnostics"):
        for key in ("oracle", "conformal", "monotonicity", "spectra", "distances"):
            if parser.has_option("diagnostics", key):
                diag_kwargs[key] = _parse_bool(
                    parser.get("diagnostics", key), f"diagnostics.{key}"
                )
    out_dir = "runs/out"
    emit = "all"
    if parser.has_section("output"):
        out_dir = _get(parser, "output", "directory", "output.directory", str, default=out_dir)
        emit = _get(parser, "output", "emit", "output.emit", str, default=emit)
    if emit not in ("csv", "json", "all"):
        raise ValidationError("output.emit", f"must be csv|json|all, got {emit!r}")
    seed = 0
    if parser.has_section("seed"):
        seed = _get(parser, "seed", "value", "seed.value", int, default=0)

    cfg = RunConfig(
        n=n,
        segments=tuple(segments),
        closure=closure,
        outer_boundary=outer,
        solver=solver,
        ladder=ladder,
        classes=tuple(classes),
        diagnostics=Diagnostics(**diag_kwargs),
        output_dir=out_dir,
        emit=emit,
        seed=seed,
        schema_version=schema,
    )
    try:
        cfg.build_model()
    except (WedgeCMCError, ValueError) as exc:
        raise ValidationError("model", str(exc)) from exc
    return cfg


def load_config(path):
    """Load and validate a RunConfig from a file.

    Raises ParseError (with line info) on malformed text and ValidationError
    (naming the field) on invalid values, unknown sections or unknown keys.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc}") from exc
    return loads_config(text)
