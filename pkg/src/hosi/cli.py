"""Command-line front end: estimation runs, oracle tables, comparisons,
and subset-lattice transforms, with reproducible CSV/JSON output.

Function mini-language (the ``--function`` argument)::

    product:<factor>(args)[,<factor>(args)...]
    additive:[mu=<v>,]<factor>(args)[,...]
    rect:eps=<list>[,offset=<list>]
    gfunction:a=<list>
    grid:<path to JSON {"values": nested cell list}>
    extern:<command>            (requires --dim)

Factors: ``linear(mu,tau)``, ``cosine(mu,tau)``, ``indicator(eps[,offset])``,
``gfunction(a)``, ``table(v1,v2,...)``.  Arguments may be positional or
``name=value``.

Every run writes its full configuration (seed included) into the output
header, so any emitted number is reproducible from the file alone.  Floats
are printed in shortest round-trip form and runs are byte-deterministic.
"""

from __future__ import annotations

import json
import math
import re
import sys
from dataclasses import dataclass, field

import click
import numpy as np

from .core import VarSubset, enumerate_subsets
from .extern import ExternalFunction
from .fourier import estimate_spectral_index
from .functions import (
    AdditiveFunctionSpec,
    CosineFactor,
    GFunctionFactor,
    IndicatorFactor,
    LinearFactor,
    ProductFunctionSpec,
    TableFactor,
    UnsupportedOracle,
    gfunction_spec,
    rectangle_spec,
)
from .mobius import SubsetMap, moebius_with_errors
from .moment import (
    estimate_moment_index_centered,
    estimate_moment_index_difference,
    estimate_total_effect,
)
from .oracles import (
    GridFunction,
    IndexPair,
    additive_indices,
    grid_indices,
    product_moment_indices,
    product_spectral_indices,
    rectangle_indices,
)
from .sampling import build_pickfreeze, build_spectral_design
from .walsh import estimate_walsh_index

COLUMNS = ["subset", "family", "p", "estimator", "n", "seed", "value", "std_error"]
COMPARE_COLUMNS = COLUMNS + ["oracle", "z"]


class SpecParseError(click.ClickException):
    def __init__(self, text: str, pos: int, message: str):
        super().__init__(f"function spec parse error at position {pos}: {message}\n  {text}\n  {' ' * pos}^")


@dataclass
class ParsedFunction:
    """A parsed --function argument: black box plus optional oracle hook."""

    text: str
    kind: str
    function: object
    dim: int
    oracle: object = None  # callable (u, p, family, base) -> IndexPair

    @property
    def oracle_capable(self) -> bool:
        return self.oracle is not None


def _split_top_level(body: str, offset: int) -> list[tuple[int, str]]:
    """Split on commas that are not inside parentheses; keep positions."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise SpecParseError(body, offset + i, "unbalanced ')'")
        elif ch == "," and depth == 0:
            parts.append((offset + start, body[start:i]))
            start = i + 1
    if depth != 0:
        raise SpecParseError(body, offset + len(body), "unbalanced '('")
    parts.append((offset + start, body[start:]))
    return parts


def _parse_factor(token: str, pos: int, full_text: str):
    m = re.fullmatch(r"\s*(\w+)\((.*)\)\s*", token)
    if not m:
        raise SpecParseError(full_text, pos, f"expected factor like linear(mu,tau), got {token!r}")
    name, argstr = m.group(1), m.group(2)
    args, kwargs = [], {}
    if argstr.strip():
        for _, piece in _split_top_level(argstr, 0):
            piece = piece.strip()
            if "=" in piece:
                k, v = piece.split("=", 1)
                kwargs[k.strip()] = float(v)
            else:
                args.append(float(piece))
    try:
        if name == "linear":
            return LinearFactor(*args, **{{"mu": "mu_", "tau": "tau_"}.get(k, k): v for k, v in kwargs.items()})
        if name == "cosine":
            return CosineFactor(*args, **{{"mu": "mu_", "tau": "tau_"}.get(k, k): v for k, v in kwargs.items()})
        if name == "indicator":
            return IndicatorFactor(*args, **kwargs)
        if name == "gfunction":
            return GFunctionFactor(*args, **kwargs)
        if name == "table":
            return TableFactor(tuple(args))
    except (TypeError, ValueError) as exc:
        raise SpecParseError(full_text, pos, f"bad arguments for {name}: {exc}") from None
    raise SpecParseError(full_text, pos, f"unknown factor family {name!r}")


def _parse_kv_lists(body: str, offset: int, text: str) -> dict[str, list[float]]:
    """Parse ``eps=0.1,0.2,offset=0,0`` style key=value-list arguments."""
    out: dict[str, list[float]] = {}
    current: str | None = None
    for pos, piece in _split_top_level(body, offset):
        piece = piece.strip()
        if "=" in piece:
            k, v = piece.split("=", 1)
            current = k.strip()
            out[current] = []
            piece = v
        if current is None:
            raise SpecParseError(text, pos, "expected name=value list")
        try:
            out[current].append(float(piece))
        except ValueError:
            raise SpecParseError(text, pos, f"bad number {piece!r}") from None
    return out


def parse_function_spec(text: str, dim: int | None = None) -> ParsedFunction:
    """Parse the function mini-language into a black box plus oracle hook."""
    if ":" not in text:
        raise SpecParseError(text, 0, "expected '<family>:<args>'")
    head, _, body = text.partition(":")
    offset = len(head) + 1
    head = head.strip()

    if head == "product" or head == "additive":
        tokens = _split_top_level(body, offset)
        mu = 0.0
        factors = []
        for i, (pos, tok) in enumerate(tokens):
            tok_stripped = tok.strip()
            if head == "additive" and i == 0 and tok_stripped.startswith("mu="):
                mu = float(tok_stripped[3:])
                continue
            factors.append(_parse_factor(tok, pos, text))
        if not factors:
            raise SpecParseError(text, offset, "need at least one factor")
        if head == "product":
            spec = ProductFunctionSpec(tuple(factors))
            oracle = _product_oracle(spec)
        else:
            spec = AdditiveFunctionSpec(mu, tuple(factors))
            oracle = _additive_oracle(spec)
        return ParsedFunction(text, head, spec.function(), spec.dim, oracle)

    if head == "rect":
        kv = _parse_kv_lists(body, offset, text)
        unknown = set(kv) - {"eps", "offset"}
        if unknown or "eps" not in kv:
            raise SpecParseError(text, offset, f"rect takes eps=<list>[,offset=<list>], got {sorted(kv)}")
        spec = rectangle_spec(kv["eps"], kv.get("offset"))
        eps = tuple(kv["eps"])
        return ParsedFunction(text, "rect", spec.function(), spec.dim, _rect_oracle(eps, spec))

    if head == "gfunction":
        kv = _parse_kv_lists(body, offset, text)
        if set(kv) != {"a"}:
            raise SpecParseError(text, offset, f"gfunction takes a=<list>, got {sorted(kv)}")
        spec = gfunction_spec(kv["a"])
        return ParsedFunction(text, "gfunction", spec.function(), spec.dim, _product_oracle(spec))

    if head == "grid":
        path = body.strip()
        try:
            with open(path) as fh:
                payload = json.load(fh)
            grid = GridFunction.from_array(np.asarray(payload["values"], dtype=np.float64))
        except (OSError, KeyError, ValueError) as exc:
            raise SpecParseError(text, offset, f"cannot load grid from {path!r}: {exc}") from None
        return ParsedFunction(text, "grid", grid.function(), grid.dim, _grid_oracle(grid))

    if head == "extern":
        command = body.strip()
        if not command:
            raise SpecParseError(text, offset, "extern needs a command")
        if dim is None:
            raise SpecParseError(text, offset, "extern functions need --dim")
        return ParsedFunction(text, "extern", ExternalFunction(command, dim), dim, None)

    raise SpecParseError(text, 0, f"unknown function family {head!r}")


def _product_oracle(spec: ProductFunctionSpec):
    def oracle(u, p, family, base) -> IndexPair:
        if family == "moment":
            return product_moment_indices(spec, u, p)
        return product_spectral_indices(spec, u, p, family, base)

    return oracle


def _rect_oracle(eps, spec: ProductFunctionSpec):
    def oracle(u, p, family, base) -> IndexPair:
        if family == "walsh":
            return product_spectral_indices(spec, u, p, "walsh", base)
        return rectangle_indices(eps, u, p, family)

    return oracle


def _additive_oracle(spec: AdditiveFunctionSpec):
    def oracle(u, p, family, base) -> IndexPair:
        return additive_indices(spec, u, p, family, base)

    return oracle


def _grid_oracle(grid: GridFunction):
    def oracle(u, p, family, base) -> IndexPair:
        return grid_indices(grid, u, p, family, base)

    return oracle


@dataclass
class RunConfig:
    """Validated configuration of one CLI run; echoed into every output."""

    command: str
    function: str
    family: str = "moment"
    p: int = 2
    base: int = 2
    estimator: str = "difference"
    subsets: str = "singletons"
    n: int = 10000
    seed: int = 0
    workers: int = 1
    sampler: str = "mc"
    fmt: str = "csv"
    out: str | None = None
    dim: int | None = None
    z_max: float = 4.0

    MOMENT_ESTIMATORS = ("difference", "centered", "total")
    SPECTRAL_ESTIMATORS = ("full", "reduced")

    def validate(self) -> None:
        errors = []
        if self.family not in ("moment", "fourier", "walsh"):
            errors.append(f"family: must be moment|fourier|walsh, got {self.family!r}")
        if self.p < 2:
            errors.append(f"p: must be >= 2, got {self.p}")
        if self.base < 2:
            errors.append(f"base: must be >= 2, got {self.base}")
        if self.n < 2:
            errors.append(f"n: must be >= 2, got {self.n}")
        if self.workers < 1:
            errors.append(f"workers: must be >= 1, got {self.workers}")
        if self.sampler not in ("mc", "lattice"):
            errors.append(f"sampler: must be mc|lattice, got {self.sampler!r}")
        if self.fmt not in ("csv", "json"):
            errors.append(f"format: must be csv|json, got {self.fmt!r}")
        if self.family == "moment" and self.estimator not in self.MOMENT_ESTIMATORS:
            errors.append(
                f"estimator: moment family takes {'|'.join(self.MOMENT_ESTIMATORS)}, got {self.estimator!r}"
            )
        if self.family in ("fourier", "walsh") and self.estimator not in self.SPECTRAL_ESTIMATORS:
            errors.append(
                f"estimator: spectral families take {'|'.join(self.SPECTRAL_ESTIMATORS)}, got {self.estimator!r}"
            )
        if errors:
            raise click.UsageError("invalid configuration:\n  " + "\n  ".join(errors))

    def header_dict(self) -> dict:
        d = {
            "command": self.command,
            "function": self.function,
            "family": self.family,
            "p": self.p,
            "base": self.base,
            "estimator": self.estimator,
            "subsets": self.subsets,
            "n": self.n,
            "seed": self.seed,
            "workers": self.workers,
            "sampler": self.sampler,
            "dim": self.dim,
        }
        if self.command == "compare":
            d["z_max"] = self.z_max
        return d


def parse_subset_selector(selector: str, dim: int) -> list[VarSubset]:
    selector = selector.strip()
    if selector in ("all", "nonempty", "singletons", "pairs"):
        return enumerate_subsets(dim, selector)
    subs = []
    for token in selector.split(";"):
        token = token.strip()
        if token:
            subs.append(VarSubset.parse(token, dim))
    if not subs:
        raise click.UsageError(f"empty subset selector {selector!r}")
    return subs


def _format_value(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_output(cfg: RunConfig, rows: list[dict], columns: list[str]) -> str:
    if cfg.fmt == "json":
        return json.dumps({"config": cfg.header_dict(), "rows": rows}, indent=2) + "\n"
    lines = ["# config: " + json.dumps(cfg.header_dict())]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_format_value(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _estimate_one(cfg: RunConfig, parsed: ParsedFunction, u: VarSubset):
    f = parsed.function
    if cfg.family == "moment":
        p = 2 if cfg.estimator == "total" else cfg.p
        design = build_pickfreeze(cfg.seed, cfg.n, parsed.dim, p, u, cfg.sampler)
        if cfg.estimator == "total":
            return estimate_total_effect(f, u, design, cfg.workers)
        if cfg.estimator == "centered":
            return estimate_moment_index_centered(f, u, cfg.p, design, cfg.workers)
        return estimate_moment_index_difference(f, u, cfg.p, design, cfg.workers)
    reduced = cfg.estimator == "reduced"
    design = build_spectral_design(cfg.seed, cfg.n, parsed.dim, cfg.p, u, reduced, cfg.sampler)
    if cfg.family == "fourier":
        return estimate_spectral_index(f, u, cfg.p, design, cfg.workers)
    return estimate_walsh_index(f, u, cfg.p, cfg.base, design, cfg.workers)


def _estimate_rows(cfg: RunConfig, parsed: ParsedFunction, subsets) -> list[dict]:
    rows = []
    notes = set()
    for u in subsets:
        est = _estimate_one(cfg, parsed, u)
        tag = getattr(est, "estimator", None) or getattr(est, "variant")
        rows.append(
            {
                "subset": str(u),
                "family": cfg.family if cfg.family != "walsh" else f"walsh({cfg.base})",
                "p": est.p,
                "estimator": tag,
                "n": est.n,
                "seed": est.seed,
                "value": float(est.value),
                "std_error": float(est.std_error),
            }
        )
        notes.update(getattr(est, "notes", ()))
    if cfg.p % 2 and cfg.family == "moment":
        notes.add("odd p: negative values are informative (sign of extremes), not errors")
    for note in sorted(notes):
        click.echo(f"# note: {note}", err=True)
    return rows


def _oracle_rows(cfg: RunConfig, parsed: ParsedFunction, subsets) -> list[dict]:
    if not parsed.oracle_capable:
        raise click.UsageError(
            f"function {parsed.text!r} has no closed-form oracle; use `estimate` instead"
        )
    rows = []
    for u in subsets:
        try:
            pair = parsed.oracle(u, cfg.p, cfg.family, cfg.base)
        except UnsupportedOracle as exc:
            raise click.UsageError(f"oracle unavailable for {u}: {exc}") from None
        rows.append(
            {
                "subset": str(u),
                "family": cfg.family if cfg.family != "walsh" else f"walsh({cfg.base})",
                "p": cfg.p,
                "estimator": "oracle",
                "n": 0,
                "seed": cfg.seed,
                "value": float(pair.index),
                "std_error": 0.0,
            }
        )
    return rows


def compare_rows(est_rows: list[dict], oracle_values: dict[str, float], z_max: float) -> tuple[list[dict], int]:
    """Join estimates with oracle values; exit code 1 when any |z| > z_max."""
    out = []
    worst_bad = 0
    for row in est_rows:
        oracle = oracle_values[row["subset"]]
        se = row["std_error"]
        diff = row["value"] - oracle
        if se == 0.0:
            z = 0.0 if diff == 0.0 else math.inf
        else:
            z = diff / se
        if not (abs(z) <= z_max):
            worst_bad = 1
        r = dict(row)
        r["oracle"] = float(oracle)
        r["z"] = float(z)
        out.append(r)
    return out, worst_bad


@click.group()
def main() -> None:
    """Higher-order sensitivity indices of black boxes on the unit cube."""


_common = [
    click.option("--function", "function_text", required=True, help="function spec (see module help)"),
    click.option("--family", default="moment", show_default=True, help="moment | fourier | walsh"),
    click.option("--p", default=2, show_default=True, help="index order (>= 2)"),
    click.option("--base", default=2, show_default=True, help="Walsh base b"),
    click.option("--subsets", default="singletons", show_default=True, help="all | nonempty | singletons | pairs | '{1,3};{2}'"),
    click.option("--seed", default=0, show_default=True),
    click.option("--format", "fmt", default="csv", show_default=True, help="csv | json"),
    click.option("--out", default=None, help="output path (default: stdout)"),
    click.option("--dim", default=None, type=int, help="dimension (required for extern functions)"),
]


def _with_common(cmd):
    for opt in reversed(_common):
        cmd = opt(cmd)
    return cmd


def _build(command, function_text, family, p, base, subsets, seed, fmt, out, dim, **kw):
    cfg = RunConfig(
        command=command,
        function=function_text,
        family=family,
        p=p,
        base=base,
        subsets=subsets,
        seed=seed,
        fmt=fmt,
        out=out,
        dim=dim,
        **kw,
    )
    if cfg.estimator is None or command == "oracle":
        cfg.estimator = "difference" if family == "moment" else "full"
    cfg.validate()
    parsed = parse_function_spec(function_text, dim)
    cfg.dim = parsed.dim
    return cfg, parsed, parse_subset_selector(subsets, parsed.dim)


@main.command()
@_with_common
@click.option("--estimator", default=None, help="moment: difference|centered|total; spectral: full|reduced")
@click.option("--n", default=10000, show_default=True, help="replicate count")
@click.option("--workers", default=1, show_default=True)
@click.option("--sampler", default="mc", show_default=True, help="mc | lattice")
def estimate(function_text, family, p, base, subsets, seed, fmt, out, dim, estimator, n, workers, sampler):
    """Estimate indices for the selected subsets."""
    cfg, parsed, subs = _build(
        "estimate", function_text, family, p, base, subsets, seed, fmt, out, dim,
        estimator=estimator, n=n, workers=workers, sampler=sampler,
    )
    rows = _estimate_rows(cfg, parsed, subs)
    emit(cfg, render_output(cfg, rows, COLUMNS))


@main.command()
@_with_common
def oracle(function_text, family, p, base, subsets, seed, fmt, out, dim):
    """Print closed-form oracle values (oracle-capable functions only)."""
    cfg, parsed, subs = _build("oracle", function_text, family, p, base, subsets, seed, fmt, out, dim)
    rows = _oracle_rows(cfg, parsed, subs)
    emit(cfg, render_output(cfg, rows, COLUMNS))


@main.command()
@_with_common
@click.option("--estimator", default=None)
@click.option("--n", default=10000, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--sampler", default="mc", show_default=True)
@click.option("--z-max", default=4.0, show_default=True, help="fail when any |z| exceeds this")
def compare(function_text, family, p, base, subsets, seed, fmt, out, dim, estimator, n, workers, sampler, z_max):
    """Estimate and compare against the closed-form oracle; nonzero exit on |z| > z-max."""
    cfg, parsed, subs = _build(
        "compare", function_text, family, p, base, subsets, seed, fmt, out, dim,
        estimator=estimator, n=n, workers=workers, sampler=sampler, z_max=z_max,
    )
    if not parsed.oracle_capable:
        raise click.UsageError(f"function {parsed.text!r} has no oracle; use `estimate` instead")
    est_rows = _estimate_rows(cfg, parsed, subs)
    oracle_values = {r["subset"]: r["value"] for r in _oracle_rows(cfg, parsed, subs)}
    rows, bad = compare_rows(est_rows, oracle_values, cfg.z_max)
    emit(cfg, render_output(cfg, rows, COMPARE_COLUMNS))
    if bad:
        raise SystemExit(1)


def read_rows(path: str) -> tuple[dict, list[dict]]:
    """Read an output file produced by this CLI (csv or json)."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        return payload["config"], payload["rows"]
    config = {}
    rows = []
    header: list[str] | None = None
    for line in text.splitlines():
        if line.startswith("# config: "):
            config = json.loads(line[len("# config: ") :])
            continue
        if not line.strip():
            continue
        if header is None:
            header = line.split(",")
            continue
        # subset braces contain commas: re-join the leading {..} token
        m = re.match(r"(\{[^}]*\})(?:,(.*))?$", line)
        if not m:
            raise click.ClickException(f"cannot parse row {line!r}")
        rest = m.group(2) or ""
        parts = [m.group(1)] + (rest.split(",") if rest else [])
        if len(parts) != len(header):
            raise click.ClickException(f"row has {len(parts)} fields, header has {len(header)}")
        row: dict = {}
        for key, val in zip(header, parts):
            if key in ("p", "n", "seed"):
                row[key] = int(val)
            elif key in ("value", "std_error", "oracle", "z"):
                row[key] = float(val)
            else:
                row[key] = val
        rows.append(row)
    return config, rows


@main.command()
@click.option("--in", "in_path", required=True, help="estimate/oracle output to transform")
@click.option("--format", "fmt", default="csv", show_default=True, help="csv | json")
@click.option("--out", default=None)
def transform(in_path, fmt, out):
    """Moebius-transform cumulative indices into per-subset components.

    The input must cover a downward-closed subset family (every subset of
    each requested set).  Standard errors are propagated as root summed
    variances, which treats rows as independent and is therefore
    approximate.
    """
    config, rows = read_rows(in_path)
    if not rows:
        raise click.ClickException("no rows to transform")
    dim = config.get("dim")
    if dim is None:
        raise click.ClickException("input config does not record the dimension")
    values = {}
    variances = {}
    for row in rows:
        u = VarSubset.parse(row["subset"], dim)
        values[u.mask] = row["value"]
        variances[u.mask] = row["std_error"] ** 2
    full = 1 << dim
    if len(values) < full and 0 not in values:
        values[0] = 0.0
        variances[0] = 0.0
    comp, var = moebius_with_errors(SubsetMap(dim, values), SubsetMap(dim, variances))
    out_rows = []
    for row in rows:
        u = VarSubset.parse(row["subset"], dim)
        r = dict(row)
        r["estimator"] = row["estimator"] + "+moebius"
        r["value"] = comp.get(u)
        r["std_error"] = math.sqrt(var.get(u))
        out_rows.append(r)
    cfg = RunConfig(command="transform", function=config.get("function", "?"), fmt=fmt, out=out, dim=dim)
    cfg.subsets = config.get("subsets", "?")
    cfg.family = config.get("family", "moment")
    columns = COMPARE_COLUMNS if "z" in rows[0] else COLUMNS
    emit(cfg, render_output(cfg, out_rows, columns))


if __name__ == "__main__":
    main()
