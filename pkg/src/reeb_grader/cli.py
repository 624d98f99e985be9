"""Command-line front end.

Config files are line-oriented ``key = value`` pairs grouped under
``[base]``, ``[base2]``, ``[run]`` and ``[path]`` headers. Values are Python
literals (lists, tuples, dicts, ints, strings); bare words are read as
strings. Example::

    [base]
    builder = product_projective
    factors = [(1, 1), (1, 2)]

    [run]
    command = compute
    max_degree = 14
"""

from __future__ import annotations

import argparse
import ast
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import boothby_wang as bw
from . import homology_engine as he
from . import moduli, orbifold_base as ob
from . import symplectic_paths as sp

EXIT_OK, EXIT_INPUT, EXIT_GATE = 0, 1, 2

COMMANDS = ("compute", "compare", "enumerate", "certify", "index-path", "validate")
BUILDERS = ("product_projective", "wang_ziller", "weighted_projective", "custom")

SECTION_KEYS = {
    "base": {"builder", "factors", "k", "l", "a", "n", "strata", "w", "w_tilde"},
    "run": {
        "command", "convention", "max_degree", "m_max", "format", "out",
        "c", "bound", "override_gate",
    },
    "path": {"symmetric", "generator", "T", "grid_points"},
}
SECTION_KEYS["base2"] = SECTION_KEYS["base"]

REQUIRED = {
    "compute": ("base", "max_degree"),
    "compare": ("base", "base2", "max_degree"),
    "enumerate": ("c", "bound", "max_degree"),
    "certify": ("base",),
    "index-path": ("path",),
    "validate": ("base",),
}


class ConfigError(ValueError):
    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class PathConfig:
    matrix: np.ndarray
    hamiltonian: bool
    T: float = 1.0
    grid_points: int = 200

    def build(self) -> sp.SymplecticPath:
        if self.hamiltonian:
            return sp.SymplecticPath.hamiltonian_flow(self.matrix, self.T, self.grid_points)
        return sp.SymplecticPath.exponential(self.matrix, self.T, self.grid_points)


@dataclass
class RunConfig:
    command: str
    base: Optional[ob.OrbifoldBase] = None
    base2: Optional[ob.OrbifoldBase] = None
    convention: bw.Convention = bw.Convention.REDUCED
    max_degree: Optional[int] = None
    m_max: int = 25
    output_format: str = "table"
    output_path: Optional[str] = None
    c: Optional[int] = None
    bound: Optional[int] = None
    override_gate: bool = False
    path: Optional[PathConfig] = None


# -- parsing -----------------------------------------------------------------


def _literal(raw: str) -> Any:
    try:
        return ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        return raw


def _strip_comment(raw: str) -> str:
    """Drop a trailing ``# ...`` comment that sits outside any quotes."""
    quote = None
    for i, ch in enumerate(raw):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == "#":
            return raw[:i].rstrip()
    return raw


def _read_sections(text: str) -> tuple[dict[str, dict[str, tuple[Any, int]]], dict[str, int], list[str]]:
    sections: dict[str, dict[str, tuple[Any, int]]] = {}
    headers: dict[str, int] = {}
    errors: list[str] = []
    current: Optional[str] = None
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip()
            if current not in SECTION_KEYS:
                errors.append(f"line {lineno}: unknown section [{current}]")
            elif current in sections:
                errors.append(f"line {lineno}: duplicate section [{current}]")
            sections.setdefault(current, {})
            headers.setdefault(current, lineno)
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value', got {stripped!r}")
            continue
        if current is None:
            errors.append(f"line {lineno}: key outside of any section")
            continue
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if current in SECTION_KEYS and key not in SECTION_KEYS[current]:
            errors.append(f"line {lineno}: unknown key {key!r} in [{current}]")
            continue
        sections[current][key] = (_literal(_strip_comment(raw)), lineno)
    return sections, headers, errors


def _has_float(value: Any) -> bool:
    if isinstance(value, float):
        return True
    if isinstance(value, (list, tuple)):
        return any(_has_float(v) for v in value)
    if isinstance(value, dict):
        return any(_has_float(v) for v in value.values())
    return False


def _int(section: dict, key: str, errors: list[str], where: str) -> Optional[int]:
    if key not in section:
        return None
    value, lineno = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"line {lineno}: [{where}] {key} must be an integer, got {value!r}")
        return None
    return value


def _build_base(section: dict, header_line: int, name: str, errors: list[str]) -> Optional[ob.OrbifoldBase]:
    for key, (value, lineno) in section.items():
        if _has_float(value):
            errors.append(f"line {lineno}: [{name}] {key}: floating point values are not accepted")
            return None
    if "builder" not in section:
        errors.append(f"line {header_line}: [{name}] missing key 'builder'")
        return None
    builder, lineno = section["builder"]
    get = lambda key, default=None: section[key][0] if key in section else default  # noqa: E731
    try:
        if builder == "product_projective":
            return ob.product_projective(get("factors", ()))
        if builder == "wang_ziller":
            return ob.wang_ziller(int(get("k")), int(get("l")))
        if builder == "weighted_projective":
            return ob.weighted_projective(get("a", ()), int(get("k", 1)))
        if builder == "custom":
            return ob.custom(get("n"), get("strata", ()), get("w", ()), get("w_tilde", ()))
    except ob.BaseValidationError as exc:
        errors.extend(f"line {header_line}: [{name}] {f}" for f in exc.failures)
        return None
    except (TypeError, ValueError) as exc:
        errors.append(f"line {header_line}: [{name}] malformed builder parameters ({exc})")
        return None
    errors.append(f"line {lineno}: [{name}] unknown builder {builder!r}; expected one of {', '.join(BUILDERS)}")
    return None


def _parse_path(section: dict, header_line: int, errors: list[str]) -> Optional[PathConfig]:
    keys = [k for k in ("symmetric", "generator") if k in section]
    if len(keys) != 1:
        errors.append(f"line {header_line}: [path] needs exactly one of 'symmetric' or 'generator'")
        return None
    value, lineno = section[keys[0]]
    try:
        matrix = np.array(value, dtype=float)
    except (TypeError, ValueError):
        matrix = None
    if matrix is None or matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
        errors.append(f"line {lineno}: [path] {keys[0]} must be a square matrix of even size")
        return None
    T = section.get("T", (1.0, header_line))[0]
    grid = section.get("grid_points", (200, header_line))[0]
    if not isinstance(T, (int, float)) or T <= 0:
        errors.append(f"line {section['T'][1]}: [path] T must be a positive number")
        return None
    if isinstance(grid, bool) or not isinstance(grid, int) or grid < 10:
        errors.append(f"line {section['grid_points'][1]}: [path] grid_points must be an integer >= 10")
        return None
    return PathConfig(matrix, keys[0] == "symmetric", float(T), grid)


def parse_config(text: str, command: Optional[str] = None) -> RunConfig:
    """Validate a config text; raise ``ConfigError`` listing every problem with its line."""
    sections, headers, errors = _read_sections(text)
    run = sections.get("run", {})

    if command is None:
        if "command" not in run:
            raise ConfigError(errors + ["missing section [run] or key 'command'"])
        command = run["command"][0]
    if command not in COMMANDS:
        raise ConfigError(errors + [f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}"])
    cfg = RunConfig(command=command)

    for key, (value, lineno) in run.items():
        if _has_float(value):
            errors.append(f"line {lineno}: [run] {key}: floating point values are not accepted")
    if "convention" in run:
        value, lineno = run["convention"]
        try:
            cfg.convention = bw.Convention(value)
        except ValueError:
            errors.append(f"line {lineno}: convention must be 'reduced' or 'unreduced', got {value!r}")
    cfg.max_degree = _int(run, "max_degree", errors, "run")
    if cfg.max_degree is not None and cfg.max_degree < 2:
        errors.append(f"line {run['max_degree'][1]}: max_degree must be ≥ 2")
    m_max = _int(run, "m_max", errors, "run")
    if m_max is not None:
        if m_max < 1:
            errors.append(f"line {run['m_max'][1]}: m_max must be ≥ 1")
        cfg.m_max = m_max
    cfg.c = _int(run, "c", errors, "run")
    cfg.bound = _int(run, "bound", errors, "run")
    if "format" in run:
        value, lineno = run["format"]
        if value not in ("table", "records"):
            errors.append(f"line {lineno}: format must be 'table' or 'records', got {value!r}")
        cfg.output_format = value
    if "out" in run:
        cfg.output_path = str(run["out"][0])
    if "override_gate" in run:
        value, lineno = run["override_gate"]
        if value not in (True, False, "true", "false"):
            errors.append(f"line {lineno}: override_gate must be true or false")
        cfg.override_gate = value in (True, "true")

    for name in ("base", "base2"):
        if name in sections:
            setattr(cfg, name, _build_base(sections[name], headers[name], name, errors))
    if "path" in sections:
        cfg.path = _parse_path(sections["path"], headers["path"], errors)

    for need in REQUIRED[command]:
        if need in ("base", "base2", "path"):
            if need not in sections:
                errors.append(f"command {command} needs a [{need}] section")
        elif getattr(cfg, need) is None and not any(need in e for e in errors):
            errors.append(f"command {command} needs [run] {need}")
    if errors:
        raise ConfigError(errors)
    return cfg


# -- rendering ---------------------------------------------------------------


def _table(rows: Sequence[Sequence[Any]], header: Sequence[str]) -> list[str]:
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    out = []
    for r in cells:
        out.append("  ".join(c.rjust(w) if i < len(r) - 1 else c for i, (c, w) in enumerate(zip(r, widths))).rstrip())
    return out


def _label(base: ob.OrbifoldBase) -> str:
    return base.label


def _render_compute(cfg: RunConfig, g: he.GradedRanks) -> str:
    lines = []
    if g.gate_overridden:
        lines.append(he.NOT_INVARIANT_WARNING)
    if cfg.output_format == "records":
        body = he.to_records(g)
        return "\n".join(f"# {line}" for line in lines) + ("\n" if lines else "") + body
    lines.append(f"base: {_label(cfg.base)}  convention: {g.convention.value}  max_degree: {g.max_degree}")
    rows = [(d, g.ranks[d], " ".join(k.triple() for k in g.provenance[d])) for d in g.degrees()]
    lines += _table(rows, ("degree", "rank", "generators"))
    omitted = "none" if g.smallest_omitted is None else g.smallest_omitted
    lines.append(f"smallest omitted degree: {omitted}")
    lines.append(f"P(q) = {he.poincare_series(g)}")
    return "\n".join(lines) + "\n"


def _render_compare(cfg: RunConfig, a: he.GradedRanks, b: he.GradedRanks, v: he.ComparisonVerdict) -> str:
    degrees = sorted(set(a.ranks) | set(b.ranks))
    if cfg.output_format == "records":
        lines = ["# degree,rank_a,rank_b"]
        lines += [f"{d},{a.rank(d)},{b.rank(d)}" for d in degrees]
        diff = "none" if v.first_difference is None else ",".join(map(str, v.first_difference))
        lines.append(f"# first_difference={diff}")
        return "\n".join(lines) + "\n"
    lines = [f"A: {_label(cfg.base)}", f"B: {_label(cfg.base2)}",
             f"convention: {a.convention.value}  max_degree: {v.max_degree}"]
    lines += _table([(d, a.rank(d), b.rank(d)) for d in degrees], ("degree", "A", "B"))
    if v.first_difference is None:
        lines.append(f"EQUAL UP TO DEGREE {v.max_degree}")
    else:
        d, ra, rb = v.first_difference
        lines.append(f"FIRST DIFFERENCE: degree {d} ({ra} vs {rb})")
    return "\n".join(lines) + "\n"


def _render_family(cfg: RunConfig, t: he.FamilyTable) -> str:
    def diff(v: he.ComparisonVerdict) -> str:
        return "equal" if v.first_difference is None else str(v.first_difference[0])

    if cfg.output_format == "records":
        lines = ["# k,l,c1_xi,min_degree"]
        lines += [f"{m.k},{m.l},{m.chern_xi},{m.min_degree}" for m in t.members]
        lines.append("# pair,first_difference")
        lines += [f"{p[0]}:{p[1]};{q[0]}:{q[1]},{diff(v)}" for (p, q), v in t.verdicts.items()]
        return "\n".join(lines) + "\n"
    lines = [f"family k - l = {t.c}, max_degree {t.max_degree}"]
    lines += _table([(m.k, m.l, m.chern_xi, m.min_degree) for m in t.members],
                    ("k", "l", "c1(xi)", "min degree"))
    if t.verdicts:
        lines.append("")
        lines += _table([(f"{p}", f"{q}", diff(v)) for (p, q), v in t.verdicts.items()],
                        ("A", "B", "first difference"))
    else:
        lines.append("single structure: nothing to compare")
    lines.append(f"ALL DISTINGUISHED: {'yes' if t.all_distinguished else 'no'}")
    return "\n".join(lines) + "\n"


def _render_certificate(cert: moduli.CylinderCertificate) -> str:
    lines = [f"cylinders checked: {cert.checked} (m_max {cert.m_max})"]
    if cert.holds:
        lines.append("NO RIGID CYLINDERS: certified")
    else:
        lines.append(f"RIGID CYLINDERS FOUND: {len(cert.witnesses)}")
        for p in cert.witnesses:
            (top, mt), = p.positive
            (bot, mb), = p.negative
            lines.append(f"  {top.name}:{mt} -> {bot.name}:{mb}")
    return "\n".join(lines) + "\n"


def _render_validate(cfg: RunConfig) -> str:
    base = cfg.base
    spec = bw.BundleSpec(base, cfg.convention)
    wd = bw.well_definedness(spec)
    lines = [f"base: {_label(base)}  n = {base.n}"]
    lines += _table(
        [(s.name, s.dim, s.gamma_order, s.chern_pairing, list(s.betti)) for s in base.strata],
        ("stratum", "dim", "|Gamma|", "c1 pairing", "betti"),
    )
    lines.append(f"sum w_tilde = {wd.sum_w_tilde}  gate: {'pass' if wd.sufficient else 'FAIL'}")
    try:
        lines.append(f"c1(xi) = {bw.first_chern_xi(spec)}")
    except ValueError as exc:
        lines.append(f"c1(xi): {exc}")
    lines.append("VALID")
    return "\n".join(lines) + "\n"


def _render_index(path: sp.SymplecticPath) -> str:
    crossings = sp.find_crossings(path)
    lines = _table([(f"{c.t:.9f}", c.kernel_dim, c.signature) for c in crossings],
                   ("t", "kernel dim", "signature"))
    lines.append(f"Robbin-Salamon index: {sp.rs_index(path)}")
    try:
        lines.append(f"Conley-Zehnder index: {sp.conley_zehnder(path)}")
    except sp.DegenerateEndpointError:
        lines.append("Conley-Zehnder index: undefined (degenerate endpoint)")
    return "\n".join(lines) + "\n"


# -- running -----------------------------------------------------------------


def execute(cfg: RunConfig) -> tuple[int, str]:
    """Run a parsed config; return (exit code, output text)."""
    try:
        if cfg.command == "compute":
            spec = bw.BundleSpec(cfg.base, cfg.convention)
            g = he.compute(spec, cfg.max_degree, override_gate=cfg.override_gate)
            return EXIT_OK, _render_compute(cfg, g)
        if cfg.command == "compare":
            a_spec = bw.BundleSpec(cfg.base, cfg.convention)
            b_spec = bw.BundleSpec(cfg.base2, cfg.convention)
            a = he.compute(a_spec, cfg.max_degree, override_gate=cfg.override_gate)
            b = he.compute(b_spec, cfg.max_degree, override_gate=cfg.override_gate)
            return EXIT_OK, _render_compare(cfg, a, b, he.compare_ranks(a, b))
        if cfg.command == "enumerate":
            t = he.enumerate_family(cfg.c, cfg.bound, cfg.max_degree, cfg.convention)
            return EXIT_OK, _render_family(cfg, t)
        if cfg.command == "certify":
            cert = moduli.no_rigid_cylinders(bw.BundleSpec(cfg.base, cfg.convention), cfg.m_max)
            return (EXIT_OK if cert.holds else EXIT_GATE), _render_certificate(cert)
        if cfg.command == "validate":
            return EXIT_OK, _render_validate(cfg)
        if cfg.command == "index-path":
            return EXIT_OK, _render_index(cfg.path.build())
    except moduli.GateError as exc:
        return EXIT_GATE, f"error: {exc}\n"
    except (ValueError, ArithmeticError) as exc:
        return EXIT_INPUT, f"error: {exc}\n"
    raise AssertionError(f"unhandled command {cfg.command}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reeb-grader",
        description="Graded ranks of cylindrical contact homology for Boothby-Wang bundles.",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="overrides [run] command from the config")
    parser.add_argument("--config", required=True, type=Path, help="config file")
    parser.add_argument("--override-gate", action="store_true",
                        help="compute even if the well-definedness gate fails")
    parser.add_argument("--format", choices=("table", "records"), help="output format")
    parser.add_argument("--out", type=Path, help="write output here instead of stdout")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(message)s")
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = parse_config(text, args.command)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"{args.config}: {e}", file=sys.stderr)
        return EXIT_INPUT
    if args.override_gate:
        cfg.override_gate = True
    if args.format:
        cfg.output_format = args.format
    if args.out:
        cfg.output_path = str(args.out)

    code, output = execute(cfg)
    if code != EXIT_OK and output.startswith("error:"):
        print(output, end="", file=sys.stderr)
        return code
    if cfg.output_path:
        Path(cfg.output_path).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return code


if __name__ == "__main__":
    sys.exit(main())
