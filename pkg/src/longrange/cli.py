"""Command-line entry point: ``longrange wigner|atoms|rotor ...``."""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .alkali import AtomSpecies, c6_ground_pair, resonant_c3, vdw_scales
from .angular import clebsch_gordan, parse_halfint, triangle_ok, wigner_6j, wigner_9j
from .constants import CONSTANTS_VERSION, DEBYE_IN_AU, kvcm_to_au
from .perturb import DegeneracyError
from .rotorpair import (BFSetup, RotorSpecies, SFSetup, Truncation, c3_block, induced_dipole_curve,
                        isolated_induced_dipole, pec_scan, rstar, vdw00, vdw11_exact)
from .spectra import DataError, ResonanceError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
DATA_ENV = "LONGRANGE_DATA"
BUNDLED = Path(__file__).with_name("data")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class OutputTable:
    columns: list[str]
    rows: list[list]
    metadata: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            body = {"metadata": self.metadata, "columns": self.columns, "rows": self.rows}
            if self.notes:
                body["notes"] = self.notes
            return json.dumps(body, sort_keys=True, indent=1, default=_jsonable) + "\n"
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.metadata, sort_keys=True, default=_jsonable) + "\n")
        for note in self.notes:
            buf.write(f"# {note}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(x) for x in row])
        return buf.getvalue()


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, Path):
        return str(x)
    return str(x)


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def resolve_data(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    for base in filter(None, (os.environ.get(DATA_ENV), str(BUNDLED))):
        q = Path(base) / name
        if q.exists():
            return q
    raise DataError(f"data file not found: {name}")


def _meta(args: argparse.Namespace) -> dict:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config", "out")}
    return {"tool": "longrange", "version": __version__, "constants": CONSTANTS_VERSION,
            "config": resolved}


# ---------------------------------------------------------------- wigner

def _halfints(values: list[str]) -> list[int]:
    # arguments are doubled integers; "1/2"-style input is accepted as well
    out = []
    for v in values:
        out.append(parse_halfint(v) if "/" in v else int(v))
    return out


def cmd_wigner(args) -> OutputTable:
    vals = _halfints(args.values)
    notes = []
    if args.kind == "cg":
        if len(vals) != 6:
            raise UsageError("cg takes 6 doubled arguments: j1 m1 j2 m2 J M")
        tj1, tm1, tj2, tm2, tJ, tM = vals
        for tj, tm in ((tj1, tm1), (tj2, tm2), (tJ, tM)):
            if tj < 0 or abs(tm) > tj or (tj - tm) % 2:
                raise UsageError(f"projection {tm}/2 invalid for j={tj}/2 (need |m|<=j, j-m integer)")
        value = clebsch_gordan(*vals)
        if tm1 + tm2 != tM:
            notes.append("0 (projection rule m1+m2=M violated)")
        elif not triangle_ok(tj1, tj2, tJ):
            notes.append(f"0 (triad violated: ({tj1}/2, {tj2}/2, {tJ}/2))")
    elif args.kind == "6j":
        if len(vals) != 6:
            raise UsageError("6j takes 6 doubled arguments")
        value = wigner_6j(*vals)
        a, b, c, d, e, f = vals
        for t in ((a, b, c), (a, e, f), (d, b, f), (d, e, c)):
            if not triangle_ok(*t):
                notes.append(f"0 (triad violated: ({t[0]}/2, {t[1]}/2, {t[2]}/2))")
                break
    else:
        if len(vals) != 9:
            raise UsageError("9j takes 9 doubled arguments")
        value = wigner_9j(*vals)
        m = [vals[0:3], vals[3:6], vals[6:9]]
        for line in m + [list(col) for col in zip(*m)]:
            if not triangle_ok(*line):
                notes.append(f"0 (triad violated: ({line[0]}/2, {line[1]}/2, {line[2]}/2))")
                break
        if not notes and 0 in vals:
            notes.append("a zero argument reduces the 9j to a single 6j symbol")
    return OutputTable(["exact", "value"], [[str(value), float(value)]], _meta(args), notes)


# ---------------------------------------------------------------- atoms

def cmd_atoms(args) -> OutputTable:
    meta = _meta(args)
    if args.sub == "scales":
        if args.mass_amu is None or args.c6 is None:
            raise UsageError("scales needs --mass-amu and --c6")
        mb = args.mass_amu_b if args.mass_amu_b is not None else args.mass_amu
        s = vdw_scales(args.mass_amu, mb, args.c6)
        return OutputTable(["mass_A_amu", "mass_B_amu", "C6_au", "R_vdw_a0", "E_vdw_au", "E_vdw_mK"],
                           [[args.mass_amu, mb, args.c6, s.R_vdw, s.E_vdw, s.E_vdw_mK]], meta)
    a = AtomSpecies.load(resolve_data(args.spectrum))
    if args.sub == "c6":
        b = AtomSpecies.load(resolve_data(args.spectrum_b)) if args.spectrum_b else a
        c = c6_ground_pair(a, b, method=args.method)
        return OutputTable(["species_A", "species_B", "method", "C6_au"], [[a.name, b.name, args.method, c.value]], meta)
    t = a.spectrum
    lower = t.level(args.lower) if args.lower else a.ground
    if args.upper:
        upper = t.level(args.upper)
    else:
        coupled = [k for k in t.levels if k != lower and t.reduced_element(k, lower, 1) != 0.0]
        if not coupled:
            raise DataError("no level is dipole-coupled to the lower level")
        upper = min(coupled, key=lambda k: (t.energy(k), k))
    res = resonant_c3(a, lower, upper)
    rows = [["Sigma", v] for v in res.sigma] + [["Pi", v] for v in res.pi]
    notes = [] if res.coupled else ["levels are not dipole-coupled; C3 vanishes"]
    return OutputTable(["symmetry", "C3_au"], rows, meta, notes)


# ---------------------------------------------------------------- rotor

def _rotors(args) -> tuple[RotorSpecies, RotorSpecies]:
    a = RotorSpecies.load(resolve_data(args.species))
    b = RotorSpecies.load(resolve_data(args.species_b)) if args.species_b else a
    return a, b


def _grid(args, rs: float) -> np.ndarray:
    if args.points is None or args.points < 1:
        raise UsageError("--points must be >= 1")
    rmin = args.rmin if args.rmin is not None else 0.1 * rs
    rmax = args.rmax if args.rmax is not None else 10.0 * rs
    if not 0 < rmin <= rmax:
        raise UsageError("need 0 < rmin <= rmax")
    if args.points == 1:
        return np.array([rmin])
    return np.geomspace(rmin, rmax, args.points)


def cmd_rotor(args) -> OutputTable:
    a, b = _rotors(args)
    meta = _meta(args)
    meta["species"] = {s.name: {"B0_au": s.B0, "d0_au": s.d0, "mass_me": s.mass} for s in (a, b)}
    if args.sub == "blocks":
        level = tuple(args.level)
        scale = a.d0**4 / a.B0
        if level == (0, 0):
            c = vdw00(a, b)
            return OutputTable(["M_tot", "symmetry", "exact_units", "C6_au"], [[0, "-", "", c.value]], meta)
        if level == (1, 1):
            if b is not a and (b.B0, b.d0) != (a.B0, a.d0):
                raise UsageError("the (1,1) block is tabulated for identical rotors")
            rows = []
            seen = set()
            for e in vdw11_exact():
                key = (abs(e.mtot), e.symmetry, str(e.value))
                if key in seen:
                    continue
                seen.add(key)
                rows.append([abs(e.mtot), e.symmetry, str(e.value), float(e.value) * scale])
            meta["units"] = "exact column in d0^4/B0; C6 in atomic units"
            return OutputTable(["abs_M_tot", "symmetry", "exact_units", "C6_au"], rows, meta)
        if level in ((1, 0), (0, 1)):
            blk = c3_block(a, b)
            rows = [[m, which, str(v), float(v) * a.d0**2]
                    for m, pair in sorted(blk.values.items()) for which, v in zip(("lower", "upper"), pair)]
            meta["units"] = "exact column in d0^2; C3 in atomic units"
            return OutputTable(["abs_M_tot", "branch", "exact_units", "C3_au"], rows, meta)
        raise UsageError("--level must be 0 0, 1 1, or 1 0")
    rs = rstar(a)
    grid = _grid(args, rs)
    field_au = kvcm_to_au(args.field_kvcm)
    if args.sub == "pec":
        if args.frame == "bf":
            if field_au:
                raise UsageError("a field is only supported in the SF frame")
            setup = BFSetup(a, b, args.mtot, args.jmax)
        else:
            setup = SFSetup(a, b, args.mtot, Truncation(args.jmax, args.lmax, args.jtot_max), field_au)
        res = pec_scan(setup, grid, n_curves=args.curves)
        tracked = res.tracked()
        cols = ["R_a0", "R_over_Rstar"] + [f"E{k}_au" for k in range(tracked.shape[1])]
        rows = [[float(r), float(r / rs)] + [float(x) for x in row] for r, row in zip(grid, tracked)]
        meta.update({"R_star_a0": rs, "asymptotic_labels": res.labels,
                     "basis_size": res.metadata["basis_size"], "warnings": res.metadata["warnings"]})
        return OutputTable(cols, rows, meta, [f"warning: {w}" for w in res.metadata["warnings"]])
    fields_kvcm = args.fields if args.fields else [args.field_kvcm]
    setup = SFSetup(a, b, args.mtot, Truncation(args.jmax, args.lmax, args.jtot_max))
    curves = induced_dipole_curve(setup, grid, [kvcm_to_au(f) for f in fields_kvcm])
    cols = ["R_a0", "R_over_Rstar"] + [f"dipole_{f:g}kVcm_D" for f in fields_kvcm]
    rows = [[float(r), float(r / rs)] + [float(curves[kvcm_to_au(f)][i]) / DEBYE_IN_AU for f in fields_kvcm]
            for i, r in enumerate(grid)]
    meta["isolated_pair_dipole_D"] = {f"{f:g}": 2 * isolated_induced_dipole(a, kvcm_to_au(f), args.jmax) / DEBYE_IN_AU
                                      for f in fields_kvcm}
    return OutputTable(cols, rows, meta)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="longrange", description="Long-range interaction coefficients and potential curves.")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", help="INI file with [wigner], [atoms], [rotor] sections")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--version", action="version", version=f"longrange {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    w = sub.add_parser("wigner", parents=[common], help="exact Clebsch-Gordan, 6j and 9j symbols (doubled arguments)")
    w.add_argument("kind", choices=("cg", "6j", "9j"))
    w.add_argument("values", nargs="+")
    # let "-1/2" through as a value rather than an option
    w._negative_number_matcher = re.compile(r"^-\d+(/\d+)?$|^-\d*\.\d+$")
    w.set_defaults(func=cmd_wigner)

    a = sub.add_parser("atoms", parents=[common], help="atom-pair scales, C6, resonant C3")
    a.add_argument("sub", choices=("scales", "c6", "c3"))
    a.add_argument("--mass-amu", type=float)
    a.add_argument("--mass-amu-b", type=float)
    a.add_argument("--c6", type=float)
    a.add_argument("--spectrum", default="toy.json")
    a.add_argument("--spectrum-b")
    a.add_argument("--method", choices=("direct", "quadrature"), default="direct")
    a.add_argument("--lower")
    a.add_argument("--upper")
    a.set_defaults(func=cmd_atoms)

    r = sub.add_parser("rotor", parents=[common], help="rotor-pair blocks, potential curves, induced dipoles")
    r.add_argument("sub", choices=("blocks", "pec", "dipole"))
    r.add_argument("species")
    r.add_argument("species_b", nargs="?")
    r.add_argument("--level", type=int, nargs=2, default=[1, 1])
    r.add_argument("--frame", choices=("bf", "sf"), default="sf")
    r.add_argument("-M", "--mtot", type=int, default=0)
    r.add_argument("--jmax", type=int, default=6, help="rotational truncation per molecule")
    r.add_argument("--lmax", type=int, default=8)
    r.add_argument("--jtot-max", type=int, default=3)
    r.add_argument("--field-kvcm", type=float, default=0.0)
    r.add_argument("--fields", type=float, nargs="+", help="field list for 'dipole' (kV/cm)")
    r.add_argument("--rmin", type=float, help="bohr (default 0.1 R*)")
    r.add_argument("--rmax", type=float, help="bohr (default 10 R*)")
    r.add_argument("--points", type=int, default=60)
    r.add_argument("--curves", type=int, default=20)
    r.set_defaults(func=cmd_rotor)
    return p


def _apply_config(parser: argparse.ArgumentParser, path: str) -> None:
    cfg = configparser.ConfigParser()
    if not cfg.read(path):
        raise DataError(f"config file not found: {path}")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sp in subparsers.choices.items():
        if not cfg.has_section(name):
            continue
        actions = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, text in cfg.items(name):
            dest = key.replace("-", "_")
            act = actions.get(dest)
            if act is None:
                raise DataError(f"{path}: [{name}] unknown key {key!r}")
            conv = act.type or str
            if act.nargs in ("+", "*") or isinstance(act.nargs, int):
                defaults[dest] = [conv(x) for x in text.split()]
            else:
                defaults[dest] = conv(text)
        sp.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        if "--config" in argv:
            i = argv.index("--config")
            if i + 1 >= len(argv):
                raise UsageError("--config needs a path")
            _apply_config(parser, argv[i + 1])
        args = parser.parse_args(argv)
        table = args.func(args)
        text = table.render(args.format)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ResonanceError, DegeneracyError, np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
