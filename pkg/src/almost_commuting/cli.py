"""Command line front end.

Subcommands: ``gen``, ``index``, ``solve``, ``lattice``, ``selftest``.
Exit codes: 0 success, 2 usage or bad input, 3 index undefined,
4 solver failure, 5 file problems.

Any option may also come from ``--config FILE`` holding flat ``key = value``
lines (``#`` starts a comment). Flags on the command line win.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import linalg as la
from .cmat import emit_csv, read_cmat, write_cmat
from .errors import (
    AlmostCommutingError,
    BadValue,
    DimensionMismatch,
    MissingRequired,
    ParseError,
    UnknownFlag,
    UsageError,
)
from .indices import (
    bott_spectral,
    bott_trace,
    kappa,
    kappa1,
    winding_det,
    winding_tracelog,
    z2_index,
)
from .representations import (
    ARITY,
    SelfDualStructure,
    SurfaceKind,
    clock_shift,
    defect_breakdown,
    make_rep,
    self_dual_doubled_triple,
    spin_triple,
)
from .solvers import DEFAULT_SOLVER, SOLVERS
from .transforms import solve_annulus, solve_cylinder, solve_disk, solve_sphere, solve_square

SPHERE_FORMULAS = {"bott-spec", "bott-trace", "z2"}
TORUS_FORMULAS = {"winding-det", "winding-log", "kappa", "kappa1"}
SOLVE_SURFACES = ["sphere", "square", "disk", "annulus", "cylinder"]
REPORT_COLUMNS = ["stage", "displacement", "defect_before", "defect_after"]

DEFAULTS = {
    "gen": {"two_s": 20, "n": 16, "self_dual": False, "seed": 0},
    "index": {"seed": 0},
    "solve": {"solver": DEFAULT_SOLVER, "report": None, "seed": 0},
    "lattice": {"sites": 560, "latitudes": 29, "monopole": 100, "disorder": 0.0, "seed": 0,
                "fermi": [-1.0, -2.0, -3.0, -4.0], "out": "sweep.csv", "spectrum": None,
                "radius": float(np.sqrt(0.07)), "hopping": 1.0},
    "selftest": {"seed": 0},
}
REQUIRED = {
    "gen": ["kind", "out"],
    "index": ["formula", "in"],
    "solve": ["surface", "in", "out"],
    "lattice": [],
    "selftest": [],
}


@dataclass
class RunConfig:
    """Fully resolved options for one invocation."""

    subcommand: str
    options: dict = field(default_factory=dict)
    config_file: str = None

    def __getitem__(self, key):
        return self.options[key]

    def echo(self):
        """Header lines written at the top of every CSV."""
        opts = ", ".join(f"{k}={_echo_value(v)}" for k, v in sorted(self.options.items()))
        return {"tool": f"almost-commuting {__version__}",
                "command": self.subcommand,
                "config": opts,
                "seed": self.options.get("seed", 0)}


def _echo_value(v):
    if isinstance(v, (list, tuple)):
        return "[" + " ".join(_echo_value(x) for x in v) + "]"
    return str(v)


# -- parsing ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting."""

    def error(self, message):
        if "unrecognized arguments" in message:
            raise UnknownFlag(message)
        if "required" in message:
            raise MissingRequired(message)
        raise BadValue(message)


def _float_list(text):
    try:
        vals = [float(x) for x in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def build_parser():
    p = _Parser(prog="almost-commuting", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)
    sub.required = True
    common = dict(argument_default=argparse.SUPPRESS)

    g = sub.add_parser("gen", help="write a standard example as CMAT files", **common)
    g.add_argument("--kind", choices=[k.value for k in SurfaceKind])
    g.add_argument("--two-s", dest="two_s", type=_positive_int, help="twice the spin (sphere family)")
    g.add_argument("--n", type=_positive_int, help="dimension (torus family)")
    g.add_argument("--self-dual", dest="self_dual", action="store_const", const=True,
                   help="sphere only: doubled self-dual triple")
    g.add_argument("--out", help="output prefix")

    i = sub.add_parser("index", help="compute an index of matrices in CMAT files", **common)
    i.add_argument("--formula", choices=sorted(SPHERE_FORMULAS | TORUS_FORMULAS))
    i.add_argument("--in", dest="in", nargs="+")

    s = sub.add_parser("solve", help="nearby commuting matrices", **common)
    s.add_argument("--surface", choices=SOLVE_SURFACES)
    s.add_argument("--solver", choices=sorted(SOLVERS))
    s.add_argument("--in", dest="in", nargs="+")
    s.add_argument("--out", help="output prefix")
    s.add_argument("--report", help="stage report CSV")

    lt = sub.add_parser("lattice", help="Bott index sweep of the spherical Hall model", **common)
    lt.add_argument("--sites", type=_positive_int)
    lt.add_argument("--latitudes", type=_positive_int)
    lt.add_argument("--monopole", type=int)
    lt.add_argument("--disorder", type=float)
    lt.add_argument("--hopping", type=float)
    lt.add_argument("--radius", type=float)
    lt.add_argument("--fermi", type=_float_list)
    lt.add_argument("--out")
    lt.add_argument("--spectrum")

    sub.add_parser("selftest", help="quick numerical sanity checks", **common)

    for sp in (g, i, s, lt):
        sp.add_argument("--seed", type=int)
    for sp in sub.choices.values():
        sp.add_argument("--config", dest="config_file")
    return p


def _glue_negative_values(args):
    """Turn ``--fermi -1,-2`` into ``--fermi=-1,-2`` so argparse keeps the value."""
    out = []
    it = iter(range(len(args)))
    for k in it:
        a = args[k]
        if a.startswith("--") and "=" not in a and k + 1 < len(args):
            nxt = args[k + 1]
            if nxt.startswith("-") and not nxt.startswith("--"):
                try:
                    _float_list(nxt)
                except argparse.ArgumentTypeError:
                    pass
                else:
                    out.append(f"{a}={nxt}")
                    next(it)
                    continue
        out.append(a)
    return out


def _actions(parser, subcommand):
    sp = parser._subparsers._group_actions[0].choices[subcommand]
    return {a.dest: a for a in sp._actions if a.dest not in ("help", "config_file")}


def read_config_file(path):
    """Flat ``key = value`` pairs. Keys may use dashes or underscores."""
    items = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc}", path=str(path)) from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno, str(path))
        key, val = (x.strip() for x in line.split("=", 1))
        if not key:
            raise ParseError("empty key", lineno, str(path))
        items[key.lstrip("-").replace("-", "_")] = (val, lineno)
    return items


def _convert(action, raw, where):
    if action.nargs == "+":
        vals = raw.split()
    elif action.const is True and action.nargs == 0:
        vals = [raw]
    else:
        vals = [raw]
    conv = action.type
    if action.const is True and action.nargs == 0:
        conv = _bool
    out = []
    for v in vals:
        try:
            v = conv(v) if conv else v
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise BadValue(f"{where}: --{action.dest.replace('_', '-')}: {exc}") from None
        if action.choices is not None and v not in action.choices:
            raise BadValue(f"{where}: --{action.dest.replace('_', '-')}: {v!r} not in {sorted(action.choices)}")
        out.append(v)
    return out if action.nargs == "+" else out[0]


def parse_cli(args):
    """Parse and validate a command line into a :class:`RunConfig`.

    Raises
    ------
    UnknownFlag, MissingRequired, BadValue
        With the offending flag named in the message.
    """
    parser = build_parser()
    ns = vars(parser.parse_args(_glue_negative_values(list(args))))
    cmd = ns.pop("subcommand")
    cfg_path = ns.pop("config_file", None)
    acts = _actions(parser, cmd)
    opts = dict(DEFAULTS[cmd])
    if cfg_path is not None:
        for key, (raw, lineno) in read_config_file(cfg_path).items():
            if key not in acts:
                raise UnknownFlag(f"{cfg_path}:{lineno}: unknown key {key!r} for '{cmd}'")
            opts[key] = _convert(acts[key], raw, f"{cfg_path}:{lineno}")
    opts.update(ns)
    for key in REQUIRED[cmd]:
        if opts.get(key) is None:
            raise MissingRequired(f"{cmd}: --{key.replace('_', '-')} is required")
    return RunConfig(subcommand=cmd, options=opts, config_file=cfg_path)


# -- commands ---------------------------------------------------------------

def _write_mats(prefix, mats):
    paths = []
    for r, M in enumerate(mats, 1):
        path = f"{prefix}_{r}.cmat"
        write_cmat(path, M)
        paths.append(path)
    return paths


def cmd_gen(cfg, out):
    kind = SurfaceKind(cfg["kind"])
    two_s, n = cfg["two_s"], cfg["n"]
    if cfg["self_dual"] and kind is not SurfaceKind.SPHERE:
        raise BadValue("--self-dual only applies to --kind sphere")
    if kind is SurfaceKind.SPHERE:
        rep = self_dual_doubled_triple(two_s)[0] if cfg["self_dual"] else spin_triple(two_s)
        mats = rep.mats
    elif kind is SurfaceKind.TORUS:
        mats = clock_shift(max(2, n)).mats
    elif kind is SurfaceKind.SQUARE:
        mats = spin_triple(two_s).mats[:2]
    elif kind is SurfaceKind.DISK:
        H1, H2, _ = spin_triple(two_s).mats
        mats = [(H1 + 1j * H2) / 2]
    else:
        # cylinder from the clock and shift; the annulus is U (3/4 + K/4)
        U, V = clock_shift(max(2, n)).mats
        K = la.hermitian_part((V + V.conj().T) / 2)
        mats = [U, K] if kind is SurfaceKind.CYLINDER else [U @ (0.75 * np.eye(U.shape[0]) + 0.25 * K)]
    rep = make_rep(kind, mats)
    paths = _write_mats(cfg["out"], rep.mats)
    parts = " ".join(f"{k}={v:.6g}" for k, v in sorted(defect_breakdown(kind, rep.mats).items()))
    line = f"kind={kind.value} n={rep.n} delta={rep.delta:.12g} {parts}".rstrip()
    Path(f"{cfg['out']}.defect").write_text(line + "\n")
    print(line, file=out)
    for p in paths:
        print(p, file=out)
    return 0


def _load(paths, count, what):
    if len(paths) != count:
        raise BadValue(f"--in: {what} needs {count} files, got {len(paths)}")
    mats = [read_cmat(p) for p in paths]
    if len({m.shape for m in mats}) != 1:
        raise DimensionMismatch("--in: matrices differ in dimension")
    return mats


def compute_index(formula, mats):
    if formula in SPHERE_FORMULAS:
        n = mats[0].shape[0]
        t = make_rep(SurfaceKind.SPHERE, mats)
        if formula == "bott-spec":
            return bott_spectral(t)
        if formula == "bott-trace":
            return bott_trace(t)
        if n % 2:
            raise DimensionMismatch(f"z2 needs even dimension, got {n}")
        return z2_index(t, SelfDualStructure.of_half(n // 2))
    U, V = make_rep(SurfaceKind.TORUS, mats).mats
    fn = {"winding-det": winding_det, "winding-log": winding_tracelog,
          "kappa": kappa, "kappa1": kappa1}[formula]
    return fn(U, V)


def cmd_index(cfg, out):
    formula = cfg["formula"]
    count = 3 if formula in SPHERE_FORMULAS else 2
    mats = _load(cfg["in"], count, formula)
    res = compute_index(formula, mats)
    print(json.dumps(res.as_record()), file=out)
    return 0


def cmd_solve(cfg, out):
    surface = SurfaceKind(cfg["surface"])
    s = cfg["solver"]
    mats = _load(cfg["in"], ARITY[surface], surface.value)
    if surface is SurfaceKind.SPHERE:
        rep = solve_sphere(make_rep(surface, mats), s)
    elif surface is SurfaceKind.SQUARE:
        rep = solve_square(*mats, s)
    elif surface is SurfaceKind.DISK:
        rep = solve_disk(mats[0], s)
    elif surface is SurfaceKind.ANNULUS:
        rep = solve_annulus(mats[0], s)
    else:
        rep = solve_cylinder(*mats, s)
    paths = _write_mats(cfg["out"], rep.output.mats)
    if cfg["report"]:
        rows = [{"stage": st.name, "displacement": st.displacement,
                 "defect_before": st.defect_before, "defect_after": st.defect_after}
                for st in rep.stages]
        emit_csv(rows, REPORT_COLUMNS, cfg["report"], header=cfg.echo())
    print(f"displacement={rep.max_displacement:.12g} defect={rep.output.delta:.3g}", file=out)
    for p in paths:
        print(p, file=out)
    return 0


def cmd_lattice(cfg, out):
    from .lattice import SWEEP_COLUMNS, bott_sweep, build_hamiltonian, make_model

    m = make_model(cfg["latitudes"], cfg["sites"], n_monopole=cfg["monopole"],
                   disorder=cfg["disorder"], seed=cfg["seed"], J=cfg["hopping"], R=cfg["radius"])
    H = build_hamiltonian(m)
    rows = bott_sweep(m, cfg["fermi"], H=H)
    emit_csv(rows, SWEEP_COLUMNS, cfg["out"], header=cfg.echo())
    if cfg["spectrum"]:
        e = np.linalg.eigvalsh(H)
        emit_csv([{"index": k, "eigenvalue": v} for k, v in enumerate(e)],
                 ["index", "eigenvalue"], cfg["spectrum"], header=cfg.echo())
    for r in rows:
        print(f"fermi={r['fermi']:g} rank={r['rank']} bott={r['bott']} status={r['status']}", file=out)
    return 0


def run_selftest():
    """Small known cases. Returns ``[(name, ok, detail), ...]``."""
    checks = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except AlmostCommutingError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        checks.append((name, bool(ok), detail))

    def spin_bott():
        r = bott_spectral(spin_triple(10))
        return r.value == 1, f"value={r.value} gap={r.gap:.3g}"

    def clock_winding():
        U, V = clock_shift(8).mats
        vals = [winding_det(U, V).value, winding_tracelog(U, V).value, kappa1(U, V).value]
        return vals == [1, 1, 1], f"values={vals}"

    def doubled_z2():
        rep, sd = self_dual_doubled_triple(4)
        r = z2_index(rep, sd)
        return r.value == -1, f"value={r.value}"

    def pfaffian():
        rng = np.random.default_rng(0)
        A = rng.normal(size=(6, 6))
        A = A - A.T
        pf = la.pfaffian(A)
        return abs(pf * pf - np.linalg.det(A)) < 1e-9 * max(1, abs(np.linalg.det(A))), f"pf={pf:.6g}"

    check("bott(spin S=5) = 1", spin_bott)
    check("winding(clock-shift 8) = 1", clock_winding)
    check("z2(doubled S=2) = -1", doubled_z2)
    check("pf^2 = det", pfaffian)
    return checks


def cmd_selftest(cfg, out):
    results = run_selftest()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})", file=out)
    return 0 if all(ok for _, ok, _ in results) else 1


COMMANDS = {"gen": cmd_gen, "index": cmd_index, "solve": cmd_solve,
            "lattice": cmd_lattice, "selftest": cmd_selftest}


def main(argv=None, out=None, err=None):
    """Entry point; returns the process exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_cli(argv)
        return COMMANDS[cfg.subcommand](cfg, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return exc.exit_code
    except ParseError as exc:
        print(f"error: {exc}", file=err)
        return exc.exit_code
    except AlmostCommutingError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return 5
