"""Command-line driver: ``kpzlab <command> [options]``.

Every command resolves its parameters from defaults, an optional JSON config
file and the command line (flags win), runs, and writes its result to
``--out`` or stdout.  With ``--out`` the resolved configuration is echoed to
``<out>.config.json``; that file alone reproduces the result.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from . import asep, combinatorics, png, she_kpz, stats, tracy_widom
from .errors import ConsistencyError, DomainError, OutOfRangeError
from .poisson_geometry import sample_cone
from .rng import RngSpec, entropy_seed

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
FORMATS = ("csv", "json")
CONFIG_KEYS = {"command", "params", "seed", "out", "format"}
# written into the echo file; accepted on reload so an echo is itself a config
ECHO_KEYS = {"overrides", "seed_source", "metadata"}


class UsageError(Exception):
    pass


# --- output ---------------------------------------------------------------------

def fmt_real(v: float) -> str:
    return format(float(v), ".17g")


def dump_json(obj: Any, indent: int = 0) -> str:
    """JSON with every real printed to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dump_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dump_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dump_json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return "null"
        return fmt_real(obj)
    return json.dumps(str(obj))


def csv_text(header: list[str], rows) -> str:
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return fmt_real(v)
        return str(v)
    lines = [",".join(header)] + [",".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# --- parameters -----------------------------------------------------------------

def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(tok) for tok in str(text).split(",") if tok.strip())


def _flag(v) -> bool:
    if isinstance(v, bool):
        return v
    if str(v).lower() in ("1", "true", "yes"):
        return True
    if str(v).lower() in ("0", "false", "no"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


@dataclass(frozen=True)
class Param:
    name: str
    kind: Callable
    default: Any = None
    help: str = ""
    required: bool = False
    is_flag: bool = False


@dataclass
class RunConfig:
    command: str
    params: dict
    seed: int
    out: str | None
    format: str
    overrides: dict = field(default_factory=dict)
    seed_source: str = "flag"
    # parameters set by a flag or the config file rather than defaulted
    explicit: tuple[str, ...] = ()

    def echo(self) -> dict:
        return {"command": self.command, "params": self.params, "seed": self.seed,
                "out": self.out, "format": self.format, "overrides": self.overrides,
                "seed_source": self.seed_source,
                "metadata": {"timestamp": datetime.now(timezone.utc).isoformat(),
                             "version": __version__}}


# --- commands -------------------------------------------------------------------

def _chunks(total: int, jobs: int) -> list[tuple[int, int]]:
    k = max(1, min(jobs, total))
    edges = [total * i // k for i in range(k + 1)]
    return [(edges[i], edges[i + 1] - edges[i]) for i in range(k) if edges[i + 1] > edges[i]]


def _by_index(worker: Callable, total: int, jobs: int, seed: int, *args) -> list:
    """Run ``worker(rng, count, *args)`` over index blocks; trial i always uses stream i."""
    blocks = _chunks(total, jobs)
    specs = [(RngSpec(seed, start), count) for start, count in blocks]
    if jobs <= 1 or len(blocks) <= 1:
        return [worker(rng, n, *args) for rng, n in specs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(worker, rng, n, *args) for rng, n in specs]
        return [f.result() for f in futures]


def _lis_block(rng, n, intensity, poissonized):
    return stats.lis_monte_carlo(intensity, n, rng, poissonized)


def _png_block(rng, n, times):
    return png.origin_height_samples(times, n, rng)


def _she_block(rng, n, z0, T, dt):
    return she_kpz.she_ensemble(z0, T, dt, n, rng)


def cmd_lis(cfg: RunConfig, jobs: int):
    perm = combinatorics.Permutation.parse(cfg.params["perm"])
    n = combinatorics.lis_length(perm)
    if cfg.format == "json":
        return dump_json({"perm": list(perm.values), "length": n,
                          "witness": list(combinatorics.lis_witness(perm))}) + "\n"
    return f"{n}\n"


def cmd_lis_mc(cfg: RunConfig, jobs: int):
    p = cfg.params
    poissonized = not p["fixed_n"]
    L = np.concatenate(_by_index(_lis_block, p["samples"], jobs, cfg.seed, p["intensity"], poissonized))
    sample = stats.center_scale_lis(L, p["intensity"], {"seed": cfg.seed, "poissonized": poissonized})
    if cfg.format == "json":
        table = tracy_widom.tw_table()
        out = stats.summary(sample, table.cdf_at)
        out["tw_mean"] = table.mean
        return dump_json(out) + "\n"
    return csv_text(["trial", "length", "scaled"], zip(range(len(L)), L.tolist(), sample.draws.tolist()))


def cmd_plancherel(cfg: RunConfig, jobs: int):
    n = cfg.params["n"]
    pmf = combinatorics.plancherel_pmf(n)
    if cfg.format == "json":
        return dump_json(combinatorics.pmf_to_json(n, pmf)) + "\n"
    return csv_text(["l", "num", "den"], ((l, f.numerator, f.denominator) for l, f in sorted(pmf.items())))


def cmd_schur(cfg: RunConfig, jobs: int):
    p = cfg.params
    a, b = p["a"], p["b"]
    sums = combinatorics.schur_measure_partial_sums(a, b, p["max_size"])
    if cfg.format == "json":
        return dump_json({"a": list(a), "b": list(b), "normalization": combinatorics.cauchy_normalization(a, b),
                          "partial_sums": sums, "deficit": 1.0 - sums[-1]}) + "\n"
    return csv_text(["size", "mass"], enumerate(sums))


def cmd_png(cfg: RunConfig, jobs: int):
    p = cfg.params
    T = p["horizon"]
    times = sorted(set(p["observe"] or (T,)))
    if any(not 0 < t <= T for t in times):
        raise OutOfRangeError(f"observation times must lie in (0, {T}]")
    if p["trials"] == 1:
        traj = png.simulate_png(sample_cone(T, RngSpec(cfg.seed)), T, snapshot_times=times)
        xs = np.arange(-math.floor(T), math.floor(T) + 1, dtype=float)
        if cfg.format == "json":
            return dump_json({"metadata": traj.metadata(),
                              "heights": {fmt_real(t): [traj.height_at(t, x) for x in xs] for t in times},
                              "x": xs.tolist()}) + "\n"
        return traj.grid_csv(times, xs)
    H = np.concatenate(_by_index(_png_block, p["trials"], jobs, cfg.seed, times))
    var = H.var(axis=0, ddof=1)
    if cfg.format == "json":
        out = {"t": times, "mean": H.mean(axis=0).tolist(), "var": var.tolist(), "trials": len(H)}
        if len(times) >= 3 and np.all(var > 0):
            out["exponent"], out["stderr"] = stats.fit_exponent(list(zip(times, var)))
        return dump_json(out) + "\n"
    return csv_text(["trial", "t", "h"], ((i, t, int(H[i, j])) for i in range(len(H)) for j, t in enumerate(times)))


def cmd_asep(cfg: RunConfig, jobs: int):
    p = cfg.params
    eps = p["epsilon"]
    prob, T = p["p"], p["time"]
    if eps is not None:
        if "p" in cfg.explicit and abs(prob - asep.weak_asymmetry_p(eps)) > 1e-15:
            raise DomainError(f"--p {prob} conflicts with --epsilon {eps} (needs p = (1+eps)/2)")
        prob = asep.weak_asymmetry_p(eps)
        T = p["time"] / eps ** 4
    rng = RngSpec(cfg.seed)
    state = asep.init_random_walk(p["size"], rng.substream(0), p=prob)
    final = asep.simulate_asep(state, T, rng.substream(1))
    scaled = None
    if eps is not None:
        scaled = [asep.rescale_weak_asymmetry(final, eps, p["time"], x * eps ** 2) for x in range(final.size)]
    if cfg.format == "json":
        out = final.metadata()
        out["h"] = final.heights().tolist()
        if scaled is not None:
            out["h_scaled"] = scaled
        return dump_json(out) + "\n"
    if scaled is None:
        return final.to_csv()
    h = final.heights()
    return csv_text(["x", "eta", "h", "h_scaled"],
                    ((x, int(final.eta[x]), int(h[x]), scaled[x]) for x in range(final.size)))


def _she_initial(p) -> she_kpz.LatticeField:
    M, dx = p["sites"], p["dx"]
    P = M * dx
    if p["init"] == "flat":
        return she_kpz.LatticeField(np.ones(M), dx)
    if p["init"] == "cosine":
        return she_kpz.LatticeField.from_function(lambda x: 1 + 0.5 * np.cos(2 * np.pi * x / P), M, dx)
    raise DomainError(f"unknown initial profile {p['init']!r}")


def cmd_she(cfg: RunConfig, jobs: int):
    p = cfg.params
    z0 = _she_initial(p)
    if p["samples"] == 1:
        run = she_kpz.simulate_she(z0, p["time"], p["dt"], RngSpec(cfg.seed))
        if cfg.format == "json":
            out = dict(run.config, lost_positivity=run.lost_positivity, z=run.final.values.tolist())
            return dump_json(out) + "\n"
        return run.to_csv()
    parts = _by_index(_she_block, p["samples"], jobs, cfg.seed, z0, p["time"], p["dt"])
    Z = np.concatenate([z for z, _ in parts])
    lost = np.concatenate([f for f, _ in parts])
    mean, se = Z.mean(axis=0), Z.std(axis=0, ddof=1) / math.sqrt(len(Z))
    ref = she_kpz.heat_semigroup_reference(z0, p["time"], symbol="lattice").values
    if cfg.format == "json":
        return dump_json({"samples": len(Z), "lost_positivity": int(lost.sum()),
                          "x": z0.x.tolist(), "mean": mean.tolist(), "stderr": se.tolist(),
                          "heat_reference": ref.tolist()}) + "\n"
    return csv_text(["x", "mean", "stderr", "heat_reference"], zip(z0.x.tolist(), mean.tolist(), se.tolist(), ref.tolist()))


def cmd_tw(cfg: RunConfig, jobs: int):
    p = cfg.params
    quad = tracy_widom.QuadratureSpec(nodes=p["nodes"])
    if p["s"] is not None:
        val = tracy_widom.tw_gue_cdf(p["s"], quad)
        if cfg.format == "json":
            return dump_json({"s": p["s"], "F2": val, "nodes": p["nodes"]}) + "\n"
        return fmt_real(val) + "\n"
    table = tracy_widom.tw_table(p["s_min"], p["s_max"], p["step"], quad)
    if cfg.format == "json":
        return dump_json(dict(table.summary(), clamped=table.clamped)) + "\n"
    return table.to_csv()


def cmd_fit(cfg: RunConfig, jobs: int):
    """Exponent fit of columns t,v, or a Tracy-Widom comparison of a sample column."""
    p = cfg.params
    if not p["input"]:
        raise UsageError("fit needs --input")
    path = Path(p["input"])
    if not path.exists():
        raise DomainError(f"input file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    header = text.splitlines()[0].split(",") if text else []
    if p["column"] is None and {"t", "v"} <= set(header):
        rows = [line.split(",") for line in text.splitlines()[1:] if line]
        it, iv = header.index("t"), header.index("v")
        slope, se = stats.fit_exponent([(float(r[it]), float(r[iv])) for r in rows])
        out = {"mean": None, "var": None, "ks": None, "exponent": slope, "stderr": se, "n": len(rows)}
    else:
        col = p["column"] or header[-1]
        if col not in header:
            raise DomainError(f"column {col!r} not in {header}")
        sample = stats.EmpiricalSample.from_csv(text, col)
        if p["intensity"] is not None:
            sample = stats.center_scale_lis(sample.draws, p["intensity"])
        out = stats.summary(sample, tracy_widom.tw_table().cdf_at)
    if cfg.format == "json":
        return dump_json(out) + "\n"
    keys = ["mean", "var", "ks", "exponent", "stderr", "n"]
    return csv_text(keys, [["" if out[k] is None else out[k] for k in keys]])


COMMANDS: dict[str, tuple[Callable, list[Param], str]] = {
    "lis": (cmd_lis, [Param("perm", str, None, "permutation in one-line notation, e.g. 1,3,6,2,5,4", True)],
            "longest increasing subsequence of one permutation"),
    "lis-mc": (cmd_lis_mc, [Param("intensity", float, 1000.0, "Poisson intensity N (or size with --fixed-n)"),
                            Param("samples", int, 1000, "number of trials"),
                            Param("fixed_n", _flag, False, "uniform permutations of size N", is_flag=True)],
               "Poissonized LIS Monte Carlo"),
    "plancherel": (cmd_plancherel, [Param("n", int, None, "permutation size", True)],
                   "exact distribution of the LIS length"),
    "schur": (cmd_schur, [Param("a", _floats, (0.3, 0.2), "first specialization, comma separated"),
                          Param("b", _floats, (0.4,), "second specialization"),
                          Param("max_size", int, 30, "largest |lambda| summed")],
              "truncated Schur-measure mass"),
    "png": (cmd_png, [Param("horizon", float, 20.0, "simulation horizon T"),
                      Param("trials", int, 1, "independent trajectories"),
                      Param("observe", _floats, (), "observation times t1,t2,...")],
            "polynuclear growth from droplet data"),
    "asep": (cmd_asep, [Param("p", float, 0.5, "right-jump rate"),
                        Param("size", int, 200, "ring size L"),
                        Param("time", float, 10.0, "run time (macroscopic t with --epsilon)"),
                        Param("epsilon", float, None, "weak asymmetry p - q")],
             "exclusion process on a ring"),
    "she": (cmd_she, [Param("sites", int, 64, "grid size M"),
                      Param("dx", float, None, "spacing (default 1/M)"),
                      Param("dt", float, None, "time step (default dx^2/4)"),
                      Param("time", float, 0.1, "final time"),
                      Param("samples", int, 1, "independent runs"),
                      Param("init", str, "cosine", "initial profile: flat or cosine")],
            "stochastic heat equation"),
    "tw": (cmd_tw, [Param("s", float, None, "single evaluation point"),
                    Param("s_min", float, -10.0, "table start"),
                    Param("s_max", float, 6.0, "table end"),
                    Param("step", float, 0.01, "table spacing"),
                    Param("nodes", int, 64, "quadrature nodes")],
           "GUE Tracy-Widom distribution"),
    "fit": (cmd_fit, [Param("input", str, None, "CSV with columns t,v or a sample column"),
                      Param("column", str, None, "sample column to compare with F2"),
                      Param("intensity", float, None, "center and scale LIS lengths at intensity N")],
            "exponent fit or Tracy-Widom comparison"),
}


def _resolve_derived(command: str, params: dict) -> None:
    if command == "she":
        if params["dx"] is None:
            params["dx"] = 1.0 / params["sites"]
        if params["dt"] is None:
            params["dt"] = params["dx"] ** 2 / 4


# --- configuration --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpzlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, (_, params, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--seed", type=int, default=None, help="64-bit seed (drawn from entropy if absent)")
        sp.add_argument("--out", default=None, help="result path; config echoed to <out>.config.json")
        sp.add_argument("--format", choices=FORMATS, default=None)
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")
        sp.add_argument("--config", default=None, help="JSON config {command, params, seed, out, format}")
        for prm in params:
            flag = "--" + prm.name.replace("_", "-")
            if prm.is_flag:
                sp.add_argument(flag, dest=prm.name, action="store_const", const=True, default=None, help=prm.help)
            else:
                sp.add_argument(flag, dest=prm.name, default=None, help=prm.help)
    return parser


def load_config(path: str | Path) -> dict:
    """Read and schema-check a config file; raises UsageError naming offending keys."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file {path} not found")
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    bad = sorted(set(data) - CONFIG_KEYS - ECHO_KEYS)
    if bad:
        raise UsageError(f"unknown config keys: {', '.join(bad)}")
    cmd = data.get("command")
    if cmd is not None and cmd not in COMMANDS:
        raise UsageError(f"invalid config keys: command ({cmd!r} is not a command)")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise UsageError("invalid config keys: params (must be an object)")
    if cmd is not None:
        known = {p.name for p in COMMANDS[cmd][1]}
        unknown = sorted(set(params) - known)
        if unknown:
            raise UsageError(f"unknown params for {cmd}: {', '.join(unknown)}")
    if data.get("format") is not None and data["format"] not in FORMATS:
        raise UsageError("invalid config keys: format")
    if data.get("seed") is not None and not isinstance(data["seed"], int):
        raise UsageError("invalid config keys: seed")
    if data.get("out") is not None and not isinstance(data["out"], str):
        raise UsageError("invalid config keys: out")
    return data


def _convert(prm: Param, value, origin: str):
    if value is None:
        return None
    try:
        return prm.kind(value)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value for {prm.name} ({origin}): {value!r}")


def resolve(args: argparse.Namespace) -> RunConfig:
    file = load_config(args.config) if args.config else {}
    if file.get("command") not in (None, args.command):
        raise UsageError(f"invalid config keys: command ({file['command']!r} != {args.command!r})")
    fparams = file.get("params", {})
    params, overrides, explicit = {}, {}, []
    for prm in COMMANDS[args.command][1]:
        flag_val = _convert(prm, getattr(args, prm.name), "flag")
        file_val = _convert(prm, fparams.get(prm.name), "config")
        if flag_val is not None:
            params[prm.name] = flag_val
            explicit.append(prm.name)
            if prm.name in fparams and file_val != flag_val:
                overrides[prm.name] = {"flag": flag_val, "file": file_val}
        elif prm.name in fparams:
            params[prm.name] = file_val
            explicit.append(prm.name)
        else:
            params[prm.name] = prm.default
        if prm.required and params[prm.name] is None:
            raise UsageError(f"{args.command} needs --{prm.name.replace('_', '-')}")
    _resolve_derived(args.command, params)

    def pick(key, default):
        flag_val = getattr(args, key)
        if flag_val is not None:
            if file.get(key) not in (None, flag_val):
                overrides[key] = {"flag": flag_val, "file": file[key]}
            return flag_val, "flag"
        if file.get(key) is not None:
            return file[key], "file"
        return default, "default"

    seed, src = pick("seed", None)
    if seed is None:
        seed, src = entropy_seed(), "entropy"
    try:
        RngSpec(seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    out, _ = pick("out", None)
    fmt, _ = pick("format", "csv")
    return RunConfig(args.command, params, int(seed), out, fmt, overrides, src, tuple(explicit))


def _echo_path(out: str) -> Path:
    return Path(out + ".config.json")


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = resolve(args)
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"kpzlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fn = COMMANDS[cfg.command][0]
    try:
        result = fn(cfg, args.jobs)
    except UsageError as exc:
        print(f"kpzlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, OutOfRangeError, ConsistencyError, ValueError) as exc:
        print(f"kpzlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if cfg.out:
        Path(cfg.out).write_text(result, encoding="utf-8", newline="\n")
        _echo_path(cfg.out).write_text(dump_json(cfg.echo()) + "\n", encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(result)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
