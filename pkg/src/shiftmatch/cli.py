"""Command-line entry point: ``shiftmatch {thermo,sample,match,experiment}``.

Errors go to stderr as one line ``error[<code>]: <message>`` with a distinct
exit status per code.  Every run logs ``# seed=... model=... digest=...`` to
stderr.  Files are written only after all computation succeeded, through a
temporary file renamed into place.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import thermo
from .matcher import CrossIndex, first_occurrence, max_match_from_index
from .modelfile import ModelFileError, dump_model, load_model, model_from_dict
from .sampler import Sequence, build_chain, read_tokens, sample, write_sequence
from .suffix import SuffixIndex, compact_codes

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

EXIT = {
    "usage": 2,
    "missing-file": 3,
    "model-file": 4,
    "invalid-value": 5,
    "length-mismatch": 6,
    "cap-exceeded": 7,
    "plan-file": 8,
    "numerics": 9,
}


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


# ---------------------------------------------------------------- helpers

def atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return "" if x is None else str(x)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _model(path):
    if path is None:
        return None
    try:
        return load_model(path)
    except FileNotFoundError as exc:
        raise CliError("missing-file", str(exc)) from None
    except ModelFileError as exc:
        raise CliError("model-file", str(exc)) from None


def _log(seed, *models) -> None:
    names = ",".join(m.name for m in models if m is not None) or "-"
    digests = ",".join(m.digest()[:16] for m in models if m is not None) or "-"
    print(f"# seed={seed} model={names} digest={digests}", file=sys.stderr)


def _check_out_dir(path) -> Path:
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise CliError("missing-file", f"output directory does not exist: {parent}")
    return path


# ---------------------------------------------------------------- thermo

QUANTITIES = ("pressure", "entropy", "alpha", "alpha_tilde", "rho_hat", "gamma_hat", "k_star")


def cmd_thermo(args) -> int:
    U = _model(args.model)
    V = _model(args.model2)
    wanted = [q for q in QUANTITIES if getattr(args, q)]
    if not wanted:
        wanted = ["pressure", "entropy", "alpha"] + (["alpha_tilde"] if V else [])
        wanted += ["rho_hat", "gamma_hat"] + (["k_star"] if args.n else [])
    if "alpha_tilde" in wanted and V is None:
        raise CliError("usage", "--alpha-tilde needs --model2")
    if "k_star" in wanted and not args.n:
        raise CliError("usage", "--k-star needs at least one --n")
    if any(n < 2 for n in args.n or []):
        raise CliError("invalid-value", "--n must be >= 2")
    k_max = args.k_max
    _log(args.seed, U, V)
    rows = []
    try:
        for q in wanted:
            if q == "pressure":
                rows.append(("pressure", "", thermo.pressure(U)))
            elif q == "entropy":
                rows.append(("entropy", "", thermo.entropy(U)))
            elif q == "alpha":
                rows.append(("alpha", "", thermo.alpha(U)))
            elif q == "alpha_tilde":
                rows.append(("alpha_tilde", "", thermo.alpha_tilde(U, V)))
            elif q in ("rho_hat", "gamma_hat"):
                d = thermo.diagnostics(U, k_max, cap=args.cap)
                rows.append((q, f"k_max={k_max}" if q == "gamma_hat" else "",
                             d.rho_hat if q == "rho_hat" else d.gamma_hat))
            elif q == "k_star":
                for n in args.n:
                    val = thermo.k_star_tilde(U, V, n) if V is not None else thermo.k_star(U, n)
                    rows.append(("k_star", f"n={n}", val))
    except thermo.CapExceeded as exc:
        raise CliError("cap-exceeded", str(exc)) from None
    except thermo.PerronError as exc:
        raise CliError("numerics", str(exc)) from None
    if args.format == "csv":
        text = csv_text(["quantity", "param", "value"], rows)
    else:
        w1 = max(len(r[0]) for r in rows)
        w2 = max(len(r[1]) for r in rows)
        text = "".join(f"{q:<{w1}}  {p:<{w2}}  {fmt(v)}\n" for q, p, v in rows)
    _emit(text, args.out)
    return 0


def _emit(text: str, out) -> None:
    if out:
        atomic_write(_check_out_dir(out), text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- sample

def cmd_sample(args) -> int:
    U = _model(args.model)
    if args.n is None or len(args.n) != 1:
        raise CliError("usage", "sample needs exactly one --n")
    n = args.n[0]
    if n < U.block:
        raise CliError("invalid-value", f"--n {n} is shorter than the block length {U.block}")
    out = _check_out_dir(args.out) if args.out else None
    _log(args.seed, U)
    seq = sample(build_chain(U), n, args.seed)
    if out is None:
        sys.stdout.write(f"# model={seq.model_id} n={seq.n} seed={seq.seed}\n{seq}\n")
    else:
        write_sequence(seq, out)
    return 0


# ---------------------------------------------------------------- match

_RULE = re.compile(r"^kstar(\+-|-\+|±|\+|-)(\d+)$")


def parse_k_values(spec: str) -> list[int]:
    """``5``, ``3..8`` (inclusive), ``3:8`` or comma-separated mixtures."""
    ks: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        m = re.fullmatch(r"(\d+)\s*(?:\.\.|:)\s*(\d+)", part)
        try:
            if m:
                lo, hi = int(m.group(1)), int(m.group(2))
                if hi < lo:
                    raise ValueError
                ks.extend(range(lo, hi + 1))
            else:
                ks.append(int(part))
        except ValueError:
            raise CliError("invalid-value", f"cannot read k value {part!r}") from None
    return ks


def resolve_k_rule(rule: str, kstar: float) -> list[int]:
    m = _RULE.match(rule.replace(" ", ""))
    if not m:
        raise CliError("invalid-value", f"k rule {rule!r} must look like kstar+-W, kstar+W or kstar-W")
    sign, w = m.group(1), int(m.group(2))
    base = math.floor(kstar + 1e-9)
    if sign == "+":
        return [base + w]
    if sign == "-":
        return [base - w]
    return list(range(base - w, base + w + 1))


def _read_seq(path) -> Sequence:
    try:
        tokens, meta = read_tokens(path)
    except FileNotFoundError:
        raise CliError("missing-file", f"sequence file not found: {path}") from None
    except ValueError as exc:
        raise CliError("invalid-value", str(exc)) from None
    return tokens, meta


def cmd_match(args) -> int:
    seqs = args.seq or []
    if len(seqs) not in (1, 2):
        raise CliError("usage", "match needs one or two --seq files")
    read = [_read_seq(p) for p in seqs]
    U = _model(args.model)
    V = _model(args.model2)
    if args.k is None and args.k_rule is None:
        raise CliError("usage", "match needs --k or --k-rule")
    lengths = [len(t) for t, _ in read]
    if len(read) == 2 and lengths[0] != lengths[1]:
        raise CliError(
            "length-mismatch",
            f"sequences have lengths {lengths[0]} and {lengths[1]}; two-sequence matching "
            f"is defined only for equal lengths",
        )
    n = lengths[0]
    ks = parse_k_values(args.k) if args.k is not None else []
    if args.k_rule is not None:
        if U is None:
            raise CliError("usage", "--k-rule needs --model to resolve k*")
        if n < 2:
            raise CliError("invalid-value", "k* needs n >= 2")
        kstar = thermo.k_star_tilde(U, V, n) if (V is not None and len(read) == 2) else thermo.k_star(U, n)
        ks += resolve_k_rule(args.k_rule, kstar)
    bad = [k for k in ks if not 1 <= k <= n]
    if bad:
        raise CliError("invalid-value", f"k = {bad[0]} out of range 1..{n}")
    seed = read[0][1].get("seed", "-")
    _log(seed, U, V)

    if len(read) == 1:
        tokens = read[0][0]
        (codes,) = compact_codes(_token_codes(tokens)[0])
        idx = SuffixIndex(codes)
        M = max_match_from_index(idx)
        mi, mj = M.witness if M.witness else ("", "")
        rows = []
        for k in ks:
            T = first_occurrence(codes, k)
            ti, tj = T.witness[:2] if T.witness else ("", "")
            rows.append([n, k, idx.count_pairs(k), M.length, mi, mj, T.time, ti, tj])
        header = ["n", "k", "N", "M", "M_i", "M_j", "T", "T_i", "T_j"]
    else:
        a, b = _token_codes(read[0][0], read[1][0])
        cross = CrossIndex(a, b)
        R = cross.max_match()
        mi, mj = R.witness if R.witness else ("", "")
        fi, fj = R.unconstrained_witness if R.unconstrained_witness else ("", "")
        rows = [[n, k, cross.count(k), R.length, mi, mj, R.unconstrained_length, fi, fj] for k in ks]
        header = ["n", "k", "N", "M", "M_i", "M_j", "M_free", "M_free_i", "M_free_j"]
    _emit(csv_text(header, rows), args.out)
    return 0


def _token_codes(*token_lists):
    vocab = {tok: i for i, tok in enumerate(sorted(set().union(*token_lists)))}
    return [np.array([vocab[t] for t in toks], dtype=np.int64) for toks in token_lists]


# ---------------------------------------------------------------- experiment

def load_plan(path, seed_override=None, trials_override=None) -> tuple[list, dict]:
    """Scans and run settings from a TOML plan file."""
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except FileNotFoundError:
        raise CliError("missing-file", f"plan file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise CliError("plan-file", f"{path}: invalid TOML: {exc}") from None

    def model_of(entry, key):
        if entry is None:
            return None
        if isinstance(entry, str):
            p = Path(entry)
            return _model(p if p.is_absolute() else path.parent / p)
        if isinstance(entry, dict):
            try:
                return model_from_dict(entry, source=f"{path}:{key}", default_id=key)
            except ModelFileError as exc:
                raise CliError("model-file", str(exc)) from None
        raise CliError("plan-file", f"{path}: '{key}' must be a path or a table")

    U = model_of(data.get("model"), "model")
    if U is None:
        raise CliError("plan-file", f"{path}: missing 'model'")
    V = model_of(data.get("model2"), "model2")
    seed = int(seed_override if seed_override is not None else data.get("seed", ex.DEFAULT_SEED))
    delta = float(data.get("delta", 0.1))
    scans = data.get("scan", [])
    if not scans:
        raise CliError("plan-file", f"{path}: no [[scan]] entries")
    plans, names = [], set()
    for i, sc in enumerate(scans):
        name = str(sc.get("name", f"scan{i + 1}"))
        if not re.fullmatch(r"[A-Za-z0-9_.-]+", name) or name in names:
            raise CliError("plan-file", f"{path}: scan name {name!r} is invalid or repeated")
        names.add(name)
        try:
            kind = sc.get("kind", "regime")
            m_max = int(sc.get("m_max", 64))
            plan = ex.ExperimentPlan(
                model=U,
                model2=V,
                mode=sc.get("mode", "dirac" if kind == "dirac" else "self"),
                n_grid=tuple(sc["n"]),
                k_offsets=tuple(sc.get("k_offsets", [0])),
                k_list=tuple(sc["k"]) if "k" in sc else None,
                trials=trials_override if trials_override is not None else sc.get("trials"),
                seed=seed + int(sc.get("seed_offset", 0)),
                symbol=sc.get("symbol"),
                kind=kind,
                name=name,
                m_list=tuple(range(1, m_max + 1)),
            )
        except KeyError as exc:
            raise CliError("plan-file", f"{path}: scan {name!r} missing {exc}") from None
        except (TypeError, ValueError) as exc:
            raise CliError("plan-file", f"{path}: scan {name!r}: {exc}") from None
        plans.append(plan)
    return plans, {"seed": seed, "delta": delta, "models": [m for m in (U, V) if m is not None]}


def scan_files(result: ex.ScanResult, plot_data: bool) -> dict[str, str]:
    """File name -> contents for one finished scan."""
    plan = result.plan
    name = plan.name
    files = {}
    if plan.kind == "slope":
        rows = [[c.n, "", c.trials, c.mean, c.var, c.q05, c.q50, c.q95, c.zero_frac,
                 c.pred_mean, c.ratio] for c in result.cells]
    else:
        rows = [c.row() for c in result.cells]
    files[f"{name}.csv"] = csv_text(ex.CSV_COLUMNS, rows)
    if plan.kind == "tightness":
        ex_rows = [[r.n, r.k, m, p, m * p] for r in result.extra["rows"] for m, p in r.m_exceed]
        files[f"{name}_exceed.csv"] = csv_text(["n", "k", "m", "p_exceed", "m_p_exceed"], ex_rows)
    if plan.kind == "slope":
        f = result.extra["fit"]
        files[f"{name}_fit.csv"] = csv_text(
            ["slope", "intercept", "slope_stderr", "target", "rel_error"],
            [[f.slope, f.intercept, f.slope_stderr, f.target, f.rel_error]])
    if plan.kind == "dirac":
        files[f"{name}_closed_form.csv"] = csv_text(
            ["n", "k", "trials", "pred_mean", "exact_mean", "n_prob", "union_bound", "zero_frac"],
            [[r.n, r.k, r.trials, r.pred_mean, r.exact_mean, r.n_prob, r.union_bound, r.zero_frac]
             for r in result.extra["rows"]])
    if plot_data:
        files.update(_plot_files(result))
    return files


def _dat(pairs) -> str:
    return "".join(f"{fmt(x)} {fmt(y)}\n" for x, y in pairs)


def _plot_files(result) -> dict[str, str]:
    plan = result.plan
    name = plan.name
    out = {}
    if plan.kind == "slope":
        out[f"{name}_M.dat"] = _dat((math.log(c.n), c.mean) for c in result.cells)
    elif plan.kind == "dirac":
        rows = result.extra["rows"]
        out[f"{name}_pred.dat"] = _dat((r.n, r.pred_mean) for r in rows)
        out[f"{name}_zero_frac.dat"] = _dat((r.n, r.zero_frac) for r in rows if r.trials > 0)
    else:
        for label, series in ex._series(result.cells).items():
            tag = str(label).replace("+", "p").replace("-", "m")
            out[f"{name}_{tag}_mean.dat"] = _dat((c.n, c.mean) for c in series)
            out[f"{name}_{tag}_zero_frac.dat"] = _dat((c.n, c.zero_frac) for c in series)
    return out


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if hasattr(x, "item"):
        return x.item()
    return x


def cmd_experiment(args) -> int:
    if not args.out:
        raise CliError("usage", "experiment needs --out DIR")
    if args.workers < 1:
        raise CliError("invalid-value", "--workers must be >= 1")
    out = Path(args.out)
    if out.exists() and not out.is_dir():
        raise CliError("invalid-value", f"--out {out} exists and is not a directory")
    if not out.parent.is_dir():
        raise CliError("missing-file", f"output directory does not exist: {out.parent}")
    plans, meta = load_plan(args.plan, args.seed, args.trials)
    _log(meta["seed"], *meta["models"])
    t0 = time.perf_counter()
    files: dict[str, str] = {}
    scans_meta = []
    for plan in plans:
        t1 = time.perf_counter()
        try:
            res = ex.run_scan(plan, workers=args.workers, delta=meta["delta"])
        except (ex.DegenerateGrid, ex.NoAdmissibleK) as exc:
            raise CliError("invalid-value", f"scan {plan.name!r}: {exc}") from None
        files.update(scan_files(res, args.plot_data))
        info = {"name": plan.name, "kind": plan.kind, "mode": plan.mode,
                "n_grid": list(plan.n_grid), "trials": [plan.trials_for(n) for n in plan.n_grid],
                "seed": plan.seed, "verdicts": res.verdicts,
                "wall_time_s": round(time.perf_counter() - t1, 3)}
        if plan.kind == "slope":
            info["fit"] = vars(res.extra["fit"])
        scans_meta.append(info)
    manifest = {
        "seed": meta["seed"],
        "models": [{"id": m.name, "digest": m.digest(), "definition": dump_model(m)}
                   for m in meta["models"]],
        "scans": scans_meta,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    files["manifest.json"] = json.dumps(_jsonable(manifest), indent=2) + "\n"
    out.mkdir(exist_ok=True)
    for fname, text in files.items():
        atomic_write(out / fname, text)
    print(f"wrote {len(files)} files to {out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shiftmatch", description="Shift-match statistics of Gibbs sequences.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, seed=True):
        sp.add_argument("--model", help="model definition file (TOML)")
        sp.add_argument("--model2", help="second model file")
        sp.add_argument("--out", help="output path")
        if seed:
            sp.add_argument("--seed", type=int, default=ex.DEFAULT_SEED)

    t = sub.add_parser("thermo", help="pressure, entropy, alpha and diagnostics")
    common(t)
    t.add_argument("--n", type=int, action="append", help="length for k* (repeatable)")
    t.add_argument("--k", dest="k_max", type=int, default=8, help="pattern length for gamma_hat")
    t.add_argument("--cap", type=int, default=thermo.DEFAULT_CAP)
    t.add_argument("--format", choices=("text", "csv"), default="text")
    for q in QUANTITIES:
        t.add_argument(f"--{q.replace('_', '-')}", dest=q, action="store_true")
    t.set_defaults(func=cmd_thermo, need_model=True)

    s = sub.add_parser("sample", help="draw a stationary sequence")
    common(s)
    s.add_argument("--n", type=int, action="append")
    s.set_defaults(func=cmd_sample, need_model=True)

    m = sub.add_parser("match", help="N, M and T of one or two sequence files")
    common(m, seed=False)
    m.add_argument("--seq", action="append", help="sequence file (give twice for a pair)")
    m.add_argument("--k", help="k value, range a..b, or comma list")
    m.add_argument("--k-rule", help="kstar+-W, kstar+W or kstar-W (needs --model)")
    m.set_defaults(func=cmd_match, need_model=False)

    e = sub.add_parser("experiment", help="run a plan of Monte Carlo scans")
    e.add_argument("plan", help="plan file (TOML)")
    e.add_argument("--out", help="output directory")
    e.add_argument("--seed", type=int, default=None, help="override the plan seed")
    e.add_argument("--trials", type=int, default=None, help="override trials for every scan")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--plot-data", action="store_true")
    e.set_defaults(func=cmd_experiment, need_model=False)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise CliError("usage", "expected a subcommand: thermo, sample, match, experiment")
        if args.need_model and not args.model:
            raise CliError("usage", f"{args.command} needs --model")
        return args.func(args)
    except CliError as exc:
        msg = " ".join(str(exc).split())
        print(f"error[{exc.code}]: {msg}", file=sys.stderr)
        return EXIT[exc.code]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
