"""Command-line interface.

Subcommands: enumerate | classify | count | moments | mc | var | law |
contract | heavytail | resolvent-check.  Tabular output is CSV (default) or
JSON via --format; floats are serialised with 17 significant digits so runs
are bit-reproducible.  A JSON config file mirroring ExperimentConfig can
seed the common flags; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import counting, experiments, limitlaw, maps, tensor
from .hypergraph import (
    euler_deficiency,
    hypergraph_of,
    is_melonic_graph,
    melonic_partition,
)
from .maps import canonical_code, dual, enumerate_rooted_connected


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    if isinstance(x, (tuple, list)):
        return " ".join(str(v) for v in x)
    if x is None:
        return ""
    return str(x)


def _emit_table(header, rows, out, fmt):
    """Write rows (sequences aligned with header) as CSV or JSON."""
    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        text = json.dumps(payload, indent=2, default=_fmt) + "\n"
    else:
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _estimate_table(rows):
    header = ["N", "n", "mean", "stderr", "variance", "target", "deviation"]
    data = [
        (r.N, r.n, r.mean, r.stderr, r.variance, r.target, r.deviation) for r in rows
    ]
    return header, data


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="melonic",
        description="Trace invariants of symmetric random tensors at desk scale.",
    )
    ap.add_argument("--config", help="JSON file with ExperimentConfig defaults")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, mc=False):
        sp.add_argument("--p", type=int, help="tensor order / vertex valence")
        sp.add_argument("--n", type=int, help="degree (vertices of the maps)")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), dest="fmt")
        if mc:
            sp.add_argument("--N", type=_int_list, help="comma-separated dimensions")
            sp.add_argument("--samples", type=int)
            sp.add_argument("--seed", type=int)
            sp.add_argument("--threads", type=int)
            sp.add_argument(
                "--dist",
                help="gaussian-gote | gaussian-offdiag-only | rademacher | uniform"
                " | symmetrized-pareto:ALPHA",
            )

    common(sub.add_parser("enumerate", help="rooted connected p-regular maps"))
    common(sub.add_parser("classify", help="melonic classification per map"))
    common(sub.add_parser("count", help="Fuss-Catalan counting table"))
    sp = sub.add_parser("moments", help="exact finite-N expectations per map")
    common(sp, mc=True)
    sp.add_argument("--exact", action="store_true", default=True,
                    help="exact oracle mode (always on)")
    common(sub.add_parser("mc", help="Monte Carlo moments of I_n/N"), mc=True)
    common(sub.add_parser("var", help="variance scaling of I_n/N"), mc=True)

    sp = sub.add_parser("law", help="limit-law density grid and moments")
    common(sp)
    sp.add_argument("--k", type=int, help="contraction depth (default 0)")
    sp.add_argument("--grid", type=int, default=101, help="density grid points")
    sp.add_argument("--eta", type=float, default=1e-4, help="inversion offset")

    sp = sub.add_parser("contract", help="contracted-tensor moments")
    common(sp, mc=True)
    sp.add_argument("--k", type=int, help="contraction depth (default 1)")
    sp.add_argument("--random-unit", action="store_true",
                    help="contract by a deterministic random unit vector instead of e1")

    sp = sub.add_parser("heavytail", help="median moments with Pareto entries")
    common(sp, mc=True)
    sp.add_argument("--tail", type=float, default=3.5, help="Pareto tail index")

    sp = sub.add_parser("resolvent-check", help="p=2 resolvent series vs dense trace")
    common(sp, mc=True)
    sp.add_argument("--z", type=float, default=3.0)
    sp.add_argument("--K", type=int, default=20)
    return ap


_DEFAULTS = dict(
    p=3, n=2, N=(16, 32), samples=200, seed=1, threads=1, dist="gaussian-gote", fmt="csv"
)


def _resolve(args) -> dict:
    """Defaults < config file < explicit flags."""
    cfg = dict(_DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        rename = {"n_max": "n", "N_grid": "N", "format": "fmt"}
        for key, val in raw.items():
            key = rename.get(key, key)
            if key == "N":
                val = tuple(val)
            cfg[key] = val
    for key in ("p", "n", "N", "samples", "seed", "threads", "dist", "out", "fmt"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg.setdefault("out", None)
    return cfg


def _experiment_config(c: dict) -> experiments.ExperimentConfig:
    return experiments.ExperimentConfig(
        p=c["p"],
        n_max=c["n"],
        N_grid=c["N"],
        samples=c["samples"],
        seed=c["seed"],
        dist=c["dist"],
        threads=c["threads"],
        out=c["out"],
        fmt=c["fmt"],
    )


def _cmd_enumerate(args, c):
    out = []
    for b in enumerate_rooted_connected(c["p"], c["n"]):
        obj = maps.map_to_json(b)
        obj["code"] = list(canonical_code(b).code)
        out.append(obj)
    text = json.dumps(out, indent=2) + "\n"
    if c["out"]:
        with open(c["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_classify(args, c):
    rows = []
    for b in enumerate_rooted_connected(c["p"], c["n"]):
        # melonic classification is defined for p >= 3; p = 2 rows stay blank
        pi = melonic_partition(b) if c["p"] >= 3 else None
        melonic = is_melonic_graph(b) if c["p"] >= 3 else ""
        dualgraph = hypergraph_of(dual(b)).reduced()
        rows.append(
            (
                canonical_code(b).code,
                melonic,
                "|".join(" ".join(map(str, blk)) for blk in pi.blocks) if pi else "",
                euler_deficiency(dualgraph, c["p"]),
            )
        )
    _emit_table(["code", "melonic", "pi", "euler_deficiency"], rows, c["out"], c["fmt"])


def _cmd_count(args, c):
    rows = []
    for n in range(c["n"] + 1):
        rows.append(
            (
                c["p"],
                n,
                counting.fuss_catalan(c["p"], n),
                counting.count_dyck(c["p"], n),
                counting.count_noncrossing_div(c["p"], n),
                counting.count_melonic_maps(c["p"], n) if c["p"] >= 3 else "",
            )
        )
    _emit_table(
        ["p", "n", "fuss_catalan", "dyck", "noncrossing", "melonic_maps"],
        rows,
        c["out"],
        c["fmt"],
    )


def _cmd_moments(args, c):
    dist = tensor.EntryDistribution.from_string(c["dist"]) if isinstance(c["dist"], str) else c["dist"]
    rows = []
    table = experiments.melonic_limit_table(c["p"], c["n"], c["N"], dist)
    for r in table:
        for N, val, dev in zip(c["N"], r.values, r.deviations):
            rows.append((r.code, N, val, r.alpha, dev))
    _emit_table(
        ["code", "N", "exact_expectation", "melonic_limit_alpha", "deviation"],
        rows,
        c["out"],
        c["fmt"],
    )


def _cmd_mc(args, c):
    rows = experiments.mc_moments(_experiment_config(c))
    header, data = _estimate_table(rows)
    _emit_table(header, data, c["out"], c["fmt"])


def _cmd_var(args, c):
    res = experiments.variance_scaling(_experiment_config(c))
    rows = [(N, v, res.slope) for N, v in res.rows]
    _emit_table(["N", "variance", "slope"], rows, c["out"], c["fmt"])


def _cmd_law(args, c):
    p = c["p"]
    k = args.k if args.k is not None else c.get("k", 0)
    law = limitlaw.contracted_law(p, k) if k else limitlaw.LimitLaw(p)
    lo, hi = law.support()
    ys = np.linspace(lo, hi, args.grid)
    if k == 0 and p >= 4:
        dens = [limitlaw.inversion_density(p, float(y), args.eta) for y in ys]
    else:
        dens = [law.density(float(y)) for y in ys]
    _emit_table(["y", "density"], list(zip(ys.tolist(), dens)), c["out"], c["fmt"])
    # the moment table always goes to stdout (next to the file, or below
    # the density grid)
    mom_rows = [(n, float(law.moment(n))) for n in range(0, 9)]
    _emit_table(["n", "moment"], mom_rows, None, c["fmt"])


def _cmd_contract(args, c):
    k = args.k if args.k is not None else c.get("k", 1)
    rows = experiments.contraction_moments(
        p=c["p"],
        k=k,
        N_grid=c["N"],
        n_max=c["n"],
        samples=c["samples"],
        seed=c["seed"],
        threads=c["threads"],
        random_unit=args.random_unit,
    )
    header, data = _estimate_table(rows)
    _emit_table(header, data, c["out"], c["fmt"])


def _cmd_heavytail(args, c):
    rows = experiments.heavy_tail_moments(
        p=c["p"],
        n=c["n"],
        N_grid=c["N"],
        samples=c["samples"],
        seed=c["seed"],
        tail_index=args.tail,
        threads=c["threads"],
    )
    data = [(r.N, r.n, r.median, r.iqr, r.target) for r in rows]
    _emit_table(["N", "n", "median", "iqr", "target"], data, c["out"], c["fmt"])


def _cmd_resolvent(args, c):
    r = experiments.resolvent_crosscheck(c["N"][0], args.z, args.K, c["seed"])
    rows = [(r.N, r.z.real, r.K, r.series, r.direct, r.gap, r.tail_bound, r.spectral_radius)]
    _emit_table(
        ["N", "z", "K", "series", "direct", "gap", "tail_bound", "spectral_radius"],
        rows,
        c["out"],
        c["fmt"],
    )


_COMMANDS = {
    "enumerate": _cmd_enumerate,
    "classify": _cmd_classify,
    "count": _cmd_count,
    "moments": _cmd_moments,
    "mc": _cmd_mc,
    "var": _cmd_var,
    "law": _cmd_law,
    "contract": _cmd_contract,
    "heavytail": _cmd_heavytail,
    "resolvent-check": _cmd_resolvent,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    c = _resolve(args)
    _COMMANDS[args.command](args, c)
    return 0


if __name__ == "__main__":
    sys.exit(main())
