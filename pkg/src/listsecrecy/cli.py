"""Command-line front end.

    listsecrecy region     --config cfg.json [--format csv|json|svg]
    listsecrecy simulate   --config cfg.json --seed 7
    listsecrecy verify     --config cfg.json
    listsecrecy subproblem --config cfg.json

Exit codes: 0 ok, 1 config error, 2 invariant failure, 3 resource guard.
``LISTSECRECY_OUT`` and ``LISTSECRECY_JOBS`` override the output directory and
parallelism when the flags are absent.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io, region, suites
from .adversary import key_enumeration_attack, simulate_p2p
from .cipher import CipherCode, build_codebook, decode, likelihood_encode, permutation_code
from .errors import ConfigError, RegimeError, ResourceGuard
from .prob import entropy
from .rd import distortion_rate
from .rng import check_seed, stream
from .subproblem import Tau, decay_experiment

log = logging.getLogger("listsecrecy")

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_GUARD = 0, 1, 2, 3

REGION_SCHEMA = {
    "type": "object",
    "required": ["source", "sweep"],
    "properties": {
        "mode": {"enum": ["lossless", "lossy"]},
        "source": io.DIST_SCHEMA,
        "d_E": io.MATRIX_SCHEMA,
        "d_B": io.MATRIX_SCHEMA,
        "R": io.RATE, "R0": io.RATE, "RL": io.RATE,
        "D_B": {"type": "number", "minimum": 0},
        "sweep": {
            "type": "object",
            "required": ["var", "grid"],
            "properties": {"var": {"enum": ["RL", "R0", "D_B"]}, "grid": io.GRID},
        },
        "channel_grid": {
            "type": "object",
            "properties": {"y_alphabet": {"type": "integer", "minimum": 1},
                           "step": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
        },
        "seed": io.SEED,
    },
}

SIMULATE_SCHEMA = {
    "type": "object",
    "required": ["source", "n", "R", "R0", "RL"],
    "properties": {
        "source": io.DIST_SCHEMA,
        "d_E": io.MATRIX_SCHEMA,
        "n": {"type": "integer", "minimum": 1, "maximum": 16},
        "R": io.RATE, "R0": io.RATE, "RL": io.RATE,
        "code": {"enum": ["random", "permutation"]},
        "seed": io.SEED,
        "seeds": {"type": "array", "items": io.SEED, "minItems": 1},
        "num_seeds": {"type": "integer", "minimum": 1},
        "trials": {"type": "integer", "minimum": 1},
    },
}

DECAY_SCHEMA = {
    "type": "object",
    "required": ["R_C", "R", "D", "n_grid"],
    "properties": {
        "R_C": io.RATE, "R": io.RATE, "D": {"type": "number", "minimum": 0},
        "n_grid": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "seeds": {"type": "array", "items": io.SEED},
        "num_seeds": {"type": "integer", "minimum": 1},
        "delta": {"type": "number", "exclusiveMinimum": 0},
        "tau": {
            "type": "object",
            "properties": {"kind": {"enum": ["poly", "sqrt_exp"]},
                           "c": {"type": "number", "exclusiveMinimum": 0},
                           "power": {"type": "number", "exclusiveMinimum": 0}},
        },
    },
}

SUBPROBLEM_SCHEMA = {
    "type": "object",
    "properties": {
        "source": io.DIST_SCHEMA,
        "d": io.MATRIX_SCHEMA,
        "channel": {"type": "object"},
        "seed": io.SEED,
        **DECAY_SCHEMA["properties"],
    },
    "required": ["source", "R_C", "R", "D", "n_grid"],
}

VERIFY_SCHEMA = {
    "type": "object",
    "properties": {
        "source": io.DIST_SCHEMA,
        "d": io.MATRIX_SCHEMA,
        "seed": io.SEED,
        "suites": {"type": "array", "items": {"enum": [
            "chernoff", "chernoff_bounded", "xi_mean", "encoder_tv", "decay", "decay_noisy"]}},
        "xi_mean": {"type": "object", "properties": {
            "n": {"type": "integer", "minimum": 1, "maximum": 16},
            "D": {"type": "number", "minimum": 0},
            "delta": {"type": "number", "exclusiveMinimum": 0}}},
        "encoder_tv": {"type": "object", "properties": {
            "R0": io.RATE, "seeds": {"type": "integer", "minimum": 1}}},
        "decay": DECAY_SCHEMA,
        "decay_noisy": {**DECAY_SCHEMA, "properties": {**DECAY_SCHEMA["properties"],
                                                       "channel": {"type": "object"}}},
        "chernoff_bounded": {"type": "object", "properties": {
            "samples": {"type": "integer", "minimum": 100}}},
    },
}

DEFAULT_VERIFY = {
    "source": {"alphabet": 2, "mass": [0.5, 0.5]},
    "d": "hamming",
    "suites": ["chernoff", "chernoff_bounded", "xi_mean", "encoder_tv", "decay"],
    "xi_mean": {"n": 10, "D": 0.2, "delta": 0.1},
    "encoder_tv": {"R0": 0.5, "seeds": 30},
    "decay": {"R_C": 1.0, "R": 0.25, "D": 0.15, "n_grid": [4, 6, 8, 10], "num_seeds": 10,
              "tau": {"kind": "poly", "c": 1.0, "power": 0.5}},
}


def _seeds(cfg, base):
    if "seeds" in cfg:
        return [check_seed(s) for s in cfg["seeds"]]
    return [(base + i) % (1 << 64) for i in range(cfg.get("num_seeds", 1))]


def _emit(args, stem, csv_text=None, json_obj=None, svg_text=None):
    out = Path(args.out)
    written = []
    if args.format == "csv" and csv_text is not None:
        written.append(io.write(out / f"{stem}.csv", csv_text))
    if args.format == "json" and json_obj is not None:
        written.append(io.write(out / f"{stem}.json", io.json_text(json_obj)))
    if args.format == "svg" and svg_text is not None:
        written.append(io.write(out / f"{stem}.svg", svg_text))
    if args.format == "svg" and csv_text is not None:
        # the data file is the canonical artifact; keep it next to the picture
        written.append(io.write(out / f"{stem}.csv", csv_text))
    for p in written:
        print(p)


# --- commands -----------------------------------------------------------------


def cmd_region(cfg, args) -> int:
    io.validate(cfg, REGION_SCHEMA, "region config")
    src = io.parse_distribution(cfg["source"])
    d_E = io.parse_distortion(cfg.get("d_E", "hamming"), src.alphabet_size)
    mode = cfg.get("mode", "lossless")
    var = cfg["sweep"]["var"]
    grid = io.expand_grid(cfg["sweep"]["grid"])
    if not grid:
        raise ConfigError("region config: sweep grid is empty")
    R = cfg.get("R", entropy(src))
    if mode == "lossless":
        if var == "D_B":
            raise ConfigError("region config: D_B sweeps need lossy mode")
        tmpl = region.LosslessRegionQuery(R, cfg.get("R0", 0.0), cfg.get("RL", 0.0), src, d_E)
        cg = None
    else:
        d_B = io.parse_distortion(cfg.get("d_B", "hamming"), src.alphabet_size)
        tmpl = region.LossyRegionQuery(R, cfg.get("R0", 0.0), cfg.get("RL", 0.0),
                                       cfg.get("D_B", 0.0), src, d_B, d_E)
        g = cfg.get("channel_grid", {})
        cg = region.ChannelGrid(g.get("y_alphabet"), g.get("step"))
    rows = region.region_sweep(tmpl, var, grid, cg, jobs=args.jobs)
    header = ["sweep_var", "value", "D_E_max", "feasible", "witness_channel"]
    text = io.csv_text(header, (r.csv_fields() for r in rows))
    svg = io.svg_polyline({"D_E max": [(r.value, r.D_E_max) for r in rows]}, var, "D_E")
    js = [dict(zip(header, r.csv_fields())) for r in rows]
    _emit(args, f"region_{mode}_{var}", text, js, svg)
    return EXIT_OK


def cmd_simulate(cfg, args) -> int:
    io.validate(cfg, SIMULATE_SCHEMA, "simulate config")
    src = io.parse_distribution(cfg["source"])
    d_E = io.parse_distortion(cfg.get("d_E", "hamming"), src.alphabet_size)
    n, R, R0, RL = cfg["n"], cfg["R"], cfg["R0"], cfg["RL"]
    trials = cfg.get("trials", 100)
    records = []
    for seed in _seeds(cfg, args.seed if args.seed is not None else cfg.get("seed", 0)):
        if cfg.get("code", "random") == "permutation":
            code = permutation_code(n, src.alphabet_size, R0, seed)
        else:
            code = CipherCode(build_codebook(seed, n, R, R0, src))
        rng_src = stream(seed, "source", n, 1)
        rng_enc = stream(seed, "encoder", n, 1)
        xs = rng_src.choice(src.alphabet_size, size=(trials, n), p=src.mass)
        ks = rng_src.integers(code.codebook.num_keys, size=trials)
        errors, key_dist, key_dist_ok = 0, [], []
        for x, k in zip(xs, ks):
            m = likelihood_encode(code, x, int(k), rng_enc)
            ok = np.array_equal(decode(code, m, int(k)), x)
            errors += not ok
            if RL >= R0:
                out = key_enumeration_attack(code, x, m, d_E)
                key_dist.append(out.distortion)
                if ok:
                    key_dist_ok.append(out.distortion)
        p2p = simulate_p2p(src, d_E, RL, n, seed, draws=trials)
        rec = {
            "seed": seed,
            "params": {"n": n, "R": R, "R0": R0, "RL": RL, "code": cfg.get("code", "random")},
            "decoder_error_rate": errors / trials,
            "p2p_attack": p2p,
            "reference_D_RL": distortion_rate(src, d_E, RL),
        }
        if RL >= R0:
            rec["key_enumeration"] = {
                "attack": "key_enumeration",
                "mean_distortion": float(np.mean(key_dist)),
                "mean_distortion_when_decoded": float(np.mean(key_dist_ok)) if key_dist_ok else None,
                "empirical_success": float(np.mean(np.asarray(key_dist) == 0)),
                "reference_value": 0.0,
            }
        records.append(rec)
    header = ["seed", "decoder_error_rate", "p2p_mean_distortion", "reference_D_RL",
              "key_enum_mean_distortion"]
    text = io.csv_text(header, ([r["seed"], r["decoder_error_rate"],
                                 r["p2p_attack"]["empirical_mean_distortion"], r["reference_D_RL"],
                                 r.get("key_enumeration", {}).get("mean_distortion", float("nan"))]
                                for r in records))
    _emit(args, "simulate", text, records, None)
    return EXIT_OK


def _decay_params(cfg, base_seed):
    p = {k: cfg[k] for k in ("R_C", "R", "D", "n_grid") if k in cfg}
    p["seeds"] = _seeds(cfg, base_seed)
    p["delta"] = cfg.get("delta", 0.1)
    p["tau"] = cfg.get("tau", {})
    return p


def cmd_subproblem(cfg, args) -> int:
    io.validate(cfg, SUBPROBLEM_SCHEMA, "subproblem config")
    src = io.parse_distribution(cfg["source"])
    d = io.parse_distortion(cfg.get("d", "hamming"), src.alphabet_size if "channel" not in cfg
                            else io.parse_channel(cfg["channel"]).output_alphabet)
    ch = io.parse_channel(cfg["channel"]) if "channel" in cfg else None
    p = _decay_params(cfg, args.seed if args.seed is not None else cfg.get("seed", 0))
    try:
        tau = Tau(**p["tau"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"subproblem config: tau: {exc}") from None
    try:
        rows = decay_experiment(p["n_grid"], p["seeds"], p["R_C"], p["R"], p["D"], src, d, tau,
                                ch, p["delta"])
    except RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    header = ["n", "seed", "lower", "upper", "tau_n", "exceeds"]
    text = io.csv_text(header, ([r.n, r.seed, r.lower, r.upper, r.tau_n, r.exceeds] for r in rows))
    js = [dict(zip(header, [r.n, r.seed, r.lower, r.upper, r.tau_n, r.exceeds])) for r in rows]
    by_n: dict = {}
    for r in rows:
        by_n.setdefault(r.n, []).append(r.upper)
    svg = io.svg_polyline({"mean upper": [(float(n), float(np.mean(v))) for n, v in sorted(by_n.items())],
                           "tau_n": [(float(n), tau(n)) for n in sorted(by_n)]}, "n", "success")
    _emit(args, "decay", text, js, svg)
    return EXIT_OK


def cmd_verify(cfg, args) -> int:
    cfg = {**DEFAULT_VERIFY, **cfg}
    io.validate(cfg, VERIFY_SCHEMA, "verify config")
    src = io.parse_distribution(cfg["source"])
    d = io.parse_distortion(cfg.get("d", "hamming"), src.alphabet_size)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    rows = []
    for name in cfg["suites"]:
        log.info("suite %s", name)
        if name == "chernoff":
            rows += suites.suite_chernoff(seed)
        elif name == "chernoff_bounded":
            rows += suites.suite_chernoff_bounded(seed, samples=cfg.get("chernoff_bounded", {})
                                                  .get("samples", 100_000))
        elif name == "xi_mean":
            c = {**DEFAULT_VERIFY["xi_mean"], **cfg.get("xi_mean", {})}
            rows += suites.suite_xi_mean(src, d, c["D"], c["n"], c["delta"], seed)
        elif name == "encoder_tv":
            c = {**DEFAULT_VERIFY["encoder_tv"], **cfg.get("encoder_tv", {})}
            rows += suites.suite_encoder_tv(src, c["R0"], c["seeds"])
        elif name == "decay":
            rows += suites.suite_decay(src, d, _decay_params(cfg["decay"], seed))
        elif name == "decay_noisy":
            c = cfg.get("decay_noisy")
            if c is None or "channel" not in c:
                raise ConfigError("verify config: decay_noisy needs a channel")
            ch = io.parse_channel(c["channel"])
            dn = io.parse_distortion(cfg.get("d", "hamming"), ch.output_alphabet)
            rows += suites.suite_decay(src, dn, _decay_params(c, seed), ch, "decay_noisy")
    header = ["suite", "check", "measured", "bound", "slack", "status", "hard"]
    text = io.csv_text(header, ([("" if r[h] is None else r[h]) for h in header] for r in rows))
    _emit(args, "verify", text, rows, None)
    for r in rows:
        print(f"{r['status']:>16}  {r['suite']}: {r['check']}")
    failed = [r for r in rows if r["hard"] and r["status"] == "fail"]
    return EXIT_INVARIANT if failed else EXIT_OK


COMMANDS = {"region": cmd_region, "simulate": cmd_simulate, "verify": cmd_verify,
            "subproblem": cmd_subproblem}


def _u64(text):
    try:
        return check_seed(int(text))
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}: need an unsigned 64-bit integer") from None


class _Parser(argparse.ArgumentParser):
    # usage errors are config errors; exit 2 is reserved for invariant failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="listsecrecy", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=name != "verify")
        p.add_argument("--seed", type=_u64)
        p.add_argument("--out", default=os.environ.get("LISTSECRECY_OUT", "out"))
        p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
        p.add_argument("--jobs", type=int, default=int(os.environ.get("LISTSECRECY_JOBS", "1")))
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = io.load_json(args.config) if args.config else {}
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceGuard as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except region.InfeasibleRate as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
