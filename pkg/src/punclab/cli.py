"""Command-line experiment driver.

Every subcommand reads one YAML or JSON config, requires a seed (from the
config or ``--seed``) and writes CSV or JSON. Each output row carries the
config digest, the seed and the package version, and outputs are a pure
function of ``(config, seed)`` regardless of ``--threads``.

Exit codes: 0 ok, 2 config error, 3 cap exceeded, 4 a checked inequality or
replay failed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from ._util import stream
from .channel import NoiseSpec, decoding_experiment
from .codes import (
    HadamardCode,
    LinearCode,
    code_bias,
    code_distance_eta,
    make_counterexample,
    make_hadamard,
    make_random_linear,
    make_trace_code,
)
from .derand import derand_generate, replay_generate
from .gf import CapExceeded, FieldSpec, field, field_of_order
from .properties import (
    PropertySpec,
    Witness,
    is_list_decodable,
    is_list_recoverable,
)
from .puncture import apply_puncturing, rate_deficit_experiment, sample_puncturing
from .suites import run_lemma
from .threshold import (
    compare_puncturing_with_rlc,
    complementary_pair_control,
    dimension_for_rate,
    estimate_rlc_threshold,
    rlc_threshold_formula,
)

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_CHECK = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# -- config ---------------------------------------------------------------------------


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"config is not valid YAML/JSON: {e}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    return cfg


def config_digest(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _need(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing config key {key!r}")
    return cfg[key]


def build_field(fcfg) -> FieldSpec:
    if fcfg is None:
        raise ConfigError("missing config key 'field'")
    if isinstance(fcfg, int):
        return field_of_order(fcfg)
    if "q" in fcfg:
        return field_of_order(int(fcfg["q"]))
    return field(int(_need(fcfg, "p")), int(fcfg.get("r", 1)), fcfg.get("modulus"))


def build_mother(spec: FieldSpec, mcfg: dict, seed: int) -> LinearCode:
    """Mother code from ``{kind: hadamard | random | trace | explicit, ...}``.

    ``repeat`` concatenates that many copies of the generator (bias is unchanged).
    """
    kind = _need(mcfg, "kind")
    if kind == "hadamard":
        code = make_hadamard(spec, int(_need(mcfg, "k")))
    elif kind == "random":
        rng = stream(int(mcfg.get("seed", seed)), "mother")
        code = make_random_linear(spec, int(_need(mcfg, "k")), int(_need(mcfg, "m")), rng)
    elif kind == "trace":
        outer = field(spec.p, int(_need(mcfg, "r")))
        code = make_trace_code(outer, field(spec.p, 1), int(_need(mcfg, "d")))
    elif kind == "explicit":
        code = LinearCode(spec, np.asarray(_need(mcfg, "generator"), dtype=np.int64))
    else:
        raise ConfigError(f"unknown mother kind {kind!r}")
    rep = int(mcfg.get("repeat", 1))
    if rep > 1:
        code = LinearCode(spec, np.tile(code.generator, rep), name=f"{kind}x{rep}")
    return code


def build_property(pcfg: dict, q: int, n: int) -> PropertySpec:
    return PropertySpec(
        pcfg.get("kind", "list-decoding"),
        Fraction(str(_need(pcfg, "rho"))),
        int(_need(pcfg, "L")),
        q,
        n,
        int(pcfg.get("ell", 1)),
    )


def build_noise(ncfg, q: int) -> NoiseSpec:
    if ncfg is None:
        raise ConfigError("missing config key 'noise'")
    if "symmetric" in ncfg:
        return NoiseSpec.symmetric(q, Fraction(str(ncfg["symmetric"])))
    return NoiseSpec.from_sparse(q, _need(ncfg, "masses"))


def _rates(cfg: dict) -> list[Fraction]:
    rates = [Fraction(str(r)) for r in cfg.get("rates", [])]
    if not rates:
        raise ConfigError("rate grid is empty")
    if any(b <= a for a, b in zip(rates, rates[1:])):
        raise ConfigError("rate grid must be strictly increasing")
    return rates


# -- subcommands --------------------------------------------------------------------------
# Each returns (rows, document, ok): rows feed CSV, the document feeds JSON.


def cmd_certify(cfg, seed, threads):
    spec = build_field(cfg.get("field"))
    mothers = cfg.get("mothers") or [_need(cfg, "mother")]
    rows = []
    for mcfg in mothers:
        code = build_mother(spec, mcfg, seed)
        rows.append(
            {
                "code": code.name or mcfg["kind"],
                "q": code.q,
                "k": code.k,
                "m": code.m,
                "rank": code.rank,
                "bias": code_bias(code),
                "distance_eta": code_distance_eta(code),
                "digest": code.digest(),
            }
        )
    return rows, {"codes": rows}, True


def cmd_puncture(cfg, seed, threads):
    spec = build_field(cfg.get("field"))
    n = int(_need(cfg, "n"))
    trials = int(_need(cfg, "trials"))
    experiment = cfg.get("experiment", "puncture-ld")
    if experiment == "rate-deficit":
        mother = build_mother(spec, _need(cfg, "mother"), seed)
        eta = cfg.get("eta")
        eta = code_bias(mother) if eta is None else float(eta)
        res = rate_deficit_experiment(mother, n, trials, seed, eta=eta, threads=threads)
        row = {
            "experiment": experiment,
            "n": n,
            "k": mother.rank,
            "trials": trials,
            "freq": res.frequency,
            "ci_low": res.ci.low,
            "ci_high": res.ci.high,
            "bound": "" if res.bound is None else res.bound,
            "holds": "" if res.holds is None else res.holds,
        }
        return [row], row, res.holds is not False
    if experiment != "puncture-ld":
        raise ConfigError(f"unknown puncture experiment {experiment!r}")
    rows = []
    ok = True
    if "mother" in cfg:
        mother = build_mother(spec, cfg["mother"], seed)
        prop = build_property(_need(cfg, "property"), spec.q, n)
        cmp_ = compare_puncturing_with_rlc(mother, prop, n, trials, seed, threads)
        ok = cmp_.holds
        rows.append(
            {
                "experiment": "puncture-vs-rlc",
                "n": n,
                "rate": str(cmp_.rate),
                "trials": trials,
                "freq": cmp_.punctured_freq,
                "ci_low": cmp_.punctured_ci.low,
                "ci_high": cmp_.punctured_ci.high,
                "rlc_freq": cmp_.rlc_freq,
                "rlc_ci_low": cmp_.rlc_ci.low,
                "rlc_ci_high": cmp_.rlc_ci.high,
                "holds": cmp_.holds,
            }
        )
    if "control" in cfg:
        ctl = cfg["control"]
        pair = complementary_pair_control(
            make_counterexample(int(_need(ctl, "m"))), n, trials, seed, k=ctl.get("k")
        )
        rows.append(
            {
                "experiment": "complementary-pair",
                "n": n,
                "rate": str(pair.rate),
                "trials": trials,
                "freq": pair.complementary / trials,
                "rlc_freq": pair.rlc_contains_ones / trials,
                "holds": pair.complementary == trials,
            }
        )
        ok = ok and pair.complementary == trials
    if not rows:
        raise ConfigError("puncture needs a 'mother' with 'property', or a 'control'")
    return rows, {"rows": rows}, ok


def _check_code(cfg, seed):
    spec = build_field(cfg.get("field"))
    mother = build_mother(spec, _need(cfg, "mother"), seed)
    n = cfg.get("n")
    if n is not None and int(n) != mother.m:
        phi = sample_puncturing(mother.m, int(n), stream(seed, "puncture"))
        return apply_puncturing(phi, mother), phi.to_list()
    return mother, None


def _verdict(kind, cfg, seed, decide):
    code, phi = _check_code(cfg, seed)
    pcfg = _need(cfg, "property")
    good, wit = decide(code, pcfg)
    record = {
        "record": "witness",
        "property": kind,
        "rho": str(Fraction(str(pcfg["rho"]))),
        "L": int(pcfg["L"]),
        "ell": int(pcfg.get("ell", 1)),
        "verdict": "good" if good else "bad",
        "puncturing": phi,
        "code": code.to_json(),
        "witness": None if wit is None else wit.to_json(),
    }
    row = {k: record[k] for k in ("property", "rho", "L", "ell", "verdict")}
    row["n"] = code.m
    row["k"] = code.k
    row["code_digest"] = code.digest()
    return [row], record, True


def cmd_ld_check(cfg, seed, threads):
    return _verdict(
        "list-decoding",
        cfg,
        seed,
        lambda code, p: is_list_decodable(code, Fraction(str(p["rho"])), int(p["L"])),
    )


def cmd_lr_check(cfg, seed, threads):
    return _verdict(
        "list-recovery",
        cfg,
        seed,
        lambda code, p: is_list_recoverable(code, Fraction(str(p["rho"])), int(p.get("ell", 1)), int(p["L"])),
    )


def cmd_threshold(cfg, seed, threads):
    spec = build_field(cfg.get("field"))
    n = int(_need(cfg, "n"))
    prop = build_property(_need(cfg, "property"), spec.q, n)
    rates = _rates(cfg)
    est = estimate_rlc_threshold(prop, n, rates, int(_need(cfg, "trials")), seed, threads)
    rows = est.rows()
    doc = {
        "rows": rows,
        "estimate": None if est.estimate is None else str(est.estimate),
        "bracket": [None if r is None else str(r) for r in est.bracket],
    }
    if cfg.get("formula"):
        b_cap = cfg.get("b_cap")
        f = rlc_threshold_formula(prop, n, None if b_cap is None else int(b_cap))
        doc["formula"] = f.to_json()
        for r in rows:
            r["formula_value"] = f.value
            r["error_radius"] = f.error_radius
    return rows, doc, True


def cmd_lemma(cfg, seed, threads):
    names = cfg.get("lemmas") or [_need(cfg, "lemma")]
    instances = int(cfg.get("instances", 100))
    rows = []
    for name in names:
        try:
            results = run_lemma(name, seed, instances, threads)
        except KeyError as e:
            raise ConfigError(str(e)) from None
        rows.extend(r.row() for r in results)
    ok = all(r["holds"] for r in rows)
    return rows, {"rows": rows, "all_hold": ok}, ok


def cmd_channel(cfg, seed, threads):
    spec = build_field(cfg.get("field"))
    nu = build_noise(cfg.get("noise"), spec.q)
    rate = Fraction(str(_need(cfg, "rate")))
    lengths = [int(n) for n in (cfg.get("lengths") or [_need(cfg, "n")])]
    mcfg = cfg.get("mother", {"kind": "hadamard"})
    rows = []
    for n in lengths:
        k = dimension_for_rate(rate, n)
        mother = build_mother(spec, {**mcfg, "k": mcfg.get("k", k)}, seed)
        eta = cfg.get("eta")
        if eta is None:
            eta = 0.0 if isinstance(mother, HadamardCode) else code_bias(mother)
        res = decoding_experiment(
            mother,
            n,
            nu,
            int(_need(cfg, "codeword_trials")),
            int(_need(cfg, "noise_trials")),
            seed,
            eta=float(eta),
            codewords=cfg.get("codewords", "mixed"),
            threads=threads,
        )
        row = res.row(nu)
        row["capacity"] = nu.capacity
        rows.append(row)
    return rows, {"rows": rows}, True


def cmd_derand(cfg, seed, threads):
    spec = build_field(cfg.get("field"))
    mcfg = _need(cfg, "mother")
    mother = build_mother(spec, mcfg, seed)
    seeds = [int(s) for s in cfg.get("seeds", [seed])]
    eta = cfg.get("eta")
    eta = code_bias(mother) if eta is None else float(eta)
    records = []
    for s in seeds:
        out = derand_generate(
            mother,
            int(_need(cfg, "n")),
            s,
            int(_need(cfg, "b")),
            float(_need(cfg, "eps")),
            eta=eta,
            mother_spec={"field": cfg.get("field"), "mother": mcfg, "seed": seed},
        )
        rec = dict(out.provenance, record="derand", code=out.code.to_json())
        records.append(rec)
    rows = [{k: r[k] for k in ("seed", "n", "m", "bits_consumed", "log2_subsets", "code_rank", "code_digest")} for r in records]
    return rows, records if len(records) > 1 else records[0], True


def replay_record(record: dict) -> dict:
    """Re-execute the check a record describes and report ``verified`` or ``mismatch``."""
    kind = record.get("record")
    if kind == "witness":
        if record.get("witness") is None:
            raise ConfigError("record has no witness to replay")
        wit = Witness.from_json(record["witness"])
        code = LinearCode.from_json(record["code"]) if record.get("code") else None
        ok = wit.verify(code) and len(wit.codewords) == int(record.get("L", len(wit.codewords) - 1)) + 1
    elif kind == "derand":
        src = _need(record, "mother")
        spec = build_field(src.get("field"))
        mother = build_mother(spec, src["mother"], int(src.get("seed", 0)))
        ok = replay_generate(mother, record)
        if ok and "code" in record:
            ok = LinearCode.from_json(record["code"]).digest() == record["code_digest"]
    else:
        raise ConfigError(f"unknown record type {kind!r}")
    return {"record": kind, "verdict": "verified" if ok else "mismatch"}


COMMANDS = {
    "certify": cmd_certify,
    "puncture": cmd_puncture,
    "ld-check": cmd_ld_check,
    "lr-check": cmd_lr_check,
    "threshold": cmd_threshold,
    "lemma": cmd_lemma,
    "channel": cmd_channel,
    "derand": cmd_derand,
}


# -- output ------------------------------------------------------------------------------


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _deep_plain(obj):
    if isinstance(obj, dict):
        return {str(k): _deep_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_deep_plain(v) for v in obj]
    return _plain(obj)


def render(rows, doc, fmt: str, stamp: dict) -> str:
    if fmt == "csv":
        fields = list(stamp)
        for r in rows:
            fields.extend(k for k in r if k not in fields)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**stamp, **{k: _plain(v) for k, v in r.items()}})
        return buf.getvalue()
    body = {"meta": stamp, "result": _deep_plain(doc)}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="punclab", description="Random-puncturing experiments on linear codes.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in [*COMMANDS, "replay"]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML or JSON file (a record file for replay)")
        p.add_argument("--seed", type=int, help="master seed; overrides the config")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--threads", type=int, default=1)
    return ap


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "replay":
            verdict = replay_record(cfg.get("result", cfg))
            _emit(json.dumps(verdict, sort_keys=True) + "\n", args.out)
            return EXIT_OK if verdict["verdict"] == "verified" else EXIT_CHECK
        seed = args.seed if args.seed is not None else cfg.get("seed")
        if seed is None:
            raise ConfigError("a seed is required (config 'seed' or --seed)")
        seed = int(seed)
        if seed < 0:
            raise ConfigError("seed must be non-negative")
        fmt = args.format or cfg.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {fmt!r}")
        stamp = {"config_digest": config_digest({**cfg, "seed": seed}), "seed": seed, "version": f"punclab {__version__}"}
        rows, doc, ok = COMMANDS[args.command](cfg, seed, max(1, args.threads))
        _emit(render(rows, doc, fmt, stamp), args.out)
        return EXIT_OK if ok else EXIT_CHECK
    except CapExceeded as e:
        return _fail(EXIT_CAP, "cap-exceeded", str(e))
    except (ConfigError, ValueError, KeyError, TypeError) as e:
        return _fail(EXIT_CONFIG, "config", str(e))


if __name__ == "__main__":
    sys.exit(main())
