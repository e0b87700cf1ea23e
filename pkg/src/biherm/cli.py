"""Command-line surface: classify / construct / sweep / certify / inoue / oracle.

Exit codes: 0 pass, 1 parse failure, 2 classification refusal, 3 analytic
refusal (positivity), 4 numerical failure (integrator or root finder),
5 completed certificate with failing identity families.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .certificate import CertificateConfig, StructureField, run_certificate
from .deformation import (
    positivity_sweep,
    select_deformation_time,
)
from .errors import (
    AmbiguousRadialTime,
    GroupDataError,
    NotFinite,
    NotPlurisubharmonic,
    NotPositive,
    StepSizeUnderflow,
)
from .hopf_groups import classify, group_data_from_json
from .inoue import degree_sign_report, inoue_data_from_json
from .oracles import run_oracles
from .potentials import flow_spec_for, fundamental_annulus_sample
from .reporting import canonical_json, env_threads, write_text

EXIT_PASS = 0
EXIT_PARSE = 1
EXIT_CLASSIFY = 2
EXIT_ANALYTIC = 3
EXIT_NUMERIC = 4
EXIT_TIERS = 5


def _emit(payload: dict, out_path: str | None) -> None:
    text = canonical_json(payload)
    if out_path:
        write_text(out_path, text)
    else:
        sys.stdout.write(text)


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise GroupDataError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise GroupDataError(str(exc)) from exc


def _parse_t_grid(spec: str) -> tuple:
    try:
        a, b, step = (float(v) for v in spec.split(":"))
    except ValueError as exc:
        raise GroupDataError(f"--t-grid expects a:b:step, got {spec!r}") from exc
    if step <= 0:
        raise GroupDataError(f"--t-grid step must be positive: {spec!r}")
    a, b = min(a, b), max(a, b)  # reversed bounds canonicalise
    count = int(round((b - a) / step))
    return tuple(sorted({round(a + i * step, 12) for i in range(count + 1)}))


def _tol_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        name, _, value = pair.partition("=")
        if not _ or not name:
            raise GroupDataError(f"--tol-tier expects NAME=X, got {pair!r}")
        out[name] = float(value)
    return out


def cmd_classify(args) -> int:
    data = group_data_from_json(_load_config(args.config))
    label = classify(data)
    _emit(label.to_json(), args.out)
    return EXIT_PASS if label.accepted else EXIT_CLASSIFY


def _certificate_config(args) -> CertificateConfig:
    data = group_data_from_json(_load_config(args.config))
    cfg = CertificateConfig(
        data=data,
        t=args.t,
        n=args.samples,
        seed=args.seed,
        ode_tol=args.ode_tol,
        fd_step=args.fd_step,
        tolerances=_tol_overrides(args.tol_tier),
        threads=env_threads(args.threads),
    )
    if args.t_grid:
        cfg.t_grid = _parse_t_grid(args.t_grid)
    return cfg


def cmd_certify(args) -> int:
    cfg = _certificate_config(args)
    report = run_certificate(cfg)
    _emit(report.to_json_dict(), args.out)
    if report.refusal is not None:
        return EXIT_CLASSIFY
    return EXIT_PASS if report.passed else EXIT_TIERS


def cmd_sweep(args) -> int:
    cfg = _certificate_config(args)
    label = classify(cfg.data)
    if not label.accepted:
        _emit(label.to_json(), None)
        return EXIT_CLASSIFY
    spec = flow_spec_for(cfg.data.contraction)
    samples = fundamental_annulus_sample(cfg.seed, spec, cfg.n)
    grid = cfg.t_grid if args.t_grid else (0.0,) + cfg.t_grid
    rows = positivity_sweep(spec, grid, samples, cfg.ode_tol)
    lines = ["t,min_margin,argmin_sample_index,p_min,p_max"]
    lines += [
        f"{r.t!r},{r.min_margin!r},{r.argmin_sample_index},{r.p_min!r},{r.p_max!r}"
        for r in rows
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def cmd_construct(args) -> int:
    cfg = _certificate_config(args)
    label = classify(cfg.data)
    if not label.accepted:
        _emit(label.to_json(), args.out)
        return EXIT_CLASSIFY
    spec = flow_spec_for(cfg.data.contraction)
    samples = fundamental_annulus_sample(cfg.seed, spec, cfg.n)
    if cfg.t is None:
        t_star, rows, slope = select_deformation_time(spec, samples,
                                                      cfg.t_grid, cfg.ode_tol)
    else:
        t_star, rows, slope = float(cfg.t), None, None
    field = StructureField(spec, t_star, cfg.ode_tol, cfg.fd_step, cfg.threads)
    sample = field.assemble(samples)
    payload = {
        "case": label.to_json(),
        "t": t_star,
        "n": cfg.n,
        "seed": cfg.seed,
        "margin_min": float(np.min(sample.margin)),
        "margin_max": float(np.max(sample.margin)),
        "p_min": float(np.min(sample.p)),
        "p_max": float(np.max(sample.p)),
        "first_sample": {
            "x": sample.x[0].tolist(),
            "g": sample.g[0].tolist(),
            "j_minus": sample.j_minus[0].tolist(),
            "p": float(sample.p[0]),
        },
    }
    if slope is not None:
        payload["margin_slope_floor"] = slope
    _emit(payload, args.out)
    return EXIT_PASS


def cmd_inoue(args) -> int:
    data = inoue_data_from_json(_load_config(args.config))
    report = degree_sign_report(data, seed=args.seed, n=args.samples)
    _emit(report, args.out)
    return EXIT_PASS if report["excluded"] else EXIT_TIERS


def cmd_oracle(args) -> int:
    report = run_oracles(seed=args.seed)
    _emit(report, args.out)
    return EXIT_PASS if report["pass"] else EXIT_TIERS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biherm",
        description="Bihermitian structures on Hopf surfaces: construction "
        "and numerical certification",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, needs_config in (
        ("classify", cmd_classify, True),
        ("certify", cmd_certify, True),
        ("sweep", cmd_sweep, True),
        ("construct", cmd_construct, True),
        ("inoue", cmd_inoue, True),
        ("oracle", cmd_oracle, False),
    ):
        p = sub.add_parser(name)
        if needs_config:
            p.add_argument("--config", required=True, help="JSON group data")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--samples", type=int, default=200)
        p.add_argument("--t", type=float, default=None)
        p.add_argument("--t-grid", default=None, help="a:b:step")
        p.add_argument("--ode-tol", type=float, default=1e-10)
        p.add_argument("--fd-step", type=float, default=1e-3)
        p.add_argument("--tol-tier", action="append", default=None,
                       metavar="NAME=X")
        p.add_argument("--threads", type=int, default=None,
                       help="worker cap (default: BIHERM_THREADS or 1)")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except GroupDataError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotFinite as exc:
        print(f"classification refusal: {exc}", file=sys.stderr)
        return EXIT_CLASSIFY
    except (NotPlurisubharmonic, NotPositive) as exc:
        print(f"analytic refusal: {exc}", file=sys.stderr)
        return EXIT_ANALYTIC
    except (AmbiguousRadialTime, StepSizeUnderflow) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
