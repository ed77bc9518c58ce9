"""Command-line front end.

Subcommands
-----------
run        execute a campaign config (path or preset name)
check      run one check ad hoc from flags
constants  print a regularity-constant estimate for a measure
best-c     bisection search for the smallest passing constant
list       enumerate builders, measure families, checks, and presets
"""

from __future__ import annotations

import argparse
import json
import sys

from . import campaign as campaign_mod
from . import checks as checks_mod
from . import fields as fields_mod
from . import measures as measures_mod
from .errors import LabError, TypeConditionViolation

_MEASURE_DEFAULTS = {
    "gaussian": {},
    "gen_exponential": {},
    "poly_tail": {"alpha": 1.0},
    "uniform_ball": {},
}


def _measure_decl(text: str, dim: int) -> dict:
    """A measure argument: either a JSON object or a bare family name."""
    if text.strip().startswith("{"):
        return json.loads(text)
    if text in _MEASURE_DEFAULTS:
        decl = {"family": text, "dim": dim}
        decl.update(_MEASURE_DEFAULTS[text])
        return decl
    raise LabError(
        f"cannot parse measure {text!r}: use a family name "
        f"({', '.join(sorted(_MEASURE_DEFAULTS))}) or a JSON object"
    )


def _field_decl(text: str) -> dict:
    """A field argument: JSON object, or shorthand builder:value."""
    if text.strip().startswith("{"):
        return json.loads(text)
    if ":" in text:
        builder, arg = text.split(":", 1)
        if builder == "log_linear":
            return {"builder": "log_linear", "lam": [float(arg)]}
        if builder == "cosh":
            return {"builder": "cosh", "lam": float(arg)}
        if builder == "constant":
            return {"builder": "constant", "value": float(arg)}
    raise LabError(
        f"cannot parse field {text!r}: use JSON or shorthand "
        "log_linear:LAM | cosh:LAM | constant:VALUE"
    )


def _cmd_run(args) -> int:
    return campaign_mod.run(args.config, output_dir=args.output_dir, jobs=args.jobs)


def _cmd_check(args) -> int:
    mu = campaign_mod.build_measure(_measure_decl(args.measure, args.dim))
    config = campaign_mod.CampaignConfig.from_dict(
        {
            "seed": args.seed,
            "quadrature": {"scheme": "auto"},
            "measures": {"m": _measure_decl(args.measure, args.dim)},
            "fields": {"f": _field_decl(args.field)},
            "checks": [],
        }
    )
    f = campaign_mod.build_field(config.fields["f"])
    spec = campaign_mod.resolve_spec(config.quadrature, mu, args.seed)
    kind = args.check
    if kind == "slsi":
        rep = checks_mod.check_slsi(f, mu, args.c, spec)
    elif kind == "shc":
        rep = checks_mod.check_shc(f, mu, args.c, spec=spec)
    elif kind == "general_shc":
        rep = checks_mod.check_general_shc(f, mu, args.c, args.p, args.q, spec)
    elif kind == "dilation_bound":
        rep = checks_mod.check_dilation_bound(f, mu, args.p, args.r, spec)
    elif kind == "dilated_convolution_bound":
        phi = fields_mod.mollifier(mu.dim, args.k)
        rep = checks_mod.check_dilated_convolution_bound(f, mu, args.p, phi, args.r, spec)
    elif kind == "density_approx":
        rep = checks_mod.check_density_approximation(f, mu, args.p, spec=spec)
    elif kind == "spherical_monotone":
        rep = checks_mod.check_spherical_monotonicity(f)
    elif kind == "radial_euler_scaling":
        rep = checks_mod.check_radial_euler_scaling(f)
    else:
        raise LabError(f"unknown check {kind!r}")
    print(json.dumps(rep.to_dict(), indent=2, sort_keys=True))
    if rep.inconclusive:
        print("status: INCONCLUSIVE", file=sys.stderr)
        return 0
    return 0 if rep.passed else 1


def _cmd_constants(args) -> int:
    mu = campaign_mod.build_measure(_measure_decl(args.measure, args.dim))
    try:
        est = measures_mod.regularity_constant(mu, args.p, args.a, args.s)
    except TypeConditionViolation as exc:
        print(f"type-{args.p:g} condition violated: {exc}", file=sys.stderr)
        return 1
    print(float(est))
    return 0


def _cmd_best_c(args) -> int:
    mu = campaign_mod.build_measure(_measure_decl(args.measure, args.dim))
    battery = checks_mod.default_battery(mu.dim)
    c_star = checks_mod.best_constant(
        battery, mu, mode=args.mode, c_range=(args.c_min, args.c_max)
    )
    print(f"{c_star:.3f}")
    return 0


def _cmd_list(args) -> int:
    print("measure families:")
    for name in sorted(measures_mod._FAMILIES):
        print(f"  {name}")
    print("measure ops:")
    for name in sorted(campaign_mod.MEASURE_OPS):
        print(f"  {name}")
    print("field builders:")
    for name in sorted(campaign_mod.FIELD_BUILDERS):
        print(f"  {name}")
    print("checks:")
    for name in sorted(campaign_mod.CHECK_KINDS):
        print(f"  {name}")
    print("presets:")
    for name in sorted(campaign_mod.PRESETS):
        print(f"  {name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lshlab",
        description="Numerical checks for strong log-Sobolev inequalities and "
        "strong hypercontractivity on log-subharmonic fields.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="run a campaign config (path or preset name)")
    p_run.add_argument("config", help="path to a campaign JSON, or a preset name")
    p_run.add_argument("--output-dir", default=None, help="where to write reports")
    p_run.add_argument("--jobs", type=int, default=1, help="check-level parallelism")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="run one check ad hoc from flags")
    p_check.add_argument("--check", required=True, choices=sorted(campaign_mod.CHECK_KINDS))
    p_check.add_argument("--measure", default="gaussian")
    p_check.add_argument("--field", default="log_linear:0.8")
    p_check.add_argument("--dim", type=int, default=1)
    p_check.add_argument("--c", type=float, default=1.0)
    p_check.add_argument("--p", type=float, default=1.0)
    p_check.add_argument("--q", type=float, default=2.0)
    p_check.add_argument("--r", type=float, default=0.8)
    p_check.add_argument("--k", type=int, default=4)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.set_defaults(func=_cmd_check)

    p_const = sub.add_parser("constants", help="regularity constant estimate")
    p_const.add_argument("--measure", required=True)
    p_const.add_argument("--dim", type=int, default=1)
    p_const.add_argument("--p", type=float, default=0.0)
    p_const.add_argument("--a", type=float, required=True)
    p_const.add_argument("--s", type=float, default=0.0)
    p_const.set_defaults(func=_cmd_constants)

    p_best = sub.add_parser("best-c", help="bisection for the smallest passing constant")
    p_best.add_argument("--measure", required=True)
    p_best.add_argument("--dim", type=int, default=1)
    p_best.add_argument("--mode", choices=("slsi", "shc"), default="slsi")
    p_best.add_argument("--c-min", type=float, default=0.25)
    p_best.add_argument("--c-max", type=float, default=4.0)
    p_best.set_defaults(func=_cmd_best_c)

    p_list = sub.add_parser("list", help="enumerate builders and checks")
    p_list.set_defaults(func=_cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
