"""``rkhs``: command-line front end for campaigns and polynomial tools.

Exit codes: 0 pass, 1 campaign failure, 2 usage error, 3 internal error.
Campaign reports go to stdout as JSON (or CSV); a one-line summary goes to
stderr.
"""

import argparse
import json
import sys

from . import __version__
from .errors import (CampaignDegenerate, CapError, DomainError, HypothesisFailed, NotAntiInvariant, NotDivisible,
                     NotInvariant, PolySyntaxError, ShapeError, SpectrumOutsideDomain, UnsupportedSpace)
from .geometry import get_map
from .hereditary import DEFAULT_CAP, load_tuple, vn_check
from .norms import SpaceId, hartogs_torus_norm_sq, hartogs_torus_sup, phi_norm_sq, poly_norm_sq, space_for_map
from .polyalg import descend, gamma_phi, gamma_phi_inverse, parse_poly
from .validate import (CampaignConfig, Report, run_identity, run_isometry, run_psd, run_reproducing,
                       run_series_compare)

USAGE_ERRORS = (PolySyntaxError, ShapeError, DomainError, UnsupportedSpace, NotInvariant, NotAntiInvariant,
                NotDivisible, SpectrumOutsideDomain, CapError, ValueError, KeyError, OSError)


class UsageError(Exception):
    pass


def _common(p, campaign=True):
    p.add_argument("--config", help="JSON file of flag values; explicit flags win")
    p.add_argument("--format", choices=("json", "csv") if campaign else ("text", "json"),
                   default="json" if campaign else "text", help="output format")
    if campaign:
        p.add_argument("--seed", type=int, default=42, help="campaign seed")
        p.add_argument("--tol", type=float, default=1e-8, help="pass tolerance")
        p.add_argument("--margin", type=float, default=0.05, help="sampling margin")


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="rkhs", description="Kernel campaigns on quotient domains of 2-proper maps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("psd", help="Gram-matrix PSD sweep", formatter_class=fmt)
    _common(p)
    p.add_argument("--kernel", help="kernel id, e.g. g2_closed or hardy_polydisc:2")
    p.add_argument("--map", help="pushforward of the map's base kernel instead of --kernel")
    p.add_argument("--base", help="base kernel for --map (default: the map's source kernel)")
    p.add_argument("--domain", help="sampling domain override")
    p.add_argument("--points", type=int, default=32, help="number of sampled points")
    p.add_argument("--truncation", type=int, default=60, help="tetra_series truncation")

    p = sub.add_parser("identity", help="transformation identity residuals", formatter_class=fmt)
    _common(p)
    p.add_argument("--map", required=True)
    p.add_argument("--base", help="base kernel (default: the map's source kernel)")
    p.add_argument("--closed", help="closed-form kernel (default: the registered one)")
    p.add_argument("--closed-scale", type=float, help="constant multiplying the closed form")
    p.add_argument("--pairs", type=int, default=200, help="number of sampled pairs")
    p.add_argument("--truncation", type=int, default=60, help="tetra_series truncation")

    p = sub.add_parser("series", help="tetrablock series against the quotient route", formatter_class=fmt)
    _common(p)
    p.add_argument("--pairs", type=int, default=200, help="number of sampled pairs")
    p.add_argument("--truncation", type=int, default=60, help="series truncation K")
    p.add_argument("--tail-lo", type=int, default=5, help="lower K of the tail-bound check")
    p.add_argument("--tail-hi", type=int, default=60, help="upper K of the tail-bound check")

    p = sub.add_parser("isometry", help="Gamma isometry audit on monomials", formatter_class=fmt)
    _common(p)
    p.add_argument("--map", required=True)
    p.add_argument("--base", help="source Hardy space (default: the map's)")
    p.add_argument("--max-degree", type=int, default=6, help="largest monomial degree")
    p.add_argument("--polys", type=int, default=200, help="random polynomials per round trip")

    p = sub.add_parser("reproducing", help="truncated-kernel reproducing property", formatter_class=fmt)
    _common(p)
    p.add_argument("--map", default="sym2")
    p.add_argument("--pairs", type=int, default=20, help="number of sampled points w")
    p.add_argument("--poly", help="polynomial f on the quotient (default: a seeded battery)")
    p.add_argument("--truncation", type=int, default=64, help="largest kernel truncation degree")

    p = sub.add_parser("vn", help="von Neumann inequality for a commuting tuple", formatter_class=fmt)
    _common(p)
    p.add_argument("--domain", default="fat_hartogs:2", help="fat_hartogs:2 or egg:2")
    p.add_argument("--tuple", required=True, help="tuple JSON file")
    p.add_argument("--poly", required=True, help="polynomial f in z1, z2")
    p.add_argument("--samples", type=int, default=4096, help="sup-norm sample count")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="hereditary series degree cap")

    p = sub.add_parser("descend", help="f with f o phi = g for sigma-invariant g", formatter_class=fmt)
    _common(p, campaign=False)
    p.add_argument("--map", required=True)
    p.add_argument("--poly", required=True)
    p.add_argument("--dim", type=int, help="number of variables (default: the map's)")

    p = sub.add_parser("gamma", help="J_phi * (f o phi), or its inverse", formatter_class=fmt)
    _common(p, campaign=False)
    p.add_argument("--map", required=True)
    p.add_argument("--poly", required=True)
    p.add_argument("--dim", type=int, help="number of variables (default: the map's)")
    p.add_argument("--inverse", action="store_true", help="apply Gamma^{-1} to an anti-invariant poly")

    p = sub.add_parser("norm", help="Hilbert-space norms of a polynomial", formatter_class=fmt)
    _common(p, campaign=False)
    p.add_argument("--poly", required=True)
    p.add_argument("--map", help="phi-norm through this map")
    p.add_argument("--space", help="plain norm in this space, e.g. h2_ball:2")
    p.add_argument("--dim", type=int, help="number of variables")
    p.add_argument("--torus", nargs=2, type=float, metavar=("T1", "T2"),
                   help="fat-Hartogs torus value at (t1, t2) (hartogs:2)")
    p.add_argument("--torus-sup", action="store_true", help="grid supremum of the torus value (hartogs:2)")
    parser.set_defaults(_subparsers=sub.choices)
    return parser


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            extra = json.load(fh)
        if not isinstance(extra, dict):
            raise UsageError("--config must hold a JSON object")
        known = set(vars(args)) - {"_subparsers", "command"}
        unknown = sorted(k for k in (key.replace("-", "_") for key in extra) if k not in known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        args._subparsers[args.command].set_defaults(**{k.replace("-", "_"): v for k, v in extra.items()})
        args = parser.parse_args(argv)
    return args


def _effective(args):
    return {k: v for k, v in sorted(vars(args).items()) if v is not None and k not in ("config", "_subparsers")}


def _poly_dim(args, m=None):
    if args.dim:
        return args.dim
    if m is not None:
        return m.d
    raise UsageError("--dim is required here")


def _campaign(args):
    if args.command == "psd":
        if not (args.kernel or args.map):
            raise UsageError("psd needs --kernel or --map")
        cfg = CampaignConfig(kernel=args.kernel or "", map=args.map or "", base=args.base or "",
                             domain=args.domain or "", n_points=args.points, seed=args.seed, tol=args.tol,
                             margin=args.margin, truncation=args.truncation)
        return run_psd(cfg)
    if args.command == "identity":
        cfg = CampaignConfig(map=args.map, base=args.base or "", closed=args.closed or "", n_pairs=args.pairs,
                             seed=args.seed, tol=args.tol, margin=args.margin, truncation=args.truncation)
        return run_identity(args.map, args.base, args.closed, cfg, args.closed_scale)
    if args.command == "series":
        cfg = CampaignConfig(kernel=f"tetra_series:{args.truncation}", n_pairs=args.pairs, seed=args.seed,
                             tol=args.tol, margin=args.margin, truncation=args.truncation,
                             tail_check=(args.tail_lo, args.tail_hi))
        return run_series_compare(cfg)
    if args.command == "isometry":
        cfg = CampaignConfig(map=args.map, seed=args.seed, tol=args.tol, margin=args.margin,
                             max_degree=args.max_degree)
        return run_isometry(args.map, args.base, args.max_degree, cfg, args.polys)
    if args.command == "reproducing":
        cfg = CampaignConfig(map=args.map, n_pairs=args.pairs, seed=args.seed, tol=args.tol, margin=args.margin)
        polys = [parse_poly(args.poly, 2)] if args.poly else None
        return run_reproducing(args.map, cfg, polys, args.truncation)
    if args.command == "vn":
        T = load_tuple(args.tuple)
        f = parse_poly(args.poly, T.d)
        try:
            res = vn_check(T, args.domain, f, args.samples, args.seed, args.cap)
        except HypothesisFailed as exc:
            return Report("vn", False, {"hypothesis": False}, _effective(args), notes=[str(exc)])
        note = "rhs is a sampled lower bound on the sup norm; pass allows 1e-6 relative slack"
        return Report("vn", res.passed, res.as_dict(), _effective(args), notes=[note])
    raise UsageError(f"unknown campaign {args.command}")


def _tool(args):
    """Polynomial tools: returns (text result, JSON payload)."""
    if args.command in ("descend", "gamma"):
        m = get_map(args.map)
        dim = _poly_dim(args, m)
        if dim != m.d:
            raise UsageError(f"--dim {dim} does not match {m} (dimension {m.d})")
        p = parse_poly(args.poly, dim)
        if args.command == "descend":
            out = descend(p, m)
        else:
            out = gamma_phi_inverse(p, m) if args.inverse else gamma_phi(p, m)
        var = "z" if args.command == "gamma" and not args.inverse else "v"
        text = out.to_string(var=var)
        return text, {"result": text}
    if args.command == "norm":
        m = get_map(args.map) if args.map else None
        dim = _poly_dim(args, m) if m is not None or args.dim else SpaceId.parse(args.space).d
        f = parse_poly(args.poly, dim)
        payload = {}
        if args.torus or args.torus_sup:
            if m is not None and m.id != "hartogs:2":
                raise UsageError("torus values are defined for hartogs:2")
            if args.torus:
                payload["torus_norm_sq"] = hartogs_torus_norm_sq(f, *args.torus)
            if args.torus_sup:
                payload["torus_sup"] = hartogs_torus_sup(f)
        if m is not None:
            base = SpaceId.parse(args.space) if args.space else space_for_map(m)
            payload["phi_norm_sq"] = phi_norm_sq(m, base, f)
        elif args.space:
            payload["norm_sq"] = poly_norm_sq(args.space, f)
        if not payload:
            raise UsageError("norm needs --map, --space or --torus")
        return " ".join(f"{k}={v!r}" for k, v in payload.items()), payload
    raise UsageError(f"unknown tool {args.command}")


def dispatch(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"rkhs: error: {exc}", file=err)
        return 2
    try:
        if args.command in ("descend", "gamma", "norm"):
            text, payload = _tool(args)
            if args.format == "json":
                print(json.dumps({"command": args.command, **payload, "config": _effective(args),
                                  "version": __version__}, sort_keys=True), file=out)
            else:
                print(text, file=out)
            return 0
        report = _campaign(args)
    except CampaignDegenerate as exc:
        print(f"rkhs: {args.command}: degenerate campaign: {exc}", file=err)
        return 1
    except (UsageError, *USAGE_ERRORS) as exc:
        print(f"rkhs: error: {exc}", file=err)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"rkhs: internal error: {type(exc).__name__}: {exc}", file=err)
        return 3
    report.config = _effective(args)
    print(report.to_csv() if args.format == "csv" else report.to_json(), file=out, end="" if args.format == "csv" else "\n")
    shown = ", ".join(f"{k}={v:.3g}" for k, v in report.metrics.items() if isinstance(v, float))
    print(f"{report.campaign}: {'PASS' if report.passed else 'FAIL'} ({shown})", file=err)
    return 0 if report.passed else 1


def main(argv=None):
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
