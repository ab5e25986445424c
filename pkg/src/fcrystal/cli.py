"""Command line front end.

Exit codes: 0 success, 2 malformed input, 3 precision insufficient after
automatic raising, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from . import corpus
from .deformation import deform_report
from .errors import CrystalError, PrecisionError, VerificationError
from .hodgenewton import breakpoints, hn_decompose, hn_eligible, output_precision, polarized_dual_check
from .kottwitz import GroupData, verdict_json
from .obcrystal import OBCrystal, TypeDF, build_mu_ordinary, mu_ordinary_polygon, policy_ring_for_exponents
from .polygon import LatticePoint, Polygon, preceq
from .wittring import make_ring, ring_from_json

EXIT_OK, EXIT_INPUT, EXIT_PRECISION, EXIT_VERIFY = 0, 2, 3, 4

NEWTON_POLICY = "N >= t*sum(hodge) + d + 8"
HN_POLICY = "T = max(N >= t*sum(hodge) + d + 8, 2*sum(hodge) + 16)"


# -- helpers ------------------------------------------------------------------


def _load(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CrystalError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CrystalError(f"{path} is not valid JSON: {exc}") from exc


def _poly(P: Polygon) -> dict:
    out = P.to_json()
    out["text"] = run_length(P)
    return out


def _point(x: LatticePoint) -> list:
    return [x.x1, str(x.x2)]


def _parse_point(text: str) -> LatticePoint:
    try:
        a, b = text.split(",")
        return LatticePoint(int(a), Fraction(b))
    except (ValueError, ZeroDivisionError) as exc:
        raise CrystalError(f"point must look like X1,X2 (got {text!r})") from exc


def _with_precision(C: OBCrystal, override, policy_min: int) -> tuple:
    """Re-embed ``C`` at the override or the policy precision."""
    if override is not None:
        if override < policy_min:
            raise CrystalError(f"--precision {override} is below the policy minimum {policy_min}")
        return C.with_precision(override), "override"
    if C.ring.N >= policy_min:
        return C, "input"
    return C.with_precision(policy_min), "auto-raised"


def run_length(P: Polygon) -> str:
    """Slope run-length notation, e.g. ``0^2 1/2^2 1^2``."""
    return " ".join(f"{s}^{m}" for s, m in P.slopes) or "(empty)"


# -- commands -------------------------------------------------------------------


def cmd_analyze(args) -> dict:
    C = OBCrystal.from_json(_load(args.input))
    C, how = _with_precision(C, args.precision, C.at_policy_precision().ring.N)
    nu_red = C.newton_reduced(args.debug_all_blocks)
    nu, mub = nu_red.r_inflate(C.r), C.sigma_hodge()
    report = {
        "precision": {"effective": C.ring.N, "source": how, "policy": NEWTON_POLICY},
        "ring": C.ring.header(),
        "r": C.r, "d": C.d, "a": C.a,
        "polygons": {
            "newton": _poly(nu),
            "newton_reduced": _poly(nu_red),
            "hodge": _poly(C.hodge()),
            "sigma_hodge": _poly(mub),
            "sigma_hodge_reduced": _poly(C.sigma_hodge_reduced()),
            "hodge_blocks": [_poly(m) for m in C.hodge_blocks()],
        },
        "mazur": preceq(nu, mub),
        "mu_ordinary": nu == mub,
        "breakpoints": [{"point": _point(x), "reduced": _point(LatticePoint(x.x1 // C.r, x.x2)),
                         "hn_eligible": hn_eligible(C, x)} for x in breakpoints(C)],
    }
    try:
        report["type"] = C.type_of().to_json()
    except CrystalError:
        report["type"] = None
    return report


def cmd_hn(args) -> dict:
    C = OBCrystal.from_json(_load(args.input))
    x = _parse_point(args.point)
    policy_min = output_precision(C)
    if args.precision is not None and args.precision < policy_min:
        raise CrystalError(f"--precision {args.precision} is below the policy minimum {policy_min}")
    D = hn_decompose(C, x, per_block=args.per_block, precision=args.precision)
    out = D.to_json()
    out["precision"] = {"effective": D.precision, "working": D.working_precision,
                        "source": "override" if args.precision else "policy", "policy": HN_POLICY}
    return out


def cmd_mu_ordinary(args) -> dict:
    f = [int(v) for v in args.f.split(",")]
    t = TypeDF(args.d, len(f), tuple(f))
    formula = mu_ordinary_polygon(t)
    total = sum(f)
    R = policy_ring_for_exponents(args.p, t.r * args.extension, t.r, t.d, total)
    policy_min = R.N
    if args.precision is not None:
        if args.precision < policy_min:
            raise CrystalError(f"--precision {args.precision} is below the policy minimum {policy_min}")
        R = R.with_precision(args.precision)
    C = build_mu_ordinary(R, t)
    nu, mub = C.newton(), C.sigma_hodge()
    if C.sigma_hodge_reduced() != formula:
        raise VerificationError("closed form disagrees with the built module",
                                {"formula": str(formula), "built": str(C.sigma_hodge_reduced())})
    return {
        "precision": {"effective": R.N, "source": "override" if args.precision else "policy",
                      "policy": NEWTON_POLICY},
        "type": t.to_json(),
        "a": [str(s) for s in formula.expanded()],
        "sigma_hodge_reduced": _poly(formula),
        "newton": _poly(nu),
        "sigma_hodge": _poly(mub),
        "mu_ordinary": nu == mub,
        "breakpoints": len(formula.breakpoints()),
        "crystal": C.to_json(),
    }


def cmd_kottwitz(args) -> dict:
    g = GroupData.from_json(_load(args.input))
    out = verdict_json(g)
    out["precision"] = {"effective": None, "source": "exact", "policy": "exact rationals"}
    return out


def cmd_deform(args) -> dict:
    obj = _load(args.input)
    try:
        t = TypeDF(int(obj["d"]), int(obj["r"]), tuple(obj["f"]))
        K = int(obj.get("K", 3))
    except (KeyError, TypeError, ValueError) as exc:
        raise CrystalError(f"malformed type JSON: {exc}") from exc
    if "p" in obj:
        R = ring_from_json(obj)
    else:
        R = make_ring(2, t.r, 8)
    if args.precision is not None:
        R = R.with_precision(args.precision)
    cuts = obj.get("cuts")
    out = deform_report(t, R, K, cuts)
    out["ring"] = R.header()
    out["precision"] = {"effective": R.N, "source": "input", "policy": "any N >= 1 (stability is mod p)"}
    return out


def cmd_dualize(args) -> dict:
    P = Polygon.from_json(_load(args.input))
    n = args.n
    if P.height != 2 * n:
        raise CrystalError(f"polygon has height {P.height}, expected {2 * n}")
    pairs = []
    for x in P.breakpoints():
        xd, ok = polarized_dual_check(P, x, n)
        pairs.append({"point": _point(x), "dual": _point(xd), "dual_is_breakpoint": ok})
    return {
        "precision": {"effective": None, "source": "exact", "policy": "exact rationals"},
        "polygon": _poly(P), "dual": _poly(P.dual()), "self_dual": P.dual() == P,
        "pairs": pairs,
    }


def cmd_random(args) -> dict:
    rng = random.Random(args.seed)
    C = corpus.random_crystal(rng, args.p, args.r, args.d, args.extension)
    out = C.to_json()
    out["seed"] = args.seed
    return out


# -- rendering ----------------------------------------------------------------------


def _collect_polygons(report: dict, prefix="") -> list:
    found = []
    for key in sorted(report):
        val = report[key]
        name = f"{prefix}{key}"
        if isinstance(val, dict) and "slopes" in val:
            found.append((name, Polygon.from_json(val)))
        elif isinstance(val, dict):
            found.extend(_collect_polygons(val, name + "."))
        elif isinstance(val, list) and val and all(isinstance(v, dict) and "slopes" in v for v in val):
            found.extend((f"{name}[{i}]", Polygon.from_json(v)) for i, v in enumerate(val))
    return found


def _scalars(report: dict, prefix=""):
    for key in sorted(report):
        val = report[key]
        name = f"{prefix}{key}"
        if isinstance(val, (bool, int, str)) or val is None:
            yield name, val
        elif isinstance(val, dict) and "slopes" not in val and name not in ("ring", "C1", "C2", "crystal"):
            yield from _scalars(val, name + ".")


def render_ascii(report: dict) -> str:
    lines = [f"{name}: {run_length(P)}" for name, P in _collect_polygons(report)]
    lines.extend(f"{name}: {val}" for name, val in _scalars(report))
    return "\n".join(lines) + "\n"


def render_svg(report: dict, scale: int = 40) -> str:
    polys = [(n, P) for n, P in _collect_polygons(report) if P.height]
    if not polys:
        raise CrystalError("report contains no polygon to draw")
    W = max(P.height for _, P in polys)
    H = max(P.total() for _, P in polys)
    Hc = max(1, int(H) + (H.denominator != 1))
    pad = 20
    w, h = W * scale + 2 * pad, Hc * scale + 2 * pad + 16 * len(polys)
    X = lambda x: pad + float(x) * scale
    Y = lambda y: pad + (Hc - float(y)) * scale
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">']
    for i in range(W + 1):
        out.append(f'<line x1="{X(i)}" y1="{Y(0)}" x2="{X(i)}" y2="{Y(Hc)}" stroke="#ddd"/>')
    for j in range(Hc + 1):
        out.append(f'<line x1="{X(0)}" y1="{Y(j)}" x2="{X(W)}" y2="{Y(j)}" stroke="#ddd"/>')
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    for k, (name, P) in enumerate(polys):
        col = colors[k % len(colors)]
        pts = " ".join(f"{X(v.x1)},{Y(v.x2)}" for v in P.vertices())
        out.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="2"/>')
        for v in P.breakpoints():
            out.append(f'<circle cx="{X(v.x1)}" cy="{Y(v.x2)}" r="3" fill="{col}"/>')
        out.append(f'<text x="{pad}" y="{Y(0) + 16 * (k + 1)}" font-size="12" fill="{col}">'
                   f'{name}: {run_length(P)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render(report: dict, fmt: str) -> str:
    if fmt == "ascii":
        return render_ascii(report)
    if fmt == "svg":
        return render_svg(report)
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


# -- entry point ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None,
                        help="working precision N (must meet the policy minimum)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "ascii", "svg"), default="json")
    common.add_argument("--debug-all-blocks", action="store_true",
                        help="recompute Newton polygons from every phi_i and compare")

    ap = argparse.ArgumentParser(prog="fcrystal", description="Polygons and Hodge-Newton decompositions of crystals")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="all polygons and breakpoints of a crystal")
    p.add_argument("input")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("hn", parents=[common], help="Hodge-Newton decomposition at a point")
    p.add_argument("input")
    p.add_argument("point", help="X1,X2 on the height r*d Newton polygon")
    p.add_argument("--per-block", action="store_true", help="compute every block from its own phi_i")
    p.set_defaults(func=cmd_hn)

    p = sub.add_parser("mu-ordinary", parents=[common], help="build the mu-ordinary module of a type")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--f", required=True, help="comma separated values f(0),...,f(r-1)")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--extension", type=int, default=1, help="residue degree m = r * extension")
    p.set_defaults(func=cmd_mu_ordinary)

    p = sub.add_parser("kottwitz", parents=[common], help="group-theoretic hypotheses from nu, mu, j")
    p.add_argument("input")
    p.set_defaults(func=cmd_kottwitz)

    p = sub.add_parser("deform", parents=[common], help="stability of the filtration under g_univ")
    p.add_argument("input")
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("dualize", parents=[common], help="dual polygon and breakpoint pairing")
    p.add_argument("input")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_dualize)

    p = sub.add_parser("random", parents=[common], help="seeded random crystal JSON")
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--extension", type=int, default=1)
    p.set_defaults(func=cmd_random)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        report = args.func(args)
        text = render(report, args.format)
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        if exc.report:
            print(json.dumps(exc.report, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_VERIFY
    except PrecisionError as exc:
        print(f"precision insufficient: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except CrystalError as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
