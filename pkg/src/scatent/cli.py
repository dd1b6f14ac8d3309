"""Command-line entry point: ``scatent <command> [options]``.

Exit codes: 0 success, 2 invalid input, 3 numerical contract violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys

import numpy as np

from . import entanglement, hilbert, partialwave, search, spinmodel
from .angular import HalfInt, cg, couple

EXIT_INPUT = 2
EXIT_NUMERIC = 3

_PI_RE = re.compile(
    r"^(?P<sign>[+-]?)\s*(?P<coef>\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?$"
)


class InputError(ValueError):
    pass


def parse_angle(text: str, degrees: bool = False) -> float:
    """Parse ``"pi/4"``, ``"-3pi/4"``, ``"2*pi"``, ``"0.5"`` (radians) or a
    plain number of degrees when ``degrees`` is set."""
    s = str(text).strip().lower().replace("π", "pi")
    m = _PI_RE.match(s)
    if m:
        value = float(m["coef"] or 1.0) * math.pi
        if m["den"]:
            value /= float(m["den"])
        return -value if m["sign"] == "-" else value
    try:
        value = float(s)
    except ValueError:
        raise InputError(f"cannot parse angle {text!r}") from None
    return math.radians(value) if degrees else value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INPUT)


def _emit(text: str, output: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if output in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {output!r}: {exc}") from exc


def _spin_inputs(args):
    deg = args.degrees
    theta = parse_angle(args.theta, deg)
    phi = parse_angle(args.phi, deg)
    d0 = parse_angle(args.delta0, deg)
    d1 = parse_angle(args.delta1, deg)
    if not 0.0 <= theta <= math.pi:
        # parsed pi may round past the float pi; allow a few ulp
        if abs(theta - math.pi) < 1e-12:
            theta = math.pi
        else:
            raise InputError(f"theta = {theta!r} rad is outside the range [0, pi]")
    if not 0.0 <= phi <= 4 * math.pi:
        raise InputError(f"phi = {phi!r} rad is outside the range [0, 4pi]")
    return spinmodel.InStateParams(theta, phi), spinmodel.ChannelPhases.spin_half(d0, d1)


def cmd_eoe(args) -> str:
    params, phases = _spin_inputs(args)
    closed = spinmodel.eoe_closed_form(params.theta, phases.delta_delta)
    state = spinmodel.out_state(params, phases)
    oracle = entanglement.eoe(state, {"spin_A"})
    diff = abs(closed - oracle)
    if args.format == "json":
        return json.dumps({"eoe_closed_form": closed, "eoe_schmidt": oracle, "abs_diff": diff})
    return f"eoe_closed_form,eoe_schmidt,abs_diff\n{closed:.6f},{oracle:.6f},{diff:.3e}"


def cmd_out_state(args) -> str:
    params, phases = _spin_inputs(args)
    return json.dumps(hilbert.state_to_json(spinmodel.out_state(params, phases)))


def cmd_scan(args) -> str:
    deg = args.degrees
    grid = search.ScanGrid(
        theta_steps=args.theta_steps,
        phi_steps=args.phi_steps,
        dd_steps=args.dd_steps,
        theta_value=parse_angle(args.theta, deg),
        phi_value=parse_angle(args.phi, deg),
        dd_value=parse_angle(args.dd, deg),
    )
    records = search.scan(grid, workers=args.workers)
    body = search.records_to_json(records) if args.format == "json" else search.records_to_csv(records)
    _emit(body, args.output)
    summary = search.scan_summary(records)
    where = "; ".join(f"theta={t:.6g} delta_delta={d:.6g}" for t, d in summary["argmax_distinct"])
    line = (f"# rows={len(records)} max_eoe={summary['max_eoe']:.6f} "
            f"argmax (delta_delta mod pi): {where} [{len(summary['argmax'])} grid points]")
    # summary goes to stderr when the data itself is on stdout
    print(line, file=sys.stderr if args.output in (None, "-") else sys.stdout)
    return ""


def cmd_perfect(args) -> str:
    verdicts = search.find_perfect_entanglers(args.dd_steps, args.tol)
    rows = verdicts if args.all else [v for v in verdicts if v.is_perfect]
    if args.format == "json":
        return json.dumps([
            {
                "delta_delta_rad": v.delta_delta,
                "max_eoe_over_instates": v.max_eoe_over_instates,
                "argmax_theta_rad": v.argmax_theta,
                "canonical_delta_delta_rad": v.canonical,
                "is_perfect": v.is_perfect,
            }
            for v in rows
        ])
    lines = ["delta_delta_rad,max_eoe_over_instates,argmax_theta_rad,canonical_delta_delta_rad,is_perfect"]
    lines += [
        f"{v.delta_delta:.6g},{v.max_eoe_over_instates:.6g},{v.argmax_theta:.6g},"
        f"{v.canonical:.6g},{str(v.is_perfect).lower()}"
        for v in rows
    ]
    return "\n".join(lines)


def _parse_cut(text: str) -> set[str]:
    return {part.strip() for part in text.split(",") if part.strip()}


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path!r}: {exc}") from exc


def _reduced_comparison(spec, phases, state, l, full_spin_eoe):
    """Spin-model EoE for partial wave ``l`` and its gap to the full model."""
    factors = partialwave.build_space(spec)
    orb = factors[0]
    in_sector = [i for i, (ll, _) in enumerate(orb.labels) if ll == l]
    t = state.tensor()
    leak = 1.0 - float(np.sum(np.abs(t[in_sector]) ** 2))
    if leak > 1e-12:
        raise InputError(f"in-state is not confined to partial wave l = {l} (leakage {leak:.3g})")
    mat = t.reshape(orb.dim, -1)
    u, sv, vh = np.linalg.svd(mat)
    if sv.size > 1 and sv[1] > 1e-9:
        raise InputError("in-state is not a product of an orbital and a spin state")
    spin_in = hilbert.StateVector(factors[1:], vh[0] * sv[0] / abs(sv[0]))
    red = partialwave.low_energy_reduce(phases, l, spec)
    spin_out = spinmodel.apply_s_operator(spin_in, red)
    reduced = entanglement.eoe(spin_out, {"spin_A"})
    return {"l": l, "reduced_spin_eoe": reduced, "full_spin_eoe": full_spin_eoe,
            "abs_diff": abs(reduced - full_spin_eoe)}


def cmd_partial_wave(args) -> str:
    try:
        spec, interaction = partialwave.load_channel_config(_load_json(args.config))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    try:
        if isinstance(interaction, partialwave.CentralPhases):
            smat = partialwave.s_operator_central(spec, interaction)
        else:
            smat = partialwave.s_operator_general(spec, interaction)
    except KeyError as exc:
        raise InputError(str(exc)) from exc

    try:
        raw = hilbert.state_from_json(_load_json(args.instate))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed in-state: {exc}") from exc
    factors = partialwave.build_space(spec)
    if raw.names != tuple(f.name for f in factors) or raw.dims != tuple(f.dim for f in factors):
        raise InputError(
            f"in-state factors {list(zip(raw.names, raw.dims))} do not match "
            f"{[(f.name, f.dim) for f in factors]}"
        )
    state = hilbert.StateVector(factors, raw.amps)
    out = hilbert.StateVector(factors, smat @ state.amps)

    names = out.names
    if args.cut:
        cuts = [entanglement.Bipartition.of(out, _parse_cut(c)) for c in args.cut]
    else:
        cuts = entanglement.all_cuts(names)
    reports = [entanglement.schmidt(out, cut) for cut in cuts]
    result = {"dim": spec.dim, "W": spec.W, "reports": [r.to_json(names) for r in reports]}

    if args.reduce is not None:
        if not isinstance(interaction, partialwave.CentralPhases):
            raise InputError("--reduce needs a central-interaction config")
        if not 0 <= args.reduce <= spec.l_max:
            raise InputError(f"--reduce {args.reduce} outside 0..{spec.l_max}")
        full = entanglement.eoe(out, {"spin_A"})
        result["reduction"] = _reduced_comparison(spec, interaction, state, args.reduce, full)

    if args.format == "json":
        return json.dumps(result)
    lines = ["cut,entropy_bits,schmidt_rank"]
    for r in reports:
        side = "+".join(sorted(r.bipartition.side_a, key=names.index))
        lines.append(f"{side},{r.entropy:.6f},{len(r.schmidt_values)}")
    if "reduction" in result:
        red = result["reduction"]
        lines.append(f"# reduce l={red['l']}: reduced_spin_eoe={red['reduced_spin_eoe']:.6f} "
                     f"full_spin_eoe={red['full_spin_eoe']:.6f} abs_diff={red['abs_diff']:.3e}")
    return "\n".join(lines)


def cmd_cg_table(args) -> str:
    try:
        j1, j2 = HalfInt.of(args.j1), HalfInt.of(args.j2)
        cmap = couple(j1, j2)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j1", "m1", "j2", "m2", "J", "M", "sign", "square", "value"])
    for J, M in cmap.rows:
        for m1, m2 in cmap.cols:
            c = cg(j1, m1, j2, m2, J, M)
            if c.sign == 0 and not args.zeros:
                continue
            w.writerow([j1, m1, j2, m2, J, M, c.sign, c.square, repr(c.value)])
    return buf.getvalue()


def _add_spin_args(p):
    p.add_argument("--theta", default="0", help="Bloch polar angle of particle B, [0, pi]")
    p.add_argument("--phi", default="0", help="Bloch phase of particle B, [0, 4pi]")
    p.add_argument("--delta0", default="0", help="singlet phase shift")
    p.add_argument("--delta1", default="0", help="triplet phase shift")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scatent", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    angles = argparse.ArgumentParser(add_help=False)
    angles.add_argument("--degrees", action="store_true",
                        help="read plain numeric angles as degrees (pi expressions stay radians)")

    p = sub.add_parser("eoe", parents=[angles], help="entropy of entanglement of the spin-model out-state")
    _add_spin_args(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_eoe)

    p = sub.add_parser("out-state", parents=[angles], help="spin-model out-state as JSON")
    _add_spin_args(p)
    p.set_defaults(func=cmd_out_state)

    p = sub.add_parser("scan", parents=[angles], help="EoE over a (theta, phi, delta_delta) grid")
    p.add_argument("--theta-steps", type=int, default=181)
    p.add_argument("--phi-steps", type=int, default=1)
    p.add_argument("--dd-steps", type=int, default=361)
    p.add_argument("--theta", default="0", help="theta when --theta-steps is 1")
    p.add_argument("--phi", default="0", help="phi when --phi-steps is 1")
    p.add_argument("--dd", default="0", help="delta_delta when --dd-steps is 1")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("perfect", help="perfect-entangler verdicts over a delta_delta grid")
    p.add_argument("--dd-steps", type=int, default=361)
    p.add_argument("--tol", type=float, default=search.DEFAULT_TOL)
    p.add_argument("--all", action="store_true", help="list every grid point, not only perfect ones")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_perfect)

    p = sub.add_parser("partial-wave", help="entropies after partial-wave scattering")
    p.add_argument("--config", required=True, help="channel configuration JSON")
    p.add_argument("--instate", required=True, help="in-state JSON over orbital, spin_A, spin_B")
    p.add_argument("--cut", action="append",
                   help="comma-separated factor names on one side; repeatable (default: all cuts)")
    p.add_argument("--reduce", type=int, default=None, metavar="L",
                   help="compare with the spin model for partial wave L")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_partial_wave)

    p = sub.add_parser("cg-table", help="Clebsch-Gordan coefficients as CSV")
    p.add_argument("--j1", required=True)
    p.add_argument("--j2", required=True)
    p.add_argument("--zeros", action="store_true", help="include vanishing coefficients")
    p.set_defaults(func=cmd_cg_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "scan":
        for name in ("theta_steps", "phi_steps", "dd_steps"):
            if getattr(args, name) < 1:
                parser.error(f"--{name.replace('_', '-')} must be >= 1")
    try:
        text = args.func(args)
    except partialwave.NonUnitaryBlockError as exc:
        print(f"scatent: numerical contract violation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ValueError) as exc:
        print(f"scatent: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if text:
        _emit(text, getattr(args, "output", None) if args.command != "scan" else None)
    return 0


if __name__ == "__main__":
    sys.exit(main())
