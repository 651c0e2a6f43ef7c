"""Command-line interface.

Exit codes: 0 success, 1 a check failed, 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .exceptions import SizeLimitError, TriangleInequalityError
from .key_rates import chain_multikey, dw_rate_of_state, triangle_multikey
from .operator_core import EIG_TOL, MultipartiteOperator, hermitian_residual, hermitian_spectrum
from .protocols import filter_sweep, find_threshold_D, random_sweep
from .squeezing import squeeze_family_pair, xstate_closed_form
from .state_family import (
    DEFAULT_SIZE_LIMIT,
    StateFamilyParams,
    build_rho,
    build_w_state,
    builtin_unitary,
    ppt_check,
    single_cut_ppt,
    validate_hermitian_unitary,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2

FILTER_HEADER = ("N", "D", "epsilon", "q", "i_ab", "i_ae", "rate", "rate_clamped")
RANDOM_HEADER = ("D", "M", "q", "i_ab", "i_ae", "rate", "rate_clamped")


class UsageError(Exception):
    pass


# -- argument parsing helpers -------------------------------------------------


def parse_grid(text: str, integer: bool = False) -> list:
    """``a:b:s`` (inclusive of b), a comma list, or a single value."""
    cast = int if integer else float
    try:
        if ":" in text:
            a, b, s = (float(v) for v in text.split(":"))
            if s <= 0:
                raise UsageError(f"grid step must be positive in {text!r}")
            if b < a:
                raise UsageError(f"grid stop below start in {text!r}")
            n = int(np.floor((b - a) / s + 1e-9)) + 1
            vals = [a + i * s for i in range(n)]
        else:
            vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from None
    if not vals:
        raise UsageError(f"empty grid {text!r}")
    if integer:
        return [int(round(v)) for v in vals]
    return [cast(round(v, 12)) for v in vals]


def parse_pair(text: str) -> tuple[int, int]:
    try:
        k, l = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--pair expects k,l, got {text!r}") from None
    return k, l


def load_unitary(path: str) -> np.ndarray:
    data = json.loads(Path(path).read_text())
    u = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    if u.shape != (data["d"], data["d"]):
        raise UsageError(f"unitary shape {u.shape} does not match d={data['d']}")
    try:
        return validate_hermitian_unitary(u)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def family_params(args) -> StateFamilyParams:
    if args.n is None or args.d is None:
        raise UsageError("--n and --d are required")
    try:
        u = load_unitary(args.unitary) if args.unitary else builtin_unitary(args.d)
        return StateFamilyParams(args.n, args.d, u)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline="\n"), True


def write_rows(rows, header, fmt_name: str, out_path, heat_axes=None):
    if fmt_name == "csv":
        text = ",".join(header) + "\n" + "".join(
            ",".join(fmt(v) for v in row) + "\n" for row in rows
        )
    elif fmt_name == "json":
        text = json.dumps([dict(zip(header, row)) for row in rows], indent=1) + "\n"
    elif fmt_name == "svg":
        text = render_svg(rows, header, *heat_axes)
    else:
        raise UsageError(f"unknown format {fmt_name!r}")
    fh, close = _open_out(out_path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def render_svg(rows, header, x_name: str, y_name: str, cell: int = 4) -> str:
    """Static heatmap of ``rate_clamped`` over the (x, y) grid."""
    xi, yi, zi = header.index(x_name), header.index(y_name), header.index("rate_clamped")
    xs = sorted({r[xi] for r in rows})
    ys = sorted({r[yi] for r in rows})
    xpos = {v: i for i, v in enumerate(xs)}
    ypos = {v: i for i, v in enumerate(ys)}
    zmax = max((r[zi] for r in rows), default=0.0) or 1.0
    w, h = cell * len(xs), cell * len(ys)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w + 60}" height="{h + 40}">',
        f'<text x="{30 + w // 2}" y="{h + 35}" font-size="10">{x_name}</text>',
        f'<text x="2" y="{h // 2}" font-size="10">{y_name}</text>',
    ]
    for r in rows:
        level = int(round(255 * (1 - r[zi] / zmax)))
        x = 30 + cell * xpos[r[xi]]
        y = 10 + cell * (len(ys) - 1 - ypos[r[yi]])
        parts.append(
            f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
            f'fill="rgb(255,{level},{level})"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# -- commands -----------------------------------------------------------------


def cmd_construct(args) -> int:
    params = family_params(args)
    try:
        rho = build_rho(params, args.size_limit)
    except SizeLimitError as exc:
        raise UsageError(str(exc)) from None
    fh, close = _open_out(args.out)
    try:
        json.dump(rho.to_json_dict(), fh)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    lam = hermitian_spectrum(rho).min
    print(
        f"N={params.N} D={params.D} side={rho.side} trace={rho.trace().real:.12g} "
        f"hermiticity_residual={hermitian_residual(rho):.3e} min_eigenvalue={lam:.3e}",
        file=sys.stderr if args.out in (None, "-") else sys.stdout,
    )
    return EXIT_OK if lam >= -args.tol else EXIT_CHECK


def cmd_ppt_check(args) -> int:
    if args.w_state or args.input:
        if args.input:
            op = MultipartiteOperator.from_json_dict(json.loads(Path(args.input).read_text()))
        else:
            if args.n is None:
                raise UsageError("--w-state needs --n")
            psi = build_w_state(args.n)
            op = MultipartiteOperator((2,) * args.n, np.outer(psi, psi))
        cuts = [args.party] if args.party else range(1, op.nsub + 1)
        results = []
        for k in cuts:
            if not 1 <= k <= op.nsub:
                raise UsageError(f"party {k} out of range")
            results.append(single_cut_ppt(op, k - 1, args.tol))
    else:
        params = family_params(args)
        try:
            rho = build_rho(params, args.size_limit)
        except SizeLimitError as exc:
            raise UsageError(str(exc)) from None
        cuts = [args.party] if args.party else range(1, params.N + 1)
        try:
            results = [ppt_check(rho, params, k, args.tol) for k in cuts]
        except IndexError as exc:
            raise UsageError(str(exc)) from None
    for r in results:
        print(f"party {r.party}: min_eigenvalue={r.min_eigenvalue:.6e} {'PPT' if r.is_ppt else 'NPT'}")
    return EXIT_OK if all(r.is_ppt for r in results) else EXIT_CHECK


def cmd_sweep_filter(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    Ds = parse_grid(args.d_grid or "2:100:1", integer=True)
    eps = parse_grid(args.eps_grid)
    if min(Ds) < 2 or not all(0 <= e <= 1 for e in eps):
        raise UsageError("need D >= 2 and epsilon in [0, 1]")
    recs = filter_sweep(args.n, Ds, eps, jobs=args.jobs, backend=args.backend)
    rows = [(r.N, r.D, r.epsilon, r.q, r.i_ab, r.i_ae, r.rate, r.rate_clamped) for r in recs]
    write_rows(rows, FILTER_HEADER, args.format, args.out, ("D", "epsilon"))
    return EXIT_OK


def cmd_sweep_random(args) -> int:
    Ds = parse_grid(args.d_grid or "2:200:1", integer=True)
    Ms = parse_grid(args.m_grid, integer=True) if args.m_grid else [args.m]
    if min(Ds) < 2 or min(Ms) < 1:
        raise UsageError("need D >= 2 and M >= 1")
    recs = random_sweep(Ds, Ms, jobs=args.jobs, backend=args.backend)
    rows = [(r.D, r.M, r.q, r.i_ab, r.i_ae, r.rate, r.rate_clamped) for r in recs]
    write_rows(rows, RANDOM_HEADER, args.format, args.out, ("D", "M"))
    return EXIT_OK


def cmd_thresholds(args) -> int:
    modes = ["random", "filter"] if args.mode == "both" else [args.mode]
    for mode in modes:
        if mode == "random":
            Ds = parse_grid(args.d_grid or "2:500:1", integer=True)
            res = find_threshold_D("random", Ds, N=3, M=args.m, jobs=args.jobs, backend=args.backend)
        else:
            Ds = parse_grid(args.d_grid or "2:6000:1", integer=True)
            eps = parse_grid(args.eps_grid)
            res = find_threshold_D("filter", Ds, N=args.n or 3, eps=eps, jobs=args.jobs,
                                   backend=args.backend)
        print(res)
    return EXIT_OK


def cmd_multikey(args) -> int:
    try:
        rates = [float(v) for v in args.rates.split(",")]
    except ValueError:
        raise UsageError(f"--rates expects comma-separated numbers, got {args.rates!r}") from None
    if any(r < 0 for r in rates):
        raise UsageError("rates must be nonnegative")
    n = args.n or (3 if len(rates) == 3 else len(rates) + 1)
    print(f"chain bound (N={n}): {fmt(chain_multikey(min(rates), n))}")
    if len(rates) == 3:
        try:
            print(f"triangle bound: {fmt(triangle_multikey(*rates))}")
        except TriangleInequalityError as exc:
            print(f"triangle bound: violated ({exc})")
            return EXIT_CHECK
    return EXIT_OK


def cmd_squeeze(args) -> int:
    """Numeric squeeze of a pair reduction next to the closed form."""
    params = family_params(args)
    k, l = args.pair
    try:
        rho = build_rho(params, args.size_limit)
        rho4 = squeeze_family_pair(rho, params, k, l)
    except SizeLimitError as exc:
        raise UsageError(str(exc)) from None
    except (IndexError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    closed = xstate_closed_form(params.N, params.D).matrix()
    dev = float(np.max(np.abs(rho4 - closed)))
    r = dw_rate_of_state(rho4)
    for row in np.real(rho4):
        print(" ".join(f"{v:.12g}" for v in row))
    print(f"max deviation from closed form: {dev:.3e}")
    print(f"i_ab={fmt(r.i_ab)} i_ae={fmt(r.i_ae)} rate={fmt(r.rate)}")
    return EXIT_OK if dev < 1e-10 else EXIT_CHECK


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="number of parties")
    common.add_argument("--d", type=int, help="shield factor dimension")
    common.add_argument("--unitary", help="JSON file with a Hermitian unitary {d, re, im}")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--tol", type=float, default=EIG_TOL, help="eigenvalue tolerance")
    common.add_argument("--size-limit", type=int, default=DEFAULT_SIZE_LIMIT)

    grids = argparse.ArgumentParser(add_help=False)
    grids.add_argument("--d-grid", help="D grid a:b:s or list")
    grids.add_argument("--eps-grid", default="0:1:0.01", help="epsilon grid a:b:s or list")
    grids.add_argument("--m", type=int, default=100, help="rounds of the random protocol")
    grids.add_argument("--m-grid", help="M grid a:b:s or list")
    grids.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    grids.add_argument("--jobs", type=int, default=1)
    grids.add_argument("--backend", choices=kernels.BACKENDS, default=None)

    p = argparse.ArgumentParser(prog="wlike", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", parents=[common], help="dump a family member as JSON")
    c.set_defaults(func=cmd_construct)

    c = sub.add_parser("ppt-check", parents=[common], help="single-party partial transpose test")
    c.add_argument("--party", type=int)
    c.add_argument("--w-state", action="store_true", help="check the N-qubit W projector instead")
    c.add_argument("--input", help="operator JSON dump; each subsystem is one party")
    c.set_defaults(func=cmd_ppt_check)

    c = sub.add_parser("sweep-filter", parents=[common, grids], help="filtering rate over (D, eps)")
    c.set_defaults(func=cmd_sweep_filter)

    c = sub.add_parser("sweep-random", parents=[common, grids], help="random-protocol rate over (D, M)")
    c.set_defaults(func=cmd_sweep_random)

    c = sub.add_parser("thresholds", parents=[common, grids], help="smallest D with positive rate")
    c.add_argument("--mode", choices=("filter", "random", "both"), default="both")
    c.set_defaults(func=cmd_thresholds)

    c = sub.add_parser("multikey", parents=[common], help="multipartite rates from pair rates")
    c.add_argument("--rates", required=True, help="comma-separated pair rates")
    c.set_defaults(func=cmd_multikey)

    c = sub.add_parser("squeeze", parents=[common], help="privacy-squeezed state of a pair")
    c.add_argument("--pair", type=parse_pair, default=(1, 2))
    c.set_defaults(func=cmd_squeeze)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
