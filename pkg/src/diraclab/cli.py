"""Reproduction harness.

Subcommands
-----------
verify-algebra   residual report for the exact matrix-layer identities
counterexample   quadratic-form table converging to +-i/(4 pi)
sweep            spectral-parameter sweeps (dirac | schrodinger | perturbed)
apply            apply a resolvent (or the operator itself) to a field dump
neumann          perturbed-resolvent application via the geometric series
norm-estimate    weighted operator-norm proxy at a single parameter

Configuration: an optional ``--config FILE`` of ``section.flag=value``
lines provides defaults for the same-named flags (sections are
informational; ``grid.grid-n=64`` and ``run.grid-n=64`` both set
``--grid-n``).  Explicit flags win.  All CSV output uses 17-significant-
digit scientific notation so replotting is lossless.

Exit codes: 0 success / all checks passed, 1 a tolerance check failed,
2 input parse error, 3 band-limit violation, 4 on-spectrum query,
5 spectral overlap, 6 other domain error.
"""

import argparse
import sys

import numpy as np

from . import counterexample as _ce
from . import dirac as _dirac
from . import grid as _grid
from . import perturbed as _pert
from . import plemelj as _plem
from . import resolvent as _res
from .errors import (
    BandLimitViolated,
    DiraclabError,
    DomainError,
    OnSpectrum,
    SpectralOverlap,
)

EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_BAND_LIMIT = 3
EXIT_ON_SPECTRUM = 4
EXIT_OVERLAP = 5
EXIT_DOMAIN = 6


def _fmt(x):
    return f"{x:.17e}"


def _parse_floats(text):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc


def _parse_ints(text):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad int list {text!r}") from exc


def _parse_complex(text):
    try:
        return complex(text.replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad complex {text!r}") from exc


def _parse_sign(text):
    if text in ("+", "+1", "plus"):
        return +1
    if text in ("-", "-1", "minus"):
        return -1
    raise argparse.ArgumentTypeError(f"bad sign {text!r}")


def _parse_potential(text):
    try:
        kind, eps, amp = text.split(":")
        return _pert.preset_potential(kind, float(eps), float(amp))
    except (ValueError, DomainError) as exc:
        raise argparse.ArgumentTypeError(
            f"bad potential spec {text!r}; expected kind:epsilon:amplitude"
        ) from exc


def load_config(path):
    """Flat key=value configuration with section prefixes."""
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DomainError(f"bad config line {line!r}")
            key, value = line.split("=", 1)
            key = key.strip().split(".")[-1].replace("-", "_")
            out[key] = value.strip()
    return out


def _make_grid(args):
    return _grid.Grid3(args.grid_n, args.box_l)


# --- verify-algebra ----------------------------------------------------------


def _verify_algebra_report(seed=0, corrupt=False):
    """(lines, ok) for the exact-identity suite."""
    rng = np.random.default_rng(seed)
    mset = _dirac.standard_representation()
    if corrupt:
        beta = np.array(mset.beta)
        beta[0, 0] = 1.001
        mset = _dirac.DiracMatrixSet(alpha=mset.alpha, beta=beta)

    checks = []

    checks.append(
        ("anticommutation", _dirac.anticommutation_deviation(mset), 1e-13)
    )

    xis = rng.uniform(-6, 6, size=(200, 3))
    sq_dev = 0.0
    proj_dev = 0.0
    trace_dev = 0.0
    for xi in xis:
        sym = _dirac.free_symbol(xi, mset)
        b2 = 1.0 + float(xi @ xi)
        sq_dev = max(sq_dev, float(np.max(np.abs(sym @ sym - b2 * np.eye(4)))))
        p, q = _dirac.eigenprojections(xi, mset)
        proj_dev = max(
            proj_dev,
            float(np.max(np.abs(p @ p - p))),
            float(np.max(np.abs(q @ q - q))),
            float(np.max(np.abs(p @ q))),
            float(np.max(np.abs(p + q - np.eye(4)))),
            float(np.max(np.abs(p - p.conj().T))),
        )
        trace_dev = max(trace_dev, abs(np.trace(p).real - 2.0))
    checks.append(("symbol_square", sq_dev, 1e-13))
    checks.append(("projection_identities", proj_dev, 1e-13))
    checks.append(("projection_trace_two", trace_dev, 1e-13))

    inv_dev = 0.0
    form_dev = 0.0
    diff_dev = 0.0
    for _ in range(100):
        xi = rng.uniform(-4, 4, size=3)
        z = complex(rng.uniform(-8, 8), rng.uniform(0.2, 1.5))
        r = _dirac.resolvent_symbol(xi, z, mset)
        direct = np.linalg.inv(_dirac.free_symbol(xi, mset) - z * np.eye(4))
        inv_dev = max(
            inv_dev,
            float(np.linalg.norm(r - direct) / np.linalg.norm(direct)),
        )
        b = _dirac.bracket(xi)
        p, q = _dirac.eigenprojections(xi, mset)
        proj_form = -q / (b + z) + p / (b - z)
        form_dev = max(
            form_dev,
            float(np.linalg.norm(r - proj_form) / np.linalg.norm(r)),
        )
        z2 = complex(rng.uniform(-8, 8), rng.uniform(0.2, 1.5))
        r2 = _dirac.resolvent_symbol(xi, z2, mset)
        lhs = r - r2
        rhs = (z - z2) * (r @ r2)
        ref = max(np.linalg.norm(lhs), 1e-300)
        diff_dev = max(diff_dev, float(np.linalg.norm(lhs - rhs) / ref))
    checks.append(("resolvent_vs_direct_inverse", inv_dev, 1e-12))
    checks.append(("resolvent_projection_form", form_dev, 1e-12))
    checks.append(("resolvent_difference_identity", diff_dev, 1e-12))

    ok = True
    lines = []
    for name, residual, tol in checks:
        status = "PASS" if residual <= tol else "FAIL"
        ok = ok and residual <= tol
        lines.append(f"{name:32s} residual={residual:.3e} tol={tol:.0e} {status}")
    return lines, ok


def cmd_verify_algebra(args):
    lines, ok = _verify_algebra_report(seed=args.seed, corrupt=args.corrupt)
    for line in lines:
        print(line)
    return 0 if ok else EXIT_CHECK_FAILED


# --- counterexample ----------------------------------------------------------


def cmd_counterexample(args):
    rows = []
    for n in args.n_list:
        val = _ce.boundary_quadratic_form(n, args.sign)
        err = abs(val - args.sign * 1j * _ce.LIMIT_MAGNITUDE)
        rows.append((str(n), val.real, val.imag, err))
    limit = args.sign * _ce.LIMIT_MAGNITUDE
    rows.append(("limit", 0.0, limit, 0.0))
    lines = ["n,re_qform,im_qform,abs_err_vs_limit"]
    for tag, re, im, err in rows:
        lines.append(f"{tag},{_fmt(re)},{_fmt(im)},{_fmt(err)}")
    _emit(lines, args.out)
    return 0


def _emit(lines, out):
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- sweep -------------------------------------------------------------------


def cmd_sweep(args):
    g = _make_grid(args)
    if args.kind in ("dirac", "schrodinger"):
        family = _res.band_limited_family(
            g, args.band_k, args.count, seed=args.seed,
            components=4 if args.kind == "dirac" else 0,
        )
        result = _res.lambda_sweep(
            args.kind, args.s, args.lambda_list, args.mu[0], family, g,
            iterations=args.iterations, seed=args.seed,
        )
        if args.out:
            result.to_csv(args.out)
        proxies = [p for _, p in result.proxies()]
        lams = [l for l, _ in result.proxies()]
        footer = []
        if args.kind == "schrodinger":
            slope = float(
                np.polyfit(np.log(lams), np.log(proxies), 1)[0]
            )
            footer.append(f"# proxy_loglog_slope={_fmt(slope)}")
        else:
            ratio = max(proxies) / min(proxies)
            footer.append(f"# proxy_max_min_ratio={_fmt(ratio)}")
        _append_footer(args.out, footer)
        return 0
    if args.kind == "perturbed":
        if args.potential is None:
            raise DomainError("perturbed sweep needs --potential")
        family = _res.band_limited_family(
            g, args.band_k, 1, seed=args.seed, components=4
        )
        _, f = family[0]
        result = _pert.perturbed_boundary_sweep(
            f, args.potential, args.t, args.lambda_list, args.mu, args.s,
            sign=args.sign, tol=args.tol,
        )
        if args.out:
            result.to_csv(args.out)
        else:
            for row in result.rows:
                print(row)
        return 0
    raise DomainError(f"unknown sweep kind {args.kind!r}")


def _append_footer(out, lines):
    if not lines:
        return
    if out:
        with open(out, "a") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        for line in lines:
            print(line)


# --- apply -------------------------------------------------------------------


def cmd_apply(args):
    f = _grid.load_dump(args.infile)
    if args.op == "operator":
        if args.z is None:
            raise DomainError("--op operator requires --z")
        out = _res.apply_dirac_operator(f, shift=args.z)
    elif args.z is not None:
        out = _res.apply_free_dirac(f, args.z)
    else:
        if args.lam is None:
            raise DomainError("apply needs --z or --lambda")
        if args.band_k is None:
            raise BandLimitViolated(
                "boundary application requires a declared --band-k"
            )
        out = _res.apply_boundary_dirac(
            f, args.lam, args.sign, args.band_k
        )
    _grid.save_dump(out, args.out)
    return 0


# --- neumann -----------------------------------------------------------------


def cmd_neumann(args):
    f = _grid.load_dump(args.infile)
    if args.potential is None:
        raise DomainError("neumann requires --potential")
    result, terms = _pert.neumann_apply(
        f, args.potential, args.t, args.z, tol=args.tol, s=args.s
    )
    _grid.save_dump(result, args.out)
    print(f"terms_used={terms}")
    return 0


# --- norm-estimate -----------------------------------------------------------


def cmd_norm_estimate(args):
    g = _make_grid(args)
    z = complex(args.lam, args.mu[0])
    if args.kind == "dirac":
        def op(v):
            return _res.apply_free_dirac_values(v, g, z)

        def op_adj(v):
            return _res.apply_free_dirac_values(v, g, np.conj(z))

        comps = 4
    elif args.kind == "schrodinger":
        def op(v):
            return _res.apply_free_schrodinger(v, g, z)

        def op_adj(v):
            return _res.apply_free_schrodinger(v, g, np.conj(z))

        comps = 0
    else:
        raise DomainError(f"unknown kind {args.kind!r}")
    val = _res.operator_norm_proxy(
        op, op_adj, g, args.s, components=comps,
        iterations=args.iterations, seed=args.seed,
    )
    print(_fmt(val))
    return 0


# --- parser ------------------------------------------------------------------


def _add_grid_flags(p):
    p.add_argument("--grid-n", type=int, default=64,
                   help="nodes per axis (default 64)")
    p.add_argument("--box-l", type=float, default=12.0,
                   help="box half-length (default 12)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="diraclab",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", help="key=value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-algebra", help="exact-identity residual report")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corrupt", action="store_true",
                   help="inject a broken mass matrix (validation control)")
    p.set_defaults(func=cmd_verify_algebra)

    p = sub.add_parser("counterexample", help="quadratic-form limit table")
    p.add_argument("--n-list", type=_parse_ints, default=[10, 100, 1000],
                   help="comma-separated indices (default 10,100,1000)")
    p.add_argument("--sign", type=_parse_sign, default=+1)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("sweep", help="spectral-parameter sweeps")
    p.add_argument("--kind", choices=["dirac", "schrodinger", "perturbed"],
                   required=True)
    p.add_argument("--lambda", dest="lambda_list", type=_parse_floats,
                   default=[4, 8, 16, 32, 64],
                   help="sweep points (default 4,8,16,32,64)")
    p.add_argument("--mu", type=_parse_floats, default=[0.5],
                   help="imaginary offsets; free sweeps use the first "
                        "(default 0.5)")
    p.add_argument("--s", type=float, default=1.0,
                   help="weight exponent (default 1)")
    p.add_argument("--band-k", type=float, default=2.0,
                   help="band bound of the test family (default 2)")
    p.add_argument("--count", type=int, default=3,
                   help="test-family size (default 3)")
    p.add_argument("--t", type=float, default=0.0,
                   help="coupling for perturbed sweeps (default 0)")
    p.add_argument("--potential", type=_parse_potential,
                   help="preset kind:epsilon:amplitude, e.g. scalar:1:1")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="series truncation tolerance (default 1e-8)")
    p.add_argument("--sign", type=_parse_sign, default=+1)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("apply", help="apply a resolvent to a field dump")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--z", type=_parse_complex,
                   help="interior point, e.g. 8+0.5j")
    p.add_argument("--lambda", dest="lam", type=float,
                   help="boundary point (needs --band-k)")
    p.add_argument("--sign", type=_parse_sign, default=+1)
    p.add_argument("--band-k", type=float,
                   help="declared band bound of the input")
    p.add_argument("--op", choices=["resolvent", "operator"],
                   default="resolvent",
                   help="apply the resolvent or the shifted operator itself")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("neumann", help="perturbed resolvent via the series")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--z", type=_parse_complex, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--potential", type=_parse_potential, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--s", type=float, default=0.9)
    p.set_defaults(func=cmd_neumann)

    p = sub.add_parser("norm-estimate", help="weighted operator-norm proxy")
    p.add_argument("--kind", choices=["dirac", "schrodinger"], required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--mu", type=_parse_floats, default=[0.5])
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_norm_estimate)

    return parser


def _apply_config(parser, argv):
    """Use config-file values as defaults for the chosen subcommand."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    cfg = load_config(argv[idx + 1])
    # re-serialize config entries as leading flags so explicit flags win
    head = argv[: idx + 2]
    tail = argv[idx + 2 :]
    if not tail:
        return argv
    command, rest = tail[0], tail[1:]
    injected = []
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        injected.extend([flag, value])
    return head + [command] + injected + rest


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse errors and --help
        return int(exc.code or 0)
    except (OSError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args)
    except BandLimitViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAND_LIMIT
    except OnSpectrum as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ON_SPECTRUM
    except SpectralOverlap as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERLAP
    except (DomainError, DiraclabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
