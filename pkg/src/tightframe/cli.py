"""Command-line interface.

Exit codes: 0 success / certified, 1 usage or parse error, 2 I/O error,
3 mathematical non-certification. With ``--output PATH`` the vectors go
to ``PATH`` and the JSON report to ``PATH.json``.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .decomposition import Ellipsoid, decompose_unit_norm, equal_norm_orthogonal, rho_target
from .formats import FormatError, atomic_write, format_report, format_rows, read_frame, read_matrix
from .frames import DEFAULT_CERT_TOL, certify, frame_potential, potential_lower_bound
from .linalg import NumericalError, hs_norm
from .minimizer import MinimizerConfig, generate_frame, minimize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_UNCERTIFIED = 3

GENERATE_RESTARTS = 10
ELLIPSOID_TOL = 1e-9


class UsageError(Exception):
    pass


def _real(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _certificate(cert):
    return {
        "potential": _real(cert.potential),
        "lower_bound": _real(cert.lower_bound),
        "lambda": _real(cert.lambda_estimate),
        "deviation": _real(cert.frame_operator_deviation),
        "max_offdiag": _real(cert.max_offdiag),
        "is_tight": cert.is_tight,
        "is_orthonormal_set": cert.is_orthonormal_set,
        "tol": cert.tol,
    }


def _minimizer_stats(report, with_trajectory):
    out = {
        "iterations": report.iterations,
        "saddle_escapes": report.saddle_escapes,
        "converged": report.converged,
        "initial_potential": _real(report.initial_potential),
        "final_potential": _real(report.final_potential),
        "gap": _real(report.gap),
    }
    if with_trajectory and report.trajectory is not None:
        out["trajectory"] = {
            "iteration": [t[0] for t in report.trajectory],
            "potential": [_real(t[1]) for t in report.trajectory],
            "grad_norm": [_real(t[2]) for t in report.trajectory],
        }
    return out


def _base(command, inputs, seed=None):
    return {"command": command, "inputs": inputs, "seed": seed, "version": __version__}


def _certified(cert):
    return cert.is_tight or cert.is_orthonormal_set


def cmd_generate(dim, count, seed=0, tol=DEFAULT_CERT_TOL, output=None, trajectory=False):
    if dim < 1 or count < 1:
        raise UsageError("--dim and --count must be positive")
    if not tol > 0:
        raise UsageError("--tol must be positive")
    cfg = MinimizerConfig(seed=seed, cert_tol=tol, record_trajectory=trajectory)
    run, used = generate_frame(dim, count, cfg, restarts=GENERATE_RESTARTS)
    cert = certify(run.final_system, tol)
    report = _base("generate", {"dim": dim, "count": count, "tol": tol, "output": output}, seed)
    report["seed_used"] = used
    report["certificate"] = _certificate(cert)
    report["minimizer"] = _minimizer_stats(run, trajectory)
    if output:
        atomic_write(output, format_rows(run.final_system.vectors))
    code = EXIT_OK if run.converged else EXIT_UNCERTIFIED
    return report, code


def cmd_minimize(frame, tol=DEFAULT_CERT_TOL, output=None, trajectory=False):
    start = read_frame(frame)
    cfg = MinimizerConfig(cert_tol=tol, record_trajectory=trajectory)
    run = minimize(start, cfg)
    cert = certify(run.final_system, tol)
    report = _base("minimize", {"frame": frame, "tol": tol, "output": output})
    report["certificate"] = _certificate(cert)
    report["minimizer"] = _minimizer_stats(run, trajectory)
    if output:
        atomic_write(output, format_rows(run.final_system.vectors))
    return report, EXIT_OK if run.converged else EXIT_UNCERTIFIED


def cmd_check(frame, tol=DEFAULT_CERT_TOL):
    system = read_frame(frame)
    cert = certify(system, tol)
    report = _base("check", {"frame": frame, "tol": tol, "dim": system.dim, "count": system.count})
    report["certificate"] = _certificate(cert)
    return report, EXIT_OK if _certified(cert) else EXIT_UNCERTIFIED


def cmd_potential(frame):
    system = read_frame(frame)
    report = _base("potential", {"frame": frame, "dim": system.dim, "count": system.count})
    report["potential"] = frame_potential(system)
    report["lower_bound"] = potential_lower_bound(system.dim, system.count)
    return report, EXIT_OK


def cmd_decompose(matrix, count, output=None):
    m = read_matrix(matrix)
    try:
        dec = decompose_unit_norm(m, count)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    bound = 1e-8 * (1.0 + hs_norm(m))
    report = _base("decompose", {"matrix": matrix, "count": count, "output": output})
    report["decomposition"] = {
        "residual": dec.reconstruction_residual,
        "residual_bound": bound,
        "rank": dec.rank,
        "max_norm_error": float(np.max(np.abs(np.linalg.norm(dec.vectors, axis=1) - 1.0))),
    }
    if output:
        atomic_write(output, format_rows(dec.vectors))
    return report, EXIT_OK if dec.reconstruction_residual <= bound else EXIT_UNCERTIFIED


def cmd_ellipsoid(matrix, output=None):
    m = read_matrix(matrix)
    try:
        ell = Ellipsoid(m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    z = equal_norm_orthogonal(ell)
    rho = rho_target(m)
    norms = np.linalg.norm(z, axis=1)
    g = z @ z.T
    on_shell = float(np.max(np.abs(np.einsum("ij,jk,ik->i", z, m, z) - 1.0)))
    orth = float(np.max(np.abs(g - np.diag(np.diag(g))))) if z.shape[0] > 1 else 0.0
    norm_err = float(np.max(np.abs(norms - rho)))
    report = _base("ellipsoid", {"matrix": matrix, "output": output})
    report["ellipsoid"] = {
        "rho": rho,
        "common_norm": float(np.mean(norms)),
        "max_norm_error": norm_err,
        "max_orthogonality_violation": orth,
        "max_shell_violation": on_shell,
    }
    if output:
        atomic_write(output, format_rows(z))
    ok = max(on_shell, orth, norm_err) <= ELLIPSOID_TOL
    return report, EXIT_OK if ok else EXIT_UNCERTIFIED


def _summary(report):
    lines = [f"{report['command']}:"]

    def walk(d, indent):
        for k, v in d.items():
            if k in ("command", "version", "trajectory"):
                continue
            if isinstance(v, dict):
                lines.append(f"{indent}{k}:")
                walk(v, indent + "  ")
            elif v is not None:
                lines.append(f"{indent}{k}: {v}")

    walk(report, "  ")
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="tightframe", description="Unit-norm tight frames and unit-norm PSD resolutions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, tol=True, output=True, trajectory=False):
        if tol:
            p.add_argument("--tol", type=float, default=DEFAULT_CERT_TOL, help="certification tolerance (HS norm)")
        if output:
            p.add_argument("--output", "-o", help="write the resulting vectors to this file")
        if trajectory:
            p.add_argument("--trajectory", action="store_true", help="include the descent trajectory in the report")
        p.add_argument("--json", action="store_true", help="print the JSON report instead of a summary")

    p = sub.add_parser("generate", help="minimize the frame potential from a seeded random start")
    p.add_argument("--dim", "-n", type=int, required=True)
    p.add_argument("--count", "-N", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    common(p, trajectory=True)

    p = sub.add_parser("minimize", help="resume descent from a frame file")
    p.add_argument("frame")
    common(p, trajectory=True)

    p = sub.add_parser("check", help="certify a frame file")
    p.add_argument("frame")
    common(p, output=False)

    p = sub.add_parser("potential", help="frame potential and its lower bound")
    p.add_argument("frame")
    common(p, tol=False, output=False)

    p = sub.add_parser("decompose", help="write a PSD matrix as a sum of unit rank-one terms")
    p.add_argument("matrix")
    p.add_argument("--count", "-N", type=int, required=True)
    common(p, tol=False)

    p = sub.add_parser("ellipsoid", help="equal-length orthogonal vectors on an ellipsoid")
    p.add_argument("matrix")
    common(p, tol=False)
    return parser


def run(argv=None):
    """Parse ``argv`` and run the command; returns ``(args, (report, exit_code))``."""
    args = build_parser().parse_args(argv)
    c = args.command
    if c == "generate":
        return args, cmd_generate(args.dim, args.count, args.seed, args.tol, args.output, args.trajectory)
    if c == "minimize":
        return args, cmd_minimize(args.frame, args.tol, args.output, args.trajectory)
    if c == "check":
        return args, cmd_check(args.frame, args.tol)
    if c == "potential":
        return args, cmd_potential(args.frame)
    if c == "decompose":
        return args, cmd_decompose(args.matrix, args.count, args.output)
    return args, cmd_ellipsoid(args.matrix, args.output)


def main(argv=None):
    try:
        args, (report, code) = run(argv)
    except SystemExit as exc:
        return exc.code
    except FormatError as exc:
        print(f"tightframe: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"tightframe: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"tightframe: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"tightframe: numerical failure: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    output = getattr(args, "output", None)
    if output:
        try:
            atomic_write(output + ".json", format_report(report))
        except OSError as exc:
            print(f"tightframe: I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
    sys.stdout.write(format_report(report) if args.json else _summary(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
