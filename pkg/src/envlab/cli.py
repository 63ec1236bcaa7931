"""``envlab`` command line.

Exit status: 0 on success, 2 for invalid input, 3 when an internal
numerical guarantee fails (e.g. the fine-graining swap check, or a
``selftest`` criterion).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .envariance import (
    SwapSpec,
    is_envariant,
    envariance_residual,
    optimal_counter,
    phase_rotation_pair,
    swap_detectability,
    swap_pair,
)
from .errors import NumericalContractError, ValidationError
from .finegrain import DEFAULT_TOL, born_from_probability
from .frequency import ensemble_counts, rows_to_csv, table_rows
from .hilbert import LocalUnitary, PureState, load_state, schmidt, split_cut

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONTRACT = 3

INLINE_HELP = """\
State input: either --state FILE (JSON: {"labels": [...], "dims": [...],
"amplitudes": [[re, im], ...]}, row-major with the first label slowest) or
--amps with comma-separated complex tokens such as "1,0,0,1" or
"0.5+0.5j,-1j" together with --dims (e.g. 2,2). Inline amplitudes are
normalized; file amplitudes must already be normalized.
"""


def _complex_token(tok: str) -> complex:
    try:
        return complex(tok.strip().replace(" ", ""))
    except ValueError:
        raise ValidationError(f"--amps: cannot parse {tok!r} as a complex number") from None


def _int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def _float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _default_labels(n: int) -> list[str]:
    return {1: ["S"], 2: ["S", "E"], 3: ["S", "C", "E"]}.get(n, [f"A{k}" for k in range(n)])


def _read_state(args) -> PureState:
    if args.state and args.amps:
        raise ValidationError("give either --state or --amps, not both")
    if args.state:
        return load_state(args.state)
    if not args.amps:
        raise ValidationError("a state is required: pass --state FILE or --amps ... --dims ...")
    if not args.dims:
        raise ValidationError("--amps needs --dims")
    dims = _int_list(args.dims, "--dims")
    labels = args.labels.split(",") if args.labels else _default_labels(len(dims))
    amps = [_complex_token(t) for t in args.amps.split(",")]
    return PureState.from_amplitudes(amps, dims, labels)


def _cut(args, state: PureState):
    system = args.cut.split(",") if args.cut else [state.labels[0]]
    return split_cut(state, system)


def _swap_spec(args) -> SwapSpec:
    ij = _int_list(args.swap, "--swap")
    if len(ij) != 2:
        raise ValidationError(f"--swap takes two indices i,j, got {args.swap!r}")
    return SwapSpec(ij[0], ij[1], args.phase)


def _complex_matrix(raw, what: str) -> np.ndarray:
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{what}: field 'matrix' must be rows of [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValidationError(f"{what}: field 'matrix' must be rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _read_unitary(path: str) -> LocalUnitary:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"unitary file {path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict) or "target" not in data or "matrix" not in data:
        raise ValidationError(f"unitary file {path}: needs fields 'target' and 'matrix'")
    return LocalUnitary(data["target"], _complex_matrix(data["matrix"], f"unitary file {path}"))


def _c(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _vectors(mat: np.ndarray, count: int) -> list:
    return [[_c(z) for z in mat[:, k]] for k in range(count)]


def _matrix(mat: np.ndarray) -> list:
    return [[_c(z) for z in row] for row in mat]


def _system_pair(args, state: PureState):
    """u_S (and its paired u_E, when the chosen transformation defines one) from the flags."""
    system, env = _cut(args, state)
    chosen = [bool(args.swap), args.rotate is not None, bool(args.us), args.identity]
    if sum(chosen) > 1:
        raise ValidationError("choose one of --swap, --rotate, --us, --identity")
    if args.us:
        u_s = _read_unitary(args.us)
        u_e = _read_unitary(args.ue) if args.ue else None
        return u_s, u_e, "explicit"
    if args.ue:
        raise ValidationError("--ue needs --us")
    sd = schmidt(state, (system, env))
    if args.swap:
        u_s, u_e = swap_pair(sd, _swap_spec(args))
        return u_s, u_e, "swap"
    if args.rotate is not None:
        u_s, u_e = phase_rotation_pair(sd, _float_list(args.rotate, "--rotate"))
        return u_s, u_e, "rotate"
    return (LocalUnitary.identity(system, sd.system_dim),
            LocalUnitary.identity(env, sd.env_dim), "identity")


def cmd_schmidt(args) -> dict:
    state = _read_state(args)
    sd = schmidt(state, _cut(args, state))
    r = sd.rank
    return {
        "cut": {"system": list(sd.system_labels), "environment": list(sd.env_labels)},
        "rank": r,
        "moduli": [float(x) for x in sd.moduli[:r]],
        "phases": [float(x) for x in sd.phases[:r]],
        "system_basis": _vectors(sd.system_basis, r),
        "env_basis": _vectors(sd.env_basis, r),
    }


def cmd_envariance(args) -> dict:
    state = _read_state(args)
    u_s, u_e, kind = _system_pair(args, state)
    best = optimal_counter(state, u_s)
    report = {"transformation": kind}
    if u_e is not None:
        res = envariance_residual(state, u_s, u_e)
        report["envariant"] = is_envariant(state, u_s, u_e, args.tol)
        report["residual"] = res
    else:
        # decide on the counter's actual residual: sqrt(2 - 2*certificate)
        # turns 1e-16 of rounding in the certificate into ~1e-8
        res = envariance_residual(state, u_s, best.counter)
        report["envariant"] = res <= args.tol
        report["residual"] = res
    report["certificate"] = best.certificate
    report["optimal_residual"] = best.residual
    report["tol"] = args.tol
    return report


def cmd_counter(args) -> dict:
    state = _read_state(args)
    u_s, _, kind = _system_pair(args, state)
    best = optimal_counter(state, u_s)
    achieved = envariance_residual(state, u_s, best.counter)
    return {
        "transformation": kind,
        "certificate": best.certificate,
        "residual": best.residual,
        "achieved_residual": achieved,
        "envariant": achieved <= args.tol,
        "counter": {"target": list(best.counter.target), "matrix": _matrix(best.counter.matrix)},
    }


def cmd_born(args) -> dict:
    if args.alpha2 is None:
        raise ValidationError("born needs --alpha2")
    phases = _float_list(args.phase_pair, "--phases") if args.phase_pair else [0.0, 0.0]
    result = born_from_probability(args.alpha2, args.M, args.tol_born, phases)
    out = result.to_dict()
    out["verification"] = result.verification
    return out


def cmd_ensemble(args):
    for flag in ("N", "m", "M"):
        if getattr(args, flag) is None:
            raise ValidationError(f"ensemble needs --{flag}")
    rows = table_rows(args.N, args.m, args.M)
    total = ensemble_counts(args.N, args.m, args.M).total
    if args.format == "csv":
        return rows_to_csv(rows, total)
    return {
        "N": args.N, "m": args.m, "M": args.M,
        "rows": [{"n": n, "count": c, "probability": p, "gaussian": g} for n, c, p, g in rows],
        "total": total,
    }


def cmd_distinguish(args) -> dict:
    state = _read_state(args)
    if not args.swap:
        raise ValidationError("distinguish needs --swap i,j")
    spec = _swap_spec(args)
    det = swap_detectability(state, spec)
    return {
        "swap": [spec.i, spec.j],
        "phase": spec.phase,
        "overlap": _c(det.overlap),
        "abs_overlap": abs(det.overlap),
        "distinguish_prob": det.distinguish_prob,
        "detectable": abs(det.overlap) < 1.0 - 1e-12,
    }


def cmd_selftest(args) -> dict:
    from .selftest import run_selftest

    return run_selftest(args.seed)


COMMANDS = {
    "schmidt": cmd_schmidt,
    "envariance": cmd_envariance,
    "counter": cmd_counter,
    "born": cmd_born,
    "ensemble": cmd_ensemble,
    "distinguish": cmd_distinguish,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="envlab",
        description="Numerical checks of environment-assisted invariance.",
        epilog=INLINE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"envlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, state=True):
        if state:
            p.add_argument("--state", help="JSON state file")
            p.add_argument("--amps", help="inline amplitudes, e.g. '1,0,0,1'")
            p.add_argument("--dims", help="inline dims, e.g. '2,2'")
            p.add_argument("--labels", help="inline labels (default S,E / S / S,C,E)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write the report here instead of stdout")

    def transform(p):
        p.add_argument("--cut", help="system labels, comma-separated (default: first label)")
        p.add_argument("--swap", help="Schmidt branches i,j to swap")
        p.add_argument("--phase", type=float, default=0.0, help="swap phase")
        p.add_argument("--rotate", help="Schmidt phase rotation, one phase per branch")
        p.add_argument("--identity", action="store_true", help="identity pair")
        p.add_argument("--us", help="JSON file with an explicit u_S {target, matrix}")
        p.add_argument("--ue", help="JSON file with an explicit u_E {target, matrix}")
        p.add_argument("--tol", type=float, default=1e-8, help="envariance tolerance")

    p = sub.add_parser("schmidt", help="Schmidt decomposition across a cut",
                       epilog=INLINE_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.add_argument("--cut", help="system labels, comma-separated (default: first label)")

    p = sub.add_parser("envariance", help="test a u_S / u_E pair and the optimal counter",
                       epilog=INLINE_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    transform(p)

    p = sub.add_parser("counter", help="optimal environment counter-transformation",
                       epilog=INLINE_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    transform(p)

    p = sub.add_parser("born", help="Born-rule probabilities by fine-graining")
    common(p, state=False)
    p.add_argument("--alpha2", type=float, help="|alpha|^2")
    p.add_argument("--M", type=int, help="fine-graining denominator (default: smallest within --tol)")
    p.add_argument("--tol", dest="tol_born", type=float, default=DEFAULT_TOL,
                   help="approximation tolerance used to pick M")
    p.add_argument("--phases", dest="phase_pair", help="phases of alpha and beta, e.g. 0,1.2")

    p = sub.add_parser("ensemble", help="branch counts over N triplets (CSV by default)")
    common(p, state=False)
    p.set_defaults(format="csv")
    p.add_argument("--N", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--M", type=int)

    p = sub.add_parser("distinguish", help="detectability of a swap on an unentangled state",
                       epilog=INLINE_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.add_argument("--swap", help="basis indices i,j (0-based)")
    p.add_argument("--phase", type=float, default=0.0, help="swap phase")

    p = sub.add_parser("selftest", help="seeded battery of all checks")
    common(p, state=False)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _render(report, fmt: str) -> str:
    if isinstance(report, str):
        return report
    if fmt == "csv":
        raise ValidationError("this command only produces JSON")
    return json.dumps(report, indent=2) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
        text = _render(report, args.format)
    except ValidationError as exc:
        print(f"envlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"envlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalContractError as exc:
        print(f"envlab {args.command}: numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.command == "selftest" and not report["passed"]:
        return EXIT_CONTRACT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
