"""``kuramoto-eq`` command-line interface.

Exit codes: 0 success, 1 validation failure (rejected certificate, failed
design gate), 2 usage or input error.  Every command that writes files
also writes a manifest recording argv, parameters, version and file hashes; set
``KURAMOTO_EQ_OUTDIR`` to change where default output names land.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .dynamics import AmplitudeError, IntegrationError, integrate_km, propagate_analytical
from .equilibria import (
    DesignError,
    design_random_equilibrium,
    equilibria_from_eigenvectors,
    multilayer_equilibrium,
    twisted_state,
    verify_equilibrium,
)
from .files import (
    FormatError,
    atomic_write_text,
    dumps,
    long_form_csv,
    read_json,
    read_matrix,
    read_phases,
    trajectory_csv,
    write_json,
    write_manifest,
    write_matrix,
    write_phases,
)
from .graphs import (
    GroupSpec,
    build_circulant,
    build_complete,
    build_erdos_renyi,
    build_g_circulant,
    build_join,
    build_ring,
)
from .reproduce import TARGETS, run_target
from .spectral import ExpmOverflowError, SpectralError, circulant_spectrum, eig

log = logging.getLogger("kuramoto_eq")

ENV_OUTDIR = "KURAMOTO_EQ_OUTDIR"


class UsageError(Exception):
    pass


def _default_out(name: str) -> Path:
    return Path(os.environ.get(ENV_OUTDIR, ".")) / name


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _manifest_for(out: Path) -> Path:
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


# ---------------------------------------------------------------- build


def _build_matrix(args):
    kind = args.kind
    if kind == "ring":
        return build_ring(args.n, args.k)
    if kind == "complete":
        return build_complete(args.n)
    if kind == "circulant":
        if args.row is None:
            raise UsageError("--row is required for --kind circulant")
        row = _floats(args.row)
        return build_circulant(len(row), row, allow_self_loops=args.allow_self_loops)
    if kind == "join":
        if args.C:
            C = read_matrix(args.C)
            D = read_matrix(args.D) if args.D else C
        else:
            C = D = build_ring(args.n, args.k)
        return build_join(C, D, args.alpha, args.beta)
    if kind == "gcirc":
        if args.group is None or args.coeffs is None:
            raise UsageError("--group and --coeffs are required for --kind gcirc")
        group = GroupSpec.parse(args.group)
        vals = _floats(args.coeffs)
        if len(vals) != group.order:
            raise UsageError(f"--coeffs needs {group.order} values (one per group element), got {len(vals)}")
        return build_g_circulant(group, dict(zip(group.elements(), vals)), allow_self_loops=args.allow_self_loops)
    if kind == "er":
        return build_erdos_renyi(args.n, args.p, args.seed)
    raise UsageError(f"unknown kind {kind}")


def cmd_build(args, argv) -> int:
    A = _build_matrix(args)
    out = Path(args.output or _default_out("matrix.csv"))
    csv_path, side = write_matrix(out, A)
    write_manifest(_manifest_for(out), "build", argv, vars_for(args), outputs=[csv_path, side])
    print(f"wrote {csv_path} ({A.n} nodes, generator={A.generator})")
    return 0


# ---------------------------------------------------------------- spectrum


def cmd_spectrum(args, argv) -> int:
    A = read_matrix(args.matrix)
    method = args.method
    if method == "auto":
        method = "circulant" if A.flags.circulant else "dense"
    if method == "circulant":
        if not A.flags.circulant:
            raise UsageError("matrix is not circulant")
        pairs = circulant_spectrum(A.entries[:, 0])
        for p in pairs:
            object.__setattr__(p, "residual", float(np.linalg.norm(A.entries @ p.vector - p.value * p.vector)))
    else:
        pairs = eig(A)
    out = Path(args.output or _default_out("spectrum.json"))
    payload = {
        "n": A.n,
        "method": method,
        "values": [[p.value.real, p.value.imag] for p in pairs],
        "is_real": [p.is_real_value for p in pairs],
        "residuals": [p.residual for p in pairs],
    }
    write_json(out, payload)
    outputs = [out]
    if args.vectors:
        header = ",".join(f"re_{k},im_{k}" for k in range(len(pairs)))
        lines = [header]
        for i in range(A.n):
            lines.append(",".join(f"{p.vector[i].real!r},{p.vector[i].imag!r}" for p in pairs))
        atomic_write_text(args.vectors, "\n".join(lines) + "\n")
        outputs.append(Path(args.vectors))
    write_manifest(_manifest_for(out), "spectrum", argv, vars_for(args), inputs=[args.matrix], outputs=outputs)
    print(f"wrote {out} ({len(pairs)} eigenpairs, method={method})")
    return 0


# ---------------------------------------------------------------- equilibria / verify


def cmd_equilibria(args, argv) -> int:
    A = read_matrix(args.matrix)
    lag = args.phase_lag
    phase_lag = "auto" if lag == "auto" else float(lag)
    certs = equilibria_from_eigenvectors(A, tol_modulus=args.tol_modulus, epsilon=args.epsilon, phase_lag=phase_lag)
    out = Path(args.output or _default_out("certs.json"))
    write_json(out, [c.to_dict() for c in certs])
    write_manifest(_manifest_for(out), "equilibria", argv, vars_for(args), inputs=[args.matrix], outputs=[out])
    print(f"wrote {out} ({len(certs)} certified equilibria)")
    return 0


def _phase_lag_arg(text: str, n: int):
    if Path(text).is_file():
        lag = read_phases(text)
        if lag.shape != (n,):
            raise UsageError(f"per-node lag file has {lag.size} values, matrix has {n} nodes")
        return lag
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"--phi must be a number or a file of per-node lags, got {text!r}") from None


def cmd_verify(args, argv) -> int:
    A = read_matrix(args.matrix)
    theta = read_phases(args.theta)
    if theta.shape != (A.n,):
        raise UsageError(f"theta has {theta.size} phases, matrix has {A.n} nodes")
    phi = _phase_lag_arg(args.phi, A.n)
    cert = verify_equilibrium(A, theta, args.epsilon, phi, tol=args.tol)
    status = "ACCEPTED" if cert.accepted else "REJECTED"
    print(f"{status}: residual {cert.residual:.6e} (tolerance {cert.tolerance:.3e})")
    if cert.lam is not None:
        print(f"matched eigenvalue {cert.lam.real:.12g}{cert.lam.imag:+.12g}j")
    if args.output:
        out = Path(args.output)
        write_json(out, cert.to_dict())
        write_manifest(_manifest_for(out), "verify", argv, vars_for(args), inputs=[args.matrix, args.theta], outputs=[out])
    return 0 if cert.accepted else 1


# ---------------------------------------------------------------- simulate


def _theta0(spec: str, n: int) -> np.ndarray:
    """Initial phases from a file or a builder spec.

    Specs: ``twisted:J``, ``multilayer:J[:OFFSET]`` (two equal layers),
    ``zeros``, ``uniform:SEED``.
    """
    if Path(spec).is_file():
        theta = read_phases(spec)
    else:
        head, _, rest = spec.partition(":")
        parts = [p for p in rest.split(":") if p]
        try:
            if head == "twisted":
                theta = twisted_state(n, int(parts[0]))
            elif head == "multilayer":
                if n % 2:
                    raise UsageError("multilayer initial state needs an even node count")
                off = float(parts[1]) if len(parts) > 1 else 0.0
                theta = multilayer_equilibrium(n // 2, int(parts[0]), off)
            elif head == "zeros":
                theta = np.zeros(n)
            elif head == "uniform":
                rng = np.random.Generator(np.random.PCG64(int(parts[0]) if parts else 0))
                theta = rng.uniform(-math.pi, math.pi, n)
            else:
                raise UsageError(f"--theta0 {spec!r} is neither a file nor a known builder spec")
        except (IndexError, ValueError) as exc:
            raise UsageError(f"bad --theta0 spec {spec!r}: {exc}") from None
    if theta.shape != (n,):
        raise UsageError(f"theta0 has {theta.size} phases, matrix has {n} nodes")
    return theta


def _simulate_one(A, theta0, args, epsilon: float) -> dict:
    runs = {}
    if args.model in ("original", "both"):
        phi = _phase_lag_arg(args.phi, A.n)
        runs["original"] = integrate_km(A, theta0, epsilon, phi, dt=args.dt, T=args.T, method=args.method, stride=args.stride)
    if args.model in ("analytical", "both"):
        m = max(1, int(round(args.T / args.stride)))
        times = np.linspace(0.0, args.T, m + 1)
        runs["analytical"] = propagate_analytical(A, theta0, epsilon, float(args.phi), times=times, window=args.window)
    return runs


def _traj_path(out: Path, model: str, both: bool, eps_tag: str | None) -> Path:
    stem = out.stem
    if eps_tag is not None:
        stem += f".eps{eps_tag}"
    if both:
        stem += f".{model}"
    return out.with_name(stem + out.suffix)


def cmd_simulate(args, argv) -> int:
    A = read_matrix(args.matrix)
    theta0 = _theta0(args.theta0, A.n)
    out = Path(args.output or _default_out("traj.csv"))
    sweep = _floats(args.sweep_epsilon) if args.sweep_epsilon else None
    eps_list = sweep or [args.epsilon]
    if args.workers > 1 and len(eps_list) > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(lambda e: _simulate_one(A, theta0, args, e), eps_list))
    else:
        results = [_simulate_one(A, theta0, args, e) for e in eps_list]
    outputs = []
    both = args.model == "both"
    for eps, runs in zip(eps_list, results):
        tag = repr(eps) if sweep else None
        for model, tr in runs.items():
            path = _traj_path(out, model, both, tag)
            atomic_write_text(path, trajectory_csv(tr, omega=args.omega, with_order_parameter=args.emit_order_parameter))
            outputs.append(path)
            print(f"wrote {path} ({len(tr.times)} samples, max drift {tr.drift():.3e})")
        if args.long_form:
            lf = Path(args.long_form)
            if tag is not None:
                lf = lf.with_name(f"{lf.stem}.eps{tag}{lf.suffix}")
            atomic_write_text(lf, long_form_csv(runs, omega=args.omega))
            outputs.append(lf)
    inputs = [args.matrix] + ([args.theta0] if Path(args.theta0).is_file() else [])
    write_manifest(_manifest_for(out), "simulate", argv, vars_for(args), inputs=inputs, outputs=outputs)
    return 0


# ---------------------------------------------------------------- design / reproduce


def _scale_policy(text: str):
    if text == "keep":
        return "keep"
    kind, _, val = text.partition(":")
    if kind != "multiply" or not val:
        raise UsageError(f"--scale must be 'keep' or 'multiply:S', got {text!r}")
    return ("multiply", float(val))


def cmd_design(args, argv) -> int:
    if args.matrix:
        A = read_matrix(args.matrix)
    else:
        A = build_erdos_renyi(args.er_n, args.er_p, args.seed)
    outdir = Path(args.output or _default_out("designed"))
    outdir.mkdir(parents=True, exist_ok=True)
    result = design_random_equilibrium(A, args.j, _scale_policy(args.scale), repair=args.repair, epsilon=args.epsilon)
    outputs = [*write_matrix(outdir / "original.csv", A), *write_matrix(outdir / "designed.csv", result.matrix)]
    outputs.append(write_phases(outdir / "theta0.csv", result.theta0))
    outputs.append(write_json(outdir / "certificate.json", result.certificate.to_dict()))
    write_manifest(outdir / "manifest.json", "design", argv, vars_for(args), inputs=[args.matrix] if args.matrix else [], outputs=outputs)
    print(
        f"designed twisted state j={args.j}: eigenvector residual {result.eigen_residual:.3e}, "
        f"sine-sum residual {result.certificate.residual:.3e}; wrote {outdir}"
    )
    return 0


def cmd_reproduce(args, argv) -> int:
    outdir = Path(args.output or _default_out(args.target))
    summary = run_target(args.target, outdir, T=args.T, dt=args.dt, stride=args.stride, seed=args.seed)
    outputs = sorted(p for p in outdir.iterdir() if p.is_file() and p.name != "manifest.json")
    write_manifest(outdir / "manifest.json", "reproduce", argv, vars_for(args), outputs=outputs)
    print(dumps({k: v for k, v in summary.items() if k != "params"}), end="")
    return 0 if summary.get("ok", True) else 1


def cmd_rerun(args, argv) -> int:
    manifest = read_json(args.manifest)
    if "argv" not in manifest:
        raise UsageError(f"{args.manifest} has no argv record")
    return run(manifest["argv"])


# ---------------------------------------------------------------- parser


def vars_for(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kuramoto-eq", description="Equilibria of Kuramoto oscillator networks")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a network and write matrix CSV + JSON sidecar")
    b.add_argument("--kind", required=True, choices=["ring", "complete", "circulant", "join", "gcirc", "er"])
    b.add_argument("--n", type=int, help="node count (ring/complete/er; layer size for join)")
    b.add_argument("--k", type=int, help="neighbours per side (ring; join layers)")
    b.add_argument("--row", help="circulant first row, comma-separated")
    b.add_argument("--allow-self-loops", action="store_true")
    b.add_argument("--C", help="join: first layer matrix CSV")
    b.add_argument("--D", help="join: second layer matrix CSV (default: same as --C)")
    b.add_argument("--alpha", type=float, default=0.0)
    b.add_argument("--beta", type=float, default=0.0)
    b.add_argument("--group", help="gcirc: factors like 2x4")
    b.add_argument("--coeffs", help="gcirc: one weight per element in lexicographic order")
    b.add_argument("--p", type=float, help="er: edge probability")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("spectrum", help="eigenvalues, realness flags and residuals")
    s.add_argument("matrix")
    s.add_argument("--method", choices=["auto", "dense", "circulant"], default="auto")
    s.add_argument("--vectors", help="also write eigenvectors (re/im column pairs) to this CSV")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_spectrum)

    e = sub.add_parser("equilibria", help="certify equilibria read off unimodular eigenvectors")
    e.add_argument("matrix")
    e.add_argument("--phase-lag", default="auto", help="'auto' or a fixed lag in radians")
    e.add_argument("--epsilon", type=float, default=1.0)
    e.add_argument("--tol-modulus", type=float, default=1e-8)
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_equilibria)

    v = sub.add_parser("verify", help="certify a phase vector; exit 1 if rejected")
    v.add_argument("matrix")
    v.add_argument("theta")
    v.add_argument("--phi", default="0", help="phase lag in radians, or a file of per-node lags")
    v.add_argument("--epsilon", type=float, default=1.0)
    v.add_argument("--tol", type=float, help="override the default tolerance")
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("simulate", help="integrate the nonlinear and/or complex model")
    m.add_argument("matrix")
    m.add_argument("--theta0", required=True, help="phase file or twisted:J | multilayer:J[:OFF] | zeros | uniform:SEED")
    m.add_argument("--model", choices=["original", "analytical", "both"], default="original")
    m.add_argument("--epsilon", type=float, default=1.0)
    m.add_argument("--phi", default="0")
    m.add_argument("--dt", type=float, default=1e-4)
    m.add_argument("-T", type=float, default=1.0)
    m.add_argument("--stride", type=float, default=1e-2)
    m.add_argument("--window", type=float, default=0.1)
    m.add_argument("--method", choices=["euler", "rk4"], default="euler")
    m.add_argument("--omega", type=float, default=0.0, help="display-only common frequency")
    m.add_argument("--emit-order-parameter", action="store_true")
    m.add_argument("--long-form", help="also write long-form (model,t,node,phase) CSV")
    m.add_argument("--sweep-epsilon", help="comma-separated couplings; one output per value")
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_simulate)

    d = sub.add_parser("design", help="implant a twisted state into a random network")
    d.add_argument("--matrix", help="symmetric matrix CSV (default: generate Erdos-Renyi)")
    d.add_argument("--er-n", type=int, default=100)
    d.add_argument("--er-p", type=float, default=0.25)
    d.add_argument("--seed", type=int, default=1)
    d.add_argument("-j", type=int, default=1)
    d.add_argument("--scale", default="keep", help="'keep' or 'multiply:S'")
    d.add_argument("--repair", choices=["polar", "none"], default="polar")
    d.add_argument("--epsilon", type=float, default=1.0)
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_design)

    r = sub.add_parser("reproduce", help="regenerate the data behind a figure")
    r.add_argument("target", choices=sorted(TARGETS))
    r.add_argument("-T", type=float, help="override simulated time")
    r.add_argument("--dt", type=float)
    r.add_argument("--stride", type=float)
    r.add_argument("--seed", type=int, help="fig4 graph seed")
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_reproduce)

    rr = sub.add_parser("rerun", help="replay the argv recorded in a manifest")
    rr.add_argument("manifest")
    rr.set_defaults(func=cmd_rerun)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args, argv)
    except (DesignError, IntegrationError, AmplitudeError, ExpmOverflowError, SpectralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UsageError, FormatError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
