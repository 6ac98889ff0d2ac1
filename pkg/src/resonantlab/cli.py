"""Command-line orchestration: enumeration, simulation and analysis runs
with reproducible seeds and file artifacts.

Artifacts are CSV (comma-separated, header row, full-precision floats via
repr) plus a JSON metadata sidecar carrying the config hash, seed, PRNG
convention (Philox4x64) and thread count.  Identical config + seed + thread
count reproduce byte-identical CSV content."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .lattice import (
    LambdaSet,
    LatticeError,
    enumerate_beam_tuples,
    enumerate_hartree_tuples,
    enumerate_wave_tuples,
    validate_lambda,
)
from .reduced import (
    ModelCoefficients,
    ReducedState,
    SectionSpec,
    integrate,
    poincare_map,
)
from .resonant import (
    ComplexModeState,
    build_resonant_hamiltonian,
    evolve_resonant,
    first_integrals,
)
from .pde import (
    HartreePotential,
    InitialDataSpec,
    build_initial_data,
    default_dt,
    default_truncation,
    simulate,
)
from . import analysis as an


class CliError(ValueError):
    pass


CONVENTIONS = {
    "prng": "Philox4x64 counter-based generator (numpy.random.Philox)",
    "normal_variable": "A_j = (omega^{1/2} uhat_j + i omega^{-1/2} vhat_j)"
                       "/sqrt(2); built initial data satisfies A_n = delta*a_n",
    "hartree_linear_substep": "uhat_j multiplied by exp(+i |j|^2 dt)",
    "intensity_normalization": "per-tuple: 2|a_n|^2 / M_r, values in [0, 1]",
}


# ------------------------------------------------------------ io helpers

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()[:16]


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def metadata(args: argparse.Namespace, extra: dict | None = None) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func",) and not callable(v)}
    md = {
        "config": cfg,
        "config_hash": config_hash(cfg),
        "seed": getattr(args, "seed", None),
        "threads": getattr(args, "threads", 1),
        "conventions": CONVENTIONS,
        "versions": {"resonantlab": __version__,
                     "numpy": np.__version__},
    }
    if extra:
        md.update(extra)
    return md


def load_config_defaults(parser: argparse.ArgumentParser,
                         args: argparse.Namespace,
                         argv: list[str]) -> argparse.Namespace:
    """Apply a JSON config file as defaults, with strict unknown-key
    rejection; explicit command-line flags win."""
    if not getattr(args, "config", None):
        return args
    path = Path(args.config)
    if not path.exists():
        raise CliError(f"config file not found: {path}")
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise CliError(f"config file is not valid JSON: {e}") from e
    known = set(vars(args))
    unknown = set(cfg) - known
    if unknown:
        raise CliError(f"unknown config keys: {sorted(unknown)}")
    given = {a.lstrip("-").replace("-", "_").split("=")[0] for a in argv
             if a.startswith("--")}
    for key, value in cfg.items():
        if key not in given:
            setattr(args, key, value)
    return args


def load_lambda(path: str) -> LambdaSet:
    p = Path(path)
    if not p.exists():
        raise CliError(f"lambda file not found: {p}")
    payload = json.loads(p.read_text())
    return LambdaSet.from_dict(payload.get("lambda", payload))


def out_dir(args) -> Path:
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


# ------------------------------------------------------------ subcommands

def cmd_lattice(args) -> int:
    if args.box is None:
        raise CliError("--box is required (flag or config file)")
    enum = {"beam": enumerate_beam_tuples, "wave": enumerate_wave_tuples,
            "hartree": enumerate_hartree_tuples}[args.model]
    tuples = sorted(enum(args.box),
                    key=lambda t: (sum(m.norm_sq for m in t.modes),
                                   [m.as_tuple() for m in t.modes]))
    chosen, used = [], set()
    for t in tuples:
        if len(chosen) >= args.tuples:
            break
        if t.degenerate or (set(t.modes) & used):
            continue
        chosen.append(t)
        used |= set(t.modes)
    if len(chosen) < args.tuples:
        raise CliError(f"found only {len(chosen)} disjoint tuples in box "
                       f"{args.box}, need {args.tuples}")
    lam = validate_lambda(chosen)
    d = out_dir(args)
    write_json(d / "lambda.json",
               {"lambda": lam.to_dict(), "metadata": metadata(args)})
    print(f"lattice: {len(tuples)} tuples in box {args.box}, "
          f"kept {lam.N}, certificate passed={lam.passed()}")
    return 0


def cmd_reduced(args) -> int:
    c = ModelCoefficients.sample(args.n, args.eps, args.seed)
    psi0 = json.loads(args.psi0) if args.psi0 else [2.0] * args.n
    K0 = json.loads(args.k0) if args.k0 else [0.5] * args.n
    s0 = ReducedState(np.asarray(psi0, dtype=float),
                      np.asarray(K0, dtype=float))
    traj = integrate(s0, c, args.t_end, tol=args.tol, n_samples=args.samples)
    d = out_dir(args)
    header = (["t"] + [f"psi{i+1}" for i in range(args.n)]
              + [f"K{i+1}" for i in range(args.n)] + ["H"])
    rows = [[t, *psi, *K, h] for t, psi, K, h in
            zip(traj.t, traj.psi, traj.K, traj.H)]
    write_csv(d / "reduced.csv", header, rows)
    write_json(d / "reduced.meta.json", metadata(args, {
        "coefficients": c.to_dict(), "energy_drift": traj.energy_drift,
        "normalization": {"kind": "unit_interval", "columns": "K*"}}))
    if args.poincare_crossings > 0:
        section = SectionSpec(args.poincare_index, args.poincare_angle)
        pts = poincare_map(s0, c, section, args.poincare_crossings,
                           t_max=args.t_end)
        prows = [[t, *st.psi, *st.K] for st, t in pts]
        write_csv(d / "poincare.csv", ["t"]
                  + [f"psi{i+1}" for i in range(args.n)]
                  + [f"K{i+1}" for i in range(args.n)], prows)
    print(f"reduced: {args.n} dof to t={args.t_end}, "
          f"energy drift {traj.energy_drift:.2e}")
    return 0


def _seed_amplitudes(lam: LambdaSet, seed: int, amps_json: str | None):
    if amps_json:
        raw = json.loads(amps_json)
        return np.array([complex(x[0], x[1]) for x in raw])
    rng = np.random.default_rng(np.random.Philox(seed))
    M = 4 * lam.N
    r = 0.4 + 0.4 * rng.uniform(size=M)
    phase = rng.uniform(0, 2 * math.pi, M)
    return r * np.exp(1j * phase) / math.sqrt(2)


def _resonant_rows(lam, traj):
    """Normalized per-mode intensities plus per-tuple (K, psi) columns."""
    rows = []
    N = lam.N
    for t, a in zip(traj.t, traj.a):
        a2 = np.abs(a) ** 2
        row = [t]
        norms, Ks, psis = [], [], []
        for r in range(N):
            i1, i2, i3, i4 = a2[4 * r:4 * r + 4]
            m = max(i1 + i2 + i3 + i4, 1e-30)
            norms.extend([2 * i1 / m, 2 * i2 / m, 2 * i3 / m, 2 * i4 / m])
            Ks.append((i2 + i4) / m)
            blk = a[4 * r:4 * r + 4]
            psis.append(float(np.angle(blk[0] * blk[2]
                                       * np.conj(blk[1]) * np.conj(blk[3]))))
        rows.append(row + norms + Ks + psis)
    return rows


def cmd_resonant(args) -> int:
    lam = load_lambda(args.lam)
    potential = None
    if lam.model == "hartree":
        potential = HartreePotential.build(lam, args.potential_eps, args.seed)
    H = build_resonant_hamiltonian(lam, potential=potential,
                                   rotating_frame=args.rotating_frame)
    a0 = _seed_amplitudes(lam, args.seed, args.amps)
    traj = evolve_resonant(ComplexModeState(a0), H, args.t_end,
                           tol=args.tol, n_samples=args.samples)
    d = out_dir(args)
    N = lam.N
    header = (["t"] + [f"I{i+1}" for i in range(4 * N)]
              + [f"K{r+1}" for r in range(N)]
              + [f"psi{r+1}" for r in range(N)])
    write_csv(d / "resonant.csv", header, _resonant_rows(lam, traj))
    ints = first_integrals(ComplexModeState(traj.a[-1]), lam, H)
    write_json(d / "resonant.meta.json", metadata(args, {
        "energy_drift": traj.energy_drift,
        "first_integrals_final": ints.tolist(),
        "normalization": {"kind": "unit_interval",
                          "columns": "I*, K*", "rule": "2|a|^2/M_r"}}))
    print(f"resonant: {4 * N} modes to t={args.t_end}, "
          f"energy drift {traj.energy_drift:.2e}")
    return 0


def cmd_pde(args) -> int:
    lam = load_lambda(args.lam)
    spec = InitialDataSpec(lam, args.delta,
                           _seed_amplitudes(lam, args.seed, args.amps),
                           background=args.background, seed=args.seed)
    J = args.truncation or default_truncation(lam)
    f = build_initial_data(spec, J=J)
    dt = args.dt or default_dt(lam, J=J)
    if args.tau_end is not None:
        t_end = args.tau_end / args.delta ** 2
    else:
        t_end = args.t_end
    n_steps = max(1, int(math.ceil(t_end / dt)))
    V = None
    if lam.model == "hartree":
        V = HartreePotential.build(lam, args.potential_eps, args.seed)
    res = simulate(f, dt, n_steps, spec, V=V, focusing=args.focusing,
                   sample_every=args.sample_every)
    d = out_dir(args)
    modes = lam.modes()
    header = (["t", "tau"] + [f"I{i+1}" for i in range(len(modes))]
              + ["energy", "mass", "rem_s0", "rem_s1", "rem_s2",
                 "odd_violation"])
    rows = []
    for s in res.samples:
        rows.append([s.t, s.tau, *s.intensities, s.energy,
                     s.mass if s.mass is not None else 0.0,
                     s.remainders[0.0], s.remainders[1.0], s.remainders[2.0],
                     s.odd_violation if s.odd_violation is not None else 0.0])
    write_csv(d / "pde.csv", header, rows)
    write_json(d / "pde.meta.json", metadata(args, {
        "J": J, "dt": dt, "n_steps": n_steps,
        "energy_drift": res.energy_drift,
        "modes": [m.as_tuple() for m in modes],
        "normalization": {"kind": "unit_interval", "columns": "I*",
                          "rule": "|A_n/delta|^2"}}))
    print(f"pde: {lam.model} J={J} dt={dt:.3e} steps={n_steps}, "
          f"energy drift {res.energy_drift:.2e}")
    return 0


def _read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    if not path.exists():
        raise CliError(f"input CSV not found: {path}")
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def _check_normalization(path: Path) -> None:
    meta = path.parent / (path.stem + ".meta.json")
    if not meta.exists():
        return
    md = json.loads(meta.read_text())
    norm = md.get("normalization")
    if norm is not None and norm.get("kind") != "unit_interval":
        raise CliError(f"input {path} carries non-unit normalization "
                       f"{norm.get('kind')!r}; refusing to analyze")


def cmd_analyze(args) -> int:
    path = Path(args.input)
    _check_normalization(path)
    header, data = _read_csv(path)

    def col(name):
        if name not in header:
            raise CliError(f"column {name!r} not in {header}")
        return data[:, header.index(name)]

    t = col("t")
    report: dict = {"task": args.task, "input": str(path)}
    if args.task == "scaling":
        pairs = json.loads(args.pairs)
        fit = an.scaling_fit([(p[0], p[1]) for p in pairs])
        report.update(exponent=fit.exponent, prefactor=fit.prefactor,
                      residual=fit.residual)
    else:
        series = an.IntensitySeries(t, np.clip(col(args.column), 0.0, None))
        if args.task == "q":
            q = an.extract_Q(series, T_hint=args.period)
            report.update(period=q.period, residual=q.residual,
                          min_q=q.min_q, max_q=q.max_q)
        elif args.task == "crossings":
            cr = an.half_crossings(series)
            report.update(up=cr.up.tolist(), down=cr.down.tolist())
        elif args.task == "bumps":
            cr = an.half_crossings(series)
            rep = an.bump_check(series, cr, args.eps)
            report.update(all_ok=rep.all_ok, sups=rep.sups, infs=rep.infs,
                          up=cr.up.tolist(), down=cr.down.tolist())
        elif args.task == "symbols":
            if args.period is None or args.delta is None:
                raise CliError("symbols task needs --period and --delta")
            cr = an.half_crossings(series)
            seq = an.symbol_times(cr, args.period, args.delta)
            report.update(m=seq.m.tolist(), theta=seq.theta.tolist())
        elif args.task == "itinerary":
            cols = args.columns.split(",")
            all_series = [an.IntensitySeries(t, col(c.strip()))
                          for c in cols]
            it = an.activation_itinerary(all_series, args.eps)
            report.update(labels=list(it.labels),
                          beating=[list(b) for b in it.beating],
                          transitions=[list(tr) for tr in it.transitions])
        else:
            raise CliError(f"unknown task {args.task!r}")
    d = out_dir(args)
    write_json(d / f"analyze_{args.task}.json",
               {"report": report, "metadata": metadata(args)})
    print(f"analyze {args.task}: written to {d / f'analyze_{args.task}.json'}")
    return 0


def cmd_pipeline(args) -> int:
    """lattice -> validate -> resonant -> analyze on one tuple set."""
    d = out_dir(args)
    try:
        rc = main(["lattice", "--model", args.model, "--box", str(args.box),
                   "--tuples", "1", "--out-dir", str(d)])
        if rc:
            raise CliError("lattice stage failed")
        # near-separatrix single-tuple state: the exchanged action beats over
        # nearly the full [0, 1] range, so half-crossings exist downstream
        al, be = math.sqrt(0.475), math.sqrt(0.025)
        amps = json.dumps([[al, 0.0], [be, 0.0], [al, 0.0], [be, 0.0]])
        rc = main(["resonant", "--lambda", str(d / "lambda.json"),
                   "--amps", amps,
                   "--t-end", str(args.t_end), "--samples", "2000",
                   "--seed", str(args.seed), "--out-dir", str(d)])
        if rc:
            raise CliError("resonant stage failed")
        rc = main(["analyze", "--input", str(d / "resonant.csv"),
                   "--task", "crossings", "--column", "K1",
                   "--out-dir", str(d)])
        if rc:
            raise CliError("analyze stage failed")
    except Exception as e:
        (d / "FAILED").write_text(f"{e}\n")
        print(f"pipeline failed: {e}", file=sys.stderr)
        return 3
    print(f"pipeline: artifacts in {d}")
    return 0


def cmd_sweep(args) -> int:
    values = [float(v) for v in args.values.split(",") if v.strip()]
    d = out_dir(args)
    manifest = {"parameter": args.param, "runs": []}
    failures = 0
    for v in values:
        sub = d / f"{args.param}_{v:g}"
        argv = [args.stage, "--lambda", args.lam, "--out-dir", str(sub),
                "--seed", str(args.seed), f"--{args.param}", f"{v:g}"]
        if args.stage == "pde" and args.tau_end is not None:
            argv += ["--tau-end", str(args.tau_end)]
        try:
            rc = main(argv)
        except Exception as e:
            print(f"sweep value {v:g} failed: {e}", file=sys.stderr)
            rc = 1
        status = "ok" if rc == 0 else "failed"
        failures += rc != 0
        manifest["runs"].append({"value": v, "dir": str(sub),
                                 "status": status})
    write_json(d / "manifest.json", manifest)
    print(f"sweep: {len(values) - failures}/{len(values)} runs ok")
    return 0 if failures == 0 else 3


# ------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="resonantlab",
        description="Numerical laboratory for resonant energy exchange in "
                    "cubic dispersive equations on the torus")

    def add_common(sp):
        sp.add_argument("--config", help="JSON config file (strict keys)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--out-dir", default="out")

    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("lattice", help="enumerate and certify tuple sets")
    add_common(sp)
    sp.add_argument("--model", choices=["wave", "beam", "hartree"],
                    required=True)
    # not argparse-required so a config file can supply it
    sp.add_argument("--box", type=int)
    sp.add_argument("--tuples", type=int, default=1)
    sp.set_defaults(func=cmd_lattice)

    sp = sub.add_parser("reduced", help="integrate the reduced (psi, K) model")
    add_common(sp)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--eps", type=float, default=0.0)
    sp.add_argument("--psi0", help="JSON list of initial angles")
    sp.add_argument("--k0", help="JSON list of initial actions")
    sp.add_argument("--t-end", type=float, default=100.0)
    sp.add_argument("--samples", type=int, default=2000)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--poincare-crossings", type=int, default=0)
    sp.add_argument("--poincare-index", type=int, default=0)
    sp.add_argument("--poincare-angle", type=float, default=0.0)
    sp.set_defaults(func=cmd_reduced)

    sp = sub.add_parser("resonant", help="evolve the resonant mode model")
    add_common(sp)
    sp.add_argument("--lambda", dest="lam", required=True)
    sp.add_argument("--amps", help="JSON [[re, im], ...] seed amplitudes")
    sp.add_argument("--t-end", type=float, default=100.0)
    sp.add_argument("--samples", type=int, default=2000)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--potential-eps", type=float, default=0.0)
    sp.add_argument("--rotating-frame", action="store_true")
    sp.set_defaults(func=cmd_resonant)

    sp = sub.add_parser("pde", help="pseudo-spectral simulation")
    add_common(sp)
    sp.add_argument("--lambda", dest="lam", required=True)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--amps", help="JSON [[re, im], ...] seed amplitudes")
    sp.add_argument("--truncation", type=int, help="default 4*max|n|")
    sp.add_argument("--dt", type=float, help="default 2pi/(20*omega_max)")
    sp.add_argument("--t-end", type=float, default=100.0)
    sp.add_argument("--tau-end", type=float,
                    help="normalized horizon tau = delta^2 t")
    sp.add_argument("--sample-every", type=int, default=100)
    sp.add_argument("--background", type=float, default=0.0)
    sp.add_argument("--potential-eps", type=float, default=0.0)
    sp.add_argument("--focusing", action="store_true")
    sp.set_defaults(func=cmd_pde)

    sp = sub.add_parser("analyze", help="time-series analytics")
    add_common(sp)
    sp.add_argument("--input", required=True)
    sp.add_argument("--task", required=True,
                    choices=["q", "crossings", "bumps", "symbols",
                             "itinerary", "scaling"])
    sp.add_argument("--column", default="K1")
    sp.add_argument("--columns", default="K1,K2",
                    help="comma-separated, for itineraries")
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--period", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--pairs", help="JSON [[delta, metric], ...] for scaling")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("pipeline", help="lattice -> resonant -> analyze")
    add_common(sp)
    sp.add_argument("--model", choices=["wave", "beam", "hartree"],
                    default="beam")
    sp.add_argument("--box", type=int, default=4)
    sp.add_argument("--t-end", type=float, default=100.0)
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("sweep", help="run a stage across parameter values")
    add_common(sp)
    sp.add_argument("--stage", choices=["pde", "resonant"], default="pde")
    sp.add_argument("--lambda", dest="lam", required=True)
    sp.add_argument("--param", default="delta")
    sp.add_argument("--values", required=True, help="comma-separated")
    sp.add_argument("--tau-end", type=float)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = load_config_defaults(parser, args, argv)
        return args.func(args)
    except (CliError, LatticeError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
