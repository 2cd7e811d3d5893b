"""Command-line front door: generate, solve, certify, sweep, self-test.

Every command resolves its parameters (flag > LRD_SEED env > built-in
default), writes its outputs into --out, and drops a manifest.json whose
recorded argv replays the run byte-identically (timestamps live only in
the manifest itself).
"""

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__, rstar
from .certificates import (GolfingConfig, build_certificate_golfing_mc,
                           build_certificate_ls_mc, build_certificate_rpca,
                           verify_mc_certificate)
from .errors import IllPosedError, NumericalError, ParseError
from .instances import make_mc_instance, make_rpca_instance
from .linalg import (SupportSet, TangentSpace, composed_projector_norm,
                     project_T, project_T_perp, svd)
from .mmio import read_coordinate, read_dense, write_coordinate, write_dense
from .oracles import prox_vec_descent
from .phase import PhaseGrid, run_grid, write_csv
from .rng import Rng
from .rstar import prox_half_r_sq, prox_rstar, prox_topr_sq_vec
from .solvers import (STATUS_CONVERGED, STATUS_MAX_ITERS, STATUS_NUMERICAL,
                      SolverConfig, solve_factored_gd, solve_mc_bidual,
                      solve_rpca_bidual, solve_weighted_lra)

MANIFEST_SCHEMA_VERSION = 1
REPORT_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_MAX_ITERS = 2
EXIT_NUMERICAL = 3
EXIT_ILL_POSED = 4
EXIT_SELFTEST = 5
EXIT_CONDITIONS = 6
EXIT_USAGE = 64

_STATUS_EXIT = {STATUS_CONVERGED: EXIT_OK,
                STATUS_MAX_ITERS: EXIT_MAX_ITERS,
                STATUS_NUMERICAL: EXIT_NUMERICAL}


class _Parser(argparse.ArgumentParser):
    # argparse defaults usage errors to exit code 2, which this tool
    # reserves for iteration-limit stops; use EX_USAGE instead
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("LRD_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"LRD_SEED must be an integer, got {env!r}")
    return 0


def _out_dir(args) -> str:
    out = args.out
    os.makedirs(out, exist_ok=True)
    return out


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out, command, argv, params, seed, inputs, artifacts,
                    started) -> str:
    path = os.path.join(out, "manifest.json")
    _write_json(path, {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "library_version": __version__,
        "command": command,
        "argv": list(argv),
        "parameters": params,
        "seed": seed,
        "inputs": inputs,
        "artifacts": dict(artifacts, manifest=path),
        "wall_clock_seconds": time.time() - started,
        "created_utc": datetime.now(timezone.utc)
                               .strftime("%Y-%m-%dT%H:%M:%SZ"),
    })
    return path


def _certificate_payload(report, extra=None) -> dict:
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "construction": report.construction,
        "passed": report.passed,
        "conditions": [{"name": c.name, "lhs_value": c.lhs_value,
                        "bound": c.bound, "margin": c.margin,
                        "satisfied": c.satisfied}
                       for c in report.conditions],
    }
    payload.update(extra or {})
    return payload


def _solve_payload(report, extra=None) -> dict:
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "status": report.status,
        "converged": report.converged,
        "iterations_run": report.iterations_run,
        "primal_value": report.primal_value,
        "final_residual": (report.residual_trace[-1]
                           if report.residual_trace else None),
    }
    payload.update(extra or {})
    return payload


def _spectrum(kappa: float, r: int) -> tuple:
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    return tuple(float(v) for v in np.linspace(kappa, 1.0, r))


def _sample_count(args, n1: int, n2: int, default_density: float) -> int:
    if args.samples is not None:
        return int(args.samples)
    density = default_density if args.density is None else args.density
    if not 0 < density <= 1:
        raise ValueError("density must be in (0, 1]")
    return max(1, min(int(round(density * n1 * n2)), n1 * n2))


def _rank_of(x, flag_value) -> int:
    r = svd(x).numeric_rank if flag_value is None else int(flag_value)
    if r < 1:
        raise ValueError("matrix is numerically zero; pass --rank explicitly")
    return r


# ---------------------------------------------------------------------------
# instance generation


def _cmd_gen_mc(args, argv) -> int:
    started = time.time()
    seed = _resolve_seed(args.seed)
    out = _out_dir(args)
    m = _sample_count(args, args.n1, args.n2, default_density=0.5)
    spectrum = _spectrum(args.kappa, args.rank)
    inst = make_mc_instance(args.n1, args.n2, args.rank, spectrum, m=m,
                            sampler=args.sampler, seed=seed)
    paths = {"x_star": os.path.join(out, "x_star.mm"),
             "observed": os.path.join(out, "observed.mm"),
             "instance": os.path.join(out, "instance.json")}
    write_dense(paths["x_star"], inst.x_star)
    write_coordinate(paths["observed"], inst.obs, inst.obs_values)
    params = {"problem": "mc", "n1": args.n1, "n2": args.n2,
              "rank": args.rank, "m": m, "sampler": args.sampler,
              "kappa": args.kappa, "spectrum": list(spectrum),
              "mu": inst.mu, "seed": seed}
    _write_json(paths["instance"],
                dict(params, schema_version=REPORT_SCHEMA_VERSION))
    _write_manifest(out, "gen-mc", argv, params, seed, {}, paths, started)
    print(f"wrote mc instance: n={args.n1}x{args.n2} rank={args.rank} "
          f"m={m} mu={inst.mu:.3f} -> {out}")
    return EXIT_OK


def _cmd_gen_rpca(args, argv) -> int:
    started = time.time()
    seed = _resolve_seed(args.seed)
    out = _out_dir(args)
    m = _sample_count(args, args.n1, args.n2, default_density=0.05)
    spectrum = _spectrum(args.kappa, args.rank)
    inst = make_rpca_instance(args.n1, args.n2, args.rank, spectrum,
                              m_corr=m, model=args.model, seed=seed)
    paths = {"d": os.path.join(out, "d.mm"),
             "x_star": os.path.join(out, "x_star.mm"),
             "s_star": os.path.join(out, "s_star.mm"),
             "support": os.path.join(out, "support.mm"),
             "instance": os.path.join(out, "instance.json")}
    write_dense(paths["d"], inst.d)
    write_dense(paths["x_star"], inst.x_star)
    write_dense(paths["s_star"], inst.s_star)
    write_coordinate(paths["support"], inst.corr)
    params = {"problem": "rpca", "n1": args.n1, "n2": args.n2,
              "rank": args.rank, "m_corr": m, "model": args.model,
              "kappa": args.kappa, "spectrum": list(spectrum),
              "mu": inst.mu, "lambda": inst.lambda_default, "seed": seed}
    _write_json(paths["instance"],
                dict(params, schema_version=REPORT_SCHEMA_VERSION))
    _write_manifest(out, "gen-rpca", argv, params, seed, {}, paths, started)
    print(f"wrote rpca instance: n={args.n1}x{args.n2} rank={args.rank} "
          f"corruptions={m} lambda={inst.lambda_default:.6g} -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# solving


def _finish_solve(args, argv, command, report, inputs, extra_files,
                  extra_params, started) -> int:
    out = _out_dir(args)
    paths = {"solution": os.path.join(out, "solution.mm"),
             "report": os.path.join(out, "report.json")}
    write_dense(paths["solution"], report.solution)
    for name, (fname, matrix) in extra_files.items():
        paths[name] = os.path.join(out, fname)
        write_dense(paths[name], matrix)
    params = {"rank": args.rank, "gamma": args.gamma, "tol": args.tol,
              "max_iters": args.max_iters}
    params.update(extra_params)
    _write_json(paths["report"], _solve_payload(report))
    _write_manifest(out, command, argv, params, _resolve_seed(args.seed),
                    inputs, paths, started)
    print(f"{command}: {report.status} after {report.iterations_run} "
          f"iterations, primal {report.primal_value:.6g}")
    return _STATUS_EXIT[report.status]


def _solver_config(args) -> SolverConfig:
    return SolverConfig(max_iters=args.max_iters, tol=args.tol,
                        gamma=args.gamma, seed=_resolve_seed(args.seed))


def _cmd_solve_mc(args, argv) -> int:
    started = time.time()
    obs, values = read_coordinate(args.input)
    if values is None:
        raise ParseError(args.input, 1, 1,
                         "observed entries required; pattern file has no "
                         "values")
    report = solve_mc_bidual(obs, values, args.rank, _solver_config(args))
    return _finish_solve(args, argv, "solve mc", report,
                         {"observed": args.input}, {}, {"m": obs.m}, started)


def _cmd_solve_rpca(args, argv) -> int:
    started = time.time()
    d = read_dense(args.input)
    if args.lam is not None:
        lam = args.lam
    else:
        # sigma_r(D)/sqrt(n1) tracks the target weight sigma_r(X*)/sqrt(n1)
        # when corruption is sparse enough that D is close to X*
        sigma = svd(d).sigma
        if args.rank > sigma.size or sigma[args.rank - 1] <= 0:
            raise ValueError("cannot infer lambda from the data; "
                             "pass --lambda")
        lam = float(sigma[args.rank - 1] / np.sqrt(d.shape[0]))
    report = solve_rpca_bidual(d, args.rank, lam, _solver_config(args))
    extra = {"sparse": ("sparse.mm", report.solution_sparse)}
    return _finish_solve(args, argv, "solve rpca", report,
                         {"d": args.input}, extra, {"lambda": lam}, started)


def _cmd_solve_wlra(args, argv) -> int:
    started = time.time()
    y = read_dense(args.input)
    w = read_dense(args.weights)
    report = solve_weighted_lra(y, w, args.beta, args.rank,
                                _solver_config(args))
    return _finish_solve(args, argv, "solve wlra", report,
                         {"y": args.input, "weights": args.weights},
                         {}, {"beta": args.beta}, started)


# ---------------------------------------------------------------------------
# certification


def _finish_certify(args, argv, command, report, cert_files, inputs, params,
                    started) -> int:
    out = _out_dir(args)
    paths = {"report": os.path.join(out, "certificate.json")}
    payload_extra = {}
    for name, (fname, matrix) in cert_files.items():
        paths[name] = os.path.join(out, fname)
        write_dense(paths[name], matrix)
    if "extra" in params:
        payload_extra = params.pop("extra")
    _write_json(paths["report"], _certificate_payload(report, payload_extra))
    _write_manifest(out, command, argv, params, _resolve_seed(args.seed),
                    inputs, paths, started)
    verdict = "pass" if report.passed else "FAIL"
    print(f"{command}: {verdict}")
    for c in report.conditions:
        mark = "ok " if c.satisfied else "BAD"
        print(f"  {mark} {c.name:<28} lhs={c.lhs_value:.3e} "
              f"bound={c.bound:.3e}")
    return EXIT_OK if report.passed else EXIT_CONDITIONS


def _cmd_certify_mc_ls(args, argv) -> int:
    started = time.time()
    x_star = read_dense(args.x_star)
    obs, _ = read_coordinate(args.support)
    r = _rank_of(x_star, args.rank)
    space = TangentSpace.from_matrix(x_star, r)
    lam = build_certificate_ls_mc(x_star, space, obs, cg_tol=args.tol,
                                  method=args.method)
    report = verify_mc_certificate(lam, x_star, space, obs, mode=args.mode)
    params = {"rank": r, "mode": args.mode, "cg_tol": args.tol,
              "method": args.method}
    return _finish_certify(args, argv, "certify mc-ls", report,
                           {"certificate": ("certificate.mm", lam)},
                           {"x_star": args.x_star, "support": args.support},
                           params, started)


def _cmd_certify_mc_golfing(args, argv) -> int:
    started = time.time()
    seed = _resolve_seed(args.seed)
    x_star = read_dense(args.x_star)
    r = _rank_of(x_star, args.rank)
    space = TangentSpace.from_matrix(x_star, r)
    cfg = GolfingConfig(b=args.rounds, q=args.density, seed=seed)
    result = build_certificate_golfing_mc(x_star, space, cfg)
    report = verify_mc_certificate(result.certificate, x_star, space,
                                   result.support, mode="relaxed")
    params = {"rank": r, "rounds": args.rounds, "density": args.density,
              "seed": seed,
              "extra": {"construction": "golfing",
                        "contracted": result.contracted,
                        "residual_trace": list(result.residual_trace)}}
    return _finish_certify(args, argv, "certify mc-golfing", report,
                           {"certificate": ("certificate.mm",
                                            result.certificate)},
                           {"x_star": args.x_star}, params, started)


def _cmd_certify_rpca(args, argv) -> int:
    started = time.time()
    seed = _resolve_seed(args.seed)
    x_star = read_dense(args.x_star)
    s_star = read_dense(args.s_star)
    if s_star.shape != x_star.shape:
        raise ValueError("x_star and s_star shapes differ")
    corr = SupportSet.from_mask(s_star != 0)
    r = _rank_of(x_star, args.rank)
    if args.lam is not None:
        lam = args.lam
    else:
        lam = float(svd(x_star).sigma[r - 1] / np.sqrt(x_star.shape[0]))
    cfg = GolfingConfig(b=args.rounds, q=args.density, seed=seed)
    w_l, w_s, report = build_certificate_rpca(x_star, s_star, corr, lam, cfg)
    params = {"rank": r, "lambda": lam, "rounds": args.rounds,
              "density": args.density, "seed": seed,
              "extra": {"lambda": lam}}
    return _finish_certify(args, argv, "certify rpca", report,
                           {"w_low": ("w_low.mm", w_l),
                            "w_sparse": ("w_sparse.mm", w_s)},
                           {"x_star": args.x_star, "s_star": args.s_star},
                           params, started)


# ---------------------------------------------------------------------------
# phase sweep


def _cmd_phase(args, argv) -> int:
    started = time.time()
    seed = _resolve_seed(args.seed)
    if args.jobs < 1:
        raise ValueError("jobs must be >= 1")
    grid = PhaseGrid.from_json(args.config)
    out = _out_dir(args)
    rows = run_grid(grid, master_seed=seed, jobs=args.jobs)
    csv_path = os.path.join(out, "sweep.csv")
    write_csv(csv_path, rows)
    params = dict(grid.to_json_dict(), jobs=args.jobs, seed=seed)
    _write_manifest(out, "phase", argv, params, seed,
                    {"config": args.config}, {"sweep": csv_path}, started)
    print(f"phase: {len(rows)} cells x {grid.trials} trials -> {csv_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest


def _suite_prox() -> tuple:
    # closed-form spectral prox against an independent descent oracle
    rng = Rng(1001)
    worst = 0.0
    for _ in range(20):
        k = 1 + rng.below(8)
        s = np.sort(np.abs(rng.normals(k)))[::-1]
        r = 1 + rng.below(k)
        for gamma in (0.3, 1.0, 3.0):
            got = prox_topr_sq_vec(s, r, gamma).shrunk_spectrum
            want = prox_vec_descent(s, r, gamma)
            worst = max(worst, float(np.linalg.norm(got - want)))
    return worst <= 1e-6, f"worst l2 gap {worst:.2e} (bound 1e-6)"


def _suite_moreau() -> tuple:
    # gamma*prox_{f/gamma}(m/gamma) + prox_{gamma f*}(m) must recompose m
    rng = Rng(1002)
    worst = 0.0
    for _ in range(25):
        n1, n2 = 1 + rng.below(6), 1 + rng.below(6)
        m = rng.normals((n1, n2))
        r = 1 + rng.below(min(n1, n2))
        gamma = 0.3 + 2.0 * rng.random()
        back = gamma * prox_half_r_sq(m / gamma, r, 1.0 / gamma) \
            + prox_rstar(m, r, gamma)
        worst = max(worst, float(np.max(np.abs(back - m))))
    return worst <= 1e-10, f"worst residual {worst:.2e} (bound 1e-10)"


def _suite_projectors() -> tuple:
    inst = make_mc_instance(30, 30, 2, (1.0, 1.0), m=700, sampler="uniform",
                            seed=7)
    space = TangentSpace.from_matrix(inst.x_star, 2)
    rng = Rng(1003)
    worst = 0.0
    for _ in range(10):
        m = rng.normals((30, 30))
        w = rng.normals((30, 30))
        pt = project_T(space, m)
        worst = max(
            worst,
            float(np.linalg.norm(pt + project_T_perp(space, m) - m)),
            float(np.linalg.norm(project_T(space, pt) - pt)),
            abs(float(np.sum(pt * w) - np.sum(m * project_T(space, w)))))
    est = composed_projector_norm(space, inst.obs, "omega_perp")
    ok = worst <= 1e-10 and est < 1.0
    return ok, (f"worst identity residual {worst:.2e}; "
                f"|P_perp P_T| ~ {est:.3f}")


def _suite_landscape() -> tuple:
    # every factored descent run must land on the tail-energy optimum
    rng = Rng(1004)
    y = rng.normals((8, 6))
    r = 2
    tail = 0.5 * float(np.sum(svd(y).sigma[r:] ** 2))
    worst = 0.0
    for seed in range(5):
        cfg = SolverConfig(max_iters=20000, tol=1e-12, seed=seed)
        _, _, report = solve_factored_gd(y, r, cfg)
        worst = max(worst, abs(report.primal_value - tail))
    return worst <= 1e-6, f"worst objective gap {worst:.2e} (bound 1e-6)"


_SUITES = (("prox", _suite_prox),
           ("moreau", _suite_moreau),
           ("projectors", _suite_projectors),
           ("landscape", _suite_landscape))


def _cmd_selftest(args, argv) -> int:
    selected = [(name, fn) for name, fn in _SUITES if args.filter in name]
    if not selected:
        raise ValueError(f"--filter {args.filter!r} matches no suite; "
                         f"suites: {', '.join(n for n, _ in _SUITES)}")
    if args.inject_prox_fault:
        rstar._inject_sign_fault = True
    failures = 0
    try:
        for name, fn in selected:
            ok, detail = fn()
            failures += not ok
            print(f"{name:<12} {'pass' if ok else 'FAIL'}  {detail}")
    finally:
        rstar._inject_sign_fault = False
    print(f"{failures} of {len(selected)} suites failed" if failures
          else f"all {len(selected)} suites passed")
    return EXIT_SELFTEST if failures else EXIT_OK


# ---------------------------------------------------------------------------
# rerun


def _cmd_rerun(args, argv) -> int:
    try:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(args.manifest, 0, 0, f"cannot read file: {exc}")
    except json.JSONDecodeError as exc:
        raise ParseError(args.manifest, exc.lineno, exc.colno, exc.msg)
    stored = data.get("argv")
    if (not isinstance(stored, list) or not stored
            or not all(isinstance(a, str) for a in stored)
            or stored[0] == "rerun"):
        raise ParseError(args.manifest, 1, 1,
                         "manifest carries no replayable argv")
    return main(stored)


# ---------------------------------------------------------------------------
# parser


def _add_seed(p) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: LRD_SEED env, then 0)")


def _add_out(p) -> None:
    p.add_argument("--out", default=".",
                   help="output directory, created if missing (default: .)")


def _add_solver_flags(p, tol: float, max_iters: int) -> None:
    p.add_argument("--gamma", type=float, default=1.0,
                   help="proximal step weight (default: 1.0)")
    p.add_argument("--tol", type=float, default=tol,
                   help=f"relative fixed-point tolerance (default: {tol:g})")
    p.add_argument("--max-iters", type=int, default=max_iters,
                   dest="max_iters",
                   help=f"iteration cap (default: {max_iters})")


def _add_gen_flags(p, density_help: str) -> None:
    p.add_argument("--n1", type=int, required=True, help="rows")
    p.add_argument("--n2", type=int, required=True, help="columns")
    p.add_argument("--rank", type=int, required=True, help="ground-truth rank")
    count = p.add_mutually_exclusive_group()
    count.add_argument("--samples", type=int, default=None,
                       help="exact entry count")
    count.add_argument("--density", type=float, default=None,
                       help=density_help)
    p.add_argument("--kappa", type=float, default=1.0,
                   help="condition number of the spectrum (default: 1)")
    _add_seed(p)
    _add_out(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lrd",
                     description="Low-rank recovery via the convex bi-dual "
                                 "of l2-regularized factorization.")
    parser.add_argument("--version", action="version",
                        version=f"lrd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="command", parser_class=_Parser)

    p = sub.add_parser("gen-mc",
                       help="generate a matrix-completion instance")
    _add_gen_flags(p, "observed fraction of entries (default: 0.5)")
    p.add_argument("--sampler", choices=("uniform", "bernoulli"),
                   default="uniform", help="observation model")
    p.set_defaults(func=_cmd_gen_mc)

    p = sub.add_parser("gen-rpca",
                       help="generate a robust-PCA instance")
    _add_gen_flags(p, "corrupted fraction of entries (default: 0.05)")
    p.add_argument("--model", choices=("signed_uniform", "bernoulli_sign"),
                   default="signed_uniform", help="corruption model")
    p.set_defaults(func=_cmd_gen_rpca)

    solve = sub.add_parser("solve",
                           help="solve a recovery program")
    solve_sub = solve.add_subparsers(dest="subcommand", required=True,
                                     metavar="problem",
                                     parser_class=_Parser)

    p = solve_sub.add_parser("mc",
                             help="matrix completion from observed entries")
    p.add_argument("input", help="observed entries (coordinate file)")
    p.add_argument("--rank", type=int, required=True,
                   help="penalty rank parameter r")
    _add_solver_flags(p, tol=1e-9, max_iters=5000)
    _add_seed(p)
    _add_out(p)
    p.set_defaults(func=_cmd_solve_mc)

    p = solve_sub.add_parser("rpca",
                             help="low-rank plus sparse decomposition")
    p.add_argument("input", help="data matrix D (array file)")
    p.add_argument("--rank", type=int, required=True,
                   help="penalty rank parameter r")
    p.add_argument("--lambda", type=float, default=None, dest="lam",
                   help="sparsity weight (default: sigma_r(D)/sqrt(n1))")
    _add_solver_flags(p, tol=1e-9, max_iters=20000)
    _add_seed(p)
    _add_out(p)
    p.set_defaults(func=_cmd_solve_rpca)

    p = solve_sub.add_parser("wlra",
                             help="weighted low-rank approximation")
    p.add_argument("input", help="target matrix Y (array file)")
    p.add_argument("weights", help="weight matrix W (array file)")
    p.add_argument("--rank", type=int, required=True,
                   help="penalty rank parameter r")
    p.add_argument("--beta", type=float, default=1.0,
                   help="fit weight in beta*|W.(Y-X)|^2 (default: 1.0)")
    _add_solver_flags(p, tol=1e-9, max_iters=5000)
    _add_seed(p)
    _add_out(p)
    p.set_defaults(func=_cmd_solve_wlra)

    certify = sub.add_parser("certify",
                             help="build and verify a dual certificate")
    certify_sub = certify.add_subparsers(dest="subcommand", required=True,
                                         metavar="construction",
                                         parser_class=_Parser)

    p = certify_sub.add_parser("mc-ls",
                               help="least-squares completion certificate")
    p.add_argument("x_star", help="candidate low-rank matrix (array file)")
    p.add_argument("support", help="observation support (coordinate file)")
    p.add_argument("--rank", type=int, default=None,
                   help="tangent-space rank (default: numeric rank)")
    p.add_argument("--mode", choices=("exact", "relaxed"), default="exact",
                   help="verification bounds (default: exact)")
    p.add_argument("--method", choices=("cg", "neumann"), default="cg",
                   help="tangent-space solve method (default: cg)")
    p.add_argument("--tol", type=float, default=1e-12,
                   help="tangent solve tolerance (default: 1e-12)")
    _add_seed(p)
    _add_out(p)
    p.set_defaults(func=_cmd_certify_mc_ls)

    p = certify_sub.add_parser("mc-golfing",
                               help="golfing completion certificate")
    p.add_argument("x_star", help="candidate low-rank matrix (array file)")
    p.add_argument("--rank", type=int, default=None,
                   help="tangent-space rank (default: numeric rank)")
    p.add_argument("--density", type=float, default=0.8,
                   help="per-round Bernoulli sampling rate (default: 0.8)")
    p.add_argument("--rounds", type=int, default=6,
                   help="number of golfing rounds (default: 6)")
    _add_seed(p)
    _add_out(p)
    p.set_defaults(func=_cmd_certify_mc_golfing)

    p = certify_sub.add_parser("rpca",
                               help="composite robust-PCA certificate")
    p.add_argument("x_star", help="low-rank component (array file)")
    p.add_argument("s_star", help="sparse component (array file)")
    p.add_argument("--rank", type=int, default=None,
                   help="tangent-space rank (default: numeric rank)")
    p.add_argument("--lambda", type=float, default=None, dest="lam",
                   help="sparsity weight (default: sigma_r(X*)/sqrt(n1))")
    p.add_argument("--density", type=float, default=0.9,
                   help="per-round Bernoulli sampling rate (default: 0.9)")
    p.add_argument("--rounds", type=int, default=8,
                   help="number of golfing rounds (default: 8)")
    _add_seed(p)
    _add_out(p)
    p.set_defaults(func=_cmd_certify_rpca)

    p = sub.add_parser("phase",
                       help="run a phase-transition sweep")
    p.add_argument("--config", required=True,
                   help="grid definition (JSON file)")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes (default: 1)")
    _add_seed(p)
    _add_out(p)
    p.set_defaults(func=_cmd_phase)

    p = sub.add_parser("selftest",
                       help="run the built-in property suites")
    p.add_argument("--filter", default="",
                   help="run only suites whose name contains this substring")
    p.add_argument("--inject-prox-fault", action="store_true",
                   help="flip a sign inside the spectral prox to confirm "
                        "the harness catches faults")
    p.set_defaults(func=_cmd_selftest)

    p = sub.add_parser("rerun",
                       help="replay a recorded run from its manifest")
    p.add_argument("manifest", help="manifest.json from a previous run")
    p.set_defaults(func=_cmd_rerun)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = list(sys.argv[1:])
    argv = [str(a) for a in argv]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed the diagnostic (usage error, -h, --version)
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args, argv)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except IllPosedError as exc:
        print(f"error: ill-posed problem: {exc}", file=sys.stderr)
        return EXIT_ILL_POSED
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
