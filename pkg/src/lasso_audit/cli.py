"""Command-line front end: load matrices, run analyses, write JSON reports.

Report envelopes carry {"meta": {...}, "result": ...}; meta embeds the tool
name and version, the resolved configuration, the seed, and the wall time.
Every field except wall_time_s is byte-identical across runs with the same
configuration and seed.  Matrices travel as dense row-major CSV without a
header, floats formatted with 17 significant digits; index sets are JSON
arrays of 0-based indices.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import __version__
from .constants import (
    DEFAULT_SIGN_CAP,
    ConditionReport,
    alpha_constant,
    coherence,
    irrepresentable_signed,
    irrepresentable_uniform,
    restricted_isometry,
    restricted_orthogonality,
    rip_constant,
    theta_uniform,
    uniform_eigenvalue,
    weak_rip_constant,
)
from .core import DEFAULT_SUBSET_CAP, BoundedValue, ConeSpec, GramMatrix
from .errors import AuditError, InvalidParameter, ParseError
from .estimators import (
    certified_lower_phi,
    compatibility_constant,
    restricted_eigenvalue,
    restricted_regression,
)
from .experiments import (
    GeneratorSpec,
    concentration_experiment,
    generate,
    noise_bound_experiment,
)
from .implications import check_all
from .lasso import (
    NoisyProblem,
    basis_pursuit_recover,
    oracle_verdict,
    solve_noiseless,
    solve_noisy,
)
from .solvers import DEFAULT_CONFIG, SolverConfig

_FLOAT_FMT = "%.17g"


def save_matrix_csv(path_or_file, matrix) -> None:
    """Dense row-major CSV, no header, 17 significant digits per entry."""
    arr = np.atleast_2d(np.asarray(matrix, dtype=float))
    lines = [",".join(_FLOAT_FMT % v for v in row) for row in arr]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_matrix_csv(path: str) -> np.ndarray:
    """Parse a dense numeric CSV; malformed cells report 1-based line/column."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.read().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    rows = []
    width = None
    for lineno, line in enumerate(raw_lines, start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(
                f"row has {len(cells)} fields, expected {width}", lineno, len(cells)
            )
        row = []
        for colno, cell in enumerate(cells, start=1):
            try:
                row.append(float(cell))
            except ValueError:
                raise ParseError(f"not a number: {cell.strip()!r}", lineno, colno) from None
        rows.append(row)
    if not rows:
        raise ParseError(f"{path} contains no data rows")
    return np.asarray(rows, dtype=float)


def load_vector_csv(path: str) -> np.ndarray:
    """A vector as a single CSV row or a single CSV column."""
    arr = load_matrix_csv(path)
    if arr.shape[0] == 1:
        return arr[0].copy()
    if arr.shape[1] == 1:
        return arr[:, 0].copy()
    raise ParseError(f"expected a vector, got a {arr.shape[0]}x{arr.shape[1]} matrix")


def parse_index_list(text: str):
    """Comma-separated 0-based indices -> sorted unique tuple."""
    try:
        members = tuple(sorted({int(tok) for tok in text.split(",") if tok.strip() != ""}))
    except ValueError:
        raise InvalidParameter(f"cannot parse index list {text!r}") from None
    if not members:
        raise InvalidParameter("index list must be nonempty")
    if members[0] < 0:
        raise InvalidParameter(f"indices must be nonnegative, got {members[0]}")
    return members


def parse_float_list(text: str):
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise InvalidParameter(f"cannot parse number list {text!r}") from None
    if not values:
        raise InvalidParameter("number list must be nonempty")
    return values


@dataclass(frozen=True)
class RunConfig:
    """Resolved invocation: one command plus every knob it may consume."""

    command: str
    gram_path: Optional[str] = None
    design_path: Optional[str] = None
    y_path: Optional[str] = None
    beta0_path: Optional[str] = None
    s_members: Optional[tuple] = None
    big_l: float = 1.0
    n_set: Optional[int] = None
    lam: Optional[float] = None
    t_list: tuple = (1.0, 2.0, 4.0)
    reps: int = 2000
    seed: int = 0
    cap_subsets: int = DEFAULT_SUBSET_CAP
    cap_signs: int = DEFAULT_SIGN_CAP
    tol: float = 1e-9
    out: Optional[str] = None
    threads: int = 1
    experiment: str = "concentration"
    kind: Optional[str] = None
    p: Optional[int] = None
    s_size: Optional[int] = None
    rho: Optional[float] = None
    block_size: Optional[int] = None
    n_samples: Optional[int] = None
    jitter: float = 0.0
    noise_sd: float = 1.0

    def solver_config(self) -> SolverConfig:
        return replace(DEFAULT_CONFIG, tol=self.tol, seed=self.seed)

    def to_json_dict(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            if isinstance(value, tuple):
                value = list(value)
            out[key] = value
        return out


def _resolve_seed(seed_arg: Optional[int]) -> int:
    if seed_arg is not None:
        return seed_arg
    env = os.environ.get("LASSO_AUDIT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InvalidParameter(f"LASSO_AUDIT_SEED={env!r} is not an integer") from None
    return 0


def _load_gram(config: RunConfig) -> GramMatrix:
    if config.gram_path is None:
        raise InvalidParameter(f"command {config.command!r} requires --gram")
    return GramMatrix(load_matrix_csv(config.gram_path))


def _cone_for(config: RunConfig, p: int) -> ConeSpec:
    if not config.s_members:
        raise InvalidParameter(f"command {config.command!r} requires a nonempty --S")
    s = len(config.s_members)
    n_set = config.n_set if config.n_set is not None else s
    cone = ConeSpec(config.s_members, config.big_l, n_set)
    cone.validate_p(p)
    return cone


def _beta0_for(config: RunConfig, p: int) -> np.ndarray:
    """--beta0 file when given, else the indicator vector of S."""
    if config.beta0_path is not None:
        beta0 = load_vector_csv(config.beta0_path)
        if beta0.shape != (p,):
            raise InvalidParameter(f"beta0 has length {beta0.shape[0]}, expected {p}")
        return beta0
    if not config.s_members:
        raise InvalidParameter("need --beta0 or a nonempty --S to build the target vector")
    beta0 = np.zeros(p)
    beta0[list(config.s_members)] = 1.0
    return beta0


def condition_report(gram: GramMatrix, cone: ConeSpec,
                     config: SolverConfig = DEFAULT_CONFIG,
                     cap: int = DEFAULT_SUBSET_CAP,
                     sign_cap: int = DEFAULT_SIGN_CAP) -> ConditionReport:
    """Every named condition constant for one (gram, cone) pair.

    Constants whose computation raises an audit error appear under errors
    instead of entries; booleans are encoded as 1.0 / 0.0 entries with their
    witnesses alongside.
    """
    p, s = gram.p, cone.s
    report = ConditionReport(context={
        "p": p,
        "fingerprint": gram.fingerprint(),
        "S": list(cone.S),
        "L": cone.L,
        "N": cone.N,
    })

    def attempt(key, fn):
        try:
            report.entries[key] = fn()
        except AuditError as exc:
            report.errors[key] = f"{type(exc).__name__}: {exc}"

    attempt("lambda2", lambda: uniform_eigenvalue(gram, cone, cap))
    attempt("delta_N", lambda: restricted_isometry(gram, cone.N, cap))
    attempt("theta", lambda: restricted_orthogonality(gram, cone, cap))
    attempt("theta_uniform", lambda: theta_uniform(gram, s, cone.N, cap))
    attempt("rip", lambda: rip_constant(gram, s, cap))
    attempt("weak_rip", lambda: weak_rip_constant(gram, cone, cap))
    attempt("irr_uniform", lambda: irrepresentable_uniform(gram, cone, cap))

    def part2():
        ok, nset = irrepresentable_signed(gram, cone, part=2, cap=cap, sign_cap=sign_cap)
        report.witnesses["irr_part2"] = nset
        return BoundedValue.exact(1.0 if ok else 0.0, provenance="boolean condition")

    def part3():
        ok, wit = irrepresentable_signed(gram, cone, part=3, cap=cap, sign_cap=sign_cap)
        if ok:
            report.witnesses["irr_part3"] = {"certified_sign_vectors": 2 ** s}
        else:
            report.witnesses["irr_part3"] = {
                "failing_tau_S": list(wit["failing_tau_S"]) if wit else None
            }
        return BoundedValue.exact(1.0 if ok else 0.0, provenance="boolean condition")

    attempt("irr_part2", part2)
    attempt("irr_part3", part3)
    attempt("mutual", lambda: coherence(gram, cone, "mutual"))
    attempt("cumulative", lambda: coherence(gram, cone, "cumulative"))

    def alpha():
        if 2 * s > p:
            raise InvalidParameter("alpha needs 2s <= p")
        phi2s = certified_lower_phi(gram, cone.with_(L=1.0, N=2 * s),
                                    target="restricted_eigenvalue", variant="plain",
                                    config=config, cap=cap)
        return alpha_constant(gram, cone.with_(N=s), float(phi2s.estimate), cap)

    attempt("alpha", alpha)
    attempt("phi_compat", lambda: compatibility_constant(gram, cone, config, sign_cap))
    attempt("phi_re", lambda: restricted_eigenvalue(gram, cone, "plain", config, cap))
    attempt("phi_re_adaptive", lambda: restricted_eigenvalue(gram, cone, "adaptive", config, cap))
    attempt("theta_rr", lambda: restricted_regression(gram, cone, "plain", config, cap, sign_cap))
    attempt("theta_rr_adaptive",
            lambda: restricted_regression(gram, cone, "adaptive", config, cap, sign_cap))

    def phi_routes():
        per_route = {}
        for name in ("lambda_min", "uniform_leverage", "regression@" + str(s),
                     "regression@" + str(cone.N), "regression@" + str(min(2 * s, p)),
                     "weak_rip"):
            bv = certified_lower_phi(gram, cone, target="compatibility", variant="plain",
                                     config=config, cap=cap, routes=(name,))
            if bv.provenance != "route=none":
                per_route[name] = float(bv.estimate)
        report.witnesses["phi_lower_routes"] = per_route
        return certified_lower_phi(gram, cone, target="compatibility", variant="plain",
                                   config=config, cap=cap)

    attempt("phi_lower_routes", phi_routes)
    return report


def _cmd_analyze(config: RunConfig):
    gram = _load_gram(config)
    cone = _cone_for(config, gram.p)
    report = condition_report(gram, cone, config.solver_config(),
                              config.cap_subsets, config.cap_signs)
    return report.to_json_dict(), 0


def _cmd_lasso(config: RunConfig):
    if config.lam is None:
        raise InvalidParameter("command 'lasso' requires --lambda")
    solver = config.solver_config()
    if config.design_path is not None:
        x = load_matrix_csv(config.design_path)
        if config.y_path is None:
            raise InvalidParameter("--design requires --y with the response vector")
        y = load_vector_csv(config.y_path)
        beta0 = None
        epsilon = None
        if config.beta0_path is not None:
            beta0 = load_vector_csv(config.beta0_path)
            if beta0.shape[0] != x.shape[1]:
                raise InvalidParameter(
                    f"beta0 has length {beta0.shape[0]}, expected {x.shape[1]}")
            # with a known truth the realized noise is determined by the data
            epsilon = y - x @ beta0
        problem = NoisyProblem(x, y, beta0=beta0, epsilon=epsilon)
        solution, verdict = solve_noisy(problem, config.lam, solver)
        result = {
            "solution": solution.to_json_dict(),
            "verdict": None if verdict is None else verdict.to_json_dict(),
        }
        skipped = verdict is not None and verdict.premise_ok is False
        return result, (2 if skipped else 0)
    gram = _load_gram(config)
    beta0 = _beta0_for(config, gram.p)
    solution = solve_noiseless(gram, beta0, config.lam, solver)
    support = config.s_members or tuple(int(j) for j in np.flatnonzero(beta0))
    if not support:
        raise InvalidParameter("the target vector is zero; give --S or a nonzero --beta0")
    cone = ConeSpec(support, config.big_l,
                    config.n_set if config.n_set is not None else len(support))
    cone.validate_p(gram.p)
    phi_lower = certified_lower_phi(gram, cone, target="compatibility",
                                    config=solver, cap=config.cap_subsets)
    phi_2s = None
    if 2 * cone.s <= gram.p:
        phi_2s = certified_lower_phi(gram, cone.with_(L=1.0, N=2 * cone.s),
                                     target="restricted_eigenvalue", variant="plain",
                                     config=solver, cap=config.cap_subsets)
    verdict = oracle_verdict(gram, solution, cone, config.lam, phi_lower, phi_2s)
    return {"solution": solution.to_json_dict(), "verdict": verdict.to_json_dict()}, 0


def _cmd_recover(config: RunConfig):
    gram = _load_gram(config)
    beta0 = _beta0_for(config, gram.p)
    beta_lp, recovered = basis_pursuit_recover(gram, beta0, config.solver_config())
    return {
        "beta_lp": [float(v) for v in beta_lp],
        "recovered": bool(recovered),
        "max_abs_error": float(np.max(np.abs(beta_lp - beta0))),
    }, 0


def _cmd_implications(config: RunConfig):
    gram = _load_gram(config)
    cone = _cone_for(config, gram.p)
    verdicts = check_all(gram, cone, config.solver_config(),
                         config.cap_subsets, config.cap_signs)
    result = [v.to_json_dict() for v in verdicts]
    all_skipped = all(v.skipped for v in verdicts)
    return result, (2 if all_skipped else 0)


def _cmd_montecarlo(config: RunConfig):
    if config.n_samples is None or config.p is None:
        raise InvalidParameter("command 'montecarlo' requires --n and --p")
    if config.experiment == "concentration":
        if config.gram_path is not None:
            population = _load_gram(config)
        else:
            population = GramMatrix(np.eye(config.p))
        result = concentration_experiment(config.n_samples, config.p, population,
                                          config.reps, config.t_list, config.seed)
    elif config.experiment == "noise":
        result = noise_bound_experiment(config.n_samples, config.p, config.reps,
                                        config.t_list, config.seed)
    else:
        raise InvalidParameter(f"unknown experiment {config.experiment!r}")
    return result.to_json_dict(), 0


def _cmd_generate(config: RunConfig):
    if config.kind is None:
        raise InvalidParameter("command 'generate' requires --kind")
    params = {}
    if config.p is not None:
        params["p"] = config.p
    if config.s_size is not None:
        params["s"] = config.s_size
    if config.rho is not None:
        params["rho"] = config.rho
    if config.block_size is not None:
        params["block_size"] = config.block_size
    if config.n_samples is not None:
        params["n"] = config.n_samples
    if config.kind == "random_psd":
        params["seed"] = config.seed
        params["jitter"] = config.jitter
    if config.kind == "gaussian_design":
        params["seed"] = config.seed
        params["noise_sd"] = config.noise_sd
    produced = generate(GeneratorSpec(config.kind, params))
    matrix = produced.X if isinstance(produced, NoisyProblem) else produced.entries
    if config.out is not None:
        save_matrix_csv(config.out, matrix)
    else:
        save_matrix_csv(sys.stdout, matrix)
    return None, 0


_COMMANDS = {
    "analyze": _cmd_analyze,
    "lasso": _cmd_lasso,
    "recover": _cmd_recover,
    "implications": _cmd_implications,
    "montecarlo": _cmd_montecarlo,
    "generate": _cmd_generate,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the exit code and writes the report.

    0 on success, 2 when every requested check was skipped on a failed
    premise, 1 on errors.
    """
    if config.command not in _COMMANDS:
        raise InvalidParameter(f"unknown command {config.command!r}")
    start = time.perf_counter()
    result, code = _COMMANDS[config.command](config)
    if result is None:
        return code
    envelope = {
        "meta": {
            "tool": "lasso-audit",
            "version": __version__,
            "command": config.command,
            "config": config.to_json_dict(),
            "seed": config.seed,
            "wall_time_s": time.perf_counter() - start,
        },
        "result": result,
    }
    text = json.dumps(envelope, indent=2, allow_nan=False) + "\n"
    if config.out is not None:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lasso-audit",
        description="Audit design-matrix conditions for l1-penalized least squares.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--gram", dest="gram", default=None,
                         help="dense CSV Gram matrix (row-major, no header)")
        cmd.add_argument("--design", dest="design", default=None,
                         help="dense CSV design matrix; rows are observations")
        cmd.add_argument("--y", dest="y", default=None,
                         help="response vector CSV (row or column)")
        cmd.add_argument("--beta0", dest="beta0", default=None,
                         help="target coefficient vector CSV; default: indicator of S")
        cmd.add_argument("--S", dest="s_members", default=None,
                         help="comma-separated 0-based active indices")
        cmd.add_argument("--L", dest="big_l", type=float, default=1.0,
                         help="cone constant L (default 1)")
        cmd.add_argument("--N", dest="n_set", type=int, default=None,
                         help="enlargement size N (default |S|)")
        cmd.add_argument("--lambda", dest="lam", type=float, default=None,
                         help="l1 penalty level")
        cmd.add_argument("--t", dest="t_list", default="1,2,4",
                         help="comma-separated tail parameters")
        cmd.add_argument("--reps", dest="reps", type=int, default=2000)
        cmd.add_argument("--seed", dest="seed", type=int, default=None,
                         help="root seed; falls back to LASSO_AUDIT_SEED, then 0")
        cmd.add_argument("--cap-subsets", dest="cap_subsets", type=int,
                         default=DEFAULT_SUBSET_CAP)
        cmd.add_argument("--cap-signs", dest="cap_signs", type=int,
                         default=DEFAULT_SIGN_CAP)
        cmd.add_argument("--tol", dest="tol", type=float, default=1e-9)
        cmd.add_argument("--out", dest="out", default=None,
                         help="output path (default: stdout)")
        cmd.add_argument("--threads", dest="threads", type=int, default=1,
                         help="worker cap (accepted for interface stability)")
        cmd.add_argument("--experiment", dest="experiment",
                         choices=("concentration", "noise"), default="concentration")
        cmd.add_argument("--kind", dest="kind", default=None,
                         help="generator kind for the generate command")
        cmd.add_argument("--p", dest="p", type=int, default=None)
        cmd.add_argument("--s", dest="s_size", type=int, default=None)
        cmd.add_argument("--rho", dest="rho", type=float, default=None)
        cmd.add_argument("--block-size", dest="block_size", type=int, default=None)
        cmd.add_argument("--n", dest="n_samples", type=int, default=None)
        cmd.add_argument("--jitter", dest="jitter", type=float, default=0.0)
        cmd.add_argument("--noise-sd", dest="noise_sd", type=float, default=1.0)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        gram_path=args.gram,
        design_path=args.design,
        y_path=args.y,
        beta0_path=args.beta0,
        s_members=parse_index_list(args.s_members) if args.s_members else None,
        big_l=args.big_l,
        n_set=args.n_set,
        lam=args.lam,
        t_list=parse_float_list(args.t_list),
        reps=args.reps,
        seed=_resolve_seed(args.seed),
        cap_subsets=args.cap_subsets,
        cap_signs=args.cap_signs,
        tol=args.tol,
        out=args.out,
        threads=args.threads,
        experiment=args.experiment,
        kind=args.kind,
        p=args.p,
        s_size=args.s_size,
        rho=args.rho,
        block_size=args.block_size,
        n_samples=args.n_samples,
        jitter=args.jitter,
        noise_sd=args.noise_sd,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        return run(config)
    except AuditError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
