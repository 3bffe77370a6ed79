"""Command-line front end and the phi prescription mini-grammar.

Subcommands
-----------
solve        full fixed-point run: iterate, normalize, write result JSON and
             the per-step trace CSV (and an embedding CSV on request).
minkowski    one prescribed-curvature solve; writes the body record and an
             error report.
functionals  evaluate A_p, B_p, Omega_p and V on the unit cap for the given
             parameters; emits a JSON report.
verify       run the invariant suite and print a pass/fail table.
embed        write the embedded curve/meridian of the unit cap, or of the
             body solving the given prescription, as CSV.

Prescription grammar (the --phi argument)
-----------------------------------------
const:<a>            constant a
znpoly:<c0,c1,...>   polynomial in zeta_n = cos(beta) - cos(theta)
cos2k:<a0,k,a>       a0 + a*cos(2*k*beta); arc mode only
table:<path>         CSV with header beta,value (radians, increasing beta)

Angles are radians everywhere; every result JSON carries the analytic cap
measure as a sanity anchor.  Outputs are plain JSON/CSV and deterministic
for a fixed configuration and seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import body as body_mod
from . import functionals as fun
from .domain import (CapDomain, integrate, make_domain, robin_residual, tau_of)
from .errors import CapillaryError, ParameterError, PhiSpecError
from .lp_iteration import (PhiSpec, check_trace_monotone, fixed_point_residual,
                           iterate, lambda_op, normalize, refined_residual)
from .minkowski import SolveOptions, check_compatibility, solve, solve_info

SUBCOMMANDS = ("solve", "minkowski", "functionals", "verify", "embed")


# ----------------------------------------------------------------------
# phi grammar
# ----------------------------------------------------------------------

def _parse_floats(text: str, where: str):
    parts = text.split(",")
    out = []
    for i, tok in enumerate(parts):
        try:
            out.append(float(tok))
        except ValueError:
            raise PhiSpecError(
                f"bad number {tok!r} in {where} (item {i})", position=i) from None
    return out


def _load_table(path: str, domain: CapDomain):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["beta", "value"]:
            raise PhiSpecError(f"{path}: expected header 'beta,value'")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    beta = np.array([r[0] for r in rows])
    vals = np.array([r[1] for r in rows])
    if beta.size < 4:
        raise PhiSpecError(f"{path}: need at least 4 rows")
    if np.any(np.diff(beta) <= 0):
        k = int(np.argmax(np.diff(beta) <= 0))
        raise PhiSpecError(f"{path}: beta not strictly increasing at row {k + 1}",
                           position=k + 1)
    if beta[0] > 1e-12 or beta[-1] < domain.theta - 1e-12:
        raise PhiSpecError(
            f"{path}: table covers [{beta[0]:.6g}, {beta[-1]:.6g}], "
            f"need [0, {domain.theta:.6g}]")
    return CubicSpline(beta, vals, bc_type="not-a-knot")


def parse_phi(spec: str, domain: CapDomain) -> PhiSpec:
    """Parse a prescription string into a validated PhiSpec.

    Rejects non-positive prescriptions with the location of the minimum and
    malformed strings with the offending position.
    """
    if ":" not in spec:
        raise PhiSpecError(f"missing ':' in prescription {spec!r}", position=0)
    kind, _, arg = spec.partition(":")
    if kind == "const":
        vals = _parse_floats(arg, "const")
        if len(vals) != 1:
            raise PhiSpecError(f"const takes one number, got {len(vals)}",
                               position=1)
        a = vals[0]
        fn = lambda b: np.full_like(np.asarray(b, dtype=float), a)
    elif kind == "znpoly":
        coeffs = _parse_floats(arg, "znpoly")
        ct = np.cos(domain.theta)
        fn = lambda b: np.polynomial.polynomial.polyval(np.cos(b) - ct, coeffs)
    elif kind == "cos2k":
        vals = _parse_floats(arg, "cos2k")
        if len(vals) != 3:
            raise PhiSpecError(f"cos2k needs a0,k,a; got {len(vals)} items",
                               position=len(vals))
        if domain.mode != "arc":
            raise PhiSpecError("cos2k prescriptions are arc mode only")
        a0, k, a = vals
        fn = lambda b: a0 + a * np.cos(2.0 * k * np.asarray(b, dtype=float))
    elif kind == "table":
        spl = _load_table(arg, domain)
        fn = lambda b: np.asarray(spl(b), dtype=float)
    else:
        raise PhiSpecError(f"unknown prescription kind {kind!r}", position=0)
    try:
        return PhiSpec(domain, domain.field(fn), provenance=spec, evaluator=fn)
    except PhiSpecError as err:
        raise PhiSpecError(f"{spec!r}: {err}") from None


# ----------------------------------------------------------------------
# configuration and orchestration
# ----------------------------------------------------------------------

@dataclass
class RunConfig:
    subcommand: str
    n: int = 2
    theta: float = np.pi / 3
    p: float | None = None
    phi: str | None = None
    grid: int = 257
    tol: float = 1e-10
    ratio_tol: float = 1e-8
    residual_tol: float = 1e-6
    max_iter: int = 500
    seed: int = 0
    out: str | None = None
    trace: str | None = None
    embed_out: str | None = None
    quick: bool = False

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ParameterError(f"unknown subcommand {self.subcommand!r}")
        if self.subcommand != "verify" and not (0 < self.theta < np.pi / 2):
            raise ParameterError("theta must lie in (0, pi/2) radians")
        if self.subcommand in ("solve", "functionals") and self.p is None:
            raise ParameterError(f"{self.subcommand} requires --p")
        if self.subcommand in ("solve", "minkowski") and self.phi is None:
            raise ParameterError(f"{self.subcommand} requires --phi")

    def mode(self) -> str:
        return "arc" if self.n == 2 else "axisymmetric"


def _domain_for(config: RunConfig) -> CapDomain:
    return make_domain(config.n, config.theta, config.grid, config.mode())


def _write_json(payload: dict, path: str | None):
    text = json.dumps(payload, indent=1)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_embed_csv(b, path: str):
    pts = body_mod.embed(b)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(pts.shape[1])])
        for row in pts:
            writer.writerow([repr(float(x)) for x in row])


def _run_solve(config: RunConfig) -> int:
    domain = _domain_for(config)
    phi = parse_phi(config.phi, domain)
    opts = SolveOptions(newton_tol=config.tol)
    final, trace = iterate(phi, config.p, domain, opts,
                           ratio_tol=config.ratio_tol,
                           residual_tol=config.residual_tol,
                           max_iter=config.max_iter)
    result = {
        "n": config.n, "theta": config.theta, "p": config.p,
        "phi_spec": config.phi, "grid": config.grid, "seed": config.seed,
        "cap_measure": domain.cap_measure(),
        "converged": trace.converged, "iterations": trace.iterations,
        "stop_reason": trace.stop_reason,
        "V": trace.V[-1] if trace.V.size else None,
        "residual_final": trace.residual[-1] if trace.residual.size else None,
    }
    if trace.converged:
        final = normalize(final, phi, config.p)
        result["V"] = body_mod.volume(final)
        result["residual_final"] = fixed_point_residual(final, phi, config.p, c=1.0)
        result["residual_refined"] = refined_residual(final, phi, config.p)
    result["support"] = final.s.values.tolist()
    result["f"] = body_mod.curvature_function(final).values.tolist()
    _write_json(result, config.out)
    if config.trace:
        trace.to_csv(config.trace)
    if config.embed_out:
        _write_embed_csv(final, config.embed_out)
    return 0 if trace.converged else 1


def _run_minkowski(config: RunConfig) -> int:
    domain = _domain_for(config)
    phi = parse_phi(config.phi, domain)
    compat = check_compatibility(domain, phi.values)
    solved, info = solve_info(domain, phi.values, SolveOptions(newton_tol=config.tol))
    report = {
        "n": config.n, "theta": config.theta, "phi_spec": config.phi,
        "grid": config.grid, "cap_measure": domain.cap_measure(),
        "compatibility": {"positive": compat.positive, "even": compat.even,
                          "orthogonality": compat.orthogonality.tolist()},
        "errors": info,
        "support": solved.s.values.tolist(),
    }
    _write_json(report, config.out)
    if config.embed_out:
        _write_embed_csv(solved, config.embed_out)
    return 0


def _run_functionals(config: RunConfig) -> int:
    domain = _domain_for(config)
    phi = (parse_phi(config.phi, domain) if config.phi
           else PhiSpec.from_function(domain, lambda b: np.ones_like(b),
                                      provenance="const:1"))
    cap = body_mod.cap_body(domain, 1.0)
    rep = fun.report(cap, phi.values, config.p)
    payload = rep.as_dict()
    payload.update({"body": "unit cap", "phi_spec": phi.provenance,
                    "grid": config.grid, "cap_measure": domain.cap_measure(),
                    "seed": config.seed})
    _write_json(payload, config.out)
    return 0


def _run_embed(config: RunConfig) -> int:
    domain = _domain_for(config)
    if config.phi:
        phi = parse_phi(config.phi, domain)
        b = solve(domain, phi.values, SolveOptions(newton_tol=config.tol))
    else:
        b = body_mod.cap_body(domain, 1.0)
    path = config.embed_out or config.out
    if not path:
        raise ParameterError("embed needs --embed-out (or --out) for the CSV")
    _write_embed_csv(b, path)
    return 0


# ----------------------------------------------------------------------
# verify: the invariant suite
# ----------------------------------------------------------------------

def _vq_quadrature(res: int, seed: int):
    worst = 0.0
    for n, mode, th in ((2, "arc", np.pi / 3), (3, "axisymmetric", np.pi / 4)):
        errs = []
        for r in (res, 2 * (res - 1) + 1):
            d = make_domain(n, th, r, mode)
            g = d.field(lambda b: np.exp(np.cos(b)))
            coarse = integrate(d, g)
            errs.append(coarse)
        d = make_domain(n, th, res, mode)
        exact_mass = abs(d.weights.sum() - d.cap_measure())
        worst = max(worst, exact_mass)
        conv = abs(errs[0] - errs[1])
        if not np.all(d.weights > 0):
            return False, "non-positive weight"
        if exact_mass > 1e-12:
            return False, f"cap measure off by {exact_mass:.2e}"
        if conv > 10 * d.h**2:
            return False, f"quadrature not converging ({conv:.2e})"
    return True, f"cap measure exact to {worst:.1e}"


def _vq_tau_robin(res: int, seed: int):
    for n, mode, th in ((2, "arc", np.pi / 3), (3, "axisymmetric", np.pi / 4)):
        d = make_domain(n, th, res, mode)
        tol = 10 * d.h**2
        cap = body_mod.cap_body(d, 1.3)
        eigs = tau_of(d, cap.s).eigenvalues()
        if np.abs(eigs - 1.3).max() > tol:
            return False, f"cap tau deviates {np.abs(eigs - 1.3).max():.2e}"
        if robin_residual(d, cap.s) > tol:
            return False, "cap violates contact condition"
        flat = d.field(np.ones(d.num_nodes))
        if abs(robin_residual(d, flat) - d.cot_theta) > tol:
            return False, "constant-field residual is not cot(theta)"
        rng = np.random.default_rng(seed)
        a, b = d.field(rng.random(d.num_nodes)), d.field(rng.random(d.num_nodes))
        lin = tau_of(d, d.field(2.0 * a.values - 3.0 * b.values)).matrices
        ref = 2.0 * tau_of(d, a).matrices - 3.0 * tau_of(d, b).matrices
        if np.abs(lin - ref).max() > 1e-9:
            return False, "tau is not linear"
    return True, "tau identity, linearity, contact residuals"


def _vq_body(res: int, seed: int):
    d = make_domain(2, np.pi / 3, res, "arc")
    tol = 10 * d.h**2
    cap = body_mod.cap_body(d, 1.0)
    v_exact = np.pi / 3 - np.sin(np.pi / 3) * np.cos(np.pi / 3)
    if abs(body_mod.volume(cap) - v_exact) > tol:
        return False, "segment area mismatch"
    lam = 1.7
    big = cap.scaled(lam)
    dv = abs(body_mod.volume(big) - lam**2 * body_mod.volume(cap))
    pts = body_mod.embed(cap)
    ct = np.cos(d.theta)
    radii = np.linalg.norm(pts + np.array([0.0, ct]), axis=1)
    if np.abs(radii - 1.0).max() > tol:
        return False, "embedded cap is not a unit circle"
    if abs(pts[0, 1]) > tol or abs(pts[-1, 1]) > tol:
        return False, "embedded rim not on the floor"
    if dv > 1e-10:
        return False, "dilation covariance broken"
    return True, "volumes, dilation, embedding"


def _vq_minkowski(res: int, seed: int):
    errs = []
    for r in (res, 2 * (res - 1) + 1):
        d = make_domain(2, np.pi / 3, r, "arc")
        got = solve(d, d.field(np.ones(d.num_nodes)))
        want = body_mod.cap_body(d, 1.0)
        errs.append(np.abs(got.s.values - want.s.values).max())
    order = np.log2(errs[0] / errs[1])
    if errs[0] > 10 * (np.pi / 3 / (res - 1)) ** 2:
        return False, f"cap recovery error {errs[0]:.2e}"
    if order < 1.9:
        return False, f"convergence order {order:.2f} < 1.9"
    d3 = make_domain(3, np.pi / 4, res, "axisymmetric")
    got3 = solve(d3, d3.field(4.0 * np.ones(d3.num_nodes)))
    want3 = body_mod.cap_body(d3, 2.0)
    if np.abs(got3.s.values - want3.s.values).max() > 10 * d3.h**2:
        return False, "axisymmetric cap recovery failed"
    return True, f"cap recovery, order {order:.2f}"


def _random_body(domain: CapDomain, rng: np.random.Generator):
    k = rng.integers(1, 4)
    amp = rng.uniform(-0.35, 0.35)
    base = rng.uniform(0.7, 1.6)
    f = base * (1.0 + amp * np.cos(2.0 * k * domain.node_beta()))
    return solve(domain, domain.field(np.maximum(f, 0.05)))


def _vq_minkowski_inequality(res: int, seed: int):
    d = make_domain(2, np.pi / 3, res, "arc")
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(10):
        K, L = _random_body(d, rng), _random_body(d, rng)
        lhs = body_mod.mixed_volume(K, L)
        rhs = body_mod.volume(K) ** 0.5 * body_mod.volume(L) ** 0.5
        worst = min(worst, lhs - rhs)
        if lhs < rhs - 1e-8:
            return False, f"mixed volume bound violated by {rhs - lhs:.2e}"
    K = _random_body(d, rng)
    L = K.scaled(1.9)
    eq = abs(body_mod.mixed_volume(K, L)
             - body_mod.volume(K) ** 0.5 * body_mod.volume(L) ** 0.5)
    if eq > 1e-8:
        return False, f"homothetic equality off by {eq:.2e}"
    return True, f"min margin {worst:.2e}, homothetic exact"

def _vq_identity(res: int, seed: int):
    d = make_domain(2, np.pi / 3, res, "arc")
    rng = np.random.default_rng(seed)
    phi = PhiSpec.from_function(d, lambda b: 1.0 + 0.3 * np.cos(2.0 * b))
    for p in (-1.0, 0.0, 0.5):
        for _ in range(3):
            sig = _random_body(d, rng)
            img = lambda_op(sig, phi, p)
            rep = fun.check_identity_and_inequalities(sig, img, phi.values, p)
            if not rep.identity_ok:
                return False, f"identity off by {rep.identity_rel_error:.2e} at p={p}"
            if not rep.inequality_ok:
                return False, f"inequality violated at p={p}"
    return True, "identity and inequality across p"


def _vq_fixed_point(res: int, seed: int):
    d = make_domain(2, np.pi / 3, res, "arc")
    cap = solve(d, d.field(np.ones(d.num_nodes)))
    for p in (-1.5, -0.5, 0.0, 0.5):
        phi_vals = (body_mod.curvature_function(cap).values
                    * cap.s.values ** (1.0 - p))
        phi = PhiSpec.from_field(d, d.field(phi_vals))
        img = lambda_op(cap, phi, p)
        dev = np.abs(img.s.values - cap.s.values).max()
        if dev > 1e-8:
            return False, f"fixed point drifts {dev:.2e} at p={p}"
        mu_img = lambda_op(cap, PhiSpec.from_field(d, d.field(7.0 * phi_vals)), p)
        if np.abs(mu_img.s.values - img.s.values).max() > 1e-12:
            return False, "phi rescaling changed the image"
    return True, "caps are exact fixed points; phi-scale invariant"


def _vq_monotone(res: int, seed: int):
    # the per-step slack 1e-10 needs the rim-extrapolation bias (~h^4)
    # below it, which holds from 257 nodes up
    res = max(res, 257)
    d = make_domain(2, np.pi / 3, res, "arc")
    phi = PhiSpec.from_function(d, lambda b: 1.0 + 0.3 * np.cos(2.0 * b))
    for p in (-1.0, 0.0, 0.5):
        final, trace = iterate(phi, p, d)
        if not trace.converged:
            return False, f"no convergence at p={p}: {trace.stop_reason}"
        bad = check_trace_monotone(trace, p)
        if bad:
            return False, bad[0]
        if trace.V.min() < trace.V[-1] - 1e-10 or trace.V.max() > trace.V[0] + 1e-10:
            return False, "volume left its sandwich"
        post = normalize(final, phi, p)
        if fixed_point_residual(post, phi, p, c=1.0) > 1e-5:
            return False, "normalized residual too large"
    return True, "Lyapunov traces monotone, limits normalized"


def _vq_functionals(res: int, seed: int):
    d = make_domain(2, np.pi / 3, res, "arc")
    cap = body_mod.cap_body(d, 1.0)
    phi = d.field(np.ones(d.num_nodes))
    a1 = fun.A_p(cap, phi, 1.0)
    v_exact = np.pi / 3 - np.sin(np.pi / 3) * np.cos(np.pi / 3)
    if abs(a1 - 1.0 / (4.0 * v_exact)) > 10 * d.h**2:
        return False, "A_1 disagrees with 1/(4V)"
    lam = 2.3
    if abs(fun.A_p(cap.scaled(lam), phi, -1.0) - fun.A_p(cap, phi, -1.0)) > 1e-12:
        return False, "A_p not dilation invariant"
    om = fun.Omega_p(cap, phi, 0.5)
    if abs(om - d.cap_measure()) > 10 * d.h**2:
        return False, "Omega is not the cap measure on the unit cap"
    return True, "frozen values and dilation invariance"


def _vq_serialization(res: int, seed: int):
    import tempfile
    import os
    d = make_domain(2, np.pi / 4, res, "arc")
    rng = np.random.default_rng(seed)
    b = _random_body(d, rng)
    with tempfile.TemporaryDirectory() as td:
        path = os.path.join(td, "body.json")
        body_mod.save_body(b, path)
        again = body_mod.load_body(path)
        if not np.array_equal(again.s.values, b.s.values):
            return False, "serialization round trip not exact"
        body_mod.save_body(again, path + "2")
        if open(path).read() != open(path + "2").read():
            return False, "serialization not deterministic"
    return True, "round trip bit-exact"


VERIFY_CHECKS = [
    ("quadrature", _vq_quadrature),
    ("tau and contact condition", _vq_tau_robin),
    ("body geometry", _vq_body),
    ("prescribed-curvature solve", _vq_minkowski),
    ("mixed-volume inequality", _vq_minkowski_inequality),
    ("functional identity", _vq_identity),
    ("fixed points", _vq_fixed_point),
    ("monotone iteration", _vq_monotone),
    ("functional values", _vq_functionals),
    ("serialization", _vq_serialization),
]


def _run_verify(config: RunConfig) -> int:
    res = 129 if config.quick else 257
    failures = 0
    print(f"invariant suite at resolution {res} (seed {config.seed})")
    for name, fn in VERIFY_CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn(res, config.seed)
        except CapillaryError as err:
            ok, detail = False, f"{type(err).__name__}: {err}"
        dt = time.perf_counter() - t0
        status = "PASS" if ok else "FAIL"
        print(f"  {status}  {name:<28s} {dt:6.2f}s  {detail}")
        failures += 0 if ok else 1
    print(f"{len(VERIFY_CHECKS) - failures}/{len(VERIFY_CHECKS)} checks passed")
    return 0 if failures == 0 else 1


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def run(config: RunConfig) -> int:
    """Dispatch a validated configuration; returns the process exit code."""
    handler = {
        "solve": _run_solve,
        "minkowski": _run_minkowski,
        "functionals": _run_functionals,
        "verify": _run_verify,
        "embed": _run_embed,
    }[config.subcommand]
    return handler(config)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capminkowski",
        description="capillary Minkowski-type problems on spherical caps")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--n", type=int, default=2, help="ambient dimension (2 or 3)")
    parser.add_argument("--theta", type=float, default=None,
                        help="contact angle in radians, in (0, pi/2)")
    parser.add_argument("--p", type=float, default=None,
                        help="exponent in (-n, 1) (solve, functionals)")
    parser.add_argument("--phi", type=str, default=None,
                        help="prescription: const:a | znpoly:c0,c1,.. | "
                             "cos2k:a0,k,a | table:path")
    parser.add_argument("--grid", type=int, default=257, help="beta node count")
    parser.add_argument("--tol", type=float, default=1e-10,
                        help="solver residual tolerance")
    parser.add_argument("--stop-tol", type=str, default="1e-8,1e-6",
                        help="iteration stop: RATIO_TOL[,RESIDUAL_TOL]")
    parser.add_argument("--max-iter", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized checks; recorded in output")
    parser.add_argument("--out", type=str, default=None, help="result JSON path")
    parser.add_argument("--trace", type=str, default=None, help="trace CSV path")
    parser.add_argument("--embed-out", type=str, default=None,
                        help="embedding CSV path")
    parser.add_argument("--quick", action="store_true",
                        help="verify: smaller grids, under a minute")
    return parser


def config_from_args(args) -> RunConfig:
    stop = args.stop_tol.split(",")
    ratio_tol = float(stop[0])
    residual_tol = float(stop[1]) if len(stop) > 1 else max(ratio_tol, 1e-6)
    theta = args.theta
    if theta is None:
        if args.subcommand != "verify":
            raise ParameterError(f"{args.subcommand} requires --theta (radians)")
        theta = np.pi / 3
    return RunConfig(
        subcommand=args.subcommand, n=args.n, theta=theta, p=args.p,
        phi=args.phi, grid=args.grid, tol=args.tol, ratio_tol=ratio_tol,
        residual_tol=residual_tol, max_iter=args.max_iter, seed=args.seed,
        out=args.out, trace=args.trace, embed_out=args.embed_out,
        quick=args.quick)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return run(config_from_args(args))
    except CapillaryError as err:
        payload = {"error": type(err).__name__, "message": str(err)}
        for attr in ("residual", "tolerance", "min_value", "node",
                     "min_eigenvalue", "position", "last_residual"):
            if getattr(err, attr, None) is not None:
                payload[attr] = getattr(err, attr)
        print(json.dumps(payload), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
