"""Command-line front end.

Exit codes: 0 success, 2 input or domain error, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import expfam
from .clustering import (
    MixtureModel,
    compare_solvers,
    fit_mixture,
    hierarchical_simplify,
    kmeans_bhattacharyya,
    random_instances,
)
from .errors import BurbeaRaoError
from .expfam import GaussianParam, get_family
from .gaussian_tailored import solve_tailored
from .generators import (
    QuadraticGenerator,
    RenyiGenerator,
    ShannonGenerator,
    bregman,
    burbea_rao,
    jeffreys_bregman,
    scaled_skew_burbea_rao,
    skew_burbea_rao,
)
from .params import CompositeParam, weighted_sum
from .ppm import ingest_image
from .solver import (
    SolverConfig,
    WeightedSet,
    bregman_left_centroid,
    bregman_right_centroid,
    energy,
    skew_orbit,
    solve_centroid,
)

EXIT_OK, EXIT_INPUT, EXIT_NOCONV = 0, 2, 3
GENERATORS = ("quadratic", "xlogx", "xlogx-x", "renyi")
FAMILIES = ("poisson", "gaussian", "multinomial", "mvgaussian")


class InputError(BurbeaRaoError, ValueError):
    """Malformed command input."""


# ---------------------------------------------------------------------------
# payload parsing
# ---------------------------------------------------------------------------


def _load_json(text_or_path: str):
    """Parse inline JSON, or the contents of a file when prefixed with '@'."""
    text = text_or_path
    if text_or_path.startswith("@"):
        with open(text_or_path[1:]) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc


def _family_dim(name: str, payload) -> int | None:
    if name == "multinomial":
        probs = payload.get("probs") if isinstance(payload, dict) else payload
        if not isinstance(probs, list):
            raise InputError("multinomial payload must be a list of probabilities")
        return len(probs)
    if name == "mvgaussian":
        if not isinstance(payload, dict) or not isinstance(payload.get("mean"), list):
            raise InputError("mvgaussian payload needs a 'mean' list")
        return len(payload["mean"])
    return None


def _make_generator(name: str, dim: int, order: float):
    if name == "quadratic":
        return QuadraticGenerator.identity(dim)
    if name == "xlogx":
        return ShannonGenerator()
    if name == "xlogx-x":
        return ShannonGenerator(extended=True)
    if name == "renyi":
        return RenyiGenerator(order)
    raise InputError(f"unknown generator {name!r}")


def _vector(payload) -> np.ndarray:
    v = np.atleast_1d(np.asarray(payload, dtype=float))
    if v.ndim != 1:
        raise InputError("generator points must be numbers or flat lists")
    return v


class Space:
    """Either a generator on raw vectors or an exponential family on source parameters."""

    def __init__(self, args, sample_payload):
        self.family = None
        if getattr(args, "family", None):
            self.family = get_family(args.family, _family_dim(args.family, sample_payload))
            self.g = self.family.log_normalizer
        else:
            name = args.generator or "quadratic"
            self.g = _make_generator(name, _vector(sample_payload).size, args.order)

    def parse(self, payload) -> CompositeParam:
        if self.family is not None:
            return self.family.to_natural(self.family.source_from_json(payload))
        return self.g.check(CompositeParam(_vector(payload)))

    def source_json(self, theta: CompositeParam):
        if self.family is not None:
            return self.family.source_to_json(self.family.to_source(theta))
        return theta.vec.tolist()


def _read_point_set(args):
    """Weighted point set file: {"family"|"generator": ..., "points": [{"param", "weight", "skew"}]}."""
    obj = _load_json("@" + args.input)
    if not isinstance(obj, dict) or not isinstance(obj.get("points"), list) or not obj["points"]:
        raise InputError("point set file needs a non-empty 'points' list")
    if not args.family and not args.generator:
        args.family = obj.get("family")
        args.generator = obj.get("generator")
        if args.family is None and args.generator is None:
            args.generator = "quadratic"
    entries = obj["points"]
    payloads, weights, skews = [], [], []
    for e in entries:
        if isinstance(e, dict) and "param" in e:
            payloads.append(e["param"])
            weights.append(float(e.get("weight", 1.0)))
            skews.append(float(e.get("skew", 0.5)))
        else:
            payloads.append(e)
            weights.append(1.0)
            skews.append(0.5)
    space = Space(args, payloads[0])
    w = np.asarray(weights)
    if np.any(w < 0.0) or not np.any(w > 0.0):
        raise InputError("weights must be non-negative and not all zero")
    if getattr(args, "alpha", None) is not None:
        skews = [args.alpha] * len(payloads)
    s = WeightedSet([space.parse(p) for p in payloads], w / np.sum(w), np.asarray(skews))
    return space, s, payloads


def _config(args) -> SolverConfig:
    return SolverConfig(tolerance=args.tol, max_iterations=args.max_iters)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(x) -> str:
    return "" if x is None else repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_divergence(args) -> int:
    p_payload, q_payload = _load_json(args.p), _load_json(args.q)
    space = Space(args, p_payload)
    out = {}
    if space.family is not None:
        fam = space.family
        sp, sq = fam.source_from_json(p_payload), fam.source_from_json(q_payload)
        if _family_dim(args.family, q_payload) != _family_dim(args.family, p_payload):
            raise InputError("both payloads must share one dimension")
        out["bhattacharyya"] = expfam.bhattacharyya(fam, sp, sq)
        out["hellinger"] = expfam.hellinger(fam, sp, sq)
        out["kl"] = expfam.kl_divergence(fam, sp, sq)
        if args.alpha is not None:
            out["chernoff_alpha"] = expfam.chernoff_coefficient(fam, sp, sq, args.alpha)
            out["skew_bhattacharyya"] = expfam.skew_bhattacharyya(fam, sp, sq, args.alpha)
    else:
        g = space.g
        p, q = space.parse(p_payload), space.parse(q_payload)
        out["burbea_rao"] = burbea_rao(g, p, q)
        out["bregman"] = bregman(g, p, q)
        out["jeffreys_bregman"] = jeffreys_bregman(g, p, q)
        if args.alpha is not None:
            out["skew_burbea_rao"] = skew_burbea_rao(g, p, q, args.alpha)
            out["scaled_skew_burbea_rao"] = scaled_skew_burbea_rao(g, p, q, args.alpha)
    _emit(json.dumps(out) + "\n", args.out)
    return EXIT_OK


def cmd_centroid(args) -> int:
    space, s, payloads = _read_point_set(args)
    cfg = _config(args)
    if args.method == "tailored":
        fam = space.family
        if fam is None or fam.name.split("(")[0] not in ("mvgaussian", "gaussian"):
            raise InputError("--method tailored needs a Gaussian family")
        gs = [fam.to_source(p) for p in s.points]
        if fam.name == "gaussian":
            gs = [GaussianParam([x.mean], [[x.var]]) for x in gs]
        act = s.active()
        start = gs[0] if len(act) == 1 else None
        if start is None:
            theta0 = weighted_sum(act.points, act.weights)
            src0 = fam.to_source(theta0)
            start = GaussianParam([src0.mean], [[src0.var]]) if fam.name == "gaussian" else src0
        c, rep = solve_tailored(gs, s.weights, cfg, init=start)
        if fam.name == "gaussian":
            centroid = {"mean": float(c.mean[0]), "var": float(c.cov[0, 0])}
        else:
            centroid = {"mean": c.mean.tolist(), "cov": c.cov.tolist()}
        result = {
            "method": "tailored", "centroid": centroid, "iterations": rep.iterations,
            "converged": rep.converged, "energy": rep.energies[-1], "energies": rep.energies,
            "failure": rep.failure,
        }
    else:
        c, rep = solve_centroid(space.g, s, cfg)
        result = {
            "method": "generic", "centroid": space.source_json(c), "iterations": rep.iterations,
            "converged": rep.converged, "energy": energy(space.g, s, c), "energies": rep.energies,
        }
    _emit(json.dumps(result) + "\n", args.out)
    return EXIT_OK if result["converged"] else EXIT_NOCONV


def _is_ppm(path: str) -> bool:
    with open(path, "rb") as fh:
        return fh.read(2) in (b"P3", b"P6")


def _read_points_csv(path: str) -> np.ndarray:
    """Point CSV: a header row, then one row of d numbers per point."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise InputError("point CSV needs a header row and at least one point")
    try:
        pts = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InputError(f"bad point CSV: {exc}") from exc
    if pts.ndim != 2 or pts.shape[1] != len(rows[0]) or not np.all(np.isfinite(pts)):
        raise InputError("point CSV rows must be finite and match the header width")
    return pts


def _points_to_csv(points: np.ndarray, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in points:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def cmd_ingest(args) -> int:
    points = ingest_image(args.input, args.xy_scale)
    _emit(_points_to_csv(points, ["R", "G", "B", "x", "y"]), args.out)
    return EXIT_OK


def cmd_simplify(args) -> int:
    cfg = _config(args)
    points = None
    if _is_ppm(args.input):
        points = ingest_image(args.input, args.xy_scale)
        mixture = fit_mixture(points, args.fit_k, args.seed, cfg)
    elif args.input.lower().endswith(".csv"):
        points = _read_points_csv(args.input)
        mixture = fit_mixture(points, args.fit_k, args.seed, cfg)
    else:
        with open(args.input) as fh:
            try:
                mixture = MixtureModel.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise InputError(f"malformed JSON: {exc}") from exc
    if not 1 <= args.k <= len(mixture):
        raise InputError(f"--k must lie in 1..{len(mixture)}")
    if args.method == "kmeans":
        result = kmeans_bhattacharyya(mixture.components, mixture.weights, args.k, args.seed, cfg)
    else:
        result = hierarchical_simplify(mixture, args.k, cfg)
    _emit(json.dumps(result.to_dict()) + "\n", args.out)
    if args.assign:
        if points is not None:
            labels = result.assign(points)
        else:
            labels = np.array([
                int(np.argmin([expfam.gaussian_bhattacharyya(c, r) for r in result.components]))
                for c in mixture.components
            ])
        with open(args.assign, "w", newline="") as fh:
            fh.write("index\n")
            fh.writelines(f"{int(v)}\n" for v in labels)
    return EXIT_OK


def _read_instances(path):
    obj = _load_json("@" + path)
    if not isinstance(obj, list):
        raise InputError("instances file must hold a list of mixtures")
    out = []
    for item in obj:
        m = MixtureModel.from_dict(item)
        out.append((m.components, m.weights))
    return out


def cmd_compare(args) -> int:
    cfg = _config(args)
    if args.instances:
        instances = _read_instances(args.instances)
    else:
        instances = random_instances(args.count, args.dim, args.components, args.seed)
    report = compare_solvers(instances, cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["instance_id", "energy_generic", "energy_tailored", "winner", "iters_generic",
                "iters_tailored", "failure"])
    for r in report.rows:
        w.writerow([r.instance_id, _fmt(r.energy_generic), _fmt(r.energy_tailored), r.winner,
                    _fmt(r.iters_generic), _fmt(r.iters_tailored), r.failure])
    _emit(buf.getvalue(), args.out)
    print(json.dumps(report.summary()), file=sys.stderr)
    return EXIT_OK


def _orbit_alphas(args) -> list[float]:
    if args.alphas:
        try:
            alphas = [float(a) for a in args.alphas.split(",")]
        except ValueError as exc:
            raise InputError(f"bad --alphas list: {exc}") from exc
    elif args.grid <= 1:
        alphas = [0.5]
    else:
        alphas = np.linspace(1e-3, 1.0 - 1e-3, args.grid).tolist()
    if any(not 0.0 < a < 1.0 for a in alphas):
        raise InputError("orbit skews must lie in (0, 1)")
    return alphas


def cmd_orbit(args) -> int:
    space, s, _ = _read_point_set(args)
    alphas = _orbit_alphas(args)
    cfg = _config(args)
    orbit = skew_orbit(space.g, s, alphas, cfg)
    rows = [("left_bregman", 0.0, bregman_left_centroid(space.g, s))]
    rows += [("skew", a, c) for a, c in zip(alphas, orbit)]
    rows.append(("right_bregman", 1.0, bregman_right_centroid(s)))
    width = rows[0][2].flat().size
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "alpha"] + [f"c{i}" for i in range(width)])
    for label, a, c in rows:
        w.writerow([label, _fmt(a)] + [_fmt(v) for v in c.flat()])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_solver_flags(p):
    p.add_argument("--tol", type=float, default=1e-10, help="relative step tolerance")
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default: stdout)")


def _add_space_flags(p):
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--family", choices=FAMILIES)
    grp.add_argument("--generator", choices=GENERATORS)
    p.add_argument("--order", type=float, default=0.5, help="Renyi order for --generator renyi")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="burbearao", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", help="divergences between two parameters")
    _add_space_flags(p)
    p.add_argument("p", help="JSON payload (or @file)")
    p.add_argument("q", help="JSON payload (or @file)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("centroid", help="(skew) Burbea-Rao centroid of a weighted point set")
    _add_space_flags(p)
    p.add_argument("input", help="point set JSON file")
    p.add_argument("--method", choices=("generic", "tailored"), default="generic")
    p.add_argument("--alpha", type=float, help="uniform skew overriding per-point skews")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_centroid)

    p = sub.add_parser("ingest", help="convert a PPM image to an (R, G, B, x, y) point CSV")
    p.add_argument("input", help="PPM image (P3 or P6, 8-bit)")
    p.add_argument("--xy-scale", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("simplify", help="simplify a Gaussian mixture, or one fitted to a PPM image or point CSV")
    p.add_argument("input", help="mixture JSON, PPM image, or point CSV (.csv)")
    p.add_argument("--k", type=int, required=True, help="target component count")
    p.add_argument("--fit-k", type=int, default=48, help="components fitted to an image")
    p.add_argument("--method", choices=("hierarchical", "kmeans"), default="hierarchical")
    p.add_argument("--xy-scale", type=float, default=1.0)
    p.add_argument("--assign", help="write hard assignments as CSV here")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("compare", help="generic vs tailored Gaussian centroid solvers")
    p.add_argument("--instances", help="JSON list of mixtures (default: random instances)")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--components", type=int, default=5)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("orbit", help="skew centroid orbit between the sided Bregman centroids")
    _add_space_flags(p)
    p.add_argument("input", help="point set JSON file")
    p.add_argument("--grid", type=int, default=11)
    p.add_argument("--alphas", help="comma-separated skews, overrides --grid")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_orbit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BurbeaRaoError, ValueError, OSError, KeyError, TypeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"burbearao {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
