"""``heightlab`` command line.

Exit status: 0 on success, 1 when the computation raises a domain error
(an error report is written to ``--out`` if given), 2 on usage errors
(argparse; nothing is written).

Artifact formats (every file starts with a ``# heightlab/1`` line):

* points CSV: ``z1..zm,is_boundary``
* field CSV: ``z1..zm,h``
* surface tension CSV: ``m,s1..sm,n,ent`` rows per measured size, then
  ``m,s1..sm,inf,ent`` rows holding the extrapolated value
* reports: JSON; every ``--out`` also gets a ``<out>.manifest.json``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import enumeration as en
from . import verify as vf
from .errors import HeightLabError
from .height import AffineProfile, affine_height, profile_from_json, read_height_csv, rounded_profile_heights
from .kirszbraun import PartialHeightFunction, extend_max, extend_min
from .lattice import ContinuumDomain, discretize, fraction_str
from .persist import FORMAT_VERSION, cache_table, config_hash, load_table, write_manifest
from .sampler import RNG_ALGORITHM, ExactSampler, GlauberChain, emit_field
from .height import HeightFunction
from .simplicial import SimplexDomain, approximation_sweep, simplices_inside

EPILOG = __doc__.split("\n\n", 2)[2]


def _frac(text: str) -> Fraction:
    return Fraction(text)


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def _domain(path) -> ContinuumDomain:
    return ContinuumDomain.from_json(_load_json(path))


def _profile(spec: str):
    """``affine:s1,..,sm,b`` inline, otherwise a profile JSON file."""
    if spec.startswith("affine:"):
        vals = [Fraction(v) for v in spec[len("affine:"):].split(",")]
        return AffineProfile(tuple(vals[:-1]), vals[-1])
    return profile_from_json(_load_json(spec))


def _boundary_values(spec: str, Dn):
    """Microscopic boundary data on ∂R_n.

    ``affine:s..,b`` gives the lattice affine height function ``[s.z + b]_z``;
    a profile file gives the parity rounding of ``n * p(z/n)``.
    """
    pts = sorted(Dn.boundary)
    if spec.startswith("affine:"):
        p = _profile(spec)
        return {z: affine_height(p.s, p.b, z) for z in pts}
    return rounded_profile_heights(_profile(spec), pts, Dn.n)


def _model(spec: dict | None, threads: int):
    spec = spec or {"type": "closed"}
    if spec["type"] == "closed":
        return en.ClosedForm1D()
    if spec["type"] == "table":
        return load_table(spec["path"])
    if spec["type"] == "build":
        return en.build_surface_tension_table(int(spec["m"]), spec.get("grid", 5), spec["n"], threads=threads)
    raise ValueError(f"unknown model type {spec['type']!r}")


def _write(path, text: str | bytes) -> Path:
    path = Path(path)
    if isinstance(text, bytes):
        path.write_bytes(text)
    else:
        path.write_text(text)
    return path


def _header(kind: str, config: dict) -> str:
    return f"# {FORMAT_VERSION} {kind} config_sha256={config_hash(config)}\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_discretize(a, config):
    Dn = discretize(_domain(a.domain), a.n)
    print(f"points {len(Dn)}\nboundary {len(Dn.boundary)}")
    if a.out:
        return [_write(a.out, _header("points", config) + Dn.to_csv())], [a.domain]
    return [], [a.domain]


def cmd_extend(a, config):
    Dn = discretize(_domain(a.domain), a.n)
    pins = read_height_csv(Path(a.pins).read_text())
    h = (extend_min if a.mode == "min" else extend_max)(PartialHeightFunction(Dn, pins))
    out = []
    if a.out:
        out = emit_field(h, a.out, header=f"config_sha256={config_hash(config)}")
    else:
        sys.stdout.write(h.to_csv())
    return out, [a.domain, a.pins]


def _constraint(a, Dn):
    c = en.SiteConstraint()
    if a.boundary:
        hB = _boundary_values(a.boundary, Dn)
        c = en.delta_boundary_constraint(Dn, hB, a.delta) if a.delta is not None else en.SiteConstraint.pinned(hB)
    if a.ball:
        c = c.intersect(en.ball_constraint(Dn, _profile(a.ball), a.radius))
    return c


def cmd_count(a, config):
    Dn = discretize(_domain(a.domain), a.n)
    res = en.count_constrained(Dn, _constraint(a, Dn), threads=a.threads)
    report = {"count": str(res.count), "sites": res.site_count, "entropy": res.entropy}
    print(f"count {res.count}")
    print(f"entropy {res.entropy!r}")
    if a.out:
        return [_write(a.out, json.dumps(report, indent=2) + "\n")], [a.domain]
    return [], [a.domain]


def cmd_surface_tension(a, config):
    model = en.build_surface_tension_table(a.m, a.grid, a.n, threads=a.threads)
    if a.out:
        return [cache_table(model, a.out)], []
    from .persist import table_body

    sys.stdout.write(table_body(model))
    return [], []


def cmd_approximate(a, config):
    R = _domain(a.domain)
    p = _profile(a.profile)
    scales = [Fraction(s) for s in a.scales.split(",")]
    result, reports = approximation_sweep(p, R, a.eps, scales=scales)
    out = {"epsilon": fraction_str(a.eps), "passing_scale": fraction_str(result[2].scale) if result else None,
           "inconclusive": result is None, "reports": [r.to_dict() for r in reports]}
    text = json.dumps(out, indent=2, default=str) + "\n"
    sys.stdout.write(text) if not a.out else None
    written = [_write(a.out, text)] if a.out else []
    if a.mesh and result:
        written.append(_write(a.mesh, json.dumps(result[1].to_json(), indent=2) + "\n"))
    return written, [a.domain]


def cmd_minimize(a, config):
    R = _domain(a.domain)
    model = _model(json.loads(a.model) if a.model else None, a.threads)
    res = vf.minimize_macro_entropy(R, _profile(a.boundary), a.scale, model)
    out = {"E": res.value, "iterations": res.iterations, "converged": res.converged,
           "profile": res.profile.to_json()}
    print(f"E {res.value!r}")
    if a.out:
        return [_write(a.out, json.dumps(out, indent=2, default=str) + "\n")], [a.domain]
    return [], [a.domain]


def cmd_sample(a, config):
    Dn = discretize(_domain(a.domain), a.n)
    c = en.SiteConstraint()
    if a.boundary:
        hB = _boundary_values(a.boundary, Dn)
        c = en.delta_boundary_constraint(Dn, hB, a.delta) if a.delta is not None else en.SiteConstraint.pinned(hB)
    if a.mode == "exact":
        vals = ExactSampler(Dn, c).sample(a.seed).values
        label = "exact"
    else:
        S = GlauberChain(Dn, c).run(a.seed, a.sweeps, chains=1, threads=a.threads)
        vals = dict(zip(Dn.points, S[0].tolist()))
        label = f"approximate(glauber sweeps={a.sweeps})"
    h = HeightFunction(Dn, vals)
    meta = f"mode={label} seed={a.seed} rng={RNG_ALGORITHM} config_sha256={config_hash(config)}"
    return emit_field(h, a.out, a.ppm, header=meta), [a.domain]


def cmd_verify(a, config):
    cfg = _load_json(a.config)
    model = _model(cfg.get("model"), a.threads)
    t = a.threads
    if a.claim == "profile":
        R = ContinuumDomain.from_json(cfg["domain"])
        p = profile_from_json(cfg["profile"])
        if cfg.get("kind", "simplicial") == "simplicial":
            K = simplices_inside(R, Fraction(cfg.get("scale", "1")))
            rep = vf.check_simplicial_profile(K, p, model, Fraction(cfg["epsilon"]), cfg["n"],
                                              cfg["tolerance"], threads=t)
        else:
            rep = vf.check_general_profile(p, R, model, Fraction(cfg["delta"]), cfg["n"], cfg["tolerance"],
                                           threads=t)
    elif a.claim == "variational":
        rep = vf.check_variational(ContinuumDomain.from_json(cfg["domain"]), profile_from_json(cfg["boundary"]),
                                   model, Fraction(cfg["delta"]), cfg["n"], Fraction(cfg["scale"]),
                                   cfg["tolerance"], threads=t)
    elif a.claim == "ldp":
        events = {name: None if balls is None else
                  [vf.Ball(profile_from_json(b["center"]), Fraction(b["radius"]), bool(b.get("closed", False)))
                   for b in balls] for name, balls in cfg["events"].items()}
        rep = vf.ldp_report(ContinuumDomain.from_json(cfg["domain"]), profile_from_json(cfg["boundary"]), model,
                            Fraction(cfg["delta"]), cfg["n"], Fraction(cfg["scale"]), events, threads=t)
    else:
        rep = vf.check_robustness_lemmas(cfg.get("seed", 0), cfg.get("instances", 50), cfg.get("n", 24), threads=t)
    print(f"{rep.claim}: {'pass' if rep.verdict else 'fail'}")
    text = rep.to_json() + "\n"
    if a.out:
        return [_write(a.out, text)], [a.config]
    sys.stdout.write(text)
    return [], [a.config]


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heightlab", description="Exact counting and entropy of lattice height "
                                     "functions.", epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads for the counting engine (results do not depend on it)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=func)
        return p

    p = add("discretize", cmd_discretize, "lattice points R_n of a continuum domain")
    p.add_argument("--domain", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")

    p = add("extend", cmd_extend, "minimal or maximal extension of pinned values")
    p.add_argument("--domain", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pins", required=True, help="CSV z1..zm,h")
    p.add_argument("--mode", choices=("min", "max"), default="min")
    p.add_argument("--out")

    p = add("count", cmd_count, "exact number of height functions and their entropy")
    p.add_argument("--domain", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--boundary", help="affine:s1,..,sm,b or profile JSON")
    p.add_argument("--delta", type=_frac, help="boundary tolerance; exact boundary when omitted")
    p.add_argument("--ball", help="profile for a sup-norm ball constraint")
    p.add_argument("--radius", type=_frac, default=Fraction(1, 4))
    p.add_argument("--out")

    p = add("surface-tension", cmd_surface_tension, "tabulate ent_n(s) and extrapolate")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--grid", type=int, required=True, help="slope points per axis")
    p.add_argument("--n", type=_int_list, required=True, help="comma separated cube sizes")
    p.add_argument("--out")

    p = add("approximate", cmd_approximate, "simplicial approximation sweep of a profile")
    p.add_argument("--domain", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--eps", type=_frac, required=True)
    p.add_argument("--scales", default="1/2,1/4,1/8,1/16")
    p.add_argument("--out")
    p.add_argument("--mesh", help="write the passing mesh profile JSON here")

    p = add("minimize", cmd_minimize, "minimise the macroscopic entropy with fixed boundary values")
    p.add_argument("--domain", required=True)
    p.add_argument("--boundary", required=True)
    p.add_argument("--scale", type=_frac, default=Fraction(1, 16))
    p.add_argument("--model", help='JSON, e.g. {"type":"closed"} or {"type":"table","path":"t.csv"}')
    p.add_argument("--out")

    p = add("sample", cmd_sample, "draw a random height function")
    p.add_argument("--domain", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--boundary")
    p.add_argument("--delta", type=_frac)
    p.add_argument("--mode", choices=("exact", "glauber"), default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweeps", type=int, default=200)
    p.add_argument("--out", required=True)
    p.add_argument("--ppm")

    p = add("verify", cmd_verify, "numerical checks of the limit theorems")
    p.add_argument("claim", choices=("profile", "variational", "ldp", "lemmas"))
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    return parser


def _config(args) -> dict:
    return {k: (fraction_str(v) if isinstance(v, Fraction) else v) for k, v in sorted(vars(args).items())
            if k not in ("func", "threads")}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = _config(args)
    try:
        outputs, inputs = args.func(args, config)
    except (HeightLabError, ValueError, KeyError, FileNotFoundError) as exc:
        err = {"schema": FORMAT_VERSION, "error": type(exc).__name__, "message": str(exc)}
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        if getattr(args, "out", None):
            _write(args.out, json.dumps(err, indent=2) + "\n")
        return 1
    if outputs:
        write_manifest(str(outputs[0]) + ".manifest.json", args.command, config, inputs, outputs,
                       seed=getattr(args, "seed", None))
    return 0


if __name__ == "__main__":
    sys.exit(main())
