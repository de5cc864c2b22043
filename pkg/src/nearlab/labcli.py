"""Batch experiment runner.

``lab <suite> --seed N --instances K --degree-max D --out DIR``
with optional ``--tol name=value`` overrides and ``--config FILE``
(JSON holding the same fields; inline flags win).

Each suite generates seeded instances, runs the module's verification
checks, and writes four files into the output directory:

* ``report.json``   per-check rows, byte-identical for identical configs
* ``summary.txt``   one line per check plus totals
* ``clark_nodes.csv``  spectral nodes and Parseval weights
* ``density_R.csv``    the de Branges embedding weight on a grid

Wall-clock data lives in ``metadata.json`` so the report stays stable.
Exit status: 0 all checks pass, 1 some check failed (names on stderr),
2 invalid configuration.
"""

import argparse
import json
import pathlib
import sys
import time
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .cpmaps import (
    KrausSet,
    effect_relation,
    kraus_from_choi,
    minimal_stinespring,
    random_channel,
    random_unital_channel,
    verify_commutant_effects,
    verify_minimality,
)
from .errors import ConfigInvalid, GaugeDegenerate, LabError, SpectrumCollision
from .kreinrep import (
    abscont_measure,
    build_frame,
    debranges_frame,
    discrete_measure,
    verify_compression_identity,
    verify_isometry,
    verify_partial_isometry,
)
from .modelspace import ModelSpace, clark_basis
from .nearinv import (
    check_nearly_invariant,
    check_seminvariant,
    equivalence_roundtrip,
    factor_nearly_invariant,
    generate_nearly_invariant,
    random_inner,
)
from .ratfield import RationalFn, l2_inner, l2_norm
from .symrestrict import (
    SubspaceSpec,
    build_restriction,
    regularity_check,
    selfadjoint_extensions,
    simplicity_check,
)

SUITES = ("modelspace", "symrestrict", "krein", "cpmaps", "nearinv")


@dataclass(frozen=True)
class RunConfig:
    suite: str
    seed: int
    instances: int
    degree_max: int
    tolerances: dict
    output: str

    def resolved_tol(self) -> Tolerances:
        return DEFAULT.replace(**self.tolerances)


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.suite not in SUITES + ("all",):
        raise ConfigInvalid(f"unknown suite {cfg.suite!r}")
    if not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 2 ** 63:
        raise ConfigInvalid("seed must be a non-negative 64-bit integer")
    if not isinstance(cfg.instances, int) or cfg.instances < 1:
        raise ConfigInvalid("instances must be a positive integer")
    if not isinstance(cfg.degree_max, int) or not 1 <= cfg.degree_max <= 8:
        raise ConfigInvalid("degree-max must lie in 1..8")
    known = set(Tolerances.names())
    for k, v in cfg.tolerances.items():
        if k not in known:
            raise ConfigInvalid(f"unknown tolerance key {k!r}")
        if not isinstance(v, (int, float)) or not v > 0:
            raise ConfigInvalid(f"tolerance {k} must be a positive number")
    if not cfg.output:
        raise ConfigInvalid("output directory is required")
    return cfg


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------

class Collector:
    """Accumulates rows and side tables for one run (single writer)."""

    def __init__(self):
        self.rows = []
        self.clark_rows = []
        self.density_rows = []

    def add(self, suite, instance, check, residual, tolerance, ok,
            note=None):
        row = {
            "suite": suite,
            "instance": int(instance),
            "check": str(check),
            "residual": float(residual),
            "tolerance": float(tolerance),
            "pass": bool(ok),
        }
        if note is not None:
            row["note"] = str(note)
        self.rows.append(row)

    def wrap(self, suite, instance, rep: dict):
        # kreinrep/cpmaps verifiers already return report-shaped dicts
        resid = rep.get("max_residual",
                        rep.get("compat_residual", 0.0))
        self.add(suite, instance, rep["check"], resid,
                 rep.get("tolerance", 0.0), rep["pass"])


def _rng(cfg: RunConfig, suite: str, k: int):
    return np.random.default_rng([cfg.seed, SUITES.index(suite), k])


def _random_pairs(rng, space, count):
    n = len(space.basis)
    out = []
    for _ in range(count):
        c1 = rng.normal(size=n) + 1j * rng.normal(size=n)
        c2 = rng.normal(size=n) + 1j * rng.normal(size=n)
        out.append((space.synthesize(c1), space.synthesize(c2)))
    return out


def _restriction_degree(rng, degree_max: int) -> int:
    # one-dimensional model spaces have trivial restriction domains, so
    # the operator suites draw from [2, max(2, degree_max)]
    hi = max(2, degree_max)
    return int(rng.integers(2, hi + 1))


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def run_modelspace(cfg: RunConfig, tol: Tolerances, col: Collector, k: int):
    rng = _rng(cfg, "modelspace", k)
    theta = random_inner(rng, int(rng.integers(1, cfg.degree_max + 1)))
    space = ModelSpace(theta, tol)

    f = space.random_element(rng)
    w = complex(rng.uniform(-2, 2), rng.uniform(0.3, 2.5))
    resid = abs(l2_inner(f, space.kernel(w), tol) - f(w)) \
        / (1.0 + l2_norm(f, tol))
    col.add("modelspace", k, "rk-eval", resid, 1e-8, resid <= 1e-8)

    lam = np.linalg.eigvalsh(space.gram())
    resid = max(0.0, -float(lam[0])) / max(float(lam[-1]), 1e-300)
    col.add("modelspace", k, "gram-psd", resid, 1e-10, resid <= 1e-10)

    alpha = np.exp(2j * np.pi * rng.random())
    nodes, weights, cb = clark_basis(space, alpha, tol)
    worst = 0.0
    for i, vi in enumerate(cb):
        for j in range(i + 1):
            ip = l2_inner(vi, cb[j], tol)
            worst = max(worst, abs(ip - (1.0 if i == j else 0.0)))
    col.add("modelspace", k, "clark-orthonormal", worst, 1e-8,
            worst <= 1e-8)
    for j, (x, wt) in enumerate(zip(nodes, weights)):
        col.clark_rows.append(("modelspace", k, float(alpha.real),
                               float(alpha.imag), j, float(x), float(wt)))

    g = space.random_element(rng)
    total = sum(abs(l2_inner(g, v, tol)) ** 2 for v in cb)
    n2 = l2_inner(g, g, tol).real
    resid = abs(total - n2) / (1.0 + n2)
    col.add("modelspace", k, "clark-parseval", resid, 1e-7, resid <= 1e-7)


def run_symrestrict(cfg: RunConfig, tol: Tolerances, col: Collector, k: int):
    rng = _rng(cfg, "symrestrict", k)
    theta = random_inner(rng, _restriction_degree(rng, cfg.degree_max))
    T = build_restriction(SubspaceSpec.from_model_space(
        ModelSpace(theta, tol)), tol)

    col.add("symrestrict", k, "deficiency-gap", 1.0 / T.sv_gap, 1e-6,
            T.sv_gap >= 1e6)

    reg = regularity_check(T)
    margin = float(min(np.min(reg["sigma_min"]), np.min(reg["pairing"])))
    col.add("symrestrict", k, "regularity", -margin, 0.0, reg["ok"])

    simple = simplicity_check(T)
    col.add("symrestrict", k, "simplicity", 0.0 if simple else 1.0,
            0.0, simple)

    A = selfadjoint_extensions(T, np.exp(2j * np.pi * rng.random()))
    resid = float(np.max(np.abs(A - A.conj().T)))
    col.add("symrestrict", k, "extension-hermitian", resid, 1e-8,
            resid <= 1e-8)


_KREIN_MULTIPLIERS = (
    RationalFn.from_factored(1.0, [], [-2j]),
    RationalFn.from_factored(1.0, [1.0], [-1j, -1j]),
)


def run_krein(cfg: RunConfig, tol: Tolerances, col: Collector, k: int):
    rng = _rng(cfg, "krein", k)
    theta = random_inner(rng, _restriction_degree(rng, cfg.degree_max))
    space = ModelSpace(theta, tol)
    T = build_restriction(SubspaceSpec.from_model_space(space), tol)
    fr = None
    for _ in range(8):
        try:
            fr = build_frame(T, np.exp(2j * np.pi * rng.random()), tol)
            break
        except (GaugeDegenerate, SpectrumCollision):
            continue
    if fr is None:
        col.add("krein", k, "frame-build", 1.0, 0.0, False)
        return

    pairs = _random_pairs(rng, T.space, 2)
    col.wrap("krein", k, verify_isometry(fr, discrete_measure(fr), pairs))
    col.wrap("krein", k, verify_isometry(fr, abscont_measure(fr), pairs))
    col.wrap("krein", k, verify_isometry(fr, discrete_measure(fr), pairs,
                                         window=(0.0, 2.0)))
    sub = int(rng.integers(0, 2 ** 31))
    col.wrap("krein", k, verify_partial_isometry(fr, count=2, seed=sub))
    col.wrap("krein", k, verify_compression_identity(
        T.space, space, _KREIN_MULTIPLIERS, frame=fr, count=2,
        seed=sub, tol=tol))

    _, _, R = debranges_frame(fr)
    for x in np.linspace(-4.0, 4.0, 33):
        col.density_rows.append(("krein", k, float(x),
                                 float(R(float(x)).real)))


def _diagonal_fixing_channel(rng, dim: int):
    # mixture of diagonal unitaries: unital, trace preserving, and the
    # diagonal algebra is fixed pointwise
    count = int(rng.integers(2, 4))
    p = rng.dirichlet(np.ones(count))
    ops = [np.sqrt(p[j]) * np.diag(np.exp(2j * np.pi * rng.random(dim)))
           for j in range(count)]
    return KrausSet(tuple(ops)).to_channel()


def run_cpmaps(cfg: RunConfig, tol: Tolerances, col: Collector, k: int):
    rng = _rng(cfg, "cpmaps", k)
    dim = int(rng.integers(2, min(cfg.degree_max + 1, 5) + 1))

    ch = random_channel(rng, dim, dim, int(rng.integers(1, dim + 2)))
    resid = ch.distance(kraus_from_choi(ch).to_channel())
    col.add("cpmaps", k, "choi-kraus-roundtrip", resid, 1e-9, resid <= 1e-9)

    base = kraus_from_choi(random_unital_channel(rng, dim, 3))
    m = base.count
    Q, _ = np.linalg.qr(rng.normal(size=(m, m))
                        + 1j * rng.normal(size=(m, m)))
    mixed = KrausSet(tuple(
        sum(Q[j, i] * base.ops[i] for i in range(m)) for j in range(m)))
    U = effect_relation(base, mixed, tol)
    resid = float(np.max(np.abs(U - np.conj(Q))))
    col.add("cpmaps", k, "effect-relation", resid, 1e-7, resid <= 1e-7)

    rep = verify_commutant_effects(_diagonal_fixing_channel(rng, dim))
    col.add("cpmaps", k, rep["check"],
            max(rep["max_offdiagonal"], rep["trace_defect"]),
            rep["tolerance"], rep["pass"])

    dil = minimal_stinespring(random_unital_channel(rng, dim, 2))
    rep = verify_minimality(dil)
    resid = dil.isometry_defect()
    col.add("cpmaps", k, rep["check"], resid, 1e-9,
            rep["pass"] and resid <= 1e-9)


def run_nearinv(cfg: RunConfig, tol: Tolerances, col: Collector, k: int):
    if k == 0:
        # seed-independent controls: the chain span must fail with a
        # witness vanishing at i, the Cauchy pair must pass both ways
        chain = SubspaceSpec([
            RationalFn.from_factored(1.0, [], [-1j]),
            RationalFn.from_factored(1.0, [], [-1j, -1j, -1j]),
        ], tol)
        rep = check_nearly_invariant(chain, tol)
        ok = (not rep.is_nearly_invariant) and abs(rep.witness(1j)) < 1e-12
        col.add("nearinv", -1, "control-chain-rejected", rep.residual,
                0.0, ok)

        pair = SubspaceSpec([
            RationalFn.from_factored(1.0, [], [-1j]),
            RationalFn.from_factored(1.0, [], [-2j]),
        ], tol)
        ok = check_nearly_invariant(pair, tol).is_nearly_invariant
        try:
            _, _, th = factor_nearly_invariant(pair, tol=tol)
            zs = np.sort_complex(th.zeros)
            zerr = float(np.max(np.abs(zs - np.array([1j, 2j]))))
            ok = ok and zerr <= 1e-6
        except LabError:
            ok, zerr = False, np.inf
        col.add("nearinv", -1, "control-cauchy-pair", zerr, 1e-6, ok)

    rng = _rng(cfg, "nearinv", k)
    degree = 1 + k % min(cfg.degree_max, 6)
    sub = int(rng.integers(0, 2 ** 31))
    rep = equivalence_roundtrip(seed=sub, degree=degree, tol=tol)
    for r in rep["rows"]:
        col.add("nearinv", k, r["check"], r["residual"], 0.0, r["pass"])
    if not rep["pass"] and "witness" in rep:
        col.add("nearinv", k, "roundtrip-witness", np.inf, 0.0, False)

    plain = k % 2 == 0
    sp, _ = generate_nearly_invariant(rng, degree, tol, plain_model=plain)
    got = check_seminvariant(sp, tol=tol)
    col.add("nearinv", k, "seminvariance-classification",
            0.0 if got == plain else 1.0, 0.0, got == plain)


_RUNNERS = {
    "modelspace": run_modelspace,
    "symrestrict": run_symrestrict,
    "krein": run_krein,
    "cpmaps": run_cpmaps,
    "nearinv": run_nearinv,
}


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------

def _write(path: pathlib.Path, text: str):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def write_outputs(cfg: RunConfig, col: Collector, out: pathlib.Path,
                  elapsed: float):
    failed = [r for r in col.rows if not r["pass"]]
    report = {
        "config": {
            "suite": cfg.suite,
            "seed": cfg.seed,
            "instances": cfg.instances,
            "degree_max": cfg.degree_max,
            "tolerances": {k: float(v)
                           for k, v in sorted(cfg.tolerances.items())},
        },
        "rows": col.rows,
        "summary": {
            "total": len(col.rows),
            "passed": len(col.rows) - len(failed),
            "failed": sorted({r["check"] for r in failed}),
        },
    }
    _write(out / "report.json",
           json.dumps(report, indent=2, sort_keys=True) + "\n")

    lines = []
    for r in col.rows:
        lines.append("%-4s %s/%s instance %d: residual %.3e (tol %.1e)"
                     % ("ok" if r["pass"] else "FAIL", r["suite"],
                        r["check"], r["instance"], r["residual"],
                        r["tolerance"]))
    lines.append("")
    lines.append("%d checks, %d passed, %d failed"
                 % (len(col.rows), len(col.rows) - len(failed), len(failed)))
    _write(out / "summary.txt", "\n".join(lines) + "\n")

    rows = ["suite,instance,alpha_re,alpha_im,index,node,weight"]
    rows += [",".join(map(repr, r)).replace("'", "")
             for r in col.clark_rows]
    _write(out / "clark_nodes.csv", "\n".join(rows) + "\n")

    rows = ["suite,instance,x,R"]
    rows += [",".join(map(repr, r)).replace("'", "")
             for r in col.density_rows]
    _write(out / "density_R.csv", "\n".join(rows) + "\n")

    meta = {
        "created_unix": time.time(),
        "elapsed_seconds": elapsed,
        "argv_suite": cfg.suite,
    }
    _write(out / "metadata.json", json.dumps(meta, indent=2) + "\n")
    return failed


def run(cfg: RunConfig) -> int:
    cfg = validate(cfg)
    tol = cfg.resolved_tol()
    out = pathlib.Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    col = Collector()
    start = time.monotonic()
    suites = SUITES if cfg.suite == "all" else (cfg.suite,)
    for name in suites:
        for k in range(cfg.instances):
            try:
                _RUNNERS[name](cfg, tol, col, k)
            except LabError as e:
                # a raised contract error is a failed check, not a crash
                col.add(name, k, name + "-error", np.inf, 0.0, False,
                        note=f"{type(e).__name__}: {e}")
    failed = write_outputs(cfg, col, out, time.monotonic() - start)
    if failed:
        names = sorted({r["check"] for r in failed})
        print("failed checks: " + ", ".join(names), file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def _parse_tol(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigInvalid(f"--tol expects name=value, got {item!r}")
        name, _, val = item.partition("=")
        try:
            out[name.strip()] = float(val)
        except ValueError:
            raise ConfigInvalid(f"tolerance {name!r} has non-numeric "
                                f"value {val!r}") from None
    return out


def parse_args(argv) -> RunConfig:
    parser = argparse.ArgumentParser(
        prog="lab",
        description="seeded verification suites with deterministic reports")
    sub = parser.add_subparsers(dest="suite", required=True)
    for name in SUITES + ("all",):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="JSON file with the same fields; flags win")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--instances", type=int, default=None)
        p.add_argument("--degree-max", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--tol", action="append", default=None,
                       metavar="NAME=VALUE")
    ns = parser.parse_args(argv)

    base = {"seed": 0, "instances": 1, "degree_max": 3,
            "tolerances": {}, "output": None}
    if ns.config:
        try:
            doc = json.loads(pathlib.Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigInvalid(f"cannot read config file: {e}") from e
        if not isinstance(doc, dict):
            raise ConfigInvalid("config file must hold a JSON object")
        unknown = set(doc) - {"suite", "seed", "instances", "degree_max",
                              "tolerances", "output"}
        if unknown:
            raise ConfigInvalid(f"unknown config keys {sorted(unknown)}")
        base.update(doc)
    if ns.seed is not None:
        base["seed"] = ns.seed
    if ns.instances is not None:
        base["instances"] = ns.instances
    if ns.degree_max is not None:
        base["degree_max"] = ns.degree_max
    if ns.out is not None:
        base["output"] = ns.out
    if ns.tol is not None:
        base["tolerances"] = dict(base["tolerances"], **_parse_tol(ns.tol))
    if not isinstance(base["tolerances"], dict):
        raise ConfigInvalid("tolerances must be a mapping")
    return RunConfig(suite=ns.suite, seed=base["seed"],
                     instances=base["instances"],
                     degree_max=base["degree_max"],
                     tolerances=base["tolerances"], output=base["output"])


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
        return run(cfg)
    except ConfigInvalid as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
