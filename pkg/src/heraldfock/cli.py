"""``heraldfock`` command line: jsa | schmidt | herald | sweep | surface | oracle-check.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 oracle mismatch.
"""

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .design import (DecompositionCache, NonMonotoneError, SURFACE_COLUMNS, SweepRequest,
                     best_probability, herald_function, metric_surface,
                     solve_chi_for_fidelity, sweep_filter_width)
from .io import OutputSet
from .pdc import build_jsa
from .schmidt import entropy_of_entanglement, schmidt_number
from .validation import METRICS, compare, generate_suite

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ORACLE = 0, 1, 2, 3
DEFAULT_OUT = "heraldfock-out"

log = logging.getLogger("heraldfock")

UNITS = {"omega": "rad/s", "sigma": "rad/s", "length": "m", "k_prime": "s/m",
         "jsa": "s (|f| with int |f|^2 domega_i domega_s = 1)",
         "mode": "s^1/2", "entropy": "bits", "chi": "dimensionless",
         "eta": "dimensionless", "probability": "dimensionless"}


def source_summary(cfg: RunConfig) -> dict:
    s = cfg.source
    return {
        "mu_p": s.pump.mu_p, "sigma_p": s.pump.sigma_p, "length": s.crystal.length,
        "k_pump": s.crystal.k_pump, "k_signal": s.crystal.k_signal,
        "k_idler": s.crystal.k_idler, "delta0": s.crystal.delta0,
        "gamma": s.crystal.gamma, "pmf": s.kind.value,
        "grid_points": s.grid.n_points, "grid_span": s.grid.span,
        "grid_center": s.grid.center, "schmidt_cutoff": cfg.cutoff,
    }


def filter_summary(spec) -> dict:
    return {"kind": spec.kind, "eta": spec.eta, "mu_f": spec.mu_f, "sigma_f": spec.sigma_f,
            "delta_width": spec.delta_width}


def _decomposition(cfg: RunConfig, cache: DecompositionCache):
    return cache.get(cfg.source)


# ---------------------------------------------------------------------------
# verbs

def cmd_jsa(cfg: RunConfig, out: OutputSet, threads: int, cache) -> dict:
    s = cfg.source
    jsa = build_jsa(s.pump, s.crystal, s.grid, s.kind)
    out.write_matrix("jsa", np.abs(jsa.amplitude), "idler", "signal")
    out.write_csv("jsa_axes", ("index", "omega_idler", "omega_signal"),
                  [(i, wi, ws) for i, (wi, ws) in
                   enumerate(zip(jsa.idler.samples, jsa.signal.samples))])
    out.write_sidecar(UNITS, {"shape": list(jsa.amplitude.shape),
                              "grid_spacing": jsa.idler.spacing},
                      {"source": source_summary(cfg)})
    return {"shape": jsa.amplitude.shape}


def cmd_schmidt(cfg: RunConfig, out: OutputSet, threads: int, cache) -> dict:
    decomp = _decomposition(cfg, cache)
    entropy = entropy_of_entanglement(decomp.b)
    out.write_csv("schmidt_coefficients", ("k", "b"), list(enumerate(decomp.b)))
    m = min(cfg.modes, decomp.n_modes)
    complex_modes = np.iscomplexobj(decomp.zeta) and (
        np.any(decomp.zeta[:m].imag != 0) or np.any(decomp.xi[:m].imag != 0))
    cols = ["index", "omega_idler", "omega_signal"]
    data = [decomp.idler.samples, decomp.signal.samples]
    for k in range(m):
        if complex_modes:
            cols += [f"zeta_{k}_re", f"zeta_{k}_im", f"xi_{k}_re", f"xi_{k}_im"]
            data += [decomp.zeta[k].real, decomp.zeta[k].imag,
                     decomp.xi[k].real, decomp.xi[k].imag]
        else:
            cols += [f"zeta_{k}", f"xi_{k}"]
            data += [decomp.zeta[k].real, decomp.xi[k].real]
    rows = [(i,) + tuple(col[i] for col in data) for i in range(len(decomp.idler))]
    out.write_csv("schmidt_modes", cols, rows)
    results = {"entropy": entropy, "schmidt_number": schmidt_number(decomp.b),
               "n_modes": decomp.n_modes, "retained_weight": decomp.retained_weight(),
               "b_first": decomp.b[:20]}
    out.write_sidecar(UNITS, results, {"source": source_summary(cfg)})
    print(f"E = {entropy:.4g} bits, K = {schmidt_number(decomp.b):.4g}, "
          f"{decomp.n_modes} modes kept")
    return results


HERALD_COLUMNS = ("n", "case", "chi", "probability", "g2", "purity", "fidelity", "status")


def _case(spec):
    if spec.kind != "none":
        return "filtered"
    return "perfect" if spec.eta == 1.0 else "inefficient"


def cmd_herald(cfg: RunConfig, out: OutputSet, threads: int, cache) -> dict:
    if cfg.herald is None:
        raise ConfigError(f"{cfg.path}: herald verb needs a [herald] section")
    h = cfg.herald
    decomp = _decomposition(cfg, cache)
    spec = cfg.filter
    rows = []
    results = {}
    if h.target is not None:
        try:
            sol = solve_chi_for_fidelity(h.target, spec.eta, spec, decomp, h.n)
        except NonMonotoneError as exc:
            rows.append((h.n, _case(spec), None, None, None, None, None, "non-monotone"))
            results = {"target": h.target, "status": "non-monotone", "detail": str(exc)}
        else:
            r = sol.report
            vals = (None,) * 4 if r is None else (r.probability, r.g2, r.purity, r.fidelity)
            rows.append((h.n, _case(spec), sol.chi) + vals + (sol.status,))
            results = {"target": h.target, "status": sol.status, "chi_star": sol.chi}
    else:
        fn = herald_function(h.n, decomp, spec)
        for chi in h.chis:
            r = fn(chi)
            rows.append((h.n, _case(spec), chi, r.probability, r.g2, r.purity, r.fidelity,
                         "ok" if r.clicked else "no-click"))
    out.write_csv("herald", HERALD_COLUMNS, rows)
    out.write_sidecar(UNITS, results, {"source": source_summary(cfg),
                                       "filter": filter_summary(spec)})
    return results


SWEEP_COLUMNS = ("sigma_f", "filter", "chi_star", "probability", "fidelity", "entropy", "flags")


def cmd_sweep(cfg: RunConfig, out: OutputSet, threads: int, cache) -> dict:
    if cfg.sweep is None:
        raise ConfigError(f"{cfg.path}: sweep verb needs a [sweep] section")
    sw = cfg.sweep
    req = SweepRequest(source=cfg.source, n=sw.n, eta=sw.eta, filters=sw.filters,
                       target=sw.target, chi_max=sw.chi_max, mu_f=sw.mu_f)
    rows = sweep_filter_width(req, threads=threads, cache=cache)
    out.write_csv("sweep", SWEEP_COLUMNS,
                  [(r.sigma_f, r.label, r.chi_star, r.probability, r.fidelity, r.entropy,
                    "|".join(r.flags)) for r in rows])
    best = best_probability(rows)
    results = {"best_probability": best, "target": sw.target, "eta": sw.eta, "n": sw.n,
               "rows": len(rows)}
    out.write_sidecar(UNITS, results, {"source": source_summary(cfg)})
    print(f"best heralding probability at F* = {sw.target:g}: "
          + ("none" if best is None else f"{best:.4g}"))
    return results


def cmd_surface(cfg: RunConfig, out: OutputSet, threads: int, cache) -> dict:
    if cfg.surface is None:
        raise ConfigError(f"{cfg.path}: surface verb needs a [surface] section")
    sf = cfg.surface
    decomp = _decomposition(cfg, cache)
    spec = cfg.filter if sf.case == "filtered" else None
    if sf.case == "filtered" and spec.kind == "none":
        raise ConfigError(f"{cfg.path}: filtered surface needs [filter] kind other than none")
    table = metric_surface(sf.chi_grid, sf.eta_grid, sf.case, sf.n, decomp, spec, threads)
    out.write_csv("surface", SURFACE_COLUMNS, [tuple(r) for r in table])
    results = {"case": sf.case, "n": sf.n, "points": int(table.shape[0])}
    extra = {"source": source_summary(cfg)}
    if spec is not None:
        extra["filter"] = filter_summary(spec)
    out.write_sidecar(UNITS, results, extra)
    return results


def cmd_oracle_check(cfg: RunConfig, out: OutputSet, threads: int, cache) -> dict:
    oc = cfg.oracle
    suite = generate_suite(oc.instances, oc.seed, oc.bins, oc.max_rank)
    run = lambda inst: compare(inst, oc.tolerance)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            comps = list(pool.map(run, suite))
    else:
        comps = [run(inst) for inst in suite]
    cols = ["instance", "bins", "rank", "filter", "eta", "chi", "n"]
    for m in METRICS:
        cols += [f"{m}_closed", f"{m}_oracle", f"{m}_relerr"]
    cols.append("pass")
    rows = []
    for c in comps:
        i = c.instance
        row = [i.index, len(i.jsa.idler), i.rank, i.spec.label(), i.spec.eta, i.chi, i.n]
        for a, b, e in zip(c.closed, c.brute, c.rel_error):
            row += [a, b, e]
        row.append(c.passed)
        rows.append(tuple(row))
    out.write_csv("oracle_check", cols, rows)
    failures = [c.instance.index for c in comps if not c.passed]
    worst = max(c.worst for c in comps)
    results = {"instances": len(comps), "failures": failures, "worst_rel_error": worst,
               "tolerance": oc.tolerance, "seed": oc.seed, "all_pass": not failures}
    out.write_sidecar(UNITS, results)
    if failures:
        print(f"oracle mismatch in {len(failures)} of {len(comps)} instances "
              f"(worst relative error {worst:.3g})")
    else:
        print(f"all pass: {len(comps)} instances, worst relative error {worst:.3g}")
    return results


VERBS = {
    "jsa": cmd_jsa,
    "schmidt": cmd_schmidt,
    "herald": cmd_herald,
    "sweep": cmd_sweep,
    "surface": cmd_surface,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heraldfock",
        description="Heralded Fock-state source modelling: JSA, Schmidt modes, "
                    "heralding metrics, design sweeps and oracle validation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("verb", choices=sorted(VERBS), help="what to compute")
    parser.add_argument("--config", required=True, help="run configuration (.cfg)")
    parser.add_argument("--out", default=None,
                        help=f"output directory (default: [output] dir or ./{DEFAULT_OUT})")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for sweeps, surfaces and oracle checks")
    parser.add_argument("--force", action="store_true",
                        help="overwrite outputs produced from a different config")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out or cfg.output_dir or DEFAULT_OUT)
    cache = DecompositionCache()
    try:
        out = OutputSet(out_dir, args.verb, cfg.sha256, force=args.force)
        if out.suffix:
            log.warning("existing %s outputs come from another config; writing *%s.*",
                        args.verb, out.suffix)
        result = VERBS[args.verb](cfg, out, args.threads, cache)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in out.written:
        log.info("wrote %s", path)
    if args.verb == "oracle-check" and not result["all_pass"]:
        return EXIT_ORACLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
