"""Command-line entry point: predict / run / analyze.

``predict`` prints boundary-tower degeneracies as JSON, ``run`` executes
the (ED +) DMRG pipeline for every system size in a declarative INI config
and writes one JSON record per size, ``analyze`` turns record families into
tower matches or scaling fits (JSON report + CSV table).

Exit codes: 0 success, 1 validation problem, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import glob as globmod
import json
import math
import multiprocessing
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analysis, records
from .cft import (KacLabel, MinimalModel, cardy_degeneracies, delta_s_cft,
                  quasi_free_bc)
from .errors import (ConvergenceError, DomainError, FitError, NumericError,
                     ValidationError)
from .rsos import RsosBc, SpinChainSpec

OUTDIR_ENV = "ENTCUT_OUTDIR"

__all__ = ["RunConfig", "main", "cmd_predict", "cmd_run", "cmd_analyze",
           "run_single_job"]


# ----------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------

@dataclass
class RunConfig:
    model: str = "rsos"               # "rsos" | "blume-capel"
    p: int = 4
    L_list: list = field(default_factory=lambda: [9])
    bc: str = "1,1"                   # Kac label, same condition at both ends
    cut_fraction: float = 0.5
    seed: int = 0
    outdir: str = ""
    # dmrg section
    chi_max: int = 64
    cutoff: float = 1e-12
    max_sweeps: int = 30
    tol: float = 1e-10
    lanczos_tol: float = 1e-12
    lanczos_max_iter: int = 40
    krylov_dim: int = 25
    h_b: float | None = None          # None: per-model default
    noise_sweeps: int = 2
    noise_amplitude: float = 1e-2
    ed_threshold: int = 2_000_000
    # analysis section
    n_levels: int = 6
    rel_gap: float = 0.25
    fit_min_L: int = 65

    @classmethod
    def from_ini(cls, path) -> "RunConfig":
        import configparser

        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        read = parser.read(path)
        if not read:
            raise ValidationError(f"cannot read config file {path}")
        cfg = cls()
        sections = {"run", "dmrg", "analysis"}
        unknown = set(parser.sections()) - sections
        if unknown:
            raise ValidationError(f"unknown config sections: {sorted(unknown)}")

        def get(section, key, cast, default):
            if parser.has_option(section, key):
                raw = parser.get(section, key)
                try:
                    return cast(raw)
                except ValueError as exc:
                    raise ValidationError(
                        f"bad value for [{section}] {key}: {raw!r}") from exc
            return default

        cfg.model = get("run", "model", str, cfg.model).strip()
        cfg.p = get("run", "p", int, cfg.p)
        cfg.L_list = get("run", "L", _parse_int_list, cfg.L_list)
        cfg.bc = get("run", "bc", str, cfg.bc).strip()
        cfg.cut_fraction = get("run", "cut_fraction", float, cfg.cut_fraction)
        cfg.seed = get("run", "seed", int, cfg.seed)
        cfg.outdir = get("run", "outdir", str, cfg.outdir).strip()
        cfg.ed_threshold = get("run", "ed_threshold", int, cfg.ed_threshold)
        cfg.chi_max = get("dmrg", "chi_max", int, cfg.chi_max)
        cfg.cutoff = get("dmrg", "cutoff", float, cfg.cutoff)
        cfg.max_sweeps = get("dmrg", "max_sweeps", int, cfg.max_sweeps)
        cfg.tol = get("dmrg", "tol", float, cfg.tol)
        cfg.lanczos_tol = get("dmrg", "lanczos_tol", float, cfg.lanczos_tol)
        cfg.lanczos_max_iter = get("dmrg", "lanczos_max_iter", int,
                                   cfg.lanczos_max_iter)
        cfg.krylov_dim = get("dmrg", "krylov_dim", int, cfg.krylov_dim)
        if parser.has_option("dmrg", "h_b"):
            cfg.h_b = parser.getfloat("dmrg", "h_b")
        cfg.noise_sweeps = get("dmrg", "noise_sweeps", int, cfg.noise_sweeps)
        cfg.noise_amplitude = get("dmrg", "noise_amplitude", float,
                                  cfg.noise_amplitude)
        cfg.n_levels = get("analysis", "n_levels", int, cfg.n_levels)
        cfg.rel_gap = get("analysis", "rel_gap", float, cfg.rel_gap)
        cfg.fit_min_L = get("analysis", "fit_min_l", int, cfg.fit_min_L)
        return cfg

    def validate(self) -> None:
        if self.model not in ("rsos", "blume-capel"):
            raise ValidationError(f"unknown model {self.model!r}")
        if not self.L_list:
            raise ValidationError("no system sizes given")
        if not (0.0 < self.cut_fraction < 1.0):
            raise ValidationError("cut_fraction must lie in (0, 1)")
        label = KacLabel.parse(self.bc)
        if self.model == "rsos":
            for L in self.L_list:
                spec = chain_spec(self, L)
                spec.validate()
        else:
            if bc_to_field_sign(label) is None:
                raise ValidationError(
                    f"Blume-Capel ends support labels (2,1), (1,1), (1,4); "
                    f"got {label}")

    def tag(self) -> str:
        label = KacLabel.parse(self.bc)
        base = "rsos_p%d" % self.p if self.model == "rsos" else "blumecapel"
        return f"{base}_bc{label.r}-{label.s}"


def _parse_int_list(text):
    return [int(tok) for tok in text.replace(",", " ").split()]


def rsos_bc_from_label(label: KacLabel, p: int, h_b: float | None) -> RsosBc:
    """Map a Kac label to its lattice realization of one chain end."""
    if label.r == 1:
        return RsosBc.fixed_height(label.s,
                                   h_b=0.0 if h_b is None else h_b)
    if label.s == 1:
        return RsosBc.fixed_pair(label.r, h_b=10.0 if h_b is None else h_b)
    raise ValidationError(f"only (1,s) and (r,1) ends are realizable on the "
                          f"chain; got {label}")


def bc_to_field_sign(label: KacLabel):
    """Blume-Capel boundary-field sign realizing a Kac label end."""
    if (label.r, label.s) == (2, 1):
        return 0
    if (label.r, label.s) == (1, 1):
        return +1
    if (label.r, label.s) == (1, 4):
        return -1
    return None


def chain_spec(cfg: RunConfig, L: int) -> SpinChainSpec:
    label = KacLabel.parse(cfg.bc)
    if cfg.model == "rsos":
        bc = rsos_bc_from_label(label, cfg.p, cfg.h_b)
        return SpinChainSpec(model="rsos", L=L, p=cfg.p, left=bc, right=bc)
    sign = bc_to_field_sign(label)
    if sign is None:
        raise ValidationError(f"unsupported Blume-Capel end {label}")
    from .blume_capel import BlumeCapelParams

    magnitude = cfg.h_b if cfg.h_b is not None else \
        2.0 * BlumeCapelParams.tricritical().xi
    return SpinChainSpec(model="blume-capel", L=L, h_b=sign * magnitude)


# ----------------------------------------------------------------------
# one (model, L) job
# ----------------------------------------------------------------------

def _config_echo(cfg: RunConfig, L: int) -> dict:
    echo = asdict(cfg)
    echo.pop("outdir")
    echo.pop("L_list")
    echo["L"] = L
    return echo


def run_single_job(cfg: RunConfig, L: int) -> dict:
    """Build the chain, run DMRG (and ED when small), return the record."""
    from . import dmrg as dmrg_mod
    from . import ed as ed_mod
    from .blume_capel import BlumeCapelParams, build_bc_mpo, build_bc_sparse
    from .rsos import (build_hamiltonian_mpo, build_hamiltonian_sparse,
                       parity_operators, path_dimension,
                       pinning_energy_offset)

    spec = chain_spec(cfg, L)
    spec.validate()
    label = KacLabel.parse(cfg.bc)
    cut = max(1, min(L - 1, int(math.floor(L * cfg.cut_fraction))))

    if cfg.model == "rsos":
        mpo = build_hamiltonian_mpo(spec.p, L, spec.left, spec.right)
        pin_offset = pinning_energy_offset(spec.left, spec.right)
        dim = path_dimension(spec.p, L, spec.left, spec.right)
        parity_ops = parity_operators(spec.p, L)
    else:
        params = BlumeCapelParams.tricritical(h_b=spec.h_b)
        mpo = build_bc_mpo(params, L)
        pin_offset = 0.0
        dim = 3 ** L
        from .blume_capel import spin_flip_operator

        parity_ops = [spin_flip_operator()] * L

    dcfg = dmrg_mod.DmrgConfig(
        chi_max=cfg.chi_max, cutoff=cfg.cutoff, max_sweeps=cfg.max_sweeps,
        tol=cfg.tol, lanczos_tol=cfg.lanczos_tol,
        lanczos_max_iter=cfg.lanczos_max_iter, krylov_dim=cfg.krylov_dim,
        seed=cfg.seed, noise_sweeps=cfg.noise_sweeps,
        noise_amplitude=cfg.noise_amplitude)
    psi0 = dmrg_mod.initial_state(spec)
    result = dmrg_mod.run_dmrg(mpo, psi0, dcfg)
    spectrum = result.psi.schmidt_at(cut)
    occ = result.psi.occupation_profile()
    parity = result.psi.product_expectation(parity_ops)

    record = {
        "version": records.VERSION,
        "model": cfg.model,
        "config": _config_echo(cfg, L),
        "L": L,
        "bc": [label.r, label.s],
        "cut": cut,
        "dmrg": {
            "energy": result.energy,
            "energy_bulk": result.energy + pin_offset,
            "sweep_energies": list(result.sweep_energies),
            "n_sweeps": result.n_sweeps,
            "converged": bool(result.converged),
            "max_trunc_err": result.max_trunc_err,
            "bond_dims": [int(b) for b in result.psi.bond_dims],
            "parity": parity,
        },
        "spectrum": {
            "weights": spectrum.weights.tolist(),
            "energies": spectrum.energies.tolist(),
            "kept_weight": spectrum.kept_weight,
            "labels": (spectrum.labels.tolist()
                       if spectrum.labels is not None else None),
        },
        "entropy": spectrum.entropy(),
        "eps0": spectrum.eps0,
        "occupation": occ.tolist(),
        "ed": None,
    }

    if dim <= cfg.ed_threshold:
        if cfg.model == "rsos":
            h, basis = build_hamiltonian_sparse(spec.p, L, spec.left,
                                                spec.right)
            energy, vec = ed_mod.ground_state(h, seed=cfg.seed)
            ed_spec = ed_mod.schmidt_constrained(vec, basis, cut)
        else:
            h = build_bc_sparse(params, L)
            energy, vec = ed_mod.ground_state(h, seed=cfg.seed)
            ed_spec = ed_mod.schmidt_tensor(vec, cut, 3)
        top = 20
        record["ed"] = {
            "energy": energy,
            "spectrum": {
                "weights": ed_spec.weights.tolist(),
                "energies": ed_spec.energies.tolist(),
                "labels": (ed_spec.labels.tolist()
                           if ed_spec.labels is not None else None),
            },
            "entropy": ed_spec.entropy(),
            "energy_diff": record["dmrg"]["energy_bulk"] - energy,
            "schmidt_top20_maxdiff": float(np.max(np.abs(
                ed_spec.top(top) - spectrum.top(top)))),
        }

    payload = {k: v for k, v in record.items()}
    record["checks"] = {"record_sha256": records.payload_sha256(payload)}
    return record


def _record_path(outdir, cfg: RunConfig, L: int) -> str:
    return os.path.join(outdir, f"{cfg.tag()}_L{L:04d}.json")


def _job_worker(args):
    cfg_dict, L = args
    cfg = RunConfig(**cfg_dict)
    record = run_single_job(cfg, L)
    return L, record


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_predict(args) -> int:
    m = MinimalModel(args.p)
    a = m.canonical(KacLabel.parse(args.a))
    b = m.canonical(KacLabel.parse(args.b))
    tower = cardy_degeneracies(m, a, b, args.levels)
    doc = {
        "p": args.p,
        "a": [a.r, a.s],
        "b": [b.r, b.s],
        "max_level": args.levels,
        "channels": [
            {"label": [lab.r, lab.s],
             "h": str(q.h),
             "h_float": float(q.h),
             "coeffs": list(q.coeffs)}
            for lab, q in tower.channels
        ],
        "merged": [[str(off), float(off), deg] for off, deg in tower.merged],
        "ground_offset": str(tower.ground_offset),
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        records.write_json_atomic(args.out, doc)
    else:
        print(text)
    return 0


def _resolve_outdir(cfg_outdir, flag_outdir) -> str:
    if flag_outdir:
        return flag_outdir
    if cfg_outdir:
        return cfg_outdir
    return os.environ.get(OUTDIR_ENV, ".")


def cmd_run(args) -> int:
    cfg = RunConfig.from_ini(args.config)
    cfg.validate()
    outdir = _resolve_outdir(cfg.outdir, args.outdir)
    os.makedirs(outdir, exist_ok=True)
    jobs = max(1, args.jobs)
    cfg_dict = asdict(cfg)

    # single-threaded BLAS inside workers keeps records identical whatever
    # --jobs is; the env must be set before the spawned child loads numpy
    saved = {}
    for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS",
                "MKL_NUM_THREADS"):
        saved[var] = os.environ.get(var)
        os.environ[var] = "1"
    try:
        ctx = multiprocessing.get_context("spawn")
        failures = []
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=jobs, mp_context=ctx) as pool:
            futures = {pool.submit(_job_worker, (cfg_dict, L)): L
                       for L in cfg.L_list}
            for fut in concurrent.futures.as_completed(futures):
                L = futures[fut]
                try:
                    _, record = fut.result()
                except Exception as exc:  # per-size failures are recorded
                    failures.append((L, repr(exc)))
                    print(f"L={L}: FAILED ({exc})", file=sys.stderr)
                    continue
                path = _record_path(outdir, cfg, L)
                records.write_json_atomic(path, record)
                print(f"L={L}: wrote {path}")
    finally:
        for var, val in saved.items():
            if val is None:
                os.environ.pop(var, None)
            else:
                os.environ[var] = val
    if failures:
        records.write_json_atomic(
            os.path.join(outdir, f"{cfg.tag()}_failures.json"),
            {"failures": [{"L": L, "error": e} for L, e in failures]})
        return 2
    return 0


def _load_family(pattern, force=False):
    paths = sorted(globmod.glob(pattern))
    if not paths:
        raise ValidationError(f"no records match {pattern!r}")
    recs = [records.read_json(p) for p in paths]
    records.check_versions(recs, force=force)
    return paths, recs


def _require_consistent(recs, keys):
    values = {tuple(_nested(r, k) for k in keys) for r in recs}
    if len(values) > 1:
        raise ValidationError(
            "records mix incompatible runs "
            f"(fields {keys} take values {sorted(values)}); analyze them "
            "separately or glob more narrowly")


def _nested(rec, dotted):
    cur = rec
    for part in dotted.split("."):
        cur = cur[part]
    return json.dumps(cur)


def _spectrum_of(rec):
    from .spectrum import EntanglementSpectrum

    return EntanglementSpectrum.from_weights(
        np.array(rec["spectrum"]["weights"]), cut=rec["cut"],
        labels=(np.array(rec["spectrum"]["labels"])
                if rec["spectrum"]["labels"] else None))


def _model_of(rec) -> MinimalModel:
    return MinimalModel(4 if rec["model"] == "blume-capel"
                        else rec["config"]["p"])


def cmd_analyze(args) -> int:
    paths, recs = _load_family(args.records, force=args.force)
    _require_consistent(recs, ["model"])
    mode = args.mode
    out_prefix = args.out or "analysis"
    report = {"mode": mode, "records": paths,
              "version": records.VERSION}

    if mode == "match":
        _require_consistent(recs, ["config.p", "bc"])
        m = _model_of(recs[0])
        b = m.canonical(KacLabel(*recs[0]["bc"]))
        a = m.canonical(KacLabel.parse(args.a)) if args.a else quasi_free_bc(m)
        tower = cardy_degeneracies(m, a, b, args.levels + 2)
        rows, items = [], []
        for path, rec in zip(paths, recs):
            spec = _spectrum_of(rec)
            rep = analysis.group_multiplets(spec, args.levels, args.rel_gap)
            matched, verdicts = analysis.match_towers(rep, tower, args.levels)
            items.append({"file": os.path.basename(path), "L": rec["L"],
                          "counts": rep.counts(), "matched": matched,
                          "verdicts": verdicts})
            for v in verdicts:
                rows.append([rec["L"], f"{b.r},{b.s}", f"{a.r},{a.s}",
                             v["level"], v["observed"], v["predicted"],
                             int(v["ok"])])
        report.update({
            "a": [a.r, a.s], "b": [b.r, b.s],
            "tower": {"merged": [[str(o), float(o), d]
                                 for o, d in tower.merged]},
            "matches": items,
            "min_matched": min(i["matched"] for i in items),
        })
        header = ["L", "bc", "cut_bc", "level", "observed", "predicted", "ok"]

    elif mode in ("fit-c", "fit-eps0"):
        _require_consistent(recs, ["config.p", "bc", "model"])
        pts = [(r["L"], r["entropy"] if mode == "fit-c" else r["eps0"])
               for r in recs if r["L"] >= args.min_L]
        if len(pts) < 3:
            raise FitError(f"only {len(pts)} records at L >= {args.min_L}")
        frac = recs[0]["config"]["cut_fraction"]
        fit = (analysis.fit_central_charge(pts, frac) if mode == "fit-c"
               else analysis.fit_epsilon0(pts, frac))
        report["fit"] = _fit_dict(fit)
        rows = [[L, analysis.w_l(L, max(1, int(math.floor(L * frac)))), y]
                for L, y in pts]
        header = ["L", "W_L", "entropy" if mode == "fit-c" else "eps0"]

    elif mode == "fit-nu":
        _require_consistent(recs, ["config.p", "model"])
        by_bc = {}
        for rec in recs:
            by_bc.setdefault(tuple(rec["bc"]), {})[rec["L"]] = rec
        if args.pair:
            first, second = (KacLabel.parse(t) for t in args.pair.split(":"))
        else:
            if len(by_bc) != 2:
                raise ValidationError(
                    f"fit-nu needs exactly two end conditions, found "
                    f"{sorted(by_bc)}; use --pair to choose")
            keys = sorted(by_bc)
            first, second = KacLabel(*keys[0]), KacLabel(*keys[1])
        m = _model_of(recs[0])
        fam_b = by_bc.get((first.r, first.s))
        fam_new = by_bc.get((second.r, second.s))
        if not fam_b or not fam_new:
            raise ValidationError(f"records for pair {args.pair!r} missing")
        sizes = sorted(set(fam_b) & set(fam_new))
        sizes = [L for L in sizes if L >= args.min_L]
        deltas = [(L, fam_b[L]["entropy"] - fam_new[L]["entropy"])
                  for L in sizes]
        dcft = delta_s_cft(m, m.canonical(first), m.canonical(second))
        fit = analysis.fit_nu(deltas, dcft)
        report["fit"] = _fit_dict(fit)
        report["delta_s_cft"] = dcft
        report["pair"] = [[first.r, first.s], [second.r, second.s]]
        rows = [[L, d, abs(d - dcft)] for L, d in deltas]
        header = ["L", "delta_s", "abs_dev"]
    else:
        raise ValidationError(f"unknown analyze mode {mode!r}")

    records.write_json_atomic(out_prefix + ".json", report)
    records.write_csv_atomic(out_prefix + ".csv", header, rows)
    print(json.dumps(report, indent=2, sort_keys=True, default=str))
    return 0


def _fit_dict(fit) -> dict:
    d = asdict(fit)
    return d


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entcut",
                     description="entanglement-cut spectroscopy toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("predict", help="boundary tower degeneracies")
    pr.add_argument("--p", type=int, required=True)
    pr.add_argument("--a", required=True, help="cut label, e.g. 2,2")
    pr.add_argument("--b", required=True, help="end label, e.g. 1,1")
    pr.add_argument("--levels", type=int, default=8)
    pr.add_argument("--out", default="")

    rn = sub.add_parser("run", help="run the ED/DMRG pipeline from a config")
    rn.add_argument("config")
    rn.add_argument("--jobs", type=int, default=1)
    rn.add_argument("--outdir", default="")

    an = sub.add_parser("analyze", help="analyze emitted records")
    an.add_argument("records", help="glob of record JSON files")
    an.add_argument("--mode", required=True,
                    choices=["match", "fit-c", "fit-eps0", "fit-nu"])
    an.add_argument("--out", default="")
    an.add_argument("--a", default="", help="cut label override (match mode)")
    an.add_argument("--levels", type=int, default=5)
    an.add_argument("--rel-gap", dest="rel_gap", type=float, default=0.25)
    an.add_argument("--min-L", dest="min_L", type=int, default=65)
    an.add_argument("--pair", default="",
                    help="fit-nu ordering, e.g. '1,1:2,1' for S_11 - S_21")
    an.add_argument("--force", action="store_true",
                    help="allow mixed artifact versions")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "predict":
            return cmd_predict(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        raise ValidationError(f"unknown command {args.command!r}")
    except (ValidationError, DomainError, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, ConvergenceError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
