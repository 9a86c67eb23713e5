"""Command-line driver: audit, spectral, wave, evolve, stability, full.

Each subcommand reads one TOML experiment configuration, runs its stage
(and whatever earlier stages it needs), and writes machine-readable
artifacts plus a manifest into the output directory.

Exit status encodes the outcome: 0 on success, 2 when the science says no
(a hypothesis fails, the speed is at or below the threshold), 1 for
operational errors (bad configuration, missing files, solver failures).
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import ConfigError, LatticeFrontsError, ParameterError
from .evolve import (EvolveConfig, Perturbation, integrate, make_initial_data,
                     save_snapshots_binary, save_snapshots_text)
from .model import audit_hypotheses
from .pipeline import default_dt, run_stability_experiment
from .profile import save_profile, solve_profile
from .spectral import (CharParams, SpectralReport, check_sign_determinants,
                       compute_c_star_lower, compute_spectral_report,
                       positive_vector)

EXIT_OK = 0
EXIT_OPERATIONAL = 1
EXIT_VERDICT = 2

SCHEMA = {
    "audit.tsv": {
        "hypothesis": "hypothesis label (H1-H4 two-component family, "
                      "A1/A2/A4 n-component family, B1-B4 scalar epidemic "
                      "family)",
        "passed": "True/False verdict at the sampled density",
        "detail": "worst margins backing the verdict",
        "witness_point": "semicolon-separated state where a failure was seen",
        "witness_quantity": "the violated quantity",
        "witness_value": "its value at the witness point",
    },
    "spectral.json": {
        "n": "component count",
        "c": "wave speed analyzed",
        "c_star": "threshold speed (tangency of the characteristic function)",
        "c_star_lower": "majorant threshold from the largest diffusion and "
                        "diagonal rate; -inf sentinel when every diagonal "
                        "rate is negative",
        "lambda1,lambda2": "decay exponents at the unstable state (null when "
                           "the speed is subcritical)",
        "lambda_bar": "stable-side characteristic root crossed from below",
        "epsilon,gamma": "weight exponent gamma = lambda1 + epsilon",
        "xi0": "weight switch point (null until a profile is solved)",
        "eta": "positive null direction at lambda1",
        "pq": "positive energy coefficients",
    },
    "profile.tsv": {
        "xi": "grid coordinate",
        "phi<i>": "front value of component i at xi",
        "header": "# lines carry c, m, j_lo, j_hi, solve metadata and the "
                  "spectral record",
    },
    "snapshots.tsv": {
        "blocks": "one '# t <time>' header per snapshot followed by one "
                  "row per node (tab-separated components)",
    },
    "norms.tsv": {
        "t": "sample time",
        "linf<i>,l1<i>,l2<i>,l1w<i>": "per-component deviation norms",
        "energy": "p,q-weighted combination of the weighted-L1 norms",
    },
    "decay.json": {
        "front_reference": "per-component sup-norm fits against the evolved "
                           "front (mu, C, r2, window)",
        "static_reference": "same fits against the interpolated grid profile",
        "mu": "reported rate: smallest per-component front-referenced mu",
    },
    "squeeze.json": {
        "relations": "worst positive violation of each ordering",
        "overall": "max over relations",
    },
}


class StageFailure(Exception):
    """A stage reached a negative scientific verdict."""


def _write_json(path: Path, obj):
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        raise TypeError(f"not serializable: {type(o)}")
    path.write_text(json.dumps(obj, indent=2, sort_keys=True,
                               default=default, allow_nan=True) + "\n")


def _write_tsv(path: Path, rows, columns):
    with open(path, "w") as fh:
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(str(row[c]) for c in columns) + "\n")


class Runner:
    """Shared stage plumbing: runs stages in order, records the manifest."""

    def __init__(self, cfg: ExperimentConfig, out_dir: Path):
        self.cfg = cfg
        self.out = out_dir
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = {"config_digest": cfg.digest(), "stages": {},
                         "artifacts": []}
        self.cache = {}

    def emit(self, name: str):
        self.manifest["artifacts"].append(name)

    def finish(self):
        _write_json(self.out / "schema.json", SCHEMA)
        self.emit("schema.json")
        self.manifest["artifacts"] = sorted(set(self.manifest["artifacts"]
                                                + ["manifest.json"]))
        _write_json(self.out / "manifest.json", self.manifest)

    def run_stage(self, name: str, fn):
        t0 = time.perf_counter()
        try:
            result = fn()
            self.manifest["stages"][name] = {
                "status": "ok", "seconds": round(time.perf_counter() - t0, 3)}
            return result
        except StageFailure as exc:
            self.manifest["stages"][name] = {
                "status": f"verdict: {exc}",
                "seconds": round(time.perf_counter() - t0, 3)}
            raise
        except LatticeFrontsError as exc:
            self.manifest["stages"][name] = {
                "status": f"error: {exc}",
                "seconds": round(time.perf_counter() - t0, 3)}
            raise

    # ---- stages ----------------------------------------------------------

    def stage_audit(self):
        sysm = self.cfg.build_system()
        if sysm is None:
            n, d, A0, AK, K = self.cfg.custom_char_data()
            rows = []
            diag0 = np.diag(A0)
            rows.append({"hypothesis": "H3/A-signs",
                         "passed": bool(np.all(diag0 < 0)
                                        and np.all(np.diag(AK) < 0)),
                         "detail": "diagonal rates negative at both states",
                         "witness_point": "", "witness_quantity": "",
                         "witness_value": ""})
            chk = check_sign_determinants(AK.T)
            rows.append({"hypothesis": "stable-side determinant conditions",
                         "passed": bool(chk.ok),
                         "detail": f"{len(chk.entries)} submatrix conditions",
                         "witness_point": "", "witness_quantity": "",
                         "witness_value": ""})
            _write_tsv(self.out / "audit.tsv", rows,
                       ["hypothesis", "passed", "detail", "witness_point",
                        "witness_quantity", "witness_value"])
            self.emit("audit.tsv")
            if not all(r["passed"] for r in rows):
                raise StageFailure("custom Jacobian sign checks failed")
            return None
        density = int(self.cfg.section("audit").get("samples_per_axis", 33))
        report = audit_hypotheses(sysm, density)
        _write_tsv(self.out / "audit.tsv", report.to_records(),
                   ["hypothesis", "passed", "detail", "witness_point",
                    "witness_quantity", "witness_value"])
        self.emit("audit.tsv")
        self.cache["system"] = sysm
        if report.failures():
            names = ", ".join(v.name for v in report.failures())
            raise StageFailure(f"hypotheses failed: {names}")
        return report

    def stage_spectral(self):
        spec = self.cfg.section("spectral", required=True)
        sysm = self.cfg.build_system()
        if sysm is None:
            n, d, A0, AK, K = self.cfg.custom_char_data()
            params = CharParams(n=n, d=d, A0=A0, AK=AK)
            rec = {"n": n, "c_star_lower": compute_c_star_lower(params)}
            lam = spec.get("lambda_probe")
            chk = check_sign_determinants(A0.T) if np.all(np.diag(A0) <= 0) \
                else None
            v = positive_vector(A0.T) if chk is not None and chk.ok else None
            rec["sign_conditions_hold"] = None if chk is None else bool(chk.ok)
            rec["v"] = None if v is None else [float(x) for x in v]
            _write_json(self.out / "spectral.json", rec)
            self.emit("spectral.json")
            if v is None:
                raise StageFailure("no positive vector for the custom table")
            self.cache["spectral"] = rec
            return rec
        params = CharParams.from_system(sysm)
        report = compute_spectral_report(params, c=spec.get("c"),
                                         c_multiplier=spec.get("c_multiplier"),
                                         epsilon=spec.get("epsilon"))
        _write_json(self.out / "spectral.json", report.to_record())
        self.emit("spectral.json")
        self.cache["system"] = sysm
        self.cache["spectral"] = report
        if report.lambda1 is None:
            raise StageFailure(
                f"speed c = {report.c:g} admits no positive decay exponents "
                f"(threshold c_star = {report.c_star:g})")
        return report

    def stage_wave(self):
        report: SpectralReport = self.cache["spectral"]
        sysm = self.cache["system"]
        prof_cfg = self.cfg.section("profile")
        profile = solve_profile(
            sysm,
            c=report.c,
            m=int(prof_cfg.get("m", 10)),
            L=float(prof_cfg.get("L", 40.0)),
            tol=float(prof_cfg.get("tol", 1e-8)),
            max_iter=int(prof_cfg.get("max_iter", 2000)),
            epsilon=report.epsilon,
            spectral=report,
        )
        save_profile(profile, self.out / "profile.tsv")
        # re-emit the spectral record now that the weight switch is known
        _write_json(self.out / "spectral.json", profile.spectral.to_record())
        self.emit("profile.tsv")
        self.cache["profile"] = profile
        return profile

    def _perturbation(self, sysm):
        pert_cfg = self.cfg.section("evolve").get("perturbation", {})
        amp = pert_cfg.get("amplitude")
        if amp is None:
            amp = pert_cfg.get("amplitude_rel", 0.1) * float(np.min(sysm.K))
        return Perturbation(kind=pert_cfg.get("kind", "cosine"),
                            amplitude=float(amp),
                            center=pert_cfg.get("center"),
                            width=float(pert_cfg.get("width", 5.0)))

    def stage_evolve(self):
        sysm = self.cache["system"]
        profile = self.cache["profile"]
        ev = self.cfg.section("evolve")
        t_end = float(ev["t_end"])
        dt = float(ev.get("dt", default_dt(sysm)))
        cfg = EvolveConfig(dt=dt, t_end=t_end,
                           stepper=ev.get("stepper", "rk4"),
                           snapshot_every=int(ev.get("snapshot_every", 20)))
        state0, front0 = make_initial_data(
            profile, self._perturbation(sysm), t_end=t_end,
            pad=float(ev.get("pad", 20.0)), sys=sysm)
        result = integrate(sysm, state0, cfg)
        fmt = ev.get("format", "tsv")
        if fmt == "binary":
            save_snapshots_binary(result.snapshots, self.out / "snapshots.bin")
            self.emit("snapshots.bin")
        else:
            save_snapshots_text(result.snapshots, self.out / "snapshots.tsv")
            self.emit("snapshots.tsv")
        self.manifest["clip"] = {
            "total_magnitude": result.clip.total_magnitude,
            "per_node_step": result.clip.per_node_step,
        }
        self.cache["evolution"] = result
        return result

    def stage_stability(self):
        sysm = self.cache["system"]
        profile = self.cache["profile"]
        ev = self.cfg.section("evolve")
        st = self.cfg.section("stability")
        result = run_stability_experiment(
            sysm, profile, self._perturbation(sysm),
            t_end=float(ev["t_end"]),
            dt=float(ev["dt"]) if "dt" in ev else None,
            snapshot_every=int(ev.get("snapshot_every", 20)),
            pad=float(ev.get("pad", 20.0)),
            fit_window=tuple(st.get("fit_window", (5.0, 40.0))),
            squeeze=bool(st.get("squeeze", True)))
        result.trace_static.save(self.out / "norms_static.tsv")
        result.trace_front.save(self.out / "norms_front.tsv")
        self.emit("norms_static.tsv")
        self.emit("norms_front.tsv")
        _write_json(self.out / "decay.json", {
            "front_reference": [f.to_record() for f in result.fits_front],
            "static_reference": [f.to_record() for f in result.fits_static],
            "mu": result.mu,
        })
        self.emit("decay.json")
        if result.squeeze is not None:
            _write_json(self.out / "squeeze.json", result.squeeze)
            self.emit("squeeze.json")
        self.manifest["clip"] = {
            "total_magnitude": result.clip.total_magnitude,
            "per_node_step": result.clip.per_node_step,
        }
        self.cache["stability"] = result
        if result.mu <= 0:
            raise StageFailure(f"fitted decay rate mu = {result.mu:g} is "
                               "not positive")
        return result


STAGE_ORDER = ["audit", "spectral", "wave", "evolve", "stability"]

COMMAND_STAGES = {
    "audit": ["audit"],
    "spectral": ["spectral"],
    "wave": ["spectral", "wave"],
    "evolve": ["spectral", "wave", "evolve"],
    "stability": ["spectral", "wave", "stability"],
    "full": ["audit", "spectral", "wave", "evolve", "stability"],
}


def run_command(command: str, config_path: str, out_dir=None) -> int:
    try:
        cfg = ExperimentConfig.load(config_path)
        stages = COMMAND_STAGES[command]
        cfg.validate(stages)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=_sys.stderr)
        return EXIT_OPERATIONAL
    out = Path(out_dir) if out_dir is not None \
        else Path(cfg.section("output").get("directory", "out"))
    runner = Runner(cfg, out)
    code = EXIT_OK
    try:
        for st in stages:
            runner.run_stage(st, getattr(runner, f"stage_{st}"))
    except StageFailure as exc:
        print(f"verdict failure in stage: {exc}", file=_sys.stderr)
        code = EXIT_VERDICT
    except LatticeFrontsError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        code = EXIT_OPERATIONAL
    finally:
        runner.finish()
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="latticefronts",
        description="Traveling wave fronts of discrete diffusion systems: "
                    "hypothesis audits, spectral thresholds, profile solves, "
                    "Cauchy evolution and stability reports.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
            ("audit", "check the structural hypotheses of the model"),
            ("spectral", "threshold speeds, decay exponents, weight data"),
            ("wave", "solve the traveling front profile"),
            ("evolve", "integrate the Cauchy problem from perturbed data"),
            ("stability", "measure decay of the perturbation, fit rates"),
            ("full", "run every stage in order")]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", help="TOML experiment configuration")
        p.add_argument("-o", "--output", default=None,
                       help="output directory (default: [output].directory)")
    args = parser.parse_args(argv)
    return run_command(args.command, args.config, args.output)


if __name__ == "__main__":
    raise SystemExit(main())
