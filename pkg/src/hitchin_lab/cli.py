"""Batch front end: build a scene (rep and sampled curve), run check suites,
write JSON reports and CSV traces.

Exit status is 0 iff every requested check passes, 1 if some check fails and
2 on configuration or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import anosov, hill
from .atomic import csv_text, write_text
from .config import SUITES, SceneConfig, Tolerances, load_config, tolerances_from
from .errors import ConfigError, HitchinLabError, MissingScene, NotLoxodromic
from .limit_curve import (CurveSample, SampledCurve, boundary_coordinate, check_frenet, check_positivity,
                          circle_distance, covered_anchor, sample_curve)
from .reports import CheckReport
from .representations import (SurfaceRep, bend, check_irreducible, compose_irreducible, fuchsian_genus2,
                              is_relation_trivial, word_spectra)
from .surface_group import Word, ball, evaluate, sample_words

POSITIVITY_SUITES = {"hyperconvex": "hyperconvex_n", "two-hyper": "two_hyper", "three-hyper": "three_hyper",
                     "property-h": "property_H", "main14": "main14"}
GAP_WORDS_PER_LENGTH = 100
PERIOD_WORDS = 20
PERIOD_WITNESSES = 10
PERIOD_SEPARATION = 0.2


def thread_count() -> int:
    raw = os.environ.get("HITCHIN_LAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError(f"HITCHIN_LAB_THREADS={raw!r} is not an integer") from None
    return os.cpu_count() or 1


@dataclass
class Scene:
    config: SceneConfig
    base: SurfaceRep
    rep: SurfaceRep
    samples: list

    @property
    def curve(self) -> SampledCurve:
        return SampledCurve(self.samples)

    @property
    def anchor(self) -> float:
        if self.config.anchor == "auto":
            return covered_anchor(self.samples)
        return boundary_coordinate(Word.parse(self.config.anchor), self.base).theta


def build_rep(config: SceneConfig) -> tuple:
    base = fuchsian_genus2()
    rep = compose_irreducible(config.n, base)
    if any(t != 0 for t in config.tau):
        rep = bend(rep, config.tau)
    return base, rep


def build_scene(config: SceneConfig) -> Scene:
    base, rep = build_rep(config)
    return Scene(config, base, rep, sample_curve(rep, base, config.ball_radius))


def curve_json(scene: Scene) -> dict:
    return {"n": scene.config.n, "radius": scene.config.ball_radius,
            "samples": [s.to_json() for s in scene.samples]}


def load_scene(config: SceneConfig) -> Scene:
    """Scene previously written to config.output_dir by build/sample/check."""
    out = config.output_dir
    try:
        with open(os.path.join(out, "rep.json")) as fh:
            rep = SurfaceRep.from_json(json.load(fh))
        with open(os.path.join(out, "curve.json")) as fh:
            samples = [CurveSample.from_json(d) for d in json.load(fh)["samples"]]
    except FileNotFoundError as exc:
        raise MissingScene(f"no scene in {out}: run sample-curve or check first ({exc.filename})") from None
    return Scene(config, fuchsian_genus2(), rep, samples)


def _dump(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


# --- checks ------------------------------------------------------------------

def check_loxodromic(scene: Scene) -> CheckReport:
    cfg = scene.config
    words = [w for w in ball(cfg.genus, cfg.ball_radius) if not is_relation_trivial(w, scene.base)]
    worst, worst_word, failures = math.inf, None, []
    for w, data in zip(words, word_spectra(words, scene.rep)):
        if isinstance(data, NotLoxodromic):
            failures.append(str(w))
            worst, worst_word = 0.0, str(w)
            continue
        if data.min_gap < worst:
            worst, worst_word = data.min_gap, str(w)
    tol = cfg.tolerances.min_gap
    details = {"radius": cfg.ball_radius, "worst_word": worst_word, "not_loxodromic": failures[:20]}
    return CheckReport("loxodromic", cfg.n, len(words), worst, tol, not failures and worst > tol, details)


def check_gaps(rep: SurfaceRep, cfg: SceneConfig) -> tuple:
    words = []
    for length in range(1, max(4, cfg.ball_radius) + 1):
        words.extend(sample_words(cfg.genus, length, GAP_WORDS_PER_LENGTH, cfg.seed + length))
    growth = anosov.gap_growth(rep, words)
    return growth, anosov.gap_certificate(growth, cfg.n, cfg.tolerances.gap_threshold)


def check_contraction(scene: Scene) -> CheckReport:
    cfg = scene.config
    triple = anosov.Triple(*cfg.triple)
    return anosov.contraction_trace(scene.curve, triple, cfg.contraction_root, cfg.times,
                                    slack=cfg.tolerances.contraction_slack)


def translation_length(m: np.ndarray) -> float:
    tr = abs(float(np.trace(m)))
    return 2 * math.log((tr + math.sqrt(tr * tr - 4)) / 2)


def check_period(scene: Scene) -> CheckReport:
    """Period against log|crossratio| over seeded words and witnesses; on a
    Fuchsian scene also against (n-1) times the hyperbolic length."""
    cfg = scene.config
    rng = np.random.default_rng(cfg.seed)
    curve = scene.curve
    fuchsian = all(t == 0 for t in cfg.tau)
    words = []
    for k in range(PERIOD_WORDS):
        words.extend(sample_words(cfg.genus, 1 + k % 4, 1, cfg.seed + 1000 + k))
    worst, rows = 0.0, []
    for w in words:
        ends = (boundary_coordinate(w, scene.base).theta, boundary_coordinate(w.inverse(), scene.base).theta)
        pool = [s.theta for s in scene.samples if min(circle_distance(s.theta, e) for e in ends) >= PERIOD_SEPARATION]
        pick = rng.choice(len(pool), size=min(PERIOD_WITNESSES, len(pool)), replace=False)
        witnesses = [pool[i] for i in sorted(pick)]
        value, logs = anosov.period_values(scene.rep, w, witnesses, curve)
        err = max(abs(lb - value) for lb in logs)
        row = {"word": str(w), "period": value, "crossratio_error": err, "witnesses": len(witnesses)}
        if fuchsian:
            length = (cfg.n - 1) * translation_length(evaluate(w, scene.base))
            row["length_error"] = abs(value - length) / length
            err = max(err, row["length_error"])
        worst = max(worst, err)
        rows.append(row)
    tol = cfg.tolerances.period
    details = {"words": rows, "fuchsian": fuchsian, "note": "worst_margin is the largest error"}
    return CheckReport("period", cfg.n, len(words), worst, tol, worst < tol, details)


def check_hill(cfg: SceneConfig) -> CheckReport:
    sys_ = hill.preset(cfg.hill_preset)
    return hill.hill_curve_check(sys_, cfg.tuples, cfg.seed, cfg.tolerances.hill)


def run_check(scene: Scene, name: str) -> CheckReport:
    cfg = scene.config
    tol = cfg.tolerances
    if name in POSITIVITY_SUITES:
        return check_positivity(scene.samples, POSITIVITY_SUITES[name], cfg.tuples, cfg.seed,
                                tol.positivity, tol.separation)
    if name == "frenet":
        return check_frenet(scene.samples, scene.anchor, final_limit=tol.frenet_final, tol=tol.direct)
    if name == "loxodromic":
        return check_loxodromic(scene)
    if name == "irreducible":
        return check_irreducible(scene.rep, depth=3)
    if name == "gaps":
        return check_gaps(scene.rep, cfg)[1]
    if name == "contraction":
        return check_contraction(scene)
    if name == "period":
        return check_period(scene)
    if name == "hill":
        return check_hill(cfg)
    raise ConfigError(f"unknown suite entry {name!r}")


def run_scene(config: SceneConfig, scene: Scene | None = None) -> dict:
    """Write scene.json, rep.json, curve.json and report_<suite>.json files.

    Returns {suite name: CheckReport}.
    """
    scene = scene or build_scene(config)
    out = config.output_dir
    write_text(os.path.join(out, "scene.json"), config.dumps() + "\n")
    write_text(os.path.join(out, "rep.json"), _dump(scene.rep.to_json()))
    write_text(os.path.join(out, "curve.json"), _dump(curve_json(scene)))
    with ThreadPoolExecutor(max_workers=min(thread_count(), max(1, len(config.suite)))) as pool:
        reports = list(pool.map(lambda name: run_check(scene, name), config.suite))
    results = dict(zip(config.suite, reports))
    for name, report in results.items():
        report.details["tolerances"] = asdict(config.tolerances)
        write_text(os.path.join(out, f"report_{name}.json"), report.dumps() + "\n")
    summary = {name: r.passed for name, r in results.items()}
    write_text(os.path.join(out, "summary.json"), _dump(summary))
    return results


def emit_traces(config: SceneConfig, what: str, scene: Scene | None = None) -> str:
    """Write <what>.csv in the output directory and return its path.

    contraction: t, log_norm.  gaps: word_len, gap_1..gap_{n-1} (mean log gap
    per length).  hill: x, f1..fn.
    """
    out = config.output_dir
    path = os.path.join(out, f"{what}.csv")
    if what == "hill":
        sys_ = hill.preset(config.hill_preset)
        write_text(path, csv_text(sys_.header(), sys_.rows()))
        return path
    if what not in ("contraction", "gaps"):
        raise ConfigError(f"unknown trace {what!r}")
    scene = scene or load_scene(config)
    if what == "contraction":
        report = check_contraction(scene)
        write_text(path, csv_text(["t", "log_norm"], anosov.contraction_rows(report)))
    else:
        growth, _ = check_gaps(scene.rep, config)
        header = ["word_len"] + [f"gap_{i + 1}" for i in range(config.n - 1)]
        write_text(path, csv_text(header, growth.rows()))
    return path


# --- argument parsing --------------------------------------------------------

def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> tuple:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _scene_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="SceneConfig JSON; flags override its values")
    p.add_argument("--n", type=int)
    p.add_argument("--bend", type=_floats, help="bend parameters; a single value is broadcast")
    p.add_argument("--radius", type=int, help="word ball radius for curve sampling")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--tuples", type=int, help="tuple budget for positivity checks")
    p.add_argument("--anchor", help="word whose attracting point anchors the Frenet check, or auto")
    for name in Tolerances.names():
        p.add_argument(f"--tol.{name}", dest=f"tol_{name}", type=float)


def parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="hitchin-lab", description=__doc__.split("\n\n")[0])
    sub = top.add_subparsers(dest="command", required=True)
    p = sub.add_parser("build-rep", help="write rep.json")
    _scene_flags(p)
    p = sub.add_parser("sample-curve", help="write rep.json and curve.json")
    _scene_flags(p)
    p = sub.add_parser("check", help="run a check suite and write reports")
    _scene_flags(p)
    p.add_argument("--suite", type=_names, help=f"comma-separated subset of {','.join(SUITES)}")
    p = sub.add_parser("trace", help="write a CSV trace")
    _scene_flags(p)
    p.add_argument("what", choices=("contraction", "gaps", "hill"))
    p.add_argument("--times", type=_floats, help="flow times for the contraction trace")
    p = sub.add_parser("hill", help="integrate a Hill operator and check its curve")
    p.add_argument("--preset", choices=sorted(hill.PRESETS))
    p.add_argument("--coeffs", type=_floats, help="constant a_2..a_n (order = count + 1)")
    p.add_argument("--interval", type=_floats, default=(0.0, 1.0))
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--tuples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol.hill", dest="tol_hill", type=float, default=hill.HILL_TOL)
    p.add_argument("--derivatives", action="store_true", help="include derivative columns in the CSV")
    p.add_argument("--out", default="hitchin_out")
    return top


def config_from_args(args) -> SceneConfig:
    cfg = load_config(args.config) if args.config else SceneConfig()
    tol_overrides = {name: getattr(args, f"tol_{name}") for name in Tolerances.names()
                     if getattr(args, f"tol_{name}") is not None}
    changes = {"n": args.n, "bend_tau": args.bend, "ball_radius": args.radius, "seed": args.seed,
               "output_dir": args.out, "tuples": args.tuples, "anchor": args.anchor,
               "suite": getattr(args, "suite", None), "times": getattr(args, "times", None)}
    if tol_overrides:
        changes["tolerances"] = tolerances_from(tol_overrides, cfg.tolerances)
    # a bend list sized for the old n would fail validation after changing n
    if args.n is not None and args.bend is None and len(cfg.bend_tau) not in (1, args.n - 1):
        changes["bend_tau"] = (0.0,)
    return cfg.with_overrides(**changes)


def _run_hill(args) -> int:
    if (args.preset is None) == (args.coeffs is None):
        raise ConfigError("give exactly one of --preset and --coeffs")
    if len(args.interval) != 2:
        raise ConfigError("--interval needs two numbers")
    if args.preset:
        system = hill.preset(args.preset, args.interval, args.step)
    else:
        system = hill.hill_solve(len(args.coeffs) + 1, args.coeffs, args.interval, args.step)
    report = hill.hill_curve_check(system, args.tuples, args.seed, args.tol_hill)
    write_text(os.path.join(args.out, "hill.csv"), csv_text(system.header(args.derivatives),
                                                             system.rows(args.derivatives)))
    write_text(os.path.join(args.out, "report_hill.json"), report.dumps() + "\n")
    print(report.line())
    return 0 if report.passed else 1


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    try:
        if args.command == "hill":
            return _run_hill(args)
        cfg = config_from_args(args)
        if args.command == "build-rep":
            _, rep = build_rep(cfg)
            write_text(os.path.join(cfg.output_dir, "rep.json"), _dump(rep.to_json()))
            print(f"rep n={rep.n} relation_residual={rep.relation_residual:.3e}")
            return 0
        if args.command == "sample-curve":
            scene = build_scene(cfg)
            write_text(os.path.join(cfg.output_dir, "rep.json"), _dump(scene.rep.to_json()))
            write_text(os.path.join(cfg.output_dir, "curve.json"), _dump(curve_json(scene)))
            print(f"curve n={cfg.n} radius={cfg.ball_radius} samples={len(scene.samples)}")
            return 0
        if args.command == "trace":
            print(emit_traces(cfg, args.what))
            return 0
        results = run_scene(cfg)
        for report in results.values():
            print(report.line())
        return 0 if all(r.passed for r in results.values()) else 1
    except HitchinLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
