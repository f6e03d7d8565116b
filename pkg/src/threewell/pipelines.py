"""Experiment pipelines producing the data behind each figure.

Every command writes into ``cfg.out_dir`` and finishes with a
``manifest.json`` holding the resolved configuration, seeds, timings, cache
hits, per-item failures and a SHA-256 for every artifact written.
"""
from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from . import classical as cl
from . import critical as cr
from . import eig
from . import quantum_obs as qo
from .config import RunConfig
from .export import write_columns_csv, write_matrix_csv
from .qham import ModelParams

log = logging.getLogger(__name__)


def _tag(x: float) -> str:
    return f"{x:g}"


class Run:
    """Bookkeeping for one pipeline invocation."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg.validate()
        self.out = Path(cfg.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.cache_dir = cfg.resolved_cache_dir()
        self.artifacts: list[Path] = []
        self.cache_hits: dict[str, bool] = {}
        self.seeds: dict[str, int] = {}
        self.failures: list[dict] = []
        self.results: dict = {}
        self.t0 = time.perf_counter()
        self.started = datetime.now(timezone.utc).isoformat()

    def path(self, name: str) -> Path:
        p = self.out / name
        self.artifacts.append(p)
        return p

    def params(self, eps: float) -> ModelParams:
        return ModelParams(self.cfg.U, self.cfg.J, float(eps), self.cfg.N)

    def spectrum(self, eps: float) -> eig.Spectrum:
        p = self.params(eps)
        s, hit = eig.get_spectrum(p, self.cache_dir)
        self.cache_hits[_tag(eps)] = hit
        log.info("spectrum eps=%g N=%d D=%d (%s)", eps, p.N, s.D, "cache hit" if hit else "diagonalized")
        return s

    def window(self, s: eig.Spectrum) -> int:
        return self.cfg.window or qo.default_window(s.D)

    def seed_for(self, label: str, k: int) -> int:
        seed = self.cfg.seed * 1000 + k
        self.seeds[label] = seed
        return seed

    def fail(self, item: str, exc: Exception):
        log.warning("%s failed: %s", item, exc)
        self.failures.append({"item": item, "error": type(exc).__name__, "message": str(exc)})

    def finish(self) -> dict:
        digests = {}
        for p in self.artifacts:
            digests[str(p.relative_to(self.out))] = hashlib.sha256(p.read_bytes()).hexdigest()
        manifest = {
            "kind": self.cfg.kind,
            "version": __version__,
            "config": self.cfg.as_dict(),
            "seeds": self.seeds,
            "started": self.started,
            "wall_clock_s": round(time.perf_counter() - self.t0, 3),
            "cache_hits": self.cache_hits,
            "failures": self.failures,
            "results": self.results,
            "artifacts": digests,
        }
        with open(self.out / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        return manifest


def classical_histogram(params, e_target: float, single: bool, cfg: RunConfig, seed: int):
    """Histogram of one long trajectory or of ``cfg.ic_count`` shorter ones."""
    count, t_max = (1, cfg.t_max_single) if single else (cfg.ic_count, cfg.t_max_multi)
    ics = cl.sample_initial_conditions(params, e_target, count, seed=seed)
    job = partial(cl.integrate, params=params, t_max=t_max, rel_tol=cfg.rel_tol, dt_sample=cfg.dt_sample)
    if cfg.workers > 1 and count > 1:
        with ProcessPoolExecutor(min(cfg.workers, count)) as pool:
            trajs = list(pool.map(job, ics))
    else:
        trajs = [job(ic) for ic in ics]
    hist = cl.occupation_histogram(trajs, cfg.bins)
    drift = max(t.energy_drift for t in trajs)
    return hist, trajs, drift


def _write_grid(run: Run, stem: str, grid):
    grid.to_csv(run.path(stem + ".csv"))
    grid.to_pgm(run.path(stem + ".pgm"))


def cmd_spectrum(cfg: RunConfig) -> dict:
    run = Run(cfg)
    for eps in cfg.eps:
        s = run.spectrum(eps)
        write_columns_csv(run.path(f"eigenvalues_eps{_tag(eps)}.csv"), ["m", "E", "e"],
                          [range(s.D), s.eigenvalues, eig.normalized_energies(s)])
        run.results[_tag(eps)] = {"D": s.D, "e_min": float(s.eigenvalues[0] / cfg.N),
                                  "e_max": float(s.eigenvalues[-1] / cfg.N)}
    return run.finish()


def cmd_critical(cfg: RunConfig) -> dict:
    run = Run(cfg)
    for eps in cfg.eps:
        p = run.params(eps)
        pts = cr.find_critical_points(p, cfg.grid_density)
        cr.write_table(pts, run.path(f"critical_eps{_tag(eps)}.csv"))
        try:
            run.results[_tag(eps)] = {"e_c": cr.unstable_critical_point(p, points=pts)}
        except cr.CriticalPointNotFound as exc:
            run.fail(f"eps={_tag(eps)}", exc)
    return run.finish()


def _critical_point(run: Run, eps: float) -> float:
    p = run.params(eps)
    pts = cr.find_critical_points(p, run.cfg.grid_density)
    cr.write_table(pts, run.path(f"critical_eps{_tag(eps)}.csv"))
    return cr.unstable_critical_point(p, points=pts)


def cmd_fig_husimi_sweep(cfg: RunConfig) -> dict:
    """Husimi projections centered on each tilt's unstable critical energy."""
    run = Run(cfg)
    rows = []
    for eps in cfg.eps:
        try:
            cp = _critical_point(run, eps)
            s = run.spectrum(eps)
            g = qo.husimi_at_energy(s, cp.energy, run.window(s))
        except (cr.CriticalPointNotFound, eig.DiagonalizationError) as exc:
            run.fail(f"eps={_tag(eps)}", exc)
            continue
        _write_grid(run, f"fig2_husimi_eps{_tag(eps)}", g)
        com = g.center_of_mass()
        rows.append((eps, cp.energy, cp.classification, g.center_index, g.center_energy, g.window,
                     com[0], com[1], g.mirror_asymmetry(), g.total()))
    cols = list(zip(*rows)) if rows else [[]] * 10
    write_columns_csv(run.path("fig2_summary.csv"),
                      ["eps", "e_c", "class", "center_index", "center_e", "window", "com_n1", "com_n3",
                       "mirror_asymmetry", "total"], cols)
    run.results["panels"] = len(rows)
    return run.finish()


def cmd_fig_classical_sweep(cfg: RunConfig) -> dict:
    """Classical occupation densities at each tilt's unstable critical energy."""
    run = Run(cfg)
    rows = []
    for k, eps in enumerate(cfg.eps):
        p = run.params(eps)
        single = abs(eps - cfg.chaotic_eps) <= cfg.single_band
        try:
            cp = _critical_point(run, eps)
            seed = run.seed_for(f"fig3_eps{_tag(eps)}", k)
            hist, trajs, drift = classical_histogram(p, cp.energy, single, cfg, seed)
        except (cr.CriticalPointNotFound, cl.EnergyOutOfRangeError, cl.StiffnessError) as exc:
            run.fail(f"eps={_tag(eps)}", exc)
            continue
        _write_grid(run, f"fig3_classical_eps{_tag(eps)}", hist)
        com = hist.center_of_mass()
        rows.append((eps, cp.energy, "single" if single else "multi", len(trajs), drift, com[0], com[1],
                     hist.mirror_asymmetry()))
    cols = list(zip(*rows)) if rows else [[]] * 8
    write_columns_csv(run.path("fig3_summary.csv"),
                      ["eps", "e_c", "mode", "trajectories", "max_energy_drift", "com_n1", "com_n3",
                       "mirror_asymmetry"], cols)
    run.results["panels"] = len(rows)
    return run.finish()


def cmd_fig_energy_scan(cfg: RunConfig) -> dict:
    """Quantum/classical pairs across the spectrum at a single tilt."""
    run = Run(cfg)
    eps = cfg.eps[0]
    p = run.params(eps)
    s = run.spectrum(eps)
    W = run.window(s)
    curve = qo.participation_ratio(s)
    curve.to_csv(run.path(f"fig4_pr_eps{_tag(eps)}.csv"))
    peak = qo.pr_peak_energy(curve, cfg.smoothing_width)
    run.results["pr_peak_energy"] = peak
    run.results["pr_max_scaled"] = float(curve.scaled.max())

    quantum, classical_h, labels = [], [], []
    for k, e in enumerate(cfg.energies):
        g = qo.husimi_at_energy(s, e, W)
        _write_grid(run, f"fig5_husimi_e{_tag(e)}", g)
        single = not any(abs(e - m) < 1e-12 for m in cfg.multi_energies)
        try:
            hist, _, drift = classical_histogram(p, e, single, cfg, run.seed_for(f"fig6_e{_tag(e)}", k))
        except (cl.EnergyOutOfRangeError, cl.StiffnessError) as exc:
            run.fail(f"e={_tag(e)}", exc)
            continue
        _write_grid(run, f"fig6_classical_e{_tag(e)}", hist)
        quantum.append(g.resample(cfg.bins))
        classical_h.append(hist)
        labels.append(e)
    M = np.array([[cl.bhattacharyya(q, c) for c in classical_h] for q in quantum])
    if M.size:
        write_matrix_csv(run.path("fig56_overlap.csv"), M)
        dom = [bool(M[i, i] > np.max(np.delete(M[i], i), initial=-np.inf)) for i in range(len(labels))]
        run.results["overlap_diagonal_dominant_rows"] = int(sum(dom))
    run.results["energies"] = list(labels)
    write_columns_csv(run.path("fig4_peak.csv"), ["pr_peak_energy", "smoothing_width", "window"],
                      [[peak], [cfg.smoothing_width], [W]])
    return run.finish()


def cmd_fig_shrimp(cfg: RunConfig) -> dict:
    """Fixed energy, varying tilt: quantum grids and multi-start classical densities."""
    run = Run(cfg)
    e = cfg.energies[0] if cfg.energies else 0.075
    rows = []
    for k, eps in enumerate(cfg.eps):
        p = run.params(eps)
        s = run.spectrum(eps)
        g = qo.husimi_at_energy(s, e, run.window(s))
        _write_grid(run, f"fig7_husimi_eps{_tag(eps)}", g)
        try:
            hist, _, drift = classical_histogram(p, e, False, cfg, run.seed_for(f"fig8_eps{_tag(eps)}", k))
        except (cl.EnergyOutOfRangeError, cl.StiffnessError) as exc:
            run.fail(f"eps={_tag(eps)}", exc)
            continue
        _write_grid(run, f"fig8_classical_eps{_tag(eps)}", hist)
        rows.append((eps, e, g.mirror_asymmetry(), hist.mirror_asymmetry(),
                     cl.bhattacharyya(g.resample(cfg.bins), hist)))
    cols = list(zip(*rows)) if rows else [[]] * 5
    write_columns_csv(run.path("fig78_summary.csv"),
                      ["eps", "e", "quantum_asymmetry", "classical_asymmetry", "overlap"], cols)
    run.results["panels"] = len(rows)
    return run.finish()


def pr_dispersion(curve: qo.PrCurve, width: int = 50) -> float:
    """Interquartile range of PR relative to its own moving average.

    Dividing out the smooth trend leaves the state-to-state fluctuations,
    which are narrowest where the spectrum is most uniformly chaotic.
    """
    ratio = curve.pr / qo.smooth(curve.pr, width)
    q1, q3 = np.percentile(ratio, [25, 75])
    return float(q3 - q1)


def cmd_pr_sweep(cfg: RunConfig) -> dict:
    """PR curves for every tilt, annotated with the classical critical energy."""
    run = Run(cfg)
    rows = []
    for eps in cfg.eps:
        s = run.spectrum(eps)
        curve = qo.participation_ratio(s)
        curve.to_csv(run.path(f"fig9_pr_eps{_tag(eps)}.csv"))
        try:
            ec = _critical_point(run, eps).energy
        except cr.CriticalPointNotFound as exc:
            run.fail(f"eps={_tag(eps)}", exc)
            ec = float("nan")
        rows.append((eps, ec, pr_dispersion(curve, cfg.smoothing_width), float(curve.pr.min()),
                     float(curve.pr.max()), s.D))
    cols = list(zip(*rows))
    write_columns_csv(run.path("fig9_summary.csv"),
                      ["eps", "e_c", "pr_dispersion", "pr_min", "pr_max", "D"], cols)
    disp = {_tag(r[0]): r[2] for r in rows}
    run.results["pr_dispersion"] = disp
    run.results["min_dispersion_eps"] = float(min(rows, key=lambda r: r[2])[0])
    return run.finish()


COMMANDS = {
    "spectrum": cmd_spectrum,
    "critical": cmd_critical,
    "fig2": cmd_fig_husimi_sweep,
    "fig3": cmd_fig_classical_sweep,
    "fig56": cmd_fig_energy_scan,
    "fig78": cmd_fig_shrimp,
    "fig9": cmd_pr_sweep,
}


def run(cfg: RunConfig) -> dict:
    return COMMANDS[cfg.validate().kind](cfg)
