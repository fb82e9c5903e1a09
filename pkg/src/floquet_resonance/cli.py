"""Command-line driver: ``floquet-resonance <subcommand> --config <path> [...]``.

Every payload file (CSV, JSON) embeds the config digest and is a
deterministic function of the config and seed.  Timestamps, the tool version
and the command line go to ``metadata.json`` only.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import metadata as importlib_metadata

import numpy as np

from .config import ConfigError, ExperimentConfig, config_digest, parse_config
from .errors import InvalidModelError, QualityWarning
from .floquet import (f_terms, first_order_shift, fourier_modes, gamma_fgr, gamma_limiting, genericity_sample,
                      random_bump_drive, resonance_expansion)
from .grid import SpatialGrid, build_hamiltonian, eigensolve
from .models import DrivenModel, GaussianProfile, PoschlTeller, StaticModel, ZeroPotential, monochromatic
from .propagation import PropagationConfig, regress, s_max_for, survival_fit
from .spectral import boundary_value

COMMANDS = ("bound-states", "modes", "resolvent", "fgr", "limiting", "expand", "propagate", "compare",
            "generic-sample", "selftest")


def tool_version() -> str:
    try:
        return importlib_metadata.version("artifact")
    except importlib_metadata.PackageNotFoundError:
        return "unknown"


# ---------------------------------------------------------------------------
# serialization

def _plain(obj):
    """JSON-ready copy: complex -> {re, im}, arrays -> lists, non-finite -> None."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _plain(float(obj.real)), "im": _plain(float(obj.imag))}
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


class Writer:
    """Writes payload files into one directory, stamping each with the config digest."""

    def __init__(self, directory: str, digest: str):
        self.directory = directory
        self.digest = digest
        self.files = []
        os.makedirs(directory, exist_ok=True)

    def _path(self, name):
        self.files.append(name)
        return os.path.join(self.directory, name)

    def json(self, name: str, payload: dict):
        body = {"config_digest": self.digest, **_plain(payload)}
        with open(self._path(name), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(body, fh, sort_keys=True, indent=2, allow_nan=False)
            fh.write("\n")

    def csv(self, name: str, header, rows):
        buf = io.StringIO()
        buf.write(f"# config_digest={self.digest}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.16e}" if isinstance(v, (float, np.floating)) else v for v in row])
        with open(self._path(name), "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def _resonance_payload(res) -> dict:
    return {
        "route": res.route, "E0": res.E0, "omega": res.omega, "Gamma": res.Gamma, "c1": res.c1, "c2": res.c2,
        "alpha": res.alpha, "E_alpha": res.E_alpha,
        "channels": [{"n": c.n, "energy": c.energy, "contribution": c.contribution, "parts": list(c.parts)}
                     for c in res.channels],
    }


def _series_rows(series):
    A = series.amplitudes
    return [(float(s), float(a.real), float(a.imag), float(abs(a))) for s, a in zip(series.s_values, A)]


def _fit_payload(series) -> dict:
    f = series.fit
    return {"alpha": series.alpha, "s_max": series.s_max, "dt": series.dt, "valid_horizon": series.valid_horizon,
            "E0_grid": series.E0, "launches": series.n_t0, "box_half_width": series.half_width,
            "Gamma_fit": f.Gamma_fit, "E_fit": f.E_fit, "E_fit_raw": f.E_fit_raw, "a_fit": f.a_fit,
            "window": list(f.window), "residual": f.residual}


def _alpha_tag(a: float) -> str:
    return f"{a:+.6g}".replace("+", "p").replace("-", "m").replace(".", "_")


# ---------------------------------------------------------------------------
# subcommands

class Context:
    def __init__(self, cfg: ExperimentConfig, writer: Writer, threads: int):
        self.cfg = cfg
        self.writer = writer
        self.threads = max(1, threads)
        self.num = cfg.numerics
        self._model = None

    @property
    def model(self) -> DrivenModel:
        if self._model is None:
            self._model = self.cfg.model()
        return self._model

    def prop_config(self) -> PropagationConfig:
        n = self.num
        return PropagationConfig(steps_per_period=n.steps_per_period, n_t0=n.launches, h=n.prop_h)

    def map(self, fn, items):
        items = list(items)
        if self.threads == 1 or len(items) < 2:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.threads) as pool:
            return list(pool.map(fn, items))

    def limiting(self):
        return gamma_limiting(self.model, self.num.n_max, self.num.epsilon_ladder, self.num.delta_thr)

    def fgr(self):
        return gamma_fgr(self.model, self.num.n_max, self.num.delta_thr)

    def alphas(self):
        if not self.cfg.alphas:
            raise ConfigError("drive.alphas is required for this command", key="drive.alphas")
        return list(self.cfg.alphas)

    def series(self, gamma: float):
        model, num = self.model, self.num

        def one(a):
            if num.s_max is not None:
                sm = num.s_max
            elif gamma > 0:
                sm = s_max_for(model, a, gamma, num.decay_product)
            else:
                raise ConfigError("numerics.s_max is required when the predicted width vanishes",
                                  key="numerics.s_max")
            return survival_fit(model, a, sm, self.prop_config())
        return self.map(one, self.alphas())


def cmd_bound_states(ctx: Context) -> dict:
    states = ctx.model.static.bound_states
    ctx.writer.csv("bound_states.csv", ["index", "energy", "boundary_amplitude", "gap"],
                   [(b.index, float(b.energy), float(b.boundary_amplitude), float(b.gap)) for b in states])
    return {"count": len(states), "energies": [b.energy for b in states]}


def cmd_modes(ctx: Context) -> dict:
    modes = [m for m in fourier_modes(ctx.model, ctx.num.n_max) if np.any(m.profile)]
    x = ctx.model.grid.x
    header = ["x"] + [f"{part}_W{m.n}" for m in modes for part in ("re", "im")]
    cols = [x] + [c for m in modes for c in (m.profile.real, m.profile.imag)]
    ctx.writer.csv("modes.csv", header, [tuple(float(c[i]) for c in cols) for i in range(x.size)])
    h = ctx.model.grid.h
    return {"modes": [{"n": m.n, "l2_norm": float(np.sqrt(h * np.sum(np.abs(m.profile) ** 2)))} for m in modes]}


def cmd_resolvent(ctx: Context) -> dict:
    num = ctx.num
    rows, terms = [], {}
    for eps in num.epsilon_ladder:
        ft = f_terms(ctx.model, eps, num.n_max)
        for m, v in sorted(ft.terms.items()):
            rows.append((float(eps), m, float(ctx.model.static.E0 - m * ctx.model.omega), float(v.real),
                         float(v.imag)))
        terms[repr(float(eps))] = {"total": ft.total, "projector_term": ft.projector_term}
    ctx.writer.csv("resolvent_terms.csv", ["epsilon", "m", "lambda", "re", "im"], rows)
    lim = ctx.limiting()
    return {"per_epsilon": terms, "extrapolated": {"F": lim.c2, "terms": lim.diagnostics["terms"],
                                                   "projector_term": lim.diagnostics["projector_term"]}}


def cmd_fgr(ctx: Context) -> dict:
    res = ctx.fgr()
    ctx.writer.csv("fgr_channels.csv", ["n", "energy", "contribution"],
                   [(c.n, float(c.energy), float(c.contribution)) for c in res.channels] or [])
    return _resonance_payload(res)


def cmd_limiting(ctx: Context) -> dict:
    res = ctx.limiting()
    payload = _resonance_payload(res)
    payload["closed_channel_imag"] = res.diagnostics["closed_imag"]
    payload["projector_term"] = res.diagnostics["projector_term"]
    return payload


def cmd_expand(ctx: Context) -> dict:
    num = ctx.num
    out = []
    for a in ctx.alphas():
        res = resonance_expansion(ctx.model, a, num.n_max, num.epsilon_ladder, num.delta_thr)
        out.append(res)
    ctx.writer.csv("expansion.csv", ["alpha", "re_E_alpha", "im_E_alpha"],
                   [(float(r.alpha), float(r.E_alpha.real), float(r.E_alpha.imag)) for r in out])
    return {"expansions": [_resonance_payload(r) for r in out]}


def _write_series(ctx, series):
    for ser in series:
        ctx.writer.csv(f"survival_{_alpha_tag(ser.alpha)}.csv", ["s", "re_A", "im_A", "abs_A"], _series_rows(ser))


def cmd_propagate(ctx: Context) -> dict:
    gamma = ctx.limiting().Gamma if ctx.num.s_max is None else 0.0
    series = ctx.series(gamma)
    _write_series(ctx, series)
    return {"runs": [_fit_payload(s) for s in series]}


def cmd_compare(ctx: Context) -> dict:
    fgr, lim = ctx.fgr(), ctx.limiting()
    rel = abs(fgr.Gamma - lim.Gamma) / max(abs(lim.Gamma), 1e-300)
    series = ctx.series(lim.Gamma)
    _write_series(ctx, series)
    rep = regress(series, 0.5 * lim.Gamma, first_order_shift(ctx.model))
    runs = [{**_fit_payload(s), "ratio": r} for s, r in zip(series, rep.ratios)]
    payload = {
        "Gamma_fgr": fgr.Gamma, "Gamma_limiting": lim.Gamma, "route_relative_difference": rel,
        "im_F": rep.im_F, "c1": rep.c1, "E0": lim.E0, "runs": runs,
    }
    if len(series) >= 3:
        payload.update({"loglog_slope": rep.slope, "loglog_intercept": rep.intercept,
                        "intercept_ratio": float(np.exp(rep.intercept) / (2.0 * rep.im_F)),
                        "shift_coefficient": rep.shift_coefficient})
    lines = [f"Gamma (eigenfunction expansion) = {fgr.Gamma:.10e}",
             f"Gamma (limiting absorption)     = {lim.Gamma:.10e}",
             f"relative difference             = {rel:.3e}",
             "", "alpha        Gamma_fit           ratio Gamma_fit/(2 alpha^2 Im F)"]
    lines += [f"{r['alpha']:<12.6g} {r['Gamma_fit']:<19.10e} {r['ratio']:.6f}" for r in runs]
    if len(series) >= 3:
        lines += ["", f"log-log slope = {rep.slope:.6f}",
                  f"exp(intercept) / (2 Im F) = {payload['intercept_ratio']:.6f}",
                  f"linear shift coefficient = {rep.shift_coefficient:.6e} (c1 = {rep.c1:.6e})"]
    with open(os.path.join(ctx.writer.directory, "report.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_digest={ctx.writer.digest}\n" + "\n".join(lines) + "\n")
    ctx.writer.files.append("report.txt")
    print("\n".join(lines))
    return payload


def cmd_generic_sample(ctx: Context) -> dict:
    num = ctx.num
    rep = genericity_sample(ctx.model.static, ctx.cfg.period, random_bump_drive(), num.trials, num.seed, num.n_max)
    ctx.writer.csv("generic.csv", ["trial", "Gamma"], [(i, float(g)) for i, g in enumerate(rep.gammas)])
    return {"fraction": rep.fraction, "threshold": rep.threshold, "trials": num.trials, "seed": num.seed}


def cmd_selftest(ctx: Context) -> dict:
    """Fast oracles that do not depend on the configured model."""
    checks = {}
    static = StaticModel(PoschlTeller(), SpatialGrid.symmetric(20.0, 2001))
    checks["bound_state_energy"] = abs(static.E0 + 1.0) < 1e-3
    free = build_hamiltonian(ZeroPotential(), SpatialGrid.symmetric(30.0, 3001))
    g = np.pi ** -0.25 * np.exp(-0.5 * free.grid.x ** 2)  # unit-norm Gaussian
    bv = boundary_value(free, g, 1.0)
    checks["free_resolvent"] = abs(bv.value.imag - np.sqrt(np.pi) / np.e) < 1e-3
    model = DrivenModel(static, monochromatic(GaussianProfile(0.0, 1.0)), np.pi)
    a, b = gamma_fgr(model).Gamma, gamma_fgr(model.with_perturbation(model.perturbation.scaled(2.0))).Gamma
    checks["quadratic_scaling"] = abs(b - 4.0 * a) <= 1e-10 * abs(b)
    ev = eigensolve(static.hamiltonian).values
    checks["spectrum_real"] = bool(np.all(np.isfinite(ev)))
    return {"checks": checks, "passed": all(checks.values())}


HANDLERS = {"bound-states": cmd_bound_states, "modes": cmd_modes, "resolvent": cmd_resolvent, "fgr": cmd_fgr,
            "limiting": cmd_limiting, "expand": cmd_expand, "propagate": cmd_propagate, "compare": cmd_compare,
            "generic-sample": cmd_generic_sample, "selftest": cmd_selftest}


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="floquet-resonance",
                                description="Resonance widths of periodically driven bound states.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="experiment configuration file")
    p.add_argument("--out", help="output directory (overrides output.directory)")
    p.add_argument("--strict", action="store_true", help="exit with code 2 on numerical-quality warnings")
    p.add_argument("--seed", type=int, help="override numerics.seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads for independent alphas")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("--seed must be an unsigned 64-bit integer", key="seed")
            cfg = cfg.with_seed(args.seed)
        if args.out:
            cfg = replace(cfg, output_directory=args.out)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    digest = config_digest(cfg)
    writer = Writer(cfg.output_directory, digest)
    started = datetime.datetime.now(datetime.timezone.utc)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", QualityWarning)
        try:
            payload = HANDLERS[args.command](Context(cfg, writer, args.threads))
        except (InvalidModelError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    quality = [w for w in caught if issubclass(w.category, QualityWarning)]
    for w in caught:
        print(f"warning: {w.category.__name__}: {w.message}", file=sys.stderr)

    name = args.command.replace("-", "_")
    writer.json(f"{name}.json", {"command": args.command, "result": payload,
                                 "quality_warnings": sorted({f"{w.category.__name__}: {w.message}" for w in quality})})
    with open(os.path.join(cfg.output_directory, "metadata.json"), "w", encoding="utf-8") as fh:
        json.dump({"config_digest": digest, "command": args.command, "argv": list(argv or sys.argv[1:]),
                   "tool_version": tool_version(), "started": started.isoformat(),
                   "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                   "files": writer.files + [f"{name}.json"]}, fh, sort_keys=True, indent=2)
    if args.command == "selftest" and not payload["passed"]:
        return 2
    if args.strict and quality:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
