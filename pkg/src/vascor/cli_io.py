"""Data ingestion, run configuration, and the subcommand CLI.

File formats:

* series CSV: header ``period,n_credits,n_defaults`` (all integers) or
  ``period,n_credits,default_rate`` (rate converted to nearest-integer
  defaults); rows sorted by period.
* draws CSV: long format ``chain,iter,name,value``.
* summaries and manifests: JSON with stable field names; every bundle
  embeds the fully resolved configuration and the argv needed to rerun.

Config files are flat ``section.key = value`` text; CLI flags override
file values.  The only environment variable honored is VASCOR_OUT_DIR
(default output directory).  Exit codes: 0 ok, 1 hard error, 2 soft
diagnostic failure (sampler mixed poorly but output was written).
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from ._kernels import IMPL
from .bayes import (PosteriorDraws, PriorConfig, SamplerConfig, diagnostics,
                    nuts_sample, posterior_event_prob, summarize_draws)
from .checks_forecast import (cumulative_study, density_grid, forecast_one_step,
                              posterior_predictive, ppc_pvalue, sweep_priors)
from .classical import (MleSettings, bootstrap_estimate, fit_base,
                        rate_autocorrelation)
from .errors import ConfigError, DataError, VascorError
from .simulate import (PRESET_EXPOSURE, PRESET_HORIZON, PRESETS, DefaultSeries,
                       ExposureModel, default_rates, simulate_defaults,
                       simulate_exposures)
from .stats_core import RngStream
from .vasicek import VasicekParams

__all__ = [
    "read_series",
    "write_series",
    "write_draws",
    "read_draws",
    "RunConfig",
    "main",
]


# ---------------------------------------------------------------------------
# series files

def _parse_count(text, row, col):
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"row {row}, column '{col}': not a number: {text!r}")
    if not np.isfinite(v):
        raise DataError(f"row {row}, column '{col}': non-finite value")
    if v < 0:
        raise DataError(f"row {row}, column '{col}': negative value {text!r}")
    if v != int(v):
        raise DataError(f"row {row}, column '{col}': expected an integer, got {text!r}")
    return int(v)


def read_series(path, label=None):
    """Read a series CSV; see module docstring for the two schemas."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        by_rate = header == ["period", "n_credits", "default_rate"]
        if not by_rate and header != ["period", "n_credits", "n_defaults"]:
            raise DataError(
                f"{path}: header must be period,n_credits,n_defaults or "
                f"period,n_credits,default_rate, got {','.join(header)}")
        periods, credits, defaults = [], [], []
        for i, rowvals in enumerate(reader, start=2):
            if not rowvals or (len(rowvals) == 1 and not rowvals[0].strip()):
                continue
            if len(rowvals) != 3:
                raise DataError(f"row {i}: expected 3 columns, got {len(rowvals)}")
            periods.append(_parse_count(rowvals[0], i, "period"))
            n = _parse_count(rowvals[1], i, "n_credits")
            credits.append(n)
            if by_rate:
                try:
                    rate = float(rowvals[2])
                except ValueError:
                    raise DataError(f"row {i}, column 'default_rate': not a number")
                if not np.isfinite(rate) or rate < 0.0 or rate > 1.0:
                    raise DataError(f"row {i}, column 'default_rate': must lie in [0,1]")
                defaults.append(int(np.rint(rate * n)))
            else:
                d = _parse_count(rowvals[2], i, "n_defaults")
                if d > n:
                    raise DataError(f"row {i}, column 'n_defaults': {d} exceeds n_credits {n}")
                defaults.append(d)
    if not periods:
        raise DataError(f"{path}: no data rows")
    if any(b <= a for a, b in zip(periods, periods[1:])):
        raise DataError(f"{path}: periods must be strictly increasing")
    return DefaultSeries(np.array(credits), np.array(defaults),
                         label=label if label is not None else os.path.basename(path),
                         periods=np.array(periods))


def write_series(series, path):
    """Write a series as period,n_credits,n_defaults CSV."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", "n_credits", "n_defaults"])
        for t in range(len(series)):
            w.writerow([int(series.periods[t]), int(series.n_credits[t]),
                        int(series.n_defaults[t])])


# ---------------------------------------------------------------------------
# draws files

def write_draws(draws, path):
    """Write posterior draws in long format: chain,iter,name,value."""
    names = draws.parameter_names()
    cols = {name: None for name in names}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["chain", "iter", "name", "value"])
        for c in range(draws.n_chains):
            for s in range(draws.n_draws):
                for name in names:
                    if name == "p":
                        v = draws.p[c, s]
                    elif name == "rho":
                        v = draws.rho[c, s]
                    else:
                        v = draws.pi[c, s, int(name[3:-1]) - 1]
                    w.writerow([c, s, name, repr(float(v))])
        del cols


def read_draws(path, prior=None, seed=0, warmup=0):
    """Rebuild PosteriorDraws from a long-format draws CSV.

    Sampler statistics are not stored in the CSV; the reconstructed
    object carries zeroed stats and is suitable for predictive work
    (ppc, forecast), not for convergence diagnostics of the original run.
    """
    values = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["chain", "iter", "name", "value"]:
            raise DataError(f"{path}: not a draws CSV (header {header!r})")
        for rowvals in reader:
            if not rowvals:
                continue
            c, s, name, v = int(rowvals[0]), int(rowvals[1]), rowvals[2], float(rowvals[3])
            values.setdefault(name, {})[(c, s)] = v
    if "p" not in values or "rho" not in values:
        raise DataError(f"{path}: draws file must contain p and rho")
    chains = 1 + max(c for c, _ in values["p"])
    draws_n = 1 + max(s for _, s in values["p"])

    def grid(name):
        out = np.empty((chains, draws_n))
        try:
            for c in range(chains):
                for s in range(draws_n):
                    out[c, s] = values[name][(c, s)]
        except KeyError:
            raise DataError(f"{path}: missing value for {name} at chain {c}, iter {s}")
        return out

    pi_names = sorted((n for n in values if n.startswith("pi[")),
                      key=lambda n: int(n[3:-1]))
    pi = (np.stack([grid(n) for n in pi_names], axis=2)
          if pi_names else np.empty((chains, draws_n, 0)))
    stats = {k: np.zeros((chains, draws_n)) for k in
             ("accept_stat", "step_size", "tree_depth", "divergent",
              "energy", "n_leapfrog")}
    return PosteriorDraws(p=grid("p"), rho=grid("rho"), pi=pi, stats=stats,
                          warmup=warmup, seed=seed,
                          prior=prior if prior is not None else PriorConfig())


# ---------------------------------------------------------------------------
# run configuration

_SCHEMA = {
    "prior.mu_p": (float, 0.2),
    "prior.mu_rho": (float, 0.5),
    "prior.phi_rho": (float, 5.0),
    "prior.a": (float, 10.0),
    "sampler.chains": (int, 4),
    "sampler.warmup": (int, 1000),
    "sampler.draws": (int, 1000),
    "sampler.target_accept": (float, 0.8),
    "sampler.max_depth": (int, 10),
    "sampler.seed": (int, 0),
    "sampler.threads": (int, 1),
    "mle.quad_order": (int, 64),
    "mle.tol": (float, 1e-8),
    "mle.max_iter": (int, 500),
    "bootstrap.n_rep": (int, 10000),
    "bootstrap.level": (float, 0.95),
    "io.out_dir": (str, None),  # None -> VASCOR_OUT_DIR or "."
    "io.format": (str, "csv"),
}

# CLI flag dest -> config key
_FLAG_KEYS = {
    "mu_p": "prior.mu_p",
    "mu_rho": "prior.mu_rho",
    "phi_rho": "prior.phi_rho",
    "a": "prior.a",
    "chains": "sampler.chains",
    "warmup": "sampler.warmup",
    "draws": "sampler.draws",
    "target_accept": "sampler.target_accept",
    "max_depth": "sampler.max_depth",
    "seed": "sampler.seed",
    "threads": "sampler.threads",
    "quad_order": "mle.quad_order",
    "tol": "mle.tol",
    "max_iter": "mle.max_iter",
    "n_rep": "bootstrap.n_rep",
    "level": "bootstrap.level",
    "out": "io.out_dir",
}


class RunConfig:
    """Layered configuration: defaults, then config file, then CLI flags."""

    def __init__(self, values):
        self.values = values

    @classmethod
    def resolve(cls, args):
        values = {k: default for k, (_, default) in _SCHEMA.items()}
        config_path = getattr(args, "config", None)
        if config_path:
            for key, raw in _read_config_file(config_path).items():
                if key not in _SCHEMA:
                    raise ConfigError(f"{config_path}: unknown config key {key!r}")
                typ = _SCHEMA[key][0]
                try:
                    values[key] = typ(raw)
                except ValueError:
                    raise ConfigError(f"{config_path}: bad value for {key}: {raw!r}")
        for dest, key in _FLAG_KEYS.items():
            flag = getattr(args, dest, None)
            if flag is not None:
                values[key] = _SCHEMA[key][0](flag)
        if getattr(args, "prior_preset", None) == "corporate":
            # corporate preset: lower mu_p unless explicitly overridden
            if getattr(args, "mu_p", None) is None:
                values["prior.mu_p"] = 0.1
        if values["io.out_dir"] is None:
            values["io.out_dir"] = os.environ.get("VASCOR_OUT_DIR", ".")
        return cls(values)

    def __getitem__(self, key):
        return self.values[key]

    def prior(self):
        return PriorConfig(mu_p=self["prior.mu_p"], mu_rho=self["prior.mu_rho"],
                           phi_rho=self["prior.phi_rho"], a=self["prior.a"])

    def sampler(self, seed_offset=0):
        return SamplerConfig(chains=self["sampler.chains"],
                             warmup=self["sampler.warmup"],
                             draws=self["sampler.draws"],
                             target_accept=self["sampler.target_accept"],
                             max_depth=self["sampler.max_depth"],
                             seed=self["sampler.seed"] + seed_offset,
                             threads=self["sampler.threads"])

    def mle_settings(self):
        return MleSettings(quad_order=self["mle.quad_order"],
                           tol=self["mle.tol"], max_iter=self["mle.max_iter"])

    def to_dict(self):
        return dict(sorted(self.values.items()))


def _read_config_file(path):
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected 'section.key = value'")
            key, _, raw = text.partition("=")
            out[key.strip()] = raw.strip()
    return out


# ---------------------------------------------------------------------------
# output helpers

def _out_path(config, name):
    out_dir = config["io.out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def _write_json(payload, path):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(command, args, config, inputs, outputs, path):
    payload = {
        "command": command,
        "argv": list(args._argv),
        "config": config.to_dict(),
        "inputs": inputs,
        "outputs": sorted(outputs),
        "versions": {"vascor": __version__, "backend": IMPL,
                     "numpy": np.__version__},
    }
    _write_json(payload, path)


def _write_density_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow(row)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_simulate(args):
    config = RunConfig.resolve(args)
    if args.preset:
        params = PRESETS[args.preset]
        model = PRESET_EXPOSURE
        horizon = args.horizon if args.horizon is not None else PRESET_HORIZON
    else:
        if args.p is None or args.rho is None:
            raise ConfigError("simulate needs --preset or both --p and --rho")
        params = VasicekParams(args.p, args.rho)
        model = ExposureModel(a=args.exposure_a, b=args.exposure_b,
                              sigma_n=args.exposure_sigma)
        horizon = args.horizon if args.horizon is not None else PRESET_HORIZON
    seed = config["sampler.seed"]
    stream = RngStream(seed)
    exposures = simulate_exposures(model, horizon, stream.split(1))
    series = simulate_defaults(params, exposures, stream.split(2),
                               label=args.preset or "custom")
    series_path = _out_path(config, "series.csv")
    write_series(series, series_path)
    manifest = {
        "p": params.p, "rho": params.rho, "horizon": horizon,
        "exposure": {"a": model.a, "b": model.b, "sigma_n": model.sigma_n},
        "preset": args.preset, "seed": seed,
    }
    _write_manifest("simulate", args, config, manifest, ["series.csv"],
                    _out_path(config, "manifest.json"))
    return 0


def _cmd_estimate(args):
    config = RunConfig.resolve(args)
    series = read_series(args.file)
    settings = config.mle_settings()
    outputs = ["estimate.json"]
    if args.bootstrap:
        report = bootstrap_estimate(series, args.method,
                                    config["bootstrap.n_rep"],
                                    config["bootstrap.level"],
                                    RngStream(config["sampler.seed"]),
                                    settings)
        rep_path = _out_path(config, "replicates.csv")
        with open(rep_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replicate", "p", "rho"])
            for i in range(report.n_bootstrap):
                w.writerow([i, repr(float(report.replicates["p"][i])),
                            repr(float(report.replicates["rho"][i]))])
        outputs.append("replicates.csv")
    else:
        report = fit_base(series, args.method, settings)
    payload = report.to_dict()
    payload["n_periods"] = len(series)
    payload["rate_acf"] = [float(v) for v in rate_autocorrelation(series)]
    _write_json(payload, _out_path(config, "estimate.json"))
    _write_manifest("estimate", args, config,
                    {"file": args.file, "method": args.method,
                     "bootstrap": bool(args.bootstrap)},
                    outputs, _out_path(config, "manifest.json"))
    return 0


def _summary_warnings(summary):
    warnings = []
    bad = {name: s["rhat"] for name, s in summary["params"].items()
           if not s["rhat"] < 1.05}
    if bad:
        warnings.append({"kind": "rhat_above_1.05", "parameters": bad})
    if summary["divergence_warning"]:
        warnings.append({"kind": "divergences_above_1_percent",
                         "count": summary["divergences"]})
    return warnings


def _cmd_fit(args):
    config = RunConfig.resolve(args)
    series = read_series(args.file)
    prior = config.prior()
    sampler = config.sampler()
    outputs = ["draws.csv", "summary.json"]

    if args.prior_predictive:
        draws = nuts_sample(series, prior, sampler, prior_only=True)
    else:
        draws = nuts_sample(series, prior, sampler)
    summary = summarize_draws(draws)
    warnings = _summary_warnings(summary)
    summary["warnings"] = warnings
    write_draws(draws, _out_path(config, "draws.csv"))
    _write_json(summary, _out_path(config, "summary.json"))
    if args.prior_predictive:
        for name in ("p", "rho"):
            grid, dens = density_grid(draws.flat(name), lo=0.0, hi=1.0)
            fname = f"density_{name}.csv"
            _write_density_csv(_out_path(config, fname), ["x", "density"],
                               [[repr(float(x)), repr(float(d))]
                                for x, d in zip(grid, dens)])
            outputs.append(fname)
    inputs = {"file": args.file, "prior_predictive": bool(args.prior_predictive)}
    if args.compare:
        other = read_series(args.compare)
        draws_b = nuts_sample(other, prior, config.sampler(seed_offset=1))
        compare = {
            "files": [args.file, args.compare],
            "p_a_greater_than_p_b": posterior_event_prob(draws, draws_b, "p"),
            "rho_a_greater_than_rho_b": posterior_event_prob(draws, draws_b, "rho"),
        }
        _write_json(compare, _out_path(config, "compare.json"))
        outputs.append("compare.json")
        inputs["compare"] = args.compare
    _write_manifest("fit", args, config, inputs, outputs,
                    _out_path(config, "manifest.json"))
    # soft diagnostic failure: output written, but mixing is suspect
    if any(w["kind"] == "rhat_above_1.05" for w in warnings):
        print("warning: R-hat above 1.05; see summary.json", file=sys.stderr)
        return 2
    return 0


def _load_draws_for(args, config):
    if args.draws_file:
        return read_draws(args.draws_file, prior=config.prior(),
                          seed=config["sampler.seed"])
    if not args.refit:
        raise ConfigError("need --draws-file DRAWS.csv or --refit "
                          "(run `vascor fit` first to produce draws)")
    series = read_series(args.file)
    return nuts_sample(series, config.prior(), config.sampler())


def _cmd_ppc(args):
    config = RunConfig.resolve(args)
    series = read_series(args.file)
    draws = _load_draws_for(args, config)
    stream = RngStream(config["sampler.seed"]).split(101)
    pred = posterior_predictive(draws, series, args.s_rep, stream,
                                reuse_fitted_pi=args.reuse_fitted_pi)
    payload = {
        "s_rep": args.s_rep,
        "p_value_median": ppc_pvalue(pred, series, "median"),
        "p_value_iqr": ppc_pvalue(pred, series, "iqr"),
        "reuse_fitted_pi": bool(args.reuse_fitted_pi),
    }
    _write_json(payload, _out_path(config, "ppc.json"))
    rows = []
    obs_grid, obs_dens = density_grid(default_rates(series))
    rows.extend([["observed", repr(float(x)), repr(float(d))]
                 for x, d in zip(obs_grid, obs_dens)])
    lim = min(args.s_rep, args.overlay_reps)
    for r in range(lim):
        grid, dens = density_grid(pred.rates[r])
        rows.extend([[str(r), repr(float(x)), repr(float(d))]
                     for x, d in zip(grid, dens)])
    _write_density_csv(_out_path(config, "overlay.csv"),
                       ["replicate", "x", "density"], rows)
    _write_manifest("ppc", args, config,
                    {"file": args.file, "draws_file": args.draws_file},
                    ["ppc.json", "overlay.csv"],
                    _out_path(config, "manifest.json"))
    return 0


def _cmd_forecast(args):
    config = RunConfig.resolve(args)
    series = read_series(args.file)
    draws = _load_draws_for(args, config)
    t = draws.n_periods
    if args.next_exposure is not None:
        next_n = args.next_exposure
    elif t < len(series):
        next_n = int(series.n_credits[t])
    else:
        raise ConfigError("series has no row t+1; pass --next-exposure")
    stream = RngStream(config["sampler.seed"]).split(202)
    result = forecast_one_step(draws, next_n, stream)
    payload = {
        "horizon_exposure": result.horizon_exposure,
        "median_rate": result.median_rate,
        "interval_50": list(result.interval_50),
        "interval_90": list(result.interval_90),
    }
    if t < len(series):
        payload["realized_rate"] = float(series.n_defaults[t] / series.n_credits[t])
    _write_json(payload, _out_path(config, "forecast.json"))
    with open(_out_path(config, "forecast_draws.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["draw", "defaults"])
        for i, v in enumerate(result.draws):
            w.writerow([i, int(v)])
    _write_manifest("forecast", args, config,
                    {"file": args.file, "draws_file": args.draws_file,
                     "next_exposure": next_n},
                    ["forecast.json", "forecast_draws.csv"],
                    _out_path(config, "manifest.json"))
    return 0


def _parse_grid(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"grid must be comma-separated numbers, got {text!r}")


def _cmd_sweep_priors(args):
    config = RunConfig.resolve(args)
    series = read_series(args.file)
    phi_grid = _parse_grid(args.phi_grid)
    a_grid = _parse_grid(args.a_grid)
    cells = sweep_priors(series, phi_grid, a_grid, config.sampler(),
                         mu_p=config["prior.mu_p"], mu_rho=config["prior.mu_rho"])
    outputs = ["sweep.csv"]
    rows = []
    for cell in cells:
        if cell["ok"]:
            s = cell["summary"]
            rows.append([cell["phi_rho"], cell["a"], 1,
                         s["params"]["p"]["mean"], s["params"]["p"]["q05"],
                         s["params"]["p"]["q95"], s["params"]["rho"]["mean"],
                         s["params"]["rho"]["q05"], s["params"]["rho"]["q95"],
                         s["params"]["p"]["rhat"], s["params"]["rho"]["rhat"],
                         s["divergences"], ""])
            for name in ("p", "rho"):
                grid, dens = cell["density"][name]
                fname = f"density_phi{cell['phi_rho']:g}_a{cell['a']:g}_{name}.csv"
                _write_density_csv(_out_path(config, fname), ["x", "density"],
                                   [[repr(float(x)), repr(float(d))]
                                    for x, d in zip(grid, dens)])
                outputs.append(fname)
        else:
            rows.append([cell["phi_rho"], cell["a"], 0] + [""] * 9 + [cell["error"]])
    _write_density_csv(_out_path(config, "sweep.csv"),
                       ["phi_rho", "a", "ok", "p_mean", "p_q05", "p_q95",
                        "rho_mean", "rho_q05", "rho_q95", "p_rhat", "rho_rhat",
                        "divergences", "error"], rows)
    _write_manifest("sweep-priors", args, config,
                    {"file": args.file, "phi_grid": phi_grid, "a_grid": a_grid},
                    outputs, _out_path(config, "manifest.json"))
    return 0


def _cmd_cumulative(args):
    config = RunConfig.resolve(args)
    series = read_series(args.file)
    t_end = args.t_end if args.t_end is not None else len(series)
    header = ["t", "ok", "p_point", "rho_point", "p_lo", "p_hi", "rho_lo",
              "rho_hi", "rho_boot_median", "error"]
    rows = []
    forecast_rows = []
    if args.mode == "bootstrap_amle":
        reports = cumulative_study(series, "bootstrap_amle", args.t_start, t_end,
                                   rng=RngStream(config["sampler.seed"]),
                                   n_rep=config["bootstrap.n_rep"],
                                   level=config["bootstrap.level"])
    else:
        reports, forecasts = cumulative_study(
            series, "bayes_refit", args.t_start, t_end,
            rng=RngStream(config["sampler.seed"]),
            config=config.sampler(), level=config["bootstrap.level"],
            prior=config.prior())
        for entry, fc in zip(reports, forecasts):
            if fc is None:
                continue
            t = entry["t"]
            realized = float(series.n_defaults[t] / series.n_credits[t])
            forecast_rows.append([t, fc.horizon_exposure, fc.median_rate,
                                  fc.interval_50[0], fc.interval_50[1],
                                  fc.interval_90[0], fc.interval_90[1],
                                  realized])
    for entry in reports:
        r = entry["report"]
        if entry["ok"] and r is not None:
            med = ""
            if r.replicates is not None:
                vals = r.replicates["rho"]
                vals = vals[np.isfinite(vals)]
                med = repr(float(np.median(vals))) if vals.size else ""
            rows.append([entry["t"], 1, r.p_hat, r.rho_hat,
                         r.interval_p[0] if r.interval_p else "",
                         r.interval_p[1] if r.interval_p else "",
                         r.interval_rho[0] if r.interval_rho else "",
                         r.interval_rho[1] if r.interval_rho else "",
                         med, ""])
        else:
            rows.append([entry["t"], 0] + [""] * 7 + [entry.get("error", "")])
    _write_density_csv(_out_path(config, "trace.csv"), header, rows)
    outputs = ["trace.csv"]
    if forecast_rows:
        _write_density_csv(_out_path(config, "forecasts.csv"),
                           ["t", "next_exposure", "median_rate", "lo50", "hi50",
                            "lo90", "hi90", "realized_rate"], forecast_rows)
        outputs.append("forecasts.csv")
    _write_manifest("cumulative", args, config,
                    {"file": args.file, "mode": args.mode,
                     "t_start": args.t_start, "t_end": t_end},
                    outputs, _out_path(config, "manifest.json"))
    return 0


def _cmd_rerun(args):
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    argv = manifest.get("argv")
    if not argv:
        raise ConfigError(f"{args.manifest}: manifest records no argv to rerun")
    return main(argv)


# ---------------------------------------------------------------------------
# argument parsing

def _add_io_flags(p):
    p.add_argument("--out", help="output directory (default: VASCOR_OUT_DIR or .)")
    p.add_argument("--config", help="flat section.key = value config file")
    p.add_argument("--seed", type=int, help="base random seed")
    p.add_argument("--threads", type=int, help="worker threads (output is thread-count invariant)")


def _add_prior_flags(p):
    p.add_argument("--mu-p", dest="mu_p", type=float, help="prior mean of p")
    p.add_argument("--mu-rho", dest="mu_rho", type=float, help="prior mean of rho")
    p.add_argument("--phi-rho", dest="phi_rho", type=float, help="prior precision of rho")
    p.add_argument("--a", dest="a", type=float, help="precision multiplier of the p prior")
    p.add_argument("--prior-preset", choices=["corporate"],
                   help="corporate: mu_p = 0.1 for low-default portfolios")


def _add_sampler_flags(p):
    p.add_argument("--chains", type=int)
    p.add_argument("--warmup", type=int)
    p.add_argument("--draws", type=int)
    p.add_argument("--target-accept", dest="target_accept", type=float)
    p.add_argument("--max-depth", dest="max_depth", type=int)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vascor",
        description="Default-rate simulation and (p, rho) estimation for the "
                    "Vasicek single-factor credit model.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a default series")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--p", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--horizon", type=int)
    p.add_argument("--exposure-a", type=float, default=PRESET_EXPOSURE.a)
    p.add_argument("--exposure-b", type=float, default=PRESET_EXPOSURE.b)
    p.add_argument("--exposure-sigma", type=float, default=PRESET_EXPOSURE.sigma_n)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="classical point/interval estimation")
    p.add_argument("--file", required=True)
    p.add_argument("--method", required=True, choices=["mm", "cmm", "amle", "mle"])
    p.add_argument("--bootstrap", action="store_true")
    p.add_argument("--n-rep", dest="n_rep", type=int)
    p.add_argument("--level", type=float)
    p.add_argument("--quad-order", dest="quad_order", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("fit", help="Bayesian posterior sampling")
    p.add_argument("--file", required=True)
    p.add_argument("--prior-predictive", action="store_true",
                   help="sample with the likelihood disabled")
    p.add_argument("--compare", help="second series; writes posterior_event_prob outputs")
    _add_prior_flags(p)
    _add_sampler_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("ppc", help="posterior predictive checks")
    p.add_argument("--file", required=True)
    p.add_argument("--draws-file", dest="draws_file")
    p.add_argument("--refit", action="store_true")
    p.add_argument("--s-rep", dest="s_rep", type=int, default=500)
    p.add_argument("--overlay-reps", dest="overlay_reps", type=int, default=500)
    p.add_argument("--reuse-fitted-pi", dest="reuse_fitted_pi", action="store_true")
    _add_prior_flags(p)
    _add_sampler_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_ppc)

    p = sub.add_parser("forecast", help="one-step-ahead default-rate forecast")
    p.add_argument("--file", required=True)
    p.add_argument("--draws-file", dest="draws_file")
    p.add_argument("--refit", action="store_true")
    p.add_argument("--next-exposure", dest="next_exposure", type=int)
    _add_prior_flags(p)
    _add_sampler_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_forecast)

    p = sub.add_parser("sweep-priors", help="prior sensitivity grid")
    p.add_argument("--file", required=True)
    p.add_argument("--phi-grid", dest="phi_grid",
                   default="1,5,10,15,20,25,30,35,40,45,50")
    p.add_argument("--a-grid", dest="a_grid", default="10,20,40,80,160,200")
    _add_prior_flags(p)
    _add_sampler_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_sweep_priors)

    p = sub.add_parser("cumulative", help="growing-sample refit studies")
    p.add_argument("--file", required=True)
    p.add_argument("--mode", required=True, choices=["bayes_refit", "bootstrap_amle"])
    p.add_argument("--t-start", dest="t_start", type=int, default=3)
    p.add_argument("--t-end", dest="t_end", type=int)
    p.add_argument("--n-rep", dest="n_rep", type=int)
    p.add_argument("--level", type=float)
    _add_prior_flags(p)
    _add_sampler_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_cumulative)

    p = sub.add_parser("rerun", help="re-execute the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=_cmd_rerun)

    return parser


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = list(argv)
    try:
        return args.func(args)
    except (VascorError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
