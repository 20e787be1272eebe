"""Command-line front end.

Every subcommand resolves its configuration (flags > config file >
environment > defaults), runs the computation to completion, and only
then writes outputs: a CSV table whose first line embeds the resolved
configuration as JSON, and a JSON summary carrying the same
configuration plus a reproducibility block.  Re-running a subcommand
with the embedded configuration reproduces the files byte for byte.

Exit codes: 0 success, 2 configuration error, 3 resource-budget error,
4 numeric error.
"""

import argparse
import json
import os
import platform
import sys

import numpy as np
import scipy

from . import __version__
from .diophantine import (
    DEFAULT_SCAN_BUDGET,
    as_xi,
    brjuno_partial,
    vaguely_diophantine_partial,
    zeta,
)
from .errors import BudgetError, ConfigError, NumericError
from .experiments import (
    bridge_check,
    cap_count_run,
    empirical_limit_distribution,
    empirical_moment,
    escape_scan,
    siegel_mc_check_d2,
)
from .lattice_enum import (
    DEFAULT_POINT_BUDGET,
    AffineLattice,
    ShellSpec,
    _write_csv,
    enumerate_shell,
    expected_shell_count,
)
from .sphere_stats import directions_of, pair_correlation, poisson_pair_reference

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_NUMERIC = 4


# ---------------------------------------------------------------------------
# parameter plumbing


def _to_int(text):
    value = float(text)
    if value != int(value):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(value)


def _to_float(text):
    return float(text)


def _to_str(text):
    return str(text)


def _to_bool(text):
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _to_float_list(text):
    items = [t.strip() for t in str(text).split(",") if t.strip()]
    if not items:
        raise ConfigError(f"empty list {text!r}")
    return tuple(float(t) for t in items)


class _Param:
    def __init__(self, name, conv, default=None, required=False,
                 is_flag=False, env=None, help=""):
        self.name = name
        self.conv = conv
        self.default = default
        self.required = required
        self.is_flag = is_flag
        self.env = env
        self.help = help

    @property
    def attr(self):
        return self.name.replace("-", "_")


_COMMON_OUT = [
    _Param("out", _to_str, default=None,
           help="output prefix; writes <out>.csv and <out>.json"),
]
_SEEDED = [
    _Param("seed", _to_int, default=0, env="SEED", help="RNG seed"),
    _Param("threads", _to_int, default=-1, env="THREADS",
           help="worker threads for spatial queries (-1 = all)"),
]
_LATTICE = [
    _Param("d", _to_int, required=True, help="dimension"),
    _Param("m0", _to_str, default="I",
           help="base matrix: 'I' or rows 'a,b;c,d' (det 1)"),
    _Param("xi", _to_str, required=True,
           help="shift: decimals, p/q, or surds like 'sqrt2-1,sqrt3-1'"),
]
_SHELL = [
    _Param("c", _to_float, default=0.0, help="inner shell fraction in [0,1)"),
    _Param("T", _to_float, required=True, help="outer shell radius"),
]
_BUDGET = [
    _Param("budget", _to_float, default=DEFAULT_POINT_BUDGET,
           help="enumeration point budget"),
]

_SUBCOMMANDS = {
    "enumerate": _LATTICE + _SHELL + _BUDGET + _COMMON_OUT,
    "paircorr": _LATTICE + _SHELL + [
        _Param("smin", _to_float, default=None, help="first bin edge"),
        _Param("smax", _to_float, required=True, help="last bin edge"),
        _Param("bins", _to_int, default=60, help="number of s values"),
    ] + _BUDGET + _COMMON_OUT,
    "capcount": _LATTICE + _SHELL + [
        _Param("sigma", _to_float_list, required=True,
               help="cap density (comma-separated list allowed)"),
        _Param("samples", _to_int, default=1000),
        _Param("measure", _to_str, default="uniform",
               help="uniform | hemisphere"),
    ] + _SEEDED + _BUDGET + _COMMON_OUT,
    "moments": _LATTICE + _SHELL + [
        _Param("sigmas", _to_float_list, required=True,
               help="comma-separated cap densities"),
        _Param("samples", _to_int, default=1000),
        _Param("measure", _to_str, default="uniform"),
        _Param("exponents", _to_float_list, default=None,
               help="moment exponents, one per sigma"),
        _Param("K", _to_int, default=None, help="truncation level"),
        _Param("force", _to_bool, default=False, is_flag=True,
               help="estimate even when the limit moment diverges"),
    ] + _SEEDED + _BUDGET + _COMMON_OUT,
    "limitdist": _LATTICE + _SHELL + [
        _Param("sigmas", _to_float_list, required=True),
        _Param("samples", _to_int, default=1000),
        _Param("measure", _to_str, default="uniform"),
        _Param("r0", _to_int, default=20, help="tail-mass threshold"),
    ] + _SEEDED + _BUDGET + _COMMON_OUT,
    "zeta": [
        _Param("d", _to_int, required=True),
        _Param("xi", _to_str, required=True),
        _Param("T", _to_str, required=True,
               help="resolution, or comma-separated list"),
        _Param("rho", _to_float, default=None, help="series weight l^rho"),
        _Param("mu", _to_float, default=None, help="series weight 2^(mu l)"),
        _Param("nu", _to_float, default=None, help="series power of 1/zeta"),
        _Param("lmax", _to_int, default=None,
               help="series truncation; enables the series table"),
        _Param("budget", _to_float, default=DEFAULT_SCAN_BUDGET,
               help="scan point budget"),
    ] + _COMMON_OUT,
    "brjuno": [
        _Param("d", _to_int, required=True),
        _Param("xi", _to_str, required=True),
        _Param("s", _to_float, required=True, help="dyadic weight 2^(-n/s)"),
        _Param("nmax", _to_int, required=True, help="largest dyadic level"),
        _Param("budget", _to_float, default=DEFAULT_SCAN_BUDGET),
    ] + _COMMON_OUT,
    "siegel-check": [
        _Param("sigma1", _to_float, required=True),
        _Param("sigma2", _to_float, required=True),
        _Param("samples", _to_int, default=100000),
    ] + _SEEDED + _COMMON_OUT,
    "escape-scan": [
        _Param("d", _to_int, required=True),
        _Param("m0", _to_str, default="I"),
        _Param("xi", _to_str, required=True),
        _Param("eta", _to_float, required=True, help="growth exponent"),
        _Param("r", _to_float, default=None,
               help="region radius (default delta_d)"),
        _Param("t-list", _to_float_list, required=True),
        _Param("R-list", _to_float_list, required=True),
        _Param("psi", _to_str, default="constant", help="constant | bump"),
        _Param("samples", _to_int, default=1000),
    ] + _SEEDED + _COMMON_OUT,
    "bridge-check": _LATTICE + _SHELL + [
        _Param("sigma", _to_float, required=True),
        _Param("eps", _to_float, required=True),
        _Param("samples", _to_int, default=1000),
    ] + _SEEDED + _BUDGET + _COMMON_OUT,
}


def _load_config_file(path):
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(
                        f"{path}:{lineno}: expected 'key = value', got {raw!r}"
                    )
                key, _, value = line.partition("=")
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _resolve(subcommand, args, file_config):
    """Merge flag > config file > environment > default, with conversion."""
    params = _SUBCOMMANDS[subcommand]
    known = {p.attr for p in params}
    for key in file_config:
        if key not in known:
            raise ConfigError(
                f"config key {key!r} is not a {subcommand} parameter"
            )
    resolved = {}
    for p in params:
        raw = getattr(args, p.attr, None)
        if raw is None and p.attr in file_config:
            raw = file_config[p.attr]
        if raw is None and p.env and os.environ.get(p.env):
            raw = os.environ[p.env]
        if raw is None:
            if p.required:
                raise ConfigError(f"missing required flag --{p.name}")
            resolved[p.attr] = p.default
        else:
            try:
                resolved[p.attr] = p.conv(raw)
            except ConfigError:
                raise
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for --{p.name}: {exc}") from exc
    resolved["subcommand"] = subcommand
    return resolved


def argv_from_config(config):
    """Rebuild an argv that resolves to exactly this configuration."""
    config = dict(config)
    subcommand = config.pop("subcommand")
    argv = [subcommand]
    for p in _SUBCOMMANDS[subcommand]:
        value = config.get(p.attr)
        if value is None:
            continue
        if p.is_flag:
            if value:
                argv.append(f"--{p.name}")
            continue
        if isinstance(value, (tuple, list)):
            value = ",".join(repr(float(v)) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        argv.extend([f"--{p.name}", str(value)])
    return argv


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="affdirs",
        description="Directional statistics of affine lattices.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name, params in _SUBCOMMANDS.items():
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", default=None,
                         help="key = value file; explicit flags win")
        for p in params:
            if p.is_flag:
                sub.add_argument(f"--{p.name}", action="store_const",
                                 const="true", default=None, help=p.help)
            else:
                sub.add_argument(f"--{p.name}", default=None, help=p.help)
    return parser


# ---------------------------------------------------------------------------
# shared pieces


def _parse_m0(text, d):
    if text is None or text.strip() in ("I", "identity"):
        return np.eye(d)
    rows = [r for r in text.split(";") if r.strip()]
    matrix = [[float(v) for v in row.split(",")] for row in rows]
    matrix = np.array(matrix, dtype=float)
    if matrix.shape != (d, d):
        raise ConfigError(
            f"m0 must be {d}x{d}, got shape {matrix.shape} from {text!r}"
        )
    return matrix


def _lattice_from(config):
    xi_f, _ = as_xi(config["xi"])
    d = config["d"]
    if xi_f.shape[0] != d:
        raise ConfigError(
            f"xi has {xi_f.shape[0]} coordinates but d = {d}"
        )
    m0 = _parse_m0(config.get("m0"), d)
    return AffineLattice(m0, xi_f)


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def _emit(config, header, rows, results, *, budgets=None, extra_tables=()):
    """Write <out>.csv, any extra tables, and <out>.json; no-op without --out."""
    out = config.get("out")
    if not out:
        return
    _write_csv(f"{out}.csv", header, rows, config=_jsonable(config))
    for suffix, extra_header, extra_rows in extra_tables:
        _write_csv(f"{out}_{suffix}.csv", extra_header, extra_rows,
                   config=_jsonable(config))
    summary = {
        "config": _jsonable(config),
        "results": _jsonable(results),
        "reproducibility": {
            "seed": config.get("seed"),
            "budgets": _jsonable(budgets or {}),
            "versions": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "affdirs": __version__,
            },
        },
    }
    with open(f"{out}.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommand bodies


def _run_enumerate(config):
    lattice = _lattice_from(config)
    shell = ShellSpec(config["c"], config["T"])
    points = enumerate_shell(lattice, shell, budget=config["budget"])
    d = lattice.d
    header = (
        [f"m{i + 1}" for i in range(d)]
        + [f"x{i + 1}" for i in range(d)]
        + ["norm"]
    )
    rows = [
        [str(int(m)) for m in mrow] + [_fmt(x) for x in xrow] + [_fmt(nrm)]
        for mrow, xrow, nrm in zip(points.m, points.points, points.norms)
    ]
    expected = expected_shell_count(shell, d)
    results = {"count": len(points), "expected_count": expected}
    _emit(config, header, rows, results,
          budgets={"points": config["budget"]})
    print(f"count={len(points)} expected={expected:.3f}")
    return EXIT_OK


def _run_paircorr(config):
    lattice = _lattice_from(config)
    shell = ShellSpec(config["c"], config["T"])
    points = enumerate_shell(
        lattice, shell, budget=config["budget"]
    ).without_origin()
    dirs = directions_of(points)
    bins = config["bins"]
    if bins < 1:
        raise ConfigError(f"bins must be >= 1, got {bins}")
    smax = config["smax"]
    smin = config["smin"] if config["smin"] is not None else smax / bins
    if not (0 < smin <= smax):
        raise ConfigError(f"need 0 < smin <= smax, got {smin}, {smax}")
    s_values = np.linspace(smin, smax, bins)
    result = pair_correlation(dirs, s_values)
    rel_err = np.abs(result.values - result.reference) / result.reference
    header = ["s", "R2", "poisson_ref"]
    rows = [
        [_fmt(s), _fmt(v), _fmt(ref)]
        for s, v, ref in zip(result.s, result.values, result.reference)
    ]
    results = {
        "n_directions": result.n_directions,
        "sup_rel_err": float(rel_err.max()),
        "mean_rel_err": float(rel_err.mean()),
    }
    _emit(config, header, rows, results,
          budgets={"points": config["budget"]})
    print(
        f"N={result.n_directions} sup_rel_err={rel_err.max():.4f} "
        f"over s in [{smin:g}, {smax:g}]"
    )
    return EXIT_OK


def _run_capcount(config):
    lattice = _lattice_from(config)
    shell = ShellSpec(config["c"], config["T"])
    sigmas = config["sigma"]
    run = cap_count_run(
        lattice, shell, sigmas, config["samples"], config["seed"],
        measure=config["measure"], workers=config["threads"],
        budget=config["budget"],
    )
    d = lattice.d
    header = [f"u{i + 1}" for i in range(d)]
    header += [f"count_{j + 1}" for j in range(len(sigmas))]
    rows = [
        [_fmt(c) for c in center] + [str(int(n)) for n in col]
        for center, col in zip(run.centers, run.counts.T)
    ]
    stats = [run.mean(j) for j in range(len(sigmas))]
    results = {
        "sigmas": list(sigmas), "thetas": [float(t) for t in run.thetas],
        "n_directions": run.n_directions,
        "means": [m for m, _ in stats], "ses": [s for _, s in stats],
    }
    _emit(config, header, rows, results,
          budgets={"points": config["budget"]})
    for s, (mean, se) in zip(sigmas, stats):
        print(f"sigma={s:g} mean={mean:.4f} se={se:.4f}")
    return EXIT_OK


def _run_moments(config):
    lattice = _lattice_from(config)
    shell = ShellSpec(config["c"], config["T"])
    sigmas = config["sigmas"]
    run = cap_count_run(
        lattice, shell, sigmas, config["samples"], config["seed"],
        measure=config["measure"], workers=config["threads"],
        budget=config["budget"],
    )
    header = ["kind", "sigma_a", "sigma_b", "value", "se"]
    rows = []
    results = {"n_directions": run.n_directions, "means": [], "products": []}
    for j, sigma in enumerate(sigmas):
        mean, se = run.mean(j)
        rows.append(["mean", _fmt(sigma), "", _fmt(mean), _fmt(se)])
        results["means"].append(
            {"sigma": sigma, "value": mean, "se": se}
        )
    for j1 in range(len(sigmas)):
        for j2 in range(j1 + 1, len(sigmas)):
            value, se = run.product_moment(j1, j2)
            rows.append([
                "product", _fmt(sigmas[j1]), _fmt(sigmas[j2]),
                _fmt(value), _fmt(se),
            ])
            results["products"].append({
                "sigmas": [sigmas[j1], sigmas[j2]], "value": value, "se": se,
                "expected": sigmas[j1] * sigmas[j2] + min(sigmas[j1], sigmas[j2]),
            })
    if config["exponents"] is not None:
        estimate = empirical_moment(
            run, config["exponents"], K=config["K"], force=config["force"]
        )
        rows.append([
            "moment", "", "", _fmt(estimate.value.real), _fmt(estimate.se)
        ])
        results["moment"] = {
            "exponents": list(config["exponents"]),
            "value": estimate.value, "se": estimate.se,
            "regime": estimate.regime, "eta": estimate.eta,
        }
        if estimate.K is not None:
            rows.append([
                "restricted", "", "",
                _fmt(estimate.restricted_value.real),
                _fmt(estimate.restricted_se),
            ])
            results["moment"]["K"] = estimate.K
            results["moment"]["restricted_value"] = estimate.restricted_value
            results["moment"]["restricted_se"] = estimate.restricted_se
    _emit(config, header, rows, results,
          budgets={"points": config["budget"]})
    for entry in results["means"]:
        print(
            f"sigma={entry['sigma']:g} mean={entry['value']:.4f} "
            f"se={entry['se']:.4f}"
        )
    return EXIT_OK


def _run_limitdist(config):
    lattice = _lattice_from(config)
    shell = ShellSpec(config["c"], config["T"])
    sigmas = config["sigmas"]
    run = cap_count_run(
        lattice, shell, sigmas, config["samples"], config["seed"],
        measure=config["measure"], workers=config["threads"],
        budget=config["budget"],
    )
    dist = empirical_limit_distribution(run)
    header = ["sigma", "count", "prob", "se"]
    rows = []
    results = {"n_directions": run.n_directions, "marginals": [], "r0": config["r0"]}
    for j, sigma in enumerate(sigmas):
        values, probs, ses = dist.marginal(j)
        for value, p, se in zip(values, probs, ses):
            rows.append([_fmt(sigma), str(int(value)), _fmt(p), _fmt(se)])
        mean, mean_se = dist.marginal_mean(j)
        results["marginals"].append({
            "sigma": sigma, "mean": mean, "se": mean_se,
            "tail_mass": dist.tail_mass(config["r0"], j),
        })
    results["joint_tail_mass"] = dist.tail_mass(config["r0"])
    _emit(config, header, rows, results,
          budgets={"points": config["budget"]})
    for entry in results["marginals"]:
        print(
            f"sigma={entry['sigma']:g} mean={entry['mean']:.4f} "
            f"tail_mass(>={config['r0']})={entry['tail_mass']:.3g}"
        )
    return EXIT_OK


def _run_zeta(config):
    series_params = [config["rho"], config["mu"], config["nu"], config["lmax"]]
    want_series = any(p is not None for p in series_params)
    if want_series and any(p is None for p in series_params):
        raise ConfigError("the series table needs all of --rho --mu --nu --lmax")
    T_values = _to_float_list(config["T"])
    xi = config["xi"]
    xi_f, _ = as_xi(xi)
    if xi_f.shape[0] != config["d"]:
        raise ConfigError(
            f"xi has {xi_f.shape[0]} coordinates but d = {config['d']}"
        )
    table = [(T, zeta(xi, T, max_points=config["budget"])) for T in T_values]
    extra_tables = []
    results = {"zeta": [{"T": T, "zeta": z} for T, z in table]}
    if want_series:
        series = vaguely_diophantine_partial(
            xi, config["rho"], config["mu"], config["nu"], config["lmax"],
            max_points=config["budget"],
        )
        extra_rows = [
            [str(int(l)), str(int(z)), _fmt(term), _fmt(ps)]
            for l, z, term, ps in zip(
                series.l, series.zetas, series.terms, series.partial_sums
            )
        ]
        extra_tables.append(
            ("series", ["l", "zeta", "term", "partial_sum"], extra_rows)
        )
        results["series"] = {
            "rho": series.rho, "mu": series.mu, "nu": series.nu,
            "l_requested": series.l_requested,
            "l_completed": series.l_completed,
            "budget_exhausted": series.budget_exhausted,
            "partial_sum": (
                float(series.partial_sums[-1]) if series.l.size else 0.0
            ),
        }
    header = ["T", "zeta"]
    rows = [[_fmt(T), str(int(z))] for T, z in table]
    _emit(config, header, rows, results,
          budgets={"scan_points": config["budget"]}, extra_tables=extra_tables)
    if len(table) == 1 and not want_series:
        print(table[0][1])
    else:
        for T, z in table:
            print(f"T={T:g} zeta={z}")
        if want_series:
            print(
                f"partial_sum={results['series']['partial_sum']!r} "
                f"(l_completed={results['series']['l_completed']})"
            )
    return EXIT_OK


def _run_brjuno(config):
    xi_f, _ = as_xi(config["xi"])
    if xi_f.shape[0] != config["d"]:
        raise ConfigError(
            f"xi has {xi_f.shape[0]} coordinates but d = {config['d']}"
        )
    result = brjuno_partial(
        config["xi"], config["s"], config["nmax"],
        max_points=config["budget"],
    )
    header = ["n", "phi", "term", "partial_sum"]
    rows = [
        [str(int(n)), _fmt(phi), _fmt(term), _fmt(ps)]
        for n, phi, term, ps in zip(
            result.n, result.phi, result.terms, result.partial_sums
        )
    ]
    results = {
        "resonant": result.resonant,
        "witness": list(result.witness) if result.witness else None,
        "budget_exhausted": result.budget_exhausted,
        "n_completed": int(result.n[-1]) if result.n.size else None,
        "partial_sum": (
            float(result.partial_sums[-1]) if result.n.size else 0.0
        ),
    }
    _emit(config, header, rows, results,
          budgets={"scan_points": config["budget"]})
    verdict = "resonant (diverges)" if result.resonant else "no resonance found"
    print(f"partial_sum={results['partial_sum']!r} [{verdict}]")
    return EXIT_OK


def _run_siegel_check(config):
    check = siegel_mc_check_d2(
        config["sigma1"], config["sigma2"], config["samples"], config["seed"]
    )
    header = ["statistic", "estimate", "se", "expected", "z"]
    rows = [
        ["offdiagonal", _fmt(check.offdiag_mean), _fmt(check.offdiag_se),
         _fmt(check.offdiag_expected), _fmt(check.offdiag_z)],
        ["diagonal", _fmt(check.diagonal_mean), _fmt(check.diagonal_se),
         _fmt(check.diagonal_expected), _fmt(check.diagonal_z)],
    ]
    results = {
        "offdiagonal": {
            "estimate": check.offdiag_mean, "se": check.offdiag_se,
            "expected": check.offdiag_expected, "z": check.offdiag_z,
        },
        "diagonal": {
            "estimate": check.diagonal_mean, "se": check.diagonal_se,
            "expected": check.diagonal_expected, "z": check.diagonal_z,
        },
        "acceptance_rate": check.acceptance_rate,
        "pass_3se": bool(
            abs(check.offdiag_z) <= 3 and abs(check.diagonal_z) <= 3
        ),
    }
    _emit(config, header, rows, results)
    print(
        f"offdiag={check.offdiag_mean:.4f}±{check.offdiag_se:.4f} "
        f"(expected {check.offdiag_expected:g}), "
        f"diag={check.diagonal_mean:.4f}±{check.diagonal_se:.4f} "
        f"(expected {check.diagonal_expected:g})"
    )
    return EXIT_OK


def _run_escape_scan(config):
    xi_f, _ = as_xi(config["xi"])
    if xi_f.shape[0] != config["d"]:
        raise ConfigError(
            f"xi has {xi_f.shape[0]} coordinates but d = {config['d']}"
        )
    m0 = _parse_m0(config.get("m0"), config["d"])
    scan = escape_scan(
        config["xi"], config["t_list"], config["R_list"],
        eta=config["eta"], r=config["r"], m0=m0, psi=config["psi"],
        samples=config["samples"], seed=config["seed"],
    )
    header = ["t", "R", "estimate", "se"]
    rows = []
    for ti, t in enumerate(scan.t_values):
        for Ri, R in enumerate(scan.R_values):
            rows.append([
                _fmt(t), _fmt(R),
                _fmt(scan.estimates[ti, Ri]), _fmt(scan.ses[ti, Ri]),
            ])
    maxima = scan.max_over_t()
    results = {
        "max_over_t": [
            {"R": R, "estimate": float(m)}
            for R, m in zip(scan.R_values, maxima)
        ],
        "psi_integral": scan.psi_integral,
        "drops": scan.drops,
        "drop_fraction": scan.drop_fraction,
        "flagged": scan.flagged,
    }
    _emit(config, header, rows, results)
    for entry in results["max_over_t"]:
        print(f"R={entry['R']:g} max_over_t={entry['estimate']:.6g}")
    if scan.flagged:
        print("warning: >1% of samples dropped; run is flagged", file=sys.stderr)
    return EXIT_OK


def _run_bridge_check(config):
    m0 = _parse_m0(config.get("m0"), config["d"])
    check = bridge_check(
        config["xi"], config["sigma"], config["eps"], config["T"],
        config["samples"], config["seed"], c=config["c"], m0=m0,
        workers=config["threads"], budget=config["budget"],
    )
    d = check.d
    header = [f"u{i + 1}" for i in range(d)] + ["cap_count", "cone_count"]
    rows = [
        [_fmt(x) for x in center] + [str(int(a)), str(int(b))]
        for center, a, b in zip(
            check.centers, check.cap_counts, check.cone_counts
        )
    ]
    results = {
        "violations": check.violations,
        "min_margin": check.min_margin,
        "t": check.t,
        "theta": check.theta,
    }
    _emit(config, header, rows, results,
          budgets={"points": config["budget"]})
    print(
        f"violations={check.violations}/{check.samples} "
        f"min_margin={check.min_margin}"
    )
    return EXIT_OK


_RUNNERS = {
    "enumerate": _run_enumerate,
    "paircorr": _run_paircorr,
    "capcount": _run_capcount,
    "moments": _run_moments,
    "limitdist": _run_limitdist,
    "zeta": _run_zeta,
    "brjuno": _run_brjuno,
    "siegel-check": _run_siegel_check,
    "escape-scan": _run_escape_scan,
    "bridge-check": _run_bridge_check,
}


def run(config):
    """Run a fully-resolved configuration (as embedded in outputs)."""
    return _RUNNERS[config["subcommand"]](config)


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        file_config = (
            _load_config_file(args.config) if args.config else {}
        )
        config = _resolve(args.subcommand, args, file_config)
        return run(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
