"""Command-line front end.

Commands: params, dispersion, figure1, smoluchowski, kramers, automodel.
Every command reads an optional flat key=value config file (one section
per command) plus --key value flags that override the file; unknown keys
are rejected.  CSV output starts with '# key=value' comment lines that
record every resolved parameter, so any output is self-describing and
re-runnable.  Numbers are written with 17 significant digits so values
round-trip exactly.  Charts are minimal hand-written SVG polylines.
"""

import argparse
import configparser
import math
import sys

import numpy as np

from . import automodel, dispersion, kleinkramers, smoluchowski
from .core import (
    DensityProfile,
    DomainError,
    IntegrityError,
    Potential,
    ReferenceDensity,
    SpatialGrid,
    StabilityError,
    WignerField,
    derive_params,
)

# ---------------------------------------------------------------------------
# configuration plumbing


PARAM_KEYS = {"m": 1.0, "b": 1.0, "kT": 1.0, "hbar": 1.0}

DEFAULTS = {
    "params": dict(PARAM_KEYS),
    "dispersion": {
        **PARAM_KEYS,
        "laws": "classical,improved,implicit,lambert",
        "t0": 0.0,
        "t1": 1.0,
        "samples": 11,
        "out_csv": "dispersion.csv",
        "out_svg": "",
    },
    "figure1": {
        "s_max": 100.0,
        "samples": 201,
        "x0": automodel.DEFAULT_X0,
        "x_max": automodel.DEFAULT_XMAX,
        "tol": 1e-3,
        "out_csv": "figure1.csv",
        "out_svg": "figure1.svg",
    },
    "smoluchowski": {
        **PARAM_KEYS,
        "variant": "classical",
        "x_min": -8.0,
        "x_max": 8.0,
        "n": 256,
        "sigma0_sq": 0.5,
        "t0": 0.0,
        "t1": 1.0,
        "floor": 1e-12,
        "output_every": 200,
        "comparison": "",
        "out_csv": "smoluchowski.csv",
        "out_svg": "",
    },
    "kramers": {
        **PARAM_KEYS,
        "variant": "classical",
        "x_min": -40.0,
        "x_max": 40.0,
        "nx": 128,
        "p_min": -6.0,
        "p_max": 6.0,
        "np": 128,
        "sigma2_x0": 4.0,
        "sigma2_p0": 0.25,
        "potential": "",
        "t0": 0.0,
        "t1": 10.0,
        "floor": 1e-12,
        "output_every": 500,
        "out_csv": "kramers.csv",
        "out_svg": "",
    },
    "automodel": {
        "x0": automodel.DEFAULT_X0,
        "x_max": automodel.DEFAULT_XMAX,
        "tol": 1e-3,
        "out_csv": "automodel.csv",
    },
}


class ConfigError(ValueError):
    pass


def _convert(command, key, raw):
    default = DEFAULTS[command][key]
    try:
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, int):
            return int(raw)
        return str(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None


def resolve_config(command, config_path, overrides):
    """Merge defaults <- config-file section <- command-line overrides."""
    resolved = dict(DEFAULTS[command])
    if config_path:
        parser = configparser.ConfigParser()
        read = parser.read(config_path)
        if not read:
            raise ConfigError(f"config file not found: {config_path}")
        if parser.has_section(command):
            for key, raw in parser.items(command):
                if key not in resolved:
                    raise ConfigError(f"unknown key {key!r} in section [{command}]")
                resolved[key] = _convert(command, key, raw)
    for key, raw in overrides:
        if key not in resolved:
            raise ConfigError(f"unknown key {key!r} for command {command!r}")
        resolved[key] = _convert(command, key, raw)
    return resolved


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path, command, config, columns, rows):
    lines = [f"# command={command}"]
    for key, value in config.items():
        lines.append(f"# {key}={_fmt(value)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(float(v)) for v in row))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# SVG rendering

_DASHES = {"solid": None, "dashed": "12,6", "dotted": "2,5"}


def render_svg(path, series, title, x_label, y_label):
    """Fixed 800x600 polyline chart; series = [(x, y, label, style), ...]."""
    left, right, top, bottom = 80.0, 770.0, 50.0, 540.0
    xs = np.concatenate([s[0] for s in series])
    ys = np.concatenate([s[1] for s in series])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def sx(x):
        return left + (x - x_lo) / x_span * (right - left)

    def sy(y):
        return bottom - (y - y_lo) / y_span * (bottom - top)

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 600">',
        '<rect width="800" height="600" fill="white"/>',
        f'<text x="400" y="28" text-anchor="middle" font-size="18">{title}</text>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
        f'<text x="{(left + right) / 2:.1f}" y="585" text-anchor="middle" font-size="14">{x_label}</text>',
        f'<text x="22" y="{(top + bottom) / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 22 {(top + bottom) / 2:.1f})">{y_label}</text>',
    ]
    for k in range(5):
        f = k / 4.0
        xt, yt = x_lo + f * x_span, y_lo + f * y_span
        px, py = sx(xt), sy(yt)
        parts.append(f'<line x1="{px:.2f}" y1="{bottom}" x2="{px:.2f}" y2="{bottom + 6}" stroke="black"/>')
        parts.append(f'<text x="{px:.2f}" y="{bottom + 22}" text-anchor="middle" font-size="12">{xt:g}</text>')
        parts.append(f'<line x1="{left - 6}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
        parts.append(f'<text x="{left - 10}" y="{py + 4:.2f}" text-anchor="end" font-size="12">{yt:g}</text>')
    for x, y, label, style in series:
        dash = _DASHES[style]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        pts = " ".join(f"{sx(xi):.2f},{sy(yi):.2f}" for xi, yi in zip(x, y))
        parts.append(f'<polyline fill="none" stroke="black" stroke-width="1.5"{dash_attr} points="{pts}"/>')
    ly = top + 20
    for x, y, label, style in series:
        dash = _DASHES[style]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        parts.append(
            f'<line x1="{left + 20}" y1="{ly}" x2="{left + 70}" y2="{ly}" stroke="black" '
            f'stroke-width="1.5"{dash_attr}/>'
        )
        parts.append(f'<text x="{left + 78}" y="{ly + 4}" font-size="13">{label} ({style})</text>')
        ly += 20
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_params(config):
    p = derive_params(config["m"], config["b"], config["kT"], config["hbar"])
    threshold = dispersion.semiclassical_time_bound(p)
    print(f"D = {_fmt(p.D)}")
    print(f"lambda_T = {_fmt(p.lambda_T)}")
    print(f"beta = {_fmt(p.beta)}")
    print(f"large-time validity threshold t = {_fmt(threshold)}")
    if p.is_classical:
        print("note: classical regime (hbar = 0)")
    return 0


def cmd_dispersion(config):
    p = derive_params(config["m"], config["b"], config["kT"], config["hbar"])
    laws = [s.strip() for s in config["laws"].split(",") if s.strip()]
    if not laws:
        raise ConfigError("laws must name at least one dispersion law")
    for law in laws:
        if law not in dispersion.LAW_NAMES:
            raise ConfigError(f"unknown dispersion law {law!r}")
    times = np.linspace(config["t0"], config["t1"], config["samples"])
    if "semiclassical" in laws and times[0] <= dispersion.semiclassical_time_bound(p):
        raise ConfigError(
            "the semiclassical law is applicable for large times only: t0 must "
            f"exceed lambda_T^2/2D = {_fmt(dispersion.semiclassical_time_bound(p))}"
        )
    curves = [dispersion.DispersionLaw(law, p).curve(times) for law in laws]
    rows = np.column_stack([times] + [c.sigma2 for c in curves])
    write_csv(config["out_csv"], "dispersion", config, ["t"] + [f"sigma2_{l}" for l in laws], rows)
    if config["out_svg"]:
        styles = ["solid", "dashed", "dotted", "solid", "dashed", "dotted", "solid"]
        render_svg(
            config["out_svg"],
            [(times, c.sigma2, c.label, styles[i % len(styles)]) for i, c in enumerate(curves)],
            "dispersion laws",
            "t",
            "sigma^2",
        )
    return 0


def cmd_figure1(config):
    _, solution = automodel.shoot(config["x0"], config["x_max"], config["tol"])
    numeric, lambert, classical = automodel.figure1_curves(
        config["s_max"], config["samples"], solution=solution
    )
    header = dict(config)
    header["c2"] = solution.c2
    rows = np.column_stack([numeric.t, numeric.sigma2, lambert.sigma2, classical.sigma2])
    write_csv(
        config["out_csv"], "figure1", header,
        ["s", "u_numeric", "u_lambert", "u_classical"], rows,
    )
    if config["out_svg"]:
        render_svg(
            config["out_svg"],
            [
                (numeric.t, numeric.sigma2, "numeric", "solid"),
                (lambert.t, lambert.sigma2, "Lambert upper limit", "dashed"),
                (classical.t, classical.sigma2, "classical", "dotted"),
            ],
            "universal dispersion u(s)",
            "s = 2Dt/lambda_T^2",
            "u = sigma^2/lambda_T^2",
        )
    return 0


def cmd_smoluchowski(config):
    p = derive_params(config["m"], config["b"], config["kT"], config["hbar"])
    grid = SpatialGrid(config["x_min"], config["x_max"], config["n"])
    rho0 = DensityProfile.gaussian(grid, config["sigma0_sq"])
    reference = None
    if config["variant"] == "reference":
        reference = ReferenceDensity("free", p)
    model = smoluchowski.SmoluchowskiModel(
        config["variant"], p, reference=reference, floor=config["floor"]
    )
    result = smoluchowski.run(
        model, rho0, config["t0"], config["t1"], output_every=config["output_every"]
    )
    columns = ["t", "sigma2", "mass", "excess_kurtosis"]
    blocks = [result.times, result.sigma2, result.mass, result.kurtosis]
    if config["comparison"]:
        if config["comparison"] not in dispersion.LAW_NAMES:
            raise ConfigError(f"unknown dispersion law {config['comparison']!r}")
        law = dispersion.DispersionLaw(config["comparison"], p)
        columns.append(f"sigma2_{config['comparison']}")
        blocks.append(np.array([law(t) for t in result.times]))
    write_csv(config["out_csv"], "smoluchowski", config, columns, np.column_stack(blocks))
    if config["out_svg"]:
        series = [(result.times, result.sigma2, config["variant"], "solid")]
        if config["comparison"]:
            series.append((result.times, blocks[-1], config["comparison"], "dashed"))
        render_svg(config["out_svg"], series, "dispersion growth", "t", "sigma^2")
    return 0


def cmd_kramers(config):
    p = derive_params(config["m"], config["b"], config["kT"], config["hbar"])
    x_grid = SpatialGrid(config["x_min"], config["x_max"], config["nx"])
    p_grid = SpatialGrid(config["p_min"], config["p_max"], config["np"])
    coeffs = tuple(float(c) for c in config["potential"].split(",") if c.strip())
    potential = Potential(coeffs) if coeffs else Potential.zero()
    reference = None
    if config["variant"] == "reference":
        if potential.dv_is_zero:
            reference = ReferenceDensity("free", p)
        else:
            reference = ReferenceDensity("boltzmann", p, potential)
    model = kleinkramers.KramersModel(
        config["variant"], p, potential=potential, reference=reference,
        floor=config["floor"], x_grid=x_grid,
    )
    w0 = WignerField.gaussian_product(
        x_grid, p_grid, config["sigma2_x0"], config["sigma2_p0"]
    )
    result = kleinkramers.run_kk(
        model, w0, config["t0"], config["t1"], output_every=config["output_every"]
    )
    rows = np.column_stack([result.times, result.sigma2_x, result.sigma2_p, result.mass])
    write_csv(config["out_csv"], "kramers", config, ["t", "sigma2_x", "sigma2_p", "mass"], rows)
    if config["out_svg"]:
        render_svg(
            config["out_svg"],
            [
                (result.times, result.sigma2_x, "sigma2_x", "solid"),
                (result.times, result.sigma2_p, "sigma2_p", "dashed"),
            ],
            "phase-space dispersion growth", "t", "sigma^2",
        )
    return 0


def cmd_automodel(config):
    c2, solution = automodel.shoot(config["x0"], config["x_max"], config["tol"])
    header = dict(config)
    header["c2"] = c2
    rows = np.column_stack(
        [solution.x, solution.y, solution.y_prime, solution.residuals()]
    )
    write_csv(config["out_csv"], "automodel", header, ["x", "y", "yprime", "residual"], rows)
    return 0


RUNNERS = {
    "params": cmd_params,
    "dispersion": cmd_dispersion,
    "figure1": cmd_figure1,
    "smoluchowski": cmd_smoluchowski,
    "kramers": cmd_kramers,
    "automodel": cmd_automodel,
}


def _parse_argv(argv):
    parser = argparse.ArgumentParser(
        prog="qbrownian",
        description="Solvers for semiclassical and nonlinear quantum Brownian motion.",
    )
    parser.add_argument("command", choices=sorted(RUNNERS))
    parser.add_argument("--config", default="", help="flat key=value config file")
    args, rest = parser.parse_known_args(argv)
    overrides = []
    i = 0
    while i < len(rest):
        token = rest[i]
        if not token.startswith("--"):
            raise ConfigError(f"unexpected argument {token!r}")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            i += 1
            if i >= len(rest):
                raise ConfigError(f"flag --{key} is missing a value")
            value = rest[i]
        overrides.append((key, value))
        i += 1
    return args.command, args.config, overrides


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    try:
        command, config_path, overrides = _parse_argv(argv)
        config = resolve_config(command, config_path, overrides)
        return RUNNERS[command](config)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (StabilityError, IntegrityError, automodel.ShootingFailure) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
