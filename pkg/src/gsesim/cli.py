"""Command-line front end: sweep orchestration and deterministic file output.

The only module with side effects. Every run emits its data files plus a
manifest JSON recording the resolved inputs and sha256 checksums of the
outputs; identical inputs and seed produce identical bytes regardless of
the worker count. Exit codes: 0 success, 2 configuration error, 3 numeric
failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as gio
from .anisotropy import AnisotropyParams, angle_sweep
from .core import FrequencyGrid, ModelError, Spectrum
from .fitting import FitProblem, MODELS, fit, fit_global_geometry
from .io import ConfigError, DataFormatError
from .lambpv import pv_closed, pv_quadrature
from .multipoint import s_matrix
from .core import GAMMA_2PI
from .nested import (
    FitFormParams,
    NestedParams,
    eigen_traces,
    map_nested_vs_detuning,
    s21_nested_matrix,
)
from .single import SingleGseParams, map_single_vs_field, s21_single

_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_ANGLE_UNITS = {"deg": np.pi / 180.0, "rad": 1.0}


def parse_frequency(text):
    """Frequency with mandatory unit suffix: '4.35GHz', '760kHz', '5e6Hz'."""
    t = text.strip().lower()
    for suffix in sorted(_FREQ_UNITS, key=len, reverse=True):
        if t.endswith(suffix):
            try:
                return float(t[: -len(suffix)]) * _FREQ_UNITS[suffix]
            except ValueError:
                break
    raise ConfigError(f"cannot parse frequency {text!r}: need a Hz/kHz/MHz/GHz suffix")


def parse_angle(text):
    """Angle with mandatory unit suffix ('90deg' or '1.57rad'), returned in rad."""
    t = text.strip().lower()
    for suffix in ("deg", "rad"):
        if t.endswith(suffix):
            try:
                return float(t[: -len(suffix)]) * _ANGLE_UNITS[suffix]
            except ValueError:
                break
    raise ConfigError(f"cannot parse angle {text!r}: need a deg/rad suffix")


def parse_range(text, scalar=float):
    """'start:stop:count' sweep specification, inclusive endpoints."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range {text!r} must be start:stop:count")
    try:
        start, stop, count = scalar(parts[0]), scalar(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"range {text!r}: {exc}") from None
    if count < 1:
        raise ConfigError(f"range {text!r}: count must be >= 1")
    return np.linspace(start, stop, count)


def _thread_count(cli_value):
    env = os.environ.get("GSE_THREADS")
    n = int(env) if env else int(cli_value)
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def _ordered_map(fn, values, threads):
    # ordered merge keeps emitted bytes independent of the worker count
    if threads <= 1 or len(values) <= 1:
        return [fn(v) for v in values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, values))


def _grid_from_arg(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {text!r} must be f_start:f_stop:n_points")
    return FrequencyGrid(parse_frequency(parts[0]), parse_frequency(parts[1]), int(parts[2]))


def _single_from_topology(waveguide, topology):
    if len(topology.emitters) != 1:
        raise ConfigError("/emitters: this command needs exactly one emitter")
    em = topology.emitters[0]
    if len(em.positions) != 2:
        raise ConfigError(f"/emitters/0: emitter {em.name!r} needs exactly two points")
    k1, k2 = em.kappa_points
    if k1 != k2:
        raise ConfigError(
            f"/emitters/0: unequal per-point rates; use simulate-general instead"
        )
    return SingleGseParams(k1, em.beta, em.span[1] - em.span[0], em.f_res, waveguide)


def _nested_from_topology(waveguide, topology):
    if topology.classification != "nested":
        raise ConfigError(f"/emitters: topology is {topology.classification!r}, not nested")
    a, b = topology.emitters
    inner, outer = (a, b) if a.span[0] > b.span[0] else (b, a)
    gses = []
    for em in (inner, outer):
        k1, k2 = em.kappa_points
        if k1 != k2:
            raise ConfigError(
                f"/emitters: emitter {em.name!r} has unequal rates; use simulate-general"
            )
        gses.append(SingleGseParams(k1, em.beta, em.span[1] - em.span[0], em.f_res, waveguide))
    gap_left = inner.span[0] - outer.span[0]
    gap_right = outer.span[1] - inner.span[1]
    if abs(gap_left - gap_right) > 1e-12 * (outer.span[1] - outer.span[0]):
        raise ConfigError("/emitters: simulate-nested needs a symmetric nesting")
    return NestedParams.from_geometry(gses[0], gses[1])


def _fitform_from_args(args):
    return FitFormParams(
        parse_frequency(args.f_i),
        parse_frequency(args.f_o if args.f_o else args.f_i),
        parse_frequency(args.kappa_i_g),
        parse_frequency(args.kappa_o_g),
        parse_frequency(args.beta_i),
        parse_frequency(args.beta_o),
        parse_frequency(args.j),
        parse_frequency(args.gamma),
    )


def _parse_free(items):
    free = {}
    for item in items:
        name, _, rest = item.partition("=")
        vals = rest.split(":")
        if not name or not rest or len(vals) not in (1, 3):
            raise ConfigError(f"--free {item!r}: expected name=guess or name=guess:lo:hi")
        try:
            guess = float(vals[0])
            lo = float(vals[1]) if len(vals) == 3 else -np.inf
            hi = float(vals[2]) if len(vals) == 3 else np.inf
        except ValueError as exc:
            raise ConfigError(f"--free {item!r}: {exc}") from None
        free[name] = (guess, lo, hi)
    return free


def _parse_fixed(items):
    fixed = {}
    for item in items:
        name, _, value = item.partition("=")
        if not name or not value:
            raise ConfigError(f"--fixed {item!r}: expected name=value")
        try:
            fixed[name] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--fixed {item!r}: {exc}") from None
    return fixed


def _emit(args, outputs, config):
    manifest = args.manifest or (args.output + ".manifest.json")
    gio.write_manifest(manifest, config, outputs)
    return outputs + [manifest]


def _cmd_simulate_single(args):
    waveguide, topology, grid = gio.load_config(args.config)
    p = _single_from_topology(waveguide, topology)
    spectrum = s21_single(p, grid, self_consistent_phase=args.self_consistent_phase)
    gio.write_spectrum_csv(args.output, spectrum)
    return _emit(args, [args.output], {"command": "simulate-single", "config": args.config})


def _cmd_simulate_nested(args):
    waveguide, topology, grid = gio.load_config(args.config)
    p = _nested_from_topology(waveguide, topology)
    spectrum = s21_nested_matrix(p, grid, lamb_sign=args.lamb_sign, phase_ref=args.phase_ref)
    gio.write_spectrum_csv(args.output, spectrum)
    return _emit(args, [args.output], {"command": "simulate-nested", "config": args.config})


def _cmd_simulate_general(args):
    waveguide, topology, grid = gio.load_config(args.config)
    result = s_matrix(topology, waveguide, grid, convention=args.convention)
    gio.write_spectrum_csv(args.output, result.transmission)
    outputs = [args.output]
    if args.reflection_output:
        gio.write_spectrum_csv(args.reflection_output, Spectrum(grid, result.reflection))
        outputs.append(args.reflection_output)
    return _emit(args, outputs, {"command": "simulate-general", "config": args.config})


def _cmd_map(args):
    threads = _thread_count(args.threads)
    outputs = [args.output]
    if args.sweep == "detuning":
        q = _fitform_from_args(args)
        detunings = parse_range(args.values, parse_frequency)
        grid = _grid_from_arg(args.grid)
        f_o_values = q.f_i + detunings

        def column(f_o):
            return map_nested_vs_detuning(q, [f_o], grid)[0][1]

        spectra = _ordered_map(column, list(f_o_values), threads)
        gio.write_map_csv(args.output, list(zip(detunings, spectra)))
        if args.eigen_output:
            eigs, _ = eigen_traces(q, f_o_values)
            gio.write_eigen_csv(args.eigen_output, detunings, eigs)
            outputs.append(args.eigen_output)
        config = {"command": "map", "sweep": "detuning", "values": args.values}
    else:
        waveguide, topology, grid = gio.load_config(args.config)
        p = _single_from_topology(waveguide, topology)
        fields = parse_range(args.values)
        columns = map_single_vs_field(p, fields, args.h_a, grid)
        gio.write_map_csv(args.output, columns)
        config = {"command": "map", "sweep": "field", "config": args.config, "values": args.values}
    return _emit(args, outputs, config)


def _cmd_fit(args):
    freqs, data, magnitude_only = gio.read_spectrum_csv(args.data)
    problem = FitProblem(
        freqs, data, args.model,
        free=_parse_free(args.free),
        fixed=_parse_fixed(args.fixed),
        magnitude_only=magnitude_only,
        db_scale=args.db,
    )
    result = fit(problem)
    gio.write_fit_report(args.output, result)
    return _emit(args, [args.output], {"command": "fit", "model": args.model, "data": args.data})


def _cmd_fit_geometry(args):
    datasets = []
    for item in args.dataset:
        f_res_text, _, path = item.partition("=")
        if not path:
            raise ConfigError(f"--dataset {item!r}: expected F_RES=PATH")
        freqs, data, magnitude_only = gio.read_spectrum_csv(path)
        if magnitude_only:
            raise ConfigError(f"--dataset {path}: geometry fit needs complex data")
        datasets.append((parse_frequency(f_res_text), freqs, data))
    result = fit_global_geometry(datasets, free=_parse_free(args.free), fixed=_parse_fixed(args.fixed))
    gio.write_fit_report(args.output, result)
    return _emit(args, [args.output], {"command": "fit-geometry", "datasets": args.dataset})


def _cmd_anisotropy(args):
    thetas = parse_range(args.theta, parse_angle)
    gamma = parse_frequency(args.gamma) if args.gamma else GAMMA_2PI
    p = AnisotropyParams(args.h_e0, args.h_a, gamma=gamma)
    freqs = angle_sweep(p, thetas, which=args.which)
    gio.write_anisotropy_csv(args.output, thetas, freqs)
    return _emit(
        args, [args.output],
        {"command": "anisotropy", "h_e0": args.h_e0, "h_a": args.h_a, "which": args.which},
    )


def _cmd_pv_check(args):
    xs = parse_range(args.x)
    threads = _thread_count(args.threads)

    def row(x):
        closed = pv_closed(x, args.branch)
        quad = pv_quadrature(x, args.branch)
        return (
            x, closed.a_value, quad.a_value, closed.b_value, quad.b_value,
            abs(closed.a_value - quad.a_value), abs(closed.b_value - quad.b_value),
        )

    rows = _ordered_map(row, list(xs), threads)
    gio.write_pv_csv(args.output, rows)
    worst = max(max(r[5], r[6]) for r in rows)
    print(f"pv-check: {len(rows)} points, branch {args.branch!r}, worst |closed - quad| = {worst:.3e}")
    return _emit(args, [args.output], {"command": "pv-check", "x": args.x, "branch": args.branch})


def _cmd_synth(args):
    waveguide, topology, grid = gio.load_config(args.config)
    p = _single_from_topology(waveguide, topology)
    spectrum = s21_single(p, grid)
    noisy = spectrum.s21 + gio.synth_noise(grid.n_points, args.noise_sigma, args.seed)
    gio.write_spectrum_csv(args.output, Spectrum(grid, noisy))
    return _emit(
        args, [args.output],
        {"command": "synth", "config": args.config, "noise_sigma": args.noise_sigma, "seed": args.seed},
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gsesim",
        description="Simulate and fit giant-spin-ensemble waveguide spectra.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--output", required=True, help="output data file")
        p.add_argument("--manifest", default=None, help="manifest path (default: OUTPUT.manifest.json)")
        p.add_argument("--threads", default=1, type=int, help="worker count, 0 = auto (GSE_THREADS overrides)")

    p = sub.add_parser("simulate-single", help="single two-point ensemble spectrum")
    common(p)
    p.add_argument("--self-consistent-phase", action="store_true",
                   help="re-evaluate the interference phase at each probe frequency")
    p.set_defaults(run=_cmd_simulate_single)

    p = sub.add_parser("simulate-nested", help="nested-pair matrix-model spectrum")
    common(p)
    p.add_argument("--lamb-sign", type=int, choices=(-1, 1), default=-1)
    p.add_argument("--phase-ref", choices=("resonance", "probe"), default="resonance")
    p.set_defaults(run=_cmd_simulate_nested)

    p = sub.add_parser("simulate-general", help="arbitrary multi-emitter topology spectrum")
    common(p)
    p.add_argument("--convention", choices=("resonance", "probe", "mixed"), default="resonance")
    p.add_argument("--reflection-output", default=None, help="also emit the reflection channel")
    p.set_defaults(run=_cmd_simulate_general)

    p = sub.add_parser("map", help="2-D transmission map over detuning or bias field")
    common(p, config=False)
    p.add_argument("--sweep", choices=("detuning", "field"), required=True)
    p.add_argument("--values", required=True,
                   help="sweep range start:stop:count (detuning values carry frequency suffixes; fields are tesla)")
    p.add_argument("--config", default=None, help="JSON configuration (field sweep)")
    p.add_argument("--grid", default=None, help="probe grid f_start:f_stop:n (detuning sweep)")
    p.add_argument("--h-a", type=float, default=0.0, help="anisotropy-equivalent field, tesla (field sweep)")
    p.add_argument("--eigen-output", default=None, help="also emit eigenvalue traces (detuning sweep)")
    # two-mode parameters for the detuning sweep, frequencies with unit suffix
    p.add_argument("--f-i", help="inner-mode frequency")
    p.add_argument("--f-o", default=None, help="outer-mode frequency (default: --f-i)")
    p.add_argument("--kappa-i-g", help="inner radiative rate")
    p.add_argument("--kappa-o-g", help="outer radiative rate")
    p.add_argument("--beta-i", help="inner intrinsic rate")
    p.add_argument("--beta-o", help="outer intrinsic rate")
    p.add_argument("--j", help="coherent coupling")
    p.add_argument("--gamma", help="dissipative coupling")
    p.set_defaults(run=_cmd_map)

    p = sub.add_parser("fit", help="least-squares fit of one spectrum file")
    p.add_argument("--data", required=True, help="spectrum CSV (complex pair or magnitude)")
    p.add_argument("--model", choices=sorted(MODELS), required=True)
    p.add_argument("--free", action="append", default=[], required=True,
                   help="name=guess or name=guess:lo:hi (repeatable; values in Hz)")
    p.add_argument("--fixed", action="append", default=[], help="name=value (repeatable)")
    p.add_argument("--db", action="store_true", help="fit magnitude data on a dB scale")
    p.add_argument("--output", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--threads", default=1, type=int)
    p.set_defaults(run=_cmd_fit)

    p = sub.add_parser("fit-geometry", help="joint geometry/speed fit across spectra")
    p.add_argument("--dataset", action="append", required=True,
                   help="F_RES=PATH with a frequency suffix on F_RES (repeatable, >= 3)")
    p.add_argument("--free", action="append", default=[], required=True)
    p.add_argument("--fixed", action="append", default=[])
    p.add_argument("--output", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--threads", default=1, type=int)
    p.set_defaults(run=_cmd_fit_geometry)

    p = sub.add_parser("anisotropy", help="crystal-angle to frequency curve")
    p.add_argument("--h-e0", type=float, required=True, help="bias field, tesla")
    p.add_argument("--h-a", type=float, required=True, help="anisotropy field, tesla")
    p.add_argument("--theta", required=True, help="angle range start:stop:count with deg/rad suffixes")
    p.add_argument("--which", choices=("simple", "full"), default="simple")
    p.add_argument("--gamma", default=None, help="gyromagnetic ratio over 2*pi per tesla, with frequency suffix")
    p.add_argument("--output", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--threads", default=1, type=int)
    p.set_defaults(run=_cmd_anisotropy)

    p = sub.add_parser("pv-check", help="closed-form vs quadrature check of the self-energy integrals")
    p.add_argument("--x", required=True, help="dimensionless range start:stop:count")
    p.add_argument("--branch", choices=("+", "-"), default="-")
    p.add_argument("--output", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--threads", default=1, type=int)
    p.set_defaults(run=_cmd_pv_check)

    p = sub.add_parser("synth", help="synthetic noisy spectrum for fit round-trips")
    common(p)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=_cmd_synth)

    return parser


def _candidate_outputs(args):
    paths = []
    for attr in ("output", "manifest", "eigen_output", "reflection_output"):
        value = getattr(args, attr, None)
        if value:
            paths.append(value)
    if getattr(args, "output", None) and not getattr(args, "manifest", None):
        paths.append(args.output + ".manifest.json")
    return paths


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    candidates = _candidate_outputs(args)
    preexisting = {p for p in candidates if os.path.exists(p)}
    try:
        args.run(args)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        code = 2
    except ModelError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        code = 3
    except (DataFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        code = 4
    # never leave partial artifacts behind a failed run
    for path in candidates:
        if path not in preexisting and os.path.exists(path):
            try:
                os.unlink(path)
            except OSError:
                pass
    return code


if __name__ == "__main__":
    sys.exit(main())
