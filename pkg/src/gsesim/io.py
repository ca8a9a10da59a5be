"""CSV/JSON readers and writers shared by the CLI and the scripts.

All numeric CSV output uses shortest-round-trip float formatting (repr),
so every value parses back to the identical double. Readers reject
malformed rows with the offending line number; configuration errors carry
a JSON-pointer path to the bad key.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math

import numpy as np

from .core import Emitter, FrequencyGrid, ModelError, Topology, Waveguide


class ConfigError(ValueError):
    """Bad run configuration; the message carries a JSON-pointer path."""


class DataFormatError(ValueError):
    """Malformed data file; the message carries the line number."""


def fmt(x):
    """Shortest decimal representation that round-trips the double."""
    return repr(float(x))


def _db(mag):
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(mag)


def write_spectrum_csv(path, spectrum):
    """Emit `frequency_hz,s21_re,s21_im,s21_mag,s21_db` rows."""
    f = spectrum.frequencies
    s = spectrum.s21
    mag = np.abs(s)
    db = _db(mag)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frequency_hz", "s21_re", "s21_im", "s21_mag", "s21_db"])
        for k in range(f.size):
            w.writerow([fmt(f[k]), fmt(s[k].real), fmt(s[k].imag), fmt(mag[k]), fmt(db[k])])


def read_spectrum_csv(path):
    """Parse a spectrum file; returns (freqs, data, magnitude_only).

    Auto-detects a complex pair (s21_re, s21_im) versus a magnitude-only
    column (s21_mag). Rejects missing headers, malformed rows (with line
    numbers), and unsorted or duplicate frequencies.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        cols = [c.strip().lower() for c in header]
        if "frequency_hz" not in cols:
            raise DataFormatError(f"{path}: missing header with a frequency_hz column")
        i_f = cols.index("frequency_hz")
        complex_pair = "s21_re" in cols and "s21_im" in cols
        if complex_pair:
            i_re, i_im = cols.index("s21_re"), cols.index("s21_im")
        elif "s21_mag" in cols:
            i_mag = cols.index("s21_mag")
        else:
            raise DataFormatError(
                f"{path}: need either s21_re/s21_im or s21_mag columns"
            )
        freqs, data = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                freqs.append(float(row[i_f]))
                if complex_pair:
                    data.append(complex(float(row[i_re]), float(row[i_im])))
                else:
                    data.append(float(row[i_mag]))
            except (ValueError, IndexError) as exc:
                raise DataFormatError(f"{path}:{lineno}: malformed row ({exc})") from None
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size < 2:
        raise DataFormatError(f"{path}: need at least 2 data rows")
    if np.any(np.diff(freqs) <= 0):
        raise DataFormatError(f"{path}: frequencies must be strictly increasing")
    dtype = complex if complex_pair else float
    return freqs, np.asarray(data, dtype=dtype), not complex_pair


def write_map_csv(path, columns):
    """Emit `sweep_value,frequency_hz,s21_mag,s21_db` for (value, Spectrum) columns."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sweep_value", "frequency_hz", "s21_mag", "s21_db"])
        for value, spectrum in columns:
            f = spectrum.frequencies
            mag = spectrum.magnitude
            db = _db(mag)
            for k in range(f.size):
                w.writerow([fmt(value), fmt(f[k]), fmt(mag[k]), fmt(db[k])])


def read_map_csv(path):
    """Parse a map file back into (sweep_values, freqs, |S21| matrix)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [c.strip().lower() for c in header[:3]] != ["sweep_value", "frequency_hz", "s21_mag"]:
            raise DataFormatError(f"{path}: unexpected map header {header!r}")
        rows = [(float(r[0]), float(r[1]), float(r[2])) for r in reader if r]
    sweep = sorted({r[0] for r in rows})
    freqs = sorted({r[1] for r in rows})
    mag = np.full((len(sweep), len(freqs)), np.nan)
    si = {v: i for i, v in enumerate(sweep)}
    fi = {v: i for i, v in enumerate(freqs)}
    for v, f, m in rows:
        mag[si[v], fi[f]] = m
    return np.asarray(sweep), np.asarray(freqs), mag


def write_eigen_csv(path, sweep_values, eigs):
    """Emit `sweep_value,re1_hz,im1_hz,re2_hz,im2_hz` eigenvalue traces."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sweep_value", "re1_hz", "im1_hz", "re2_hz", "im2_hz"])
        for v, (e1, e2) in zip(sweep_values, eigs):
            w.writerow([fmt(v), fmt(e1.real), fmt(e1.imag), fmt(e2.real), fmt(e2.imag)])


def write_anisotropy_csv(path, thetas, freqs):
    """Emit `theta_rad,frequency_hz` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta_rad", "frequency_hz"])
        for th, f in zip(thetas, freqs):
            w.writerow([fmt(th), fmt(f)])


def write_pv_csv(path, rows):
    """Emit `x,a_closed,a_quad,b_closed,b_quad,abs_err_a,abs_err_b` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "a_closed", "a_quad", "b_closed", "b_quad", "abs_err_a", "abs_err_b"])
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_fit_report(path, result):
    """Emit the fit result as a stable-key-order JSON report."""
    payload = {
        "params": {k: float(v) for k, v in result.values.items()},
        "sigmas": {k: float(v) for k, v in result.sigmas.items()},
        "residual_norm": float(result.residual_norm),
        "converged": bool(result.converged),
        "n_iter": int(result.n_iter),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def synth_noise(n, noise_sigma, seed):
    """i.i.d. complex Gaussian noise with E|n|^2 = sigma^2, seeded."""
    if noise_sigma < 0:
        raise ModelError("noise_sigma must be >= 0")
    if noise_sigma == 0:
        return np.zeros(n, dtype=complex)
    rng = np.random.default_rng(seed)
    scale = noise_sigma / math.sqrt(2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, config, output_paths):
    """Record run inputs and output checksums next to the artifacts."""
    from . import __version__

    payload = {
        "package": "gsesim",
        "version": __version__,
        "config": config,
        "outputs": {str(p): sha256_file(p) for p in output_paths},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _get(node, key, pointer, kind=None):
    if not isinstance(node, dict) or key not in node:
        raise ConfigError(f"missing key at {pointer}/{key}")
    value = node[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"wrong type at {pointer}/{key}: expected {kind}")
    return value


_NUM = (int, float)


def parse_config(doc):
    """Validate a run-configuration document into model objects.

    Schema: {"waveguide": {"speed_mps"}, "emitters": [{"name", "f_res_hz",
    "beta_hz", "points": [{"position_m", "kappa_hz"}]}], "probe":
    {"f_start_hz", "f_stop_hz", "n_points"}}. Returns (Waveguide,
    Topology, FrequencyGrid); errors carry JSON-pointer paths.
    """
    wg_node = _get(doc, "waveguide", "", dict)
    try:
        waveguide = Waveguide(float(_get(wg_node, "speed_mps", "/waveguide", _NUM)))
    except ModelError as exc:
        raise ConfigError(f"/waveguide/speed_mps: {exc}") from None

    em_node = _get(doc, "emitters", "", list)
    if not em_node:
        raise ConfigError("/emitters: must list at least one emitter")
    emitters = []
    for i, em in enumerate(em_node):
        ptr = f"/emitters/{i}"
        points = _get(em, "points", ptr, list)
        kappas, positions = [], []
        for k, pt in enumerate(points):
            kappas.append(float(_get(pt, "kappa_hz", f"{ptr}/points/{k}", _NUM)))
            positions.append(float(_get(pt, "position_m", f"{ptr}/points/{k}", _NUM)))
        try:
            emitters.append(
                Emitter(
                    str(_get(em, "name", ptr)),
                    float(_get(em, "f_res_hz", ptr, _NUM)),
                    float(_get(em, "beta_hz", ptr, _NUM)),
                    tuple(kappas),
                    tuple(positions),
                )
            )
        except ModelError as exc:
            raise ConfigError(f"{ptr}: {exc}") from None

    try:
        topology = Topology(tuple(emitters))
    except ModelError as exc:
        raise ConfigError(f"/emitters: {exc}") from None

    pr = _get(doc, "probe", "", dict)
    try:
        grid = FrequencyGrid(
            float(_get(pr, "f_start_hz", "/probe", _NUM)),
            float(_get(pr, "f_stop_hz", "/probe", _NUM)),
            int(_get(pr, "n_points", "/probe", _NUM)),
        )
    except ModelError as exc:
        raise ConfigError(f"/probe: {exc}") from None
    return waveguide, topology, grid


def load_config(path):
    """Read and validate a JSON run configuration from disk."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(doc)
