"""Run configuration: INI-style sections parsed with :mod:`configparser`.

Every key is validated against a schema; errors carry the file name and the
line of the offending key so a user can jump straight to it.

Example::

    [source]
    pump_wavelength_nm = 788
    pump_fwhm_nm = 0.7
    dispersion = ppktp
    axes = y y z
    condition = symmetric

    [grid]
    points = 800
    span = 0.06e15
"""

import configparser
import hashlib
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .design import SourceConfig
from .filtering import FilterSpec
from .herald import CHI_MAX
from .pdc import CrystalSpec, PmfKind, PumpSpec, group_slowness, symmetric_crystal
from .units import GridSpec, fwhm_nm_to_sigma, wavelength_nm_to_omega


class ConfigError(ValueError):
    """Invalid run configuration (exit code 1)."""


SCHEMA = {
    "source": {"pump_wavelength_nm", "pump_fwhm_nm", "mu_p", "sigma_p", "length_m",
               "k_pump", "k_signal", "k_idler", "dispersion", "axes", "condition",
               "delta0", "gamma", "pmf"},
    "grid": {"points", "span", "center"},
    "schmidt": {"cutoff", "modes"},
    "filter": {"kind", "mu_f", "sigma_f", "eta", "file", "delta_width"},
    "herald": {"n", "chi", "target"},
    "sweep": {"n", "eta", "target", "filters", "chi_max", "mu_f"},
    "surface": {"case", "n", "chi_min", "chi_max", "chi_points",
                "eta_min", "eta_max", "eta_points"},
    "oracle": {"instances", "seed", "bins", "max_rank", "tolerance"},
    "output": {"dir"},
}
REQUIRED_SECTIONS = ("source", "grid")


def _locate(lines, section, key):
    """1-based line number of ``key`` inside ``[section]`` (or the header)."""
    current = None
    header_line = None
    pat = re.compile(r"^\s*([^=:\s][^=:]*?)\s*[=:]")
    for no, line in enumerate(lines, 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
            if current == section:
                header_line = no
            continue
        if current == section and key is not None:
            m = pat.match(line)
            if m and m.group(1).lower() == key:
                return no
    return header_line


@dataclass
class RawConfig:
    """Parsed but not yet interpreted configuration with source locations."""

    path: str
    parser: configparser.ConfigParser
    lines: list

    def error(self, section, key, msg) -> ConfigError:
        line = _locate(self.lines, section, key)
        where = f"{self.path}:{line}" if line else self.path
        what = f"[{section}] {key}" if key else f"[{section}]"
        return ConfigError(f"{where}: {what}: {msg}")

    def has(self, section, key=None) -> bool:
        if not self.parser.has_section(section):
            return False
        return key is None or self.parser.has_option(section, key)

    def get_str(self, section, key, default=None):
        if not self.has(section, key):
            if default is None:
                raise self.error(section, None, f"missing required key '{key}'")
            return default
        return self.parser.get(section, key).strip()

    def get_float(self, section, key, default=None, lo=None, hi=None,
                  lo_open=False, hi_open=False):
        if not self.has(section, key):
            if default is None:
                raise self.error(section, None, f"missing required key '{key}'")
            return default
        raw = self.parser.get(section, key).strip()
        try:
            val = float(raw)
        except ValueError:
            raise self.error(section, key, f"expected a number, got {raw!r}") from None
        if not math.isfinite(val):
            raise self.error(section, key, f"expected a finite number, got {raw!r}")
        if lo is not None and (val < lo or (lo_open and val == lo)):
            raise self.error(section, key, f"value {val} below allowed range")
        if hi is not None and (val > hi or (hi_open and val == hi)):
            raise self.error(section, key, f"value {val} above allowed range")
        return val

    def get_int(self, section, key, default=None, lo=None, hi=None):
        if not self.has(section, key):
            if default is None:
                raise self.error(section, None, f"missing required key '{key}'")
            return default
        raw = self.parser.get(section, key).strip()
        try:
            val = int(raw)
        except ValueError:
            raise self.error(section, key, f"expected an integer, got {raw!r}") from None
        if (lo is not None and val < lo) or (hi is not None and val > hi):
            raise self.error(section, key, f"value {val} outside [{lo}, {hi}]")
        return val

    def get_choice(self, section, key, choices, default=None):
        val = self.get_str(section, key, default).lower()
        if val not in choices:
            raise self.error(section, key, f"expected one of {sorted(choices)}, got {val!r}")
        return val

    def canonical_text(self) -> str:
        """Comment- and order-independent rendering used for hashing."""
        out = []
        for sec in sorted(self.parser.sections()):
            out.append(f"[{sec}]")
            for key in sorted(self.parser.options(sec)):
                val = " ".join(self.parser.get(sec, key).split())
                out.append(f"{key} = {val}")
        return "\n".join(out) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()


SHIPPED_CONFIGS = ("correlated", "symmetric", "asymmetric")


def shipped_config(name: str) -> Path:
    """Filesystem path of a bundled example config (``correlated`` etc.)."""
    stem = name[:-4] if name.endswith(".cfg") else name
    if stem not in SHIPPED_CONFIGS:
        raise ConfigError(f"no shipped config named {name!r}; known: {list(SHIPPED_CONFIGS)}")
    ref = resources.files("heraldfock.data").joinpath("configs", f"{stem}.cfg")
    return Path(str(ref))


def resolve_config_path(arg) -> Path:
    """``arg`` as a path, falling back to a shipped config name."""
    path = Path(arg)
    if path.exists():
        return path
    stem = path.name[:-4] if path.name.endswith(".cfg") else path.name
    if path.parent == Path(".") and stem in SHIPPED_CONFIGS:
        return shipped_config(stem)
    return path


def read_config(path) -> RawConfig:
    path = resolve_config_path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config_text(text, str(path))


def parse_config_text(text: str, name: str = "<config>") -> RawConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=name)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{name}:{exc.lineno}: key outside of any [section]") from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"{name}:{exc.lineno}: [{exc.section}] {exc.option}: "
                          "duplicate key") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"{name}:{exc.lineno}: [{exc.section}]: duplicate section") from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else "?"
        raise ConfigError(f"{name}:{lineno}: malformed line") from None
    raw = RawConfig(name, parser, text.splitlines())
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise raw.error(sec, None, f"unknown section; expected one of {sorted(SCHEMA)}")
        for key in parser.options(sec):
            if key not in SCHEMA[sec]:
                raise raw.error(sec, key, f"unknown key; allowed: {sorted(SCHEMA[sec])}")
    for sec in REQUIRED_SECTIONS:
        if not parser.has_section(sec):
            raise ConfigError(f"{name}: missing required section [{sec}]")
    return raw


# ---------------------------------------------------------------------------
# interpreted sections

@dataclass(frozen=True)
class HeraldConfig:
    n: int
    chis: tuple = ()
    target: Optional[float] = None


@dataclass(frozen=True)
class SweepConfig:
    n: int
    eta: float
    target: float
    filters: tuple
    chi_max: Optional[float]
    mu_f: Optional[float]


@dataclass(frozen=True)
class SurfaceConfig:
    case: str
    n: int
    chi_grid: tuple
    eta_grid: tuple


@dataclass(frozen=True)
class OracleConfig:
    instances: int
    seed: int
    bins: int
    max_rank: int
    tolerance: float


@dataclass(frozen=True, eq=False)
class RunConfig:
    path: str
    sha256: str
    source: SourceConfig
    cutoff: float
    modes: int
    filter: FilterSpec
    herald: Optional[HeraldConfig]
    sweep: Optional[SweepConfig]
    surface: Optional[SurfaceConfig]
    oracle: OracleConfig
    output_dir: Optional[str]
    extras: dict = field(default_factory=dict)


def _parse_source(raw: RawConfig):
    s = "source"
    has_lam = raw.has(s, "pump_wavelength_nm") or raw.has(s, "pump_fwhm_nm")
    has_omega = raw.has(s, "mu_p") or raw.has(s, "sigma_p")
    if has_lam == has_omega:
        raise raw.error(s, None, "give either pump_wavelength_nm + pump_fwhm_nm "
                                 "or mu_p + sigma_p")
    lam = None
    if has_lam:
        lam = raw.get_float(s, "pump_wavelength_nm", lo=0, lo_open=True)
        fwhm = raw.get_float(s, "pump_fwhm_nm", lo=0, lo_open=True)
        pump = PumpSpec(wavelength_nm_to_omega(lam), fwhm_nm_to_sigma(lam, fwhm))
    else:
        pump = PumpSpec(raw.get_float(s, "mu_p", lo=0, lo_open=True),
                        raw.get_float(s, "sigma_p", lo=0, lo_open=True))

    explicit_k = [raw.has(s, k) for k in ("k_pump", "k_signal", "k_idler")]
    if any(explicit_k) and raw.has(s, "dispersion"):
        raise raw.error(s, "dispersion", "give either a dispersion table or explicit k_* values")
    if raw.has(s, "dispersion"):
        if lam is None:
            raise raw.error(s, "dispersion", "table lookup needs pump_wavelength_nm")
        table = raw.get_str(s, "dispersion")
        axes = tuple(raw.get_str(s, "axes", "y y z").split())
        if len(axes) != 3:
            raise raw.error(s, "axes", "expected three axis names (pump signal idler)")
        try:
            kp, ks, ki = group_slowness(lam, axes, table)
        except (ValueError, KeyError) as exc:
            raise raw.error(s, "dispersion", str(exc)) from None
    elif all(explicit_k):
        kp, ks, ki = (raw.get_float(s, k, lo=0, lo_open=True)
                      for k in ("k_pump", "k_signal", "k_idler"))
    else:
        raise raw.error(s, None, "need a dispersion table or all of k_pump, k_signal, k_idler")

    gamma = raw.get_float(s, "gamma", 0.193, lo=0, lo_open=True)
    delta0 = raw.get_float(s, "delta0", 0.0)
    condition = raw.get_choice(s, "condition", {"none", "symmetric", "asymmetric"}, "none")
    if condition == "symmetric":
        if raw.has(s, "length_m"):
            raise raw.error(s, "length_m", "symmetric condition derives the length; remove it")
        try:
            crystal = symmetric_crystal(pump, ks, ki, gamma)
        except ValueError as exc:
            raise raw.error(s, "condition", str(exc)) from None
        if delta0:
            crystal = CrystalSpec(crystal.length, crystal.k_pump, ks, ki, delta0, gamma)
    else:
        length = raw.get_float(s, "length_m", lo=0, lo_open=True)
        if condition == "asymmetric":
            kp = ks
        crystal = CrystalSpec(length, kp, ks, ki, delta0, gamma)
    pmf = PmfKind(raw.get_choice(s, "pmf", {"sinc", "gaussian"}, "sinc"))
    return pump, crystal, pmf


def _parse_filter(raw: RawConfig, pump: PumpSpec) -> FilterSpec:
    s = "filter"
    kind = raw.get_choice(s, "kind", {"none", "gaussian", "delta", "table"}, "none")
    eta = raw.get_float(s, "eta", 1.0, lo=0.0, hi=1.0)
    mu_f = raw.get_float(s, "mu_f", pump.mu)
    if kind == "none":
        return FilterSpec.none(eta)
    if kind == "gaussian":
        return FilterSpec.gaussian(mu_f, raw.get_float(s, "sigma_f", lo=0, lo_open=True), eta)
    if kind == "delta":
        width = raw.get_float(s, "delta_width", 0.0, lo=0.0)
        return FilterSpec.delta(mu_f, eta, width or None)
    fname = raw.get_str(s, "file")
    path = Path(fname)
    if not path.is_absolute():
        path = Path(raw.path).parent / path
    try:
        return FilterSpec.from_file(path, eta)
    except (OSError, ValueError) as exc:
        raise raw.error(s, "file", str(exc)) from None


def _float_list(raw, section, key):
    items = raw.get_str(section, key).replace(",", " ").split()
    try:
        return tuple(float(x) for x in items)
    except ValueError:
        raise raw.error(section, key, "expected a whitespace separated list of numbers") from None


def _linspace(lo, hi, n):
    if n == 1:
        return (lo,)
    return tuple(lo + (hi - lo) * i / (n - 1) for i in range(n))


def _parse_herald(raw: RawConfig) -> Optional[HeraldConfig]:
    s = "herald"
    if not raw.has(s):
        return None
    n = raw.get_int(s, "n", 1, lo=1, hi=2)
    has_chi, has_target = raw.has(s, "chi"), raw.has(s, "target")
    if has_chi == has_target:
        raise raw.error(s, None, "give exactly one of 'chi' or 'target'")
    if has_target:
        return HeraldConfig(n=n, target=raw.get_float(s, "target", lo=0, hi=1,
                                                      lo_open=True, hi_open=True))
    chis = _float_list(raw, s, "chi")
    if not chis or any(c < 0 or c > CHI_MAX[n] for c in chis):
        raise raw.error(s, "chi", f"chi values must lie in [0, {CHI_MAX[n]}] for n={n}")
    return HeraldConfig(n=n, chis=chis)


def _parse_sweep(raw: RawConfig) -> Optional[SweepConfig]:
    s = "sweep"
    if not raw.has(s):
        return None
    n = raw.get_int(s, "n", 1, lo=1, hi=2)
    entries = []
    for item in raw.get_str(s, "filters").replace(",", " ").split():
        low = item.lower()
        if low in ("none", "delta"):
            entries.append(low)
            continue
        try:
            val = float(item)
        except ValueError:
            raise raw.error(s, "filters", f"bad filter entry {item!r}") from None
        if not val > 0:
            raise raw.error(s, "filters", "gaussian widths must be positive")
        entries.append(val)
    if not entries:
        raise raw.error(s, "filters", "empty filter list")
    chi_max = raw.get_float(s, "chi_max", CHI_MAX[n], lo=0, hi=CHI_MAX[n], lo_open=True)
    mu_f = raw.get_float(s, "mu_f") if raw.has(s, "mu_f") else None
    return SweepConfig(
        n=n, eta=raw.get_float(s, "eta", 1.0, lo=0, hi=1, lo_open=True),
        target=raw.get_float(s, "target", lo=0, hi=1, lo_open=True, hi_open=True),
        filters=tuple(entries), chi_max=chi_max, mu_f=mu_f)


def _parse_surface(raw: RawConfig) -> Optional[SurfaceConfig]:
    s = "surface"
    if not raw.has(s):
        return None
    case = raw.get_choice(s, "case", {"perfect", "inefficient", "filtered"}, "inefficient")
    n = raw.get_int(s, "n", 1, lo=1, hi=2)
    chi_lo = raw.get_float(s, "chi_min", 0.0, lo=0, hi=CHI_MAX[n])
    chi_hi = raw.get_float(s, "chi_max", CHI_MAX[n], lo=chi_lo, hi=CHI_MAX[n])
    chi_n = raw.get_int(s, "chi_points", 11, lo=1, hi=10000)
    eta_lo = raw.get_float(s, "eta_min", 0.0, lo=0, hi=1)
    eta_hi = raw.get_float(s, "eta_max", 1.0, lo=eta_lo, hi=1)
    eta_n = raw.get_int(s, "eta_points", 11, lo=1, hi=10000)
    return SurfaceConfig(case, n, _linspace(chi_lo, chi_hi, chi_n),
                         _linspace(eta_lo, eta_hi, eta_n))


def _parse_oracle(raw: RawConfig) -> OracleConfig:
    s = "oracle"
    bins = raw.get_int(s, "bins", 8, lo=1, hi=32)
    return OracleConfig(
        instances=raw.get_int(s, "instances", 60, lo=1, hi=100000),
        seed=raw.get_int(s, "seed", 2024, lo=0),
        bins=bins,
        max_rank=raw.get_int(s, "max_rank", min(3, bins), lo=1, hi=bins),
        tolerance=raw.get_float(s, "tolerance", 1e-8, lo=0, lo_open=True),
    )


def load_config(path) -> RunConfig:
    return interpret(read_config(path))


def interpret(raw: RawConfig) -> RunConfig:
    try:
        pump, crystal, pmf = _parse_source(raw)
        g = "grid"
        points = raw.get_int(g, "points", lo=2, hi=20000)
        span = raw.get_float(g, "span", lo=0, lo_open=True)
        center = raw.get_float(g, "center", pump.mu, lo=0, lo_open=True)
        cutoff = raw.get_float("schmidt", "cutoff", 0.0, lo=0, hi=1, hi_open=True)
        modes = raw.get_int("schmidt", "modes", 5, lo=0, hi=points)
        grid = GridSpec(points, span, center)
        source = SourceConfig(pump, crystal, grid, pmf, cutoff)
        filt = _parse_filter(raw, pump)
        out_dir = raw.get_str("output", "dir") if raw.has("output", "dir") else None
        return RunConfig(path=raw.path, sha256=raw.sha256(), source=source,
                         cutoff=cutoff, modes=modes, filter=filt,
                         herald=_parse_herald(raw), sweep=_parse_sweep(raw),
                         surface=_parse_surface(raw), oracle=_parse_oracle(raw),
                         output_dir=out_dir)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{raw.path}: {exc}") from None
