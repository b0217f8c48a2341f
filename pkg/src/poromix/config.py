"""
Run configuration: a YAML document with nested key/value sections.

Sections and keys:

    domain:   Lx, Ly, Ns, Nv, M (optional)
    params:   mu_e, d, kappa, delta_hat, gamma, M_GN
    mobility: kind, coefficients
    forcing:  preset OR file
    initial:  C: {preset: ..., ...} or {file: ...}; u: likewise
    solver:   T_run, rtol, atol, dt_init, dt_max, blowup_cap,
              integrating_factor
    outputs:  ledger_path, snapshot_cadence, snapshot_dir

Validation collects every problem with its field path before failing, so
a broken file reports all defects at once.  parse -> serialize -> parse is
semantically idempotent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .domain import Domain, DomainSpec, build_domain
from .fields import ScalarField, VelocityField
from .forcing import FORCING_PRESETS, ForcingSpec
from .korteweg import KortewegParams
from .mobility import MobilitySpec
from .solver import PhysicalParams, SolverConfig

__all__ = ["ConfigError", "RunConfig", "InitialSpec", "OutputSpec"]


class ConfigError(ValueError):
    """Carries the full list of field-precise validation failures."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


_SECTIONS = ("domain", "params", "mobility", "forcing", "initial", "solver", "outputs")

_SCALAR_PRESETS = ("zero", "uniform", "cosine", "cosine_mix")
_VELOCITY_PRESETS = ("zero", "stream", "stream_mix")


@dataclass(frozen=True)
class InitialSpec:
    """Initial conditions: presets or coefficient files for C and u."""

    C: dict
    u: dict

    def build(self, domain: Domain):
        return _build_scalar_initial(domain, self.C), _build_velocity_initial(domain, self.u)


@dataclass(frozen=True)
class OutputSpec:
    ledger_path: str = "ledger.csv"
    snapshot_cadence: float = 0.0  # time interval between snapshots; 0 disables
    snapshot_dir: str = "snapshots"


@dataclass(frozen=True)
class RunConfig:
    domain: DomainSpec
    params: PhysicalParams
    forcing_raw: dict
    initial: InitialSpec
    solver: SolverConfig
    outputs: OutputSpec
    base_dir: Path

    # -- construction --------------------------------------------------------

    @staticmethod
    def from_file(path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError([f"cannot read config file {path}: {exc}"])
        return RunConfig.from_text(text, base_dir=path.parent)

    @staticmethod
    def from_text(text: str, base_dir=".") -> "RunConfig":
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError([f"config is not valid YAML: {exc}"])
        if not isinstance(raw, dict):
            raise ConfigError(["config must be a mapping of sections"])
        return RunConfig.from_dict(raw, base_dir=base_dir)

    @staticmethod
    def from_dict(raw: dict, base_dir=".") -> "RunConfig":
        errors: list[str] = []
        base_dir = Path(base_dir)

        for section in _SECTIONS:
            if section not in raw:
                errors.append(f"{section}: missing section")
            elif not isinstance(raw[section], dict):
                errors.append(f"{section}: must be a mapping")
        unknown = set(raw) - set(_SECTIONS)
        for key in sorted(unknown):
            errors.append(f"{key}: unknown section")
        if errors:
            raise ConfigError(errors)

        domain = _parse_domain(raw["domain"], errors)
        mobility = _parse_mobility(raw["mobility"], errors)
        params = _parse_params(raw["params"], mobility, errors)
        forcing_raw = _parse_forcing(raw["forcing"], base_dir, errors)
        initial = _parse_initial(raw["initial"], base_dir, errors)
        solver = _parse_solver(raw["solver"], errors)
        outputs = _parse_outputs(raw["outputs"], errors)

        if errors:
            raise ConfigError(errors)
        return RunConfig(
            domain=domain,
            params=params,
            forcing_raw=forcing_raw,
            initial=initial,
            solver=solver,
            outputs=outputs,
            base_dir=base_dir,
        )

    # -- realization -----------------------------------------------------------

    def build_domain(self) -> Domain:
        return build_domain(self.domain)

    def build_forcing(self) -> ForcingSpec:
        if "file" in self.forcing_raw:
            return ForcingSpec.tabulated(self._resolve(self.forcing_raw["file"]))
        return ForcingSpec.preset(self.forcing_raw["preset"])

    def _resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def build_initial(self, domain: Domain):
        spec = InitialSpec(
            C=_resolve_file_entry(self.initial.C, self._resolve),
            u=_resolve_file_entry(self.initial.u, self._resolve),
        )
        return spec.build(domain)

    # -- serialization -----------------------------------------------------------

    def to_dict(self) -> dict:
        dom = {"Lx": self.domain.Lx, "Ly": self.domain.Ly, "Ns": self.domain.Ns,
               "Nv": self.domain.Nv}
        if self.domain.M is not None:
            dom["M"] = self.domain.M
        return {
            "domain": dom,
            "params": {
                "mu_e": self.params.mu_e,
                "d": self.params.d,
                "kappa": self.params.kappa,
                "delta_hat": self.params.korteweg.delta_hat,
                "gamma": self.params.korteweg.gamma,
                "M_GN": self.params.m_gn,
            },
            "mobility": {
                "kind": self.params.mobility.kind,
                "coefficients": list(self.params.mobility.coefficients),
            },
            "forcing": dict(self.forcing_raw),
            "initial": {"C": dict(self.initial.C), "u": dict(self.initial.u)},
            "solver": {
                "T_run": self.solver.T_run,
                "rtol": self.solver.rtol,
                "atol": self.solver.atol,
                "dt_init": self.solver.dt_init,
                "dt_max": self.solver.dt_max,
                "blowup_cap": self.solver.blowup_cap,
                "integrating_factor": self.solver.integrating_factor,
            },
            "outputs": {
                "ledger_path": self.outputs.ledger_path,
                "snapshot_cadence": self.outputs.snapshot_cadence,
                "snapshot_dir": self.outputs.snapshot_dir,
            },
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


# ---------------------------------------------------------------------------
# section parsers
# ---------------------------------------------------------------------------


def _get_number(section, sec_name, key, errors, *, required=True, default=None,
                integer=False, allow_inf=False):
    if key not in section:
        if required:
            errors.append(f"{sec_name}.{key}: missing")
        return default
    val = section[key]
    if isinstance(val, str):
        # YAML 1.1 reads exponents like 1.0e6 as strings; accept them anyway.
        try:
            val = float(val)
        except ValueError:
            pass
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errors.append(f"{sec_name}.{key}: expected a number, got {val!r}")
        return default
    if math.isinf(val) and not allow_inf:
        errors.append(f"{sec_name}.{key}: must be finite, got {val!r}")
        return default
    if integer and not float(val).is_integer():
        errors.append(f"{sec_name}.{key}: expected an integer, got {val!r}")
        return default
    return int(val) if integer else float(val)


def _check_unknown(section, sec_name, known, errors):
    for key in sorted(set(section) - set(known)):
        errors.append(f"{sec_name}.{key}: unknown key")


def _parse_domain(section, errors):
    _check_unknown(section, "domain", ("Lx", "Ly", "Ns", "Nv", "M"), errors)
    Lx = _get_number(section, "domain", "Lx", errors)
    Ly = _get_number(section, "domain", "Ly", errors)
    Ns = _get_number(section, "domain", "Ns", errors, integer=True)
    Nv = _get_number(section, "domain", "Nv", errors, integer=True)
    M = _get_number(section, "domain", "M", errors, required=False, integer=True)
    if None in (Lx, Ly, Ns, Nv):
        return None
    spec = DomainSpec(Lx=Lx, Ly=Ly, Ns=Ns, Nv=Nv, M=M)
    for msg in spec.validation_errors():
        errors.append(f"domain: {msg}")
    return spec


def _parse_mobility(section, errors):
    _check_unknown(section, "mobility", ("kind", "coefficients"), errors)
    kind = section.get("kind")
    coeffs = section.get("coefficients")
    if kind is None:
        errors.append("mobility.kind: missing")
    if coeffs is None:
        errors.append("mobility.coefficients: missing")
    elif not (isinstance(coeffs, list) and coeffs
              and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in coeffs)):
        errors.append("mobility.coefficients: expected a non-empty list of numbers")
        coeffs = None
    if kind is None or coeffs is None:
        return None
    msgs = MobilitySpec.check(kind, tuple(float(c) for c in coeffs))
    if msgs:
        errors.extend(f"mobility: {m}" for m in msgs)
        return None
    return MobilitySpec(kind, tuple(float(c) for c in coeffs))


def _parse_params(section, mobility, errors):
    keys = ("mu_e", "d", "kappa", "delta_hat", "gamma", "M_GN")
    _check_unknown(section, "params", keys, errors)
    mu_e = _get_number(section, "params", "mu_e", errors)
    d = _get_number(section, "params", "d", errors)
    kappa = _get_number(section, "params", "kappa", errors, required=False, default=0.0)
    delta_hat = _get_number(section, "params", "delta_hat", errors, required=False, default=0.0)
    gamma = _get_number(section, "params", "gamma", errors, required=False, default=0.0)
    m_gn = _get_number(section, "params", "M_GN", errors, required=False, default=1.0)
    if None in (mu_e, d, kappa, delta_hat, gamma, m_gn):
        return None
    try:
        kt = KortewegParams(delta_hat=delta_hat, gamma=gamma)
    except ValueError as exc:
        errors.append(f"params: {exc}")
        return None
    try:
        # Probe with a placeholder mobility so range errors surface even
        # when the mobility section is itself broken.
        params = PhysicalParams(mu_e=mu_e, d=d, kappa=kappa, korteweg=kt,
                                mobility=mobility or MobilitySpec.constant(1.0),
                                m_gn=m_gn)
    except ValueError as exc:
        errors.append(f"params: {exc}")
        return None
    return params if mobility is not None else None


def _parse_forcing(section, base_dir, errors):
    _check_unknown(section, "forcing", ("preset", "file"), errors)
    has_preset = "preset" in section
    has_file = "file" in section
    if has_preset == has_file:
        errors.append("forcing: give exactly one of 'preset' or 'file'")
        return {}
    if has_preset:
        name = section["preset"]
        if name not in FORCING_PRESETS:
            errors.append(
                f"forcing.preset: unknown preset {name!r}; available: {sorted(FORCING_PRESETS)}"
            )
        return {"preset": name}
    path = Path(base_dir) / str(section["file"])
    if not path.exists():
        errors.append(f"forcing.file: {path} does not exist")
    return {"file": str(section["file"])}


def _parse_initial(section, base_dir, errors):
    _check_unknown(section, "initial", ("C", "u"), errors)
    out = {}
    for key, presets in (("C", _SCALAR_PRESETS), ("u", _VELOCITY_PRESETS)):
        entry = section.get(key)
        if not isinstance(entry, dict):
            errors.append(f"initial.{key}: missing or not a mapping")
            out[key] = {}
            continue
        if ("preset" in entry) == ("file" in entry):
            errors.append(f"initial.{key}: give exactly one of 'preset' or 'file'")
        elif "preset" in entry and entry["preset"] not in presets:
            errors.append(
                f"initial.{key}.preset: unknown preset {entry['preset']!r}; "
                f"available: {list(presets)}"
            )
        elif "file" in entry:
            path = Path(entry["file"])
            if not (path if path.is_absolute() else Path(base_dir) / path).exists():
                errors.append(f"initial.{key}.file: {entry['file']} does not exist")
        out[key] = dict(entry)
    return InitialSpec(C=out["C"], u=out["u"])


def _parse_solver(section, errors):
    keys = ("T_run", "rtol", "atol", "dt_init", "dt_max", "blowup_cap", "integrating_factor")
    _check_unknown(section, "solver", keys, errors)
    T_run = _get_number(section, "solver", "T_run", errors)
    rtol = _get_number(section, "solver", "rtol", errors, required=False, default=1e-8)
    atol = _get_number(section, "solver", "atol", errors, required=False, default=1e-11)
    dt_init = _get_number(section, "solver", "dt_init", errors, required=False, default=1e-4)
    dt_max = _get_number(section, "solver", "dt_max", errors, required=False,
                         default=math.inf, allow_inf=True)
    cap = _get_number(section, "solver", "blowup_cap", errors, required=False, default=1e6)
    int_factor = section.get("integrating_factor", False)
    if not isinstance(int_factor, bool):
        errors.append("solver.integrating_factor: expected a boolean")
        int_factor = False
    if T_run is None:
        return None
    cfg = SolverConfig(T_run=T_run, rtol=rtol, atol=atol, dt_init=dt_init,
                       dt_max=dt_max, blowup_cap=cap, integrating_factor=int_factor)
    for msg in cfg.validation_errors():
        errors.append(f"solver: {msg}")
    return cfg


def _parse_outputs(section, errors):
    keys = ("ledger_path", "snapshot_cadence", "snapshot_dir")
    _check_unknown(section, "outputs", keys, errors)
    ledger_path = section.get("ledger_path", "ledger.csv")
    snapshot_dir = section.get("snapshot_dir", "snapshots")
    cadence = _get_number(section, "outputs", "snapshot_cadence", errors,
                          required=False, default=0.0)
    if not isinstance(ledger_path, str):
        errors.append("outputs.ledger_path: expected a string")
        ledger_path = "ledger.csv"
    if not isinstance(snapshot_dir, str):
        errors.append("outputs.snapshot_dir: expected a string")
        snapshot_dir = "snapshots"
    if cadence is None or cadence < 0:
        errors.append("outputs.snapshot_cadence: expected a number >= 0")
        cadence = 0.0
    return OutputSpec(ledger_path=ledger_path, snapshot_cadence=cadence,
                      snapshot_dir=snapshot_dir)


# ---------------------------------------------------------------------------
# initial-condition builders
# ---------------------------------------------------------------------------


def _resolve_file_entry(entry: dict, resolve) -> dict:
    if "file" in entry:
        out = dict(entry)
        out["file"] = str(resolve(entry["file"]))
        return out
    return entry


def _build_scalar_initial(domain: Domain, entry: dict) -> ScalarField:
    Ns = domain.spec.Ns
    s = domain.scalar
    if "file" in entry:
        with np.load(entry["file"]) as data:
            if "beta" not in data.files:
                raise ConfigError([f"initial.C.file: {entry['file']} has no 'beta' array"])
            B = np.asarray(data["beta"], dtype=float)
        if B.shape != (Ns, Ns):
            raise ConfigError(
                [f"initial.C.file: beta shape {B.shape} does not match Ns={Ns}"]
            )
        return ScalarField(domain, B)
    preset = entry["preset"]
    B = np.zeros((Ns, Ns))
    if preset == "zero":
        pass
    elif preset == "uniform":
        value = float(entry.get("value", 0.0))
        B[0, 0] = value / s.norm_00
    elif preset == "cosine":
        j, k = int(entry.get("jx", 1)), int(entry.get("ky", 0))
        if not (0 <= j < Ns and 0 <= k < Ns):
            raise ConfigError([f"initial.C: cosine mode ({j}, {k}) out of range for Ns={Ns}"])
        B[0, 0] = float(entry.get("offset", 0.0)) / s.norm_00
        B[j, k] += float(entry.get("amplitude", 1.0)) / (s.norm_x[j] * s.norm_y[k])
    elif preset == "cosine_mix":
        B[0, 0] = float(entry.get("offset", 0.0)) / s.norm_00
        for item in entry.get("modes", []):
            j, k, amp = int(item[0]), int(item[1]), float(item[2])
            if not (0 <= j < Ns and 0 <= k < Ns):
                raise ConfigError(
                    [f"initial.C: cosine mode ({j}, {k}) out of range for Ns={Ns}"]
                )
            B[j, k] += amp / (s.norm_x[j] * s.norm_y[k])
    else:  # pragma: no cover - guarded at parse time
        raise ConfigError([f"initial.C.preset: unknown preset {preset!r}"])
    return ScalarField(domain, B)


def _build_velocity_initial(domain: Domain, entry: dict) -> VelocityField:
    Nv = domain.spec.Nv
    if "file" in entry:
        with np.load(entry["file"]) as data:
            if "alpha" not in data.files:
                raise ConfigError([f"initial.u.file: {entry['file']} has no 'alpha' array"])
            A = np.asarray(data["alpha"], dtype=float)
        if A.shape != (Nv, Nv):
            raise ConfigError(
                [f"initial.u.file: alpha shape {A.shape} does not match Nv={Nv}"]
            )
        return VelocityField(domain, A)
    preset = entry["preset"]
    A = np.zeros((Nv, Nv))
    if preset == "zero":
        pass
    elif preset == "stream":
        j, k = int(entry.get("jx", 1)), int(entry.get("ky", 1))
        if not (1 <= j <= Nv and 1 <= k <= Nv):
            raise ConfigError([f"initial.u: stream mode ({j}, {k}) out of range for Nv={Nv}"])
        A[j - 1, k - 1] = float(entry.get("amplitude", 1.0))
    elif preset == "stream_mix":
        for item in entry.get("modes", []):
            j, k, amp = int(item[0]), int(item[1]), float(item[2])
            if not (1 <= j <= Nv and 1 <= k <= Nv):
                raise ConfigError(
                    [f"initial.u: stream mode ({j}, {k}) out of range for Nv={Nv}"]
                )
            A[j - 1, k - 1] += amp
    else:  # pragma: no cover - guarded at parse time
        raise ConfigError([f"initial.u.preset: unknown preset {preset!r}"])
    return VelocityField(domain, A)
