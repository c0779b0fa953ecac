"""Domain types: hosts, VMs, workloads, datacenter configuration.

Spec objects (HostSpec, VmSpec, configs) are frozen value objects; the
mutable *State* companions exist only inside the engine's single-threaded
step loop. Time is integer seconds and the engine advances by whole
intervals, so step counts are exact integer divisions.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .energy import (Activity, CoolingPower, DynamicEnergyParams, ExtraPower,
                     MemoryPower, NetworkPower, PowerParams, StoragePower)
from .errors import InvalidConfig, IoError
from .thermal import MODES, ThermalClass, ThermalParams

POLICIES = ("fcfs", "utilization", "thermal", "thermal+utilization")


@dataclass(frozen=True)
class UtilizationSnapshot:
    """Point-in-time utilization of one VM or host.

    ``resource`` is a fraction in [0, 1]; the other three are percents in
    [0, 100]. Units are fixed per field to match the formulas that produce
    them, so conversions stay explicit.
    """

    resource: float = 0.0
    memory_pct: float = 0.0
    disk_pct: float = 0.0
    network_pct: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.resource <= 1.0:
            raise InvalidConfig("resource", "fraction must be in [0, 1]")
        for name in ("memory_pct", "disk_pct", "network_pct"):
            if not 0.0 <= getattr(self, name) <= 100.0:
                raise InvalidConfig(name, "percent must be in [0, 100]")


@dataclass(frozen=True)
class HostSpec:
    id: str
    cores: int = 4
    mips_per_core: float = 2000.0
    ram_mb: float = 8192.0
    bandwidth_bps: float = 1e9
    thermal: ThermalParams = field(default_factory=ThermalParams)
    power: PowerParams = field(default_factory=PowerParams)

    def __post_init__(self):
        if self.cores < 1:
            raise InvalidConfig("cores", "must be >= 1")
        for name in ("mips_per_core", "ram_mb", "bandwidth_bps"):
            if getattr(self, name) <= 0:
                raise InvalidConfig(name, "must be > 0")

    @property
    def total_mips(self):
        return self.cores * self.mips_per_core


@dataclass
class HostState:
    """Runtime view of one physical machine."""

    spec: HostSpec
    current_temp_c: float
    placed_vms: list = field(default_factory=list)
    power_w: float = 0.0          # total draw (all seven leaves)
    dynamic_w: float = 0.0        # dynamic processor draw, feeds the RC model

    @property
    def id(self):
        return self.spec.id


@dataclass(frozen=True)
class VmSpec:
    id: str
    mips: float = 500.0
    ram_mb: float = 1024.0
    bandwidth_bps: float = 1e8
    host_id: str | None = None

    def __post_init__(self):
        for name in ("mips", "ram_mb", "bandwidth_bps"):
            if getattr(self, name) <= 0:
                raise InvalidConfig(name, "must be > 0")


@dataclass
class VmState:
    """Runtime view of one virtual machine."""

    spec: VmSpec
    host_id: str | None = None
    util: UtilizationSnapshot = field(default_factory=UtilizationSnapshot)
    thermal_class: ThermalClass = ThermalClass.UNCLASSIFIED
    delta_t_c: float | None = None  # predicted host temperature change
    e_total_w: float = 0.0          # VM's share of host power, sort key
    reserved_mips: float = 0.0
    reserved_ram_mb: float = 0.0
    reserved_bw_bps: float = 0.0
    paused_until_s: float = 0.0     # migration downtime window end

    @property
    def id(self):
        return self.spec.id


@dataclass
class Workload:
    """One submitted task (instruction length plus resource demands)."""

    id: str
    length_mi: float
    mips_requested: float
    file_size_mb: float = 300.0
    output_size_mb: float = 300.0
    ram_mb: float = 256.0
    cost_cd: float = 4.0
    arrival_s: int = 0
    assigned_vm: str | None = None
    start_s: float | None = None
    finish_s: float | None = None
    remaining_mi: float = None

    def __post_init__(self):
        if self.length_mi <= 0:
            raise InvalidConfig("length_mi", "must be > 0")
        if self.mips_requested <= 0:
            raise InvalidConfig("mips_requested", "must be > 0")
        if self.arrival_s < 0:
            raise InvalidConfig("arrival_s", "must be >= 0")
        if self.remaining_mi is None:
            self.remaining_mi = self.length_mi

    @property
    def nominal_runtime_s(self):
        """Ideal runtime at fully granted requested MIPS."""
        return self.length_mi / self.mips_requested


@dataclass(frozen=True)
class WorkloadGenConfig:
    """Synthetic workload distribution (uniform draws over fixed ranges).

    ``count`` spreads that many arrivals over the horizon (the per-interval
    rate is count / step_count); ``lambda_per_interval`` sets the rate
    directly and wins when both are given.
    """

    count: int | None = None
    lambda_per_interval: float | None = None
    length_base_mi: float = 10000.0
    length_scale: tuple = (1.10, 1.30)
    file_base_mb: float = 300.0
    file_scale: tuple = (1.15, 1.40)
    output_base_mb: float = 300.0
    output_scale: tuple = (1.15, 1.50)
    cost_range: tuple = (3.0, 5.0)
    mips_range: tuple = (100.0, 500.0)
    ram_range: tuple = (100.0, 500.0)

    def __post_init__(self):
        if self.count is not None and self.count < 0:
            raise InvalidConfig("count", "must be >= 0")
        if self.lambda_per_interval is not None and self.lambda_per_interval < 0:
            raise InvalidConfig("lambda_per_interval", "must be >= 0")
        for name in ("length_scale", "file_scale", "output_scale",
                     "cost_range", "mips_range", "ram_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InvalidConfig(name, "range must be (low, high)")


@dataclass(frozen=True)
class DataCenterConfig:
    hosts: tuple = ()
    vms: tuple = ()
    interval_s: int = 300
    horizon_s: int = 172800
    seed: int = 1
    policy: str = "thermal"
    thermal_mode: str = "literal"
    sla_slack: float = 0.10
    replicates: int = 1
    workload: WorkloadGenConfig | None = None
    trace_dir: str | None = None   # per-VM CPU utilization traces drive load

    @property
    def step_count(self):
        return self.horizon_s // self.interval_s


def validate_config(cfg):
    """Check every invariant and return the config (defaults are filled by
    construction). Raises InvalidConfig naming the offending field."""
    if int(cfg.interval_s) != cfg.interval_s or cfg.interval_s <= 0:
        raise InvalidConfig("interval_s", "must be a positive integer")
    if int(cfg.horizon_s) != cfg.horizon_s or cfg.horizon_s <= 0:
        raise InvalidConfig("horizon_s", "must be a positive integer")
    if cfg.horizon_s % cfg.interval_s != 0:
        raise InvalidConfig("horizon_s", "must be a multiple of interval_s")
    if not -(2 ** 63) <= cfg.seed < 2 ** 64:
        raise InvalidConfig("seed", "must fit in 64 bits")
    if cfg.thermal_mode not in MODES:
        raise InvalidConfig("thermal_mode", f"must be one of {MODES}")
    if cfg.sla_slack < 0:
        raise InvalidConfig("sla_slack", "must be >= 0")
    if cfg.replicates < 1:
        raise InvalidConfig("replicates", "must be >= 1")

    host_ids = [h.id for h in cfg.hosts]
    if len(set(host_ids)) != len(host_ids):
        raise InvalidConfig("hosts", "duplicate host ids")
    vm_ids = [v.id for v in cfg.vms]
    if len(set(vm_ids)) != len(vm_ids):
        raise InvalidConfig("vms", "duplicate vm ids")

    by_host = {h.id: 0.0 for h in cfg.hosts}
    for vm in cfg.vms:
        if vm.host_id is None:
            continue
        if vm.host_id not in by_host:
            raise InvalidConfig("vms", f"vm {vm.id} references unknown host {vm.host_id}")
        by_host[vm.host_id] += vm.mips
    for host in cfg.hosts:
        if by_host[host.id] > host.total_mips:
            raise InvalidConfig(
                "vms", f"host {host.id} over-committed: "
                       f"{by_host[host.id]} MIPS reserved > {host.total_mips}")
    return cfg


def default_datacenter(n_hosts=4, n_vms=12, **overrides):
    """The reference small datacenter: hosts with 4 cores x 2000 MIPS, 8 GB
    and 1 Gbit/s; VMs with 500 MIPS, 1 GB and 100 Mbit/s, spread round-robin."""
    hosts = tuple(HostSpec(id=f"pm-{i}") for i in range(n_hosts))
    vms = tuple(
        VmSpec(id=f"vm-{i}", host_id=f"pm-{i % n_hosts}") for i in range(n_vms))
    return validate_config(DataCenterConfig(hosts=hosts, vms=vms, **overrides))


# ---------------------------------------------------------------------------
# JSON serialization. Unknown keys are an error (fail-fast); named presets
# ("default") expand to the built-in parameter sets.
# ---------------------------------------------------------------------------

def _check_keys(data, allowed, where):
    unknown = set(data) - set(allowed)
    if unknown:
        raise InvalidConfig(where, f"unknown keys {sorted(unknown)}")


def _nested(cls, data, where):
    _check_keys(data, [f.name for f in dataclasses.fields(cls)], where)
    return cls(**data)


def _power_from(data, where):
    if data == "default":
        return PowerParams()
    _check_keys(data, [f.name for f in dataclasses.fields(PowerParams)], where)
    kwargs = dict(data)
    for key, cls in (("storage", StoragePower), ("memory", MemoryPower),
                     ("network", NetworkPower), ("extra", ExtraPower),
                     ("cooling", CoolingPower), ("dyn", DynamicEnergyParams)):
        if key in kwargs:
            kwargs[key] = _nested(cls, kwargs[key], f"{where}.{key}")
    return PowerParams(**kwargs)


def _thermal_from(data, where):
    if data == "default":
        return ThermalParams()
    return _nested(ThermalParams, data, where)


def config_from_dict(data):
    _check_keys(data, ("hosts", "vms", "interval_s", "horizon_s", "seed",
                       "policy", "thermal_mode", "sla_slack", "replicates",
                       "workload", "trace_dir"), "config")
    kwargs = dict(data)
    hosts = []
    for i, h in enumerate(kwargs.pop("hosts", [])):
        where = f"hosts[{i}]"
        _check_keys(h, ("id", "cores", "mips_per_core", "ram_mb",
                        "bandwidth_bps", "thermal", "power"), where)
        h = dict(h)
        if "thermal" in h:
            h["thermal"] = _thermal_from(h["thermal"], f"{where}.thermal")
        if "power" in h:
            h["power"] = _power_from(h["power"], f"{where}.power")
        hosts.append(HostSpec(**h))
    vms = []
    for i, v in enumerate(kwargs.pop("vms", [])):
        _check_keys(v, ("id", "mips", "ram_mb", "bandwidth_bps", "host_id"),
                    f"vms[{i}]")
        vms.append(VmSpec(**v))
    if "workload" in kwargs and kwargs["workload"] is not None:
        wl = dict(kwargs["workload"])
        _check_keys(wl, [f.name for f in dataclasses.fields(WorkloadGenConfig)],
                    "workload")
        for key in ("length_scale", "file_scale", "output_scale",
                    "cost_range", "mips_range", "ram_range"):
            if key in wl:
                wl[key] = tuple(wl[key])
        kwargs["workload"] = WorkloadGenConfig(**wl)
    return validate_config(
        DataCenterConfig(hosts=tuple(hosts), vms=tuple(vms), **kwargs))


def _dataclass_dict(obj):
    out = {}
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        if dataclasses.is_dataclass(value):
            out[f.name] = _dataclass_dict(value)
        elif isinstance(value, tuple):
            out[f.name] = list(value)
        else:
            out[f.name] = value
    return out


def config_to_dict(cfg):
    out = _dataclass_dict(cfg)
    out["hosts"] = [_dataclass_dict(h) for h in cfg.hosts]
    out["vms"] = [_dataclass_dict(v) for v in cfg.vms]
    if cfg.workload is None:
        del out["workload"]
    return out


def load_config(path):
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    with fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfig("json", str(exc)) from exc
    return config_from_dict(data)


def save_config(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_digest(cfg):
    """Stable hash of the full configuration, for run provenance."""
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


__all__ = [
    "Activity", "DataCenterConfig", "HostSpec", "HostState",
    "UtilizationSnapshot", "VmSpec", "VmState", "Workload",
    "WorkloadGenConfig", "POLICIES", "config_digest", "config_from_dict",
    "config_to_dict", "default_datacenter", "load_config", "save_config",
    "validate_config",
]
