"""Per-host power model: a seven-leaf component tree.

All functions return instantaneous watts; the engine integrates
watts x interval into joules. The tree is

    total = computing + cooling
    computing = processor + storage + memory + network + extra

with the processor term summed per core over dynamic, short-circuit,
leakage and idle draws, and the dynamic draw being the average of a
linear (C V^2 f) and a nonlinear (mu1 u + mu2 u^2) model.
"""

from dataclasses import dataclass, field

from .errors import DomainError

# Processor-level nonlinear coefficients: 120 + 60 = 180 W at full
# utilization, inside the 130-240 W band of the reference parameter set.
DEFAULT_MU1 = 120.0
DEFAULT_MU2 = 60.0


@dataclass(frozen=True)
class DynamicEnergyParams:
    """Coefficients of the dynamic-draw model (linear and nonlinear halves)."""

    capacitance_f: float = 1e-9
    voltage_v: float = 1.2
    frequency_hz: float = 2.0e9
    mu1: float = DEFAULT_MU1
    mu2: float = DEFAULT_MU2

    def __post_init__(self):
        for name in ("capacitance_f", "voltage_v", "frequency_hz", "mu1", "mu2"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")


@dataclass(frozen=True)
class StoragePower:
    read_w: float = 15.0
    write_w: float = 15.0
    idle_w: float = 5.0


@dataclass(frozen=True)
class MemoryPower:
    sram_w: float = 3.0
    dram_w: float = 7.0


@dataclass(frozen=True)
class NetworkPower:
    router_w: float = 30.0
    gateway_w: float = 20.0
    lan_card_w: float = 10.0
    switch_w: float = 10.0


@dataclass(frozen=True)
class ExtraPower:
    motherboard_w: float = 1.6
    connector_w: float = 0.1
    ports: int = 4


@dataclass(frozen=True)
class CoolingPower:
    ac_w: float = 200.0
    compressor_w: float = 150.0
    fan_w: float = 50.0


@dataclass(frozen=True)
class PowerParams:
    """Full parameter set for one host's power tree.

    Per-core static draws are watts per core; the dynamic coefficients are
    processor-level (the engine splits the dynamic draw across cores).
    """

    short_circuit_w: float = 2.0
    leakage_w: float = 4.0
    idle_w: float = 8.0
    storage: StoragePower = field(default_factory=StoragePower)
    memory: MemoryPower = field(default_factory=MemoryPower)
    network: NetworkPower = field(default_factory=NetworkPower)
    extra: ExtraPower = field(default_factory=ExtraPower)
    cooling: CoolingPower = field(default_factory=CoolingPower)
    dyn: DynamicEnergyParams = field(default_factory=DynamicEnergyParams)


@dataclass(frozen=True)
class Activity:
    """Which subsystems are actively working this interval.

    An active subsystem contributes every printed term of its equation
    (idle draw included); an inactive one contributes its idle draw only,
    or nothing if the subsystem has no idle term.
    """

    processor: bool = True
    storage: bool = True
    memory: bool = True
    network: bool = True
    extra: bool = True


@dataclass(frozen=True)
class ComputingBreakdown:
    processor_w: float = 0.0
    storage_w: float = 0.0
    memory_w: float = 0.0
    network_w: float = 0.0
    extra_w: float = 0.0

    @property
    def watts(self):
        return (self.processor_w + self.storage_w + self.memory_w
                + self.network_w + self.extra_w)


@dataclass(frozen=True)
class EnergyBreakdown:
    """One host's instantaneous power, per subsystem and in total."""

    processor_w: float
    storage_w: float
    memory_w: float
    network_w: float
    extra_w: float
    computing_w: float
    cooling_w: float
    total_w: float


def dynamic_power(u, p):
    """Dynamic processor draw at utilization ``u`` in [0, 1].

    Average of the linear model C V^2 f and the nonlinear model
    mu1 u + mu2 u^2.
    """
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"utilization {u} outside [0, 1]")
    linear = p.capacitance_f * p.voltage_v ** 2 * p.frequency_hz
    nonlinear = p.mu1 * u + p.mu2 * u * u
    return (linear + nonlinear) / 2.0


def processor_power(cores):
    """Sum of (dynamic, short-circuit, leakage, idle) draws over all cores."""
    return float(sum(sum(core) for core in cores))


def computing_power(p, active=Activity(), cores=1, cpu_util=0.0):
    """Compose the computing half of the tree for one host.

    Args:
        p: PowerParams for the host.
        active: per-subsystem activity flags.
        cores: number of processor cores.
        cpu_util: host CPU utilization in [0, 1], drives the dynamic term.

    Returns:
        (watts, ComputingBreakdown) with the five subsystem leaves.
    """
    if active.processor:
        dyn_per_core = dynamic_power(cpu_util, p.dyn) / cores
        per_core = (dyn_per_core, p.short_circuit_w, p.leakage_w, p.idle_w)
    else:
        per_core = (0.0, 0.0, 0.0, p.idle_w)
    proc = processor_power([per_core] * cores)

    s = p.storage
    storage = (s.read_w + s.write_w + s.idle_w) if active.storage else s.idle_w
    memory = (p.memory.sram_w + p.memory.dram_w) if active.memory else 0.0
    n = p.network
    network = (n.router_w + n.gateway_w + n.lan_card_w + n.switch_w) if active.network else 0.0
    e = p.extra
    extra = (e.motherboard_w + e.connector_w * e.ports) if active.extra else 0.0

    breakdown = ComputingBreakdown(proc, storage, memory, network, extra)
    return breakdown.watts, breakdown


def cooling_power(ac_w, compressor_w, fan_w):
    """Cooling draw: air conditioning + compressor + fans."""
    for name, value in (("ac_w", ac_w), ("compressor_w", compressor_w), ("fan_w", fan_w)):
        if value < 0:
            raise DomainError(f"{name} must be >= 0")
    return ac_w + compressor_w + fan_w


def total_power(computing, cooling_w):
    """Assemble the full EnergyBreakdown.

    ``computing`` is either a ComputingBreakdown or a bare wattage; a bare
    value is recorded under the processor slot so the additivity invariant
    stays exact.
    """
    if not isinstance(computing, ComputingBreakdown):
        if computing < 0:
            raise DomainError("computing_w must be >= 0")
        computing = ComputingBreakdown(processor_w=float(computing))
    if cooling_w < 0:
        raise DomainError("cooling_w must be >= 0")
    watts = computing.watts
    return EnergyBreakdown(
        processor_w=computing.processor_w,
        storage_w=computing.storage_w,
        memory_w=computing.memory_w,
        network_w=computing.network_w,
        extra_w=computing.extra_w,
        computing_w=watts,
        cooling_w=cooling_w,
        total_w=watts + cooling_w,
    )


def host_power(p, active=Activity(), cores=1, cpu_util=0.0):
    """One-call composition of the whole tree for a host."""
    _, breakdown = computing_power(p, active, cores, cpu_util)
    cool = cooling_power(p.cooling.ac_w, p.cooling.compressor_w, p.cooling.fan_w)
    return total_power(breakdown, cool)
