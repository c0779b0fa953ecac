"""Queue-based thermal-aware VM placement plus the pluggable policy registry.

The thermal scheduler keeps three FIFO class queues (hot / warm / cold by
predicted temperature change) and walks hosts from the largest thermal
headroom down. A host hotter than theta_ch pulls from the cold queue, one
colder than theta_cl pulls from the hot queue, and a mid-band host pulls
warm first; the fallback chain only advances past *empty* queues (the
branch structure of the selection rules). Within the chosen queue
the first VM (FIFO) that fits the host's residual capacity is taken; if
none fits, the host receives nothing that pass.

Policies are objects with a ``name`` and ``schedule(snapshot) -> actions``;
four built-ins are registered at import time: "fcfs", "utilization",
"thermal" and "thermal+utilization".
"""

from collections import deque
from dataclasses import dataclass, field

from .errors import DuplicatePolicy, InvalidConfig, UnknownPolicy
from .thermal import ThermalClass, classify_vm


@dataclass
class QueueSet:
    """The three class queues plus the waiting queue, all FIFO."""

    q_hot: deque = field(default_factory=deque)
    q_warm: deque = field(default_factory=deque)
    q_cold: deque = field(default_factory=deque)
    waiting: deque = field(default_factory=deque)

    def queue(self, thermal_class):
        return {ThermalClass.HOT: self.q_hot,
                ThermalClass.WARM: self.q_warm,
                ThermalClass.COLD: self.q_cold}[thermal_class]

    @property
    def classified_empty(self):
        return not (self.q_hot or self.q_warm or self.q_cold)


@dataclass(frozen=True)
class PlacementAction:
    kind: str               # "allocate" | "migrate" | "none"
    vm_id: str
    dst_host: str
    src_host: str = None

    def __post_init__(self):
        if self.kind not in ("allocate", "migrate", "none"):
            raise InvalidConfig("kind", f"unknown action kind {self.kind!r}")
        if self.kind == "migrate" and self.src_host == self.dst_host:
            raise InvalidConfig("dst_host", "migration needs src != dst")


@dataclass
class Snapshot:
    """Read-only view of the datacenter a policy schedules against."""

    hosts: list             # HostState, engine order
    vms: dict               # vm_id -> VmState
    waiting: list           # vm_ids awaiting (re)placement, FIFO
    thresholds: object      # VmThresholds for classification
    interval_s: int = 300

    def residual(self, host):
        placed = [self.vms[v] for v in host.placed_vms]
        mips = host.spec.total_mips - sum(v.spec.mips for v in placed)
        ram = host.spec.ram_mb - sum(v.spec.ram_mb for v in placed)
        return mips, ram


def classify_and_enqueue(vms, th, host_lookup=None):
    """Distribute VMs over the three class queues, preserving FIFO order.

    Every VM must carry a predicted temperature change (delta_t_c); the
    host_lookup hook lets callers fill it lazily for VMs that miss one.
    """
    qs = QueueSet()
    for vm in vms:
        delta = vm.delta_t_c
        if delta is None and host_lookup is not None:
            delta = host_lookup(vm)
            vm.delta_t_c = delta
        if delta is None:
            raise InvalidConfig("delta_t_c", f"vm {vm.id} has no predicted delta-T")
        vm.thermal_class = classify_vm(delta, th)
        qs.queue(vm.thermal_class).append(vm.id)
    return qs


def queue_preference(host_temp_c, tp):
    """Queue order a host draws from, by its current temperature."""
    if host_temp_c > tp.theta_ch_c:
        return (ThermalClass.COLD, ThermalClass.WARM, ThermalClass.HOT)
    if host_temp_c < tp.theta_cl_c:
        return (ThermalClass.HOT, ThermalClass.WARM, ThermalClass.COLD)
    midpoint = (tp.theta_cl_c + tp.theta_ch_c) / 2.0
    if host_temp_c >= midpoint:
        return (ThermalClass.WARM, ThermalClass.COLD, ThermalClass.HOT)
    return (ThermalClass.WARM, ThermalClass.HOT, ThermalClass.COLD)


def select_vm_for_host(host_temp_c, tp, qs):
    """Dequeue the head of the first non-empty queue in preference order."""
    for thermal_class in queue_preference(host_temp_c, tp):
        q = qs.queue(thermal_class)
        if q:
            return q.popleft()
    return None


def schedule_round(snapshot, qs, tie_break="id"):
    """One placement round over the classified queues.

    Hosts are visited from the largest headroom (T_over - temperature)
    down; each host takes at most one VM per pass and a VM's predicted
    delta-T is added to the host's effective temperature so later passes
    see the projected state. Rounds end when the queues are empty or a full
    pass places nothing. tie_break="utilization" prefers the less utilized
    host on equal headroom.
    """
    eff_temp = {h.id: h.current_temp_c for h in snapshot.hosts}
    residual = {h.id: list(snapshot.residual(h)) for h in snapshot.hosts}

    def host_key(host):
        headroom = host.spec.thermal.t_over_c - eff_temp[host.id]
        if tie_break == "utilization":
            used = host.spec.total_mips - residual[host.id][0]
            return (-headroom, used / host.spec.total_mips, host.id)
        return (-headroom, host.id)

    actions = []
    while not qs.classified_empty:
        placed_this_pass = False
        for host in sorted(snapshot.hosts, key=host_key):
            for thermal_class in queue_preference(eff_temp[host.id],
                                                  host.spec.thermal):
                q = qs.queue(thermal_class)
                if not q:
                    continue
                chosen = None
                for vm_id in q:
                    vm = snapshot.vms[vm_id]
                    if (vm.spec.mips <= residual[host.id][0]
                            and vm.spec.ram_mb <= residual[host.id][1]):
                        chosen = vm
                        break
                if chosen is not None:
                    q.remove(chosen.id)
                    residual[host.id][0] -= chosen.spec.mips
                    residual[host.id][1] -= chosen.spec.ram_mb
                    eff_temp[host.id] += chosen.delta_t_c or 0.0
                    if chosen.host_id is None:
                        kind = "allocate"
                    elif chosen.host_id != host.id:
                        kind = "migrate"
                    else:
                        kind = "none"
                    actions.append(PlacementAction(
                        kind=kind, vm_id=chosen.id, dst_host=host.id,
                        src_host=chosen.host_id))
                    placed_this_pass = True
                break  # only the first non-empty queue is considered
            if qs.classified_empty:
                break
        if not placed_this_pass:
            break
    return actions


# ---------------------------------------------------------------------------
# Policy registry.
# ---------------------------------------------------------------------------

class Policy:
    """Placement policy: maps a datacenter snapshot to placement actions."""

    name = "abstract"

    def schedule(self, snapshot):
        raise NotImplementedError


_REGISTRY = {}


def register_policy(name, policy):
    if name in _REGISTRY:
        raise DuplicatePolicy(f"policy {name!r} already registered")
    _REGISTRY[name] = policy


def get_policy(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownPolicy(f"no policy named {name!r}; "
                            f"known: {sorted(_REGISTRY)}") from None


def run_policy(name, snapshot):
    return get_policy(name).schedule(snapshot)


def registered_policies():
    return tuple(sorted(_REGISTRY))


def _first_fit(snapshot, host_order):
    """Place waiting VMs (FIFO) on the first host in host_order that fits."""
    residual = {h.id: list(snapshot.residual(h)) for h in snapshot.hosts}
    actions = []
    for vm_id in snapshot.waiting:
        vm = snapshot.vms[vm_id]
        for host in host_order:
            if (vm.spec.mips <= residual[host.id][0]
                    and vm.spec.ram_mb <= residual[host.id][1]):
                residual[host.id][0] -= vm.spec.mips
                residual[host.id][1] -= vm.spec.ram_mb
                if vm.host_id is None:
                    kind = "allocate"
                elif vm.host_id != host.id:
                    kind = "migrate"
                else:
                    kind = "none"
                actions.append(PlacementAction(
                    kind=kind, vm_id=vm.id, dst_host=host.id,
                    src_host=vm.host_id))
                break
    return actions


class FcfsPolicy(Policy):
    """First come, first served: waiting order x host-id order."""

    name = "fcfs"

    def schedule(self, snapshot):
        return _first_fit(snapshot, sorted(snapshot.hosts, key=lambda h: h.id))


class UtilizationPolicy(Policy):
    """Consolidating first-fit: most-utilized host with room first."""

    name = "utilization"

    def schedule(self, snapshot):
        def used_fraction(host):
            mips, _ = snapshot.residual(host)
            return 1.0 - mips / host.spec.total_mips

        order = sorted(snapshot.hosts, key=lambda h: (-used_fraction(h), h.id))
        return _first_fit(snapshot, order)


class ThermalPolicy(Policy):
    """The queue-based thermal placement round."""

    name = "thermal"
    tie_break = "id"

    def schedule(self, snapshot):
        waiting_vms = [snapshot.vms[v] for v in snapshot.waiting]
        qs = classify_and_enqueue(waiting_vms, snapshot.thresholds)
        return schedule_round(snapshot, qs, tie_break=self.tie_break)


class ThermalUtilizationPolicy(ThermalPolicy):
    """Thermal rounds with utilization breaking headroom ties."""

    name = "thermal+utilization"
    tie_break = "utilization"


register_policy("fcfs", FcfsPolicy())
register_policy("utilization", UtilizationPolicy())
register_policy("thermal", ThermalPolicy())
register_policy("thermal+utilization", ThermalUtilizationPolicy())
