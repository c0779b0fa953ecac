"""Utilization metrics and the utilization-driven task->VM mapping.

The four metrics keep the units their formulas emit: resource utilization
is a dimensionless sum/fraction, the other three are percents. The mapper
is the greedy two-sort algorithm: tasks ascending by estimated demand, VMs
descending by utilization (energy first), each task to the first VM that
still fits it.
"""

import logging
from dataclasses import dataclass, field

from .errors import DomainError, EmptyLedger

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResourceLedger:
    """Per-resource (busy seconds, uptime seconds) pairs."""

    entries: tuple

    def __post_init__(self):
        for i, (busy, uptime) in enumerate(self.entries):
            if uptime <= 0:
                raise DomainError(f"ledger[{i}]: uptime must be > 0")
            if not 0 <= busy <= uptime:
                raise DomainError(f"ledger[{i}]: busy must be in [0, uptime]")


@dataclass
class Assignment:
    assigned: list = field(default_factory=list)    # (workload_id, vm_id)
    unassigned: list = field(default_factory=list)  # workload_id


def resource_utilization(ledger):
    """Sum of busy/uptime ratios over all resources, plus its mean.

    The raw sum is the literal formula (it can exceed 1 with several
    resources); the mean is the raw sum / n and always lies in [0, 1].
    """
    if not ledger.entries:
        raise EmptyLedger("resource ledger has no entries")
    raw = sum(busy / uptime for busy, uptime in ledger.entries)
    return raw, raw / len(ledger.entries)


def memory_utilization(total_mb, free_mb, buffers_mb, cache_mb):
    """Percent of physical memory that is neither free nor reclaimable."""
    if total_mb <= 0:
        raise DomainError("total_mb must be > 0")
    reclaimable = free_mb + buffers_mb + cache_mb
    if reclaimable > total_mb:
        raise DomainError("free + buffers + cache exceeds total memory")
    return 100.0 * (total_mb - reclaimable) / total_mb


def disk_utilization(used, size):
    """Percent of disk used."""
    if size <= 0:
        raise DomainError("size must be > 0")
    if used > size:
        raise DomainError("used exceeds size")
    return 100.0 * used / size


def disk_utilization_au(alloc_units, used_units, size_units):
    """Allocation-unit form; the unit size cancels, so this equals
    disk_utilization(used_units, size_units)."""
    if alloc_units <= 0:
        raise DomainError("alloc_units must be > 0")
    return disk_utilization(alloc_units * used_units, alloc_units * size_units)


def network_utilization(data_bits, bandwidth_bps, interval_s):
    """Percent of link capacity used over an interval, clamped at 100."""
    if bandwidth_bps <= 0 or interval_s <= 0:
        raise DomainError("bandwidth and interval must be > 0")
    pct = 100.0 * data_bits / (bandwidth_bps * interval_s)
    if pct > 100.0:
        log.warning("network utilization %.2f%% exceeds capacity, clamped", pct)
        return 100.0
    return pct


def _snapshot_key(item, decreasing):
    u = item.util
    key = (u.resource, u.memory_pct, u.disk_pct, u.network_pct)
    return tuple(-v for v in key) if decreasing else key


def utilization_sort(items, is_vm=False, decreasing=False):
    """Order VMs or tasks for the mapper.

    VMs are first ordered by energy draw ascending, then (stably) by the
    utilization chain; tasks skip the energy pass. The chain is resource
    utilization with memory, disk, network breaking ties, all in the
    direction of ``decreasing``. Items need a ``.util`` snapshot, VMs also
    ``.e_total_w``.
    """
    out = list(items)
    if is_vm:
        out.sort(key=lambda v: v.e_total_w)
    out.sort(key=lambda it: _snapshot_key(it, decreasing))
    return out


@dataclass(frozen=True)
class TaskView:
    """Sortable wrapper pairing a workload with its estimated demand."""

    id: str
    mips_requested: float
    ram_mb: float
    bandwidth_bps_required: float
    util: object


def task_views(workloads, vms, interval_s=300):
    """Estimate each task's utilization demand against the VM fleet.

    Resource demand is mips_requested over the mean VM MIPS; memory, disk
    and network percents are scaled the same way from the task's RAM, file
    and transfer footprints. Values are clamped to their field ranges so
    oversized tasks still sort (they just saturate the key).
    """
    from .model import UtilizationSnapshot

    n = max(1, len(vms))
    mean_mips = sum(vm.spec.mips for vm in vms) / n if vms else 1.0
    mean_ram = sum(vm.spec.ram_mb for vm in vms) / n if vms else 1.0
    mean_bw = sum(vm.spec.bandwidth_bps for vm in vms) / n if vms else 1.0
    views = []
    for w in workloads:
        bw_need = 8e6 * w.file_size_mb / interval_s
        util = UtilizationSnapshot(
            resource=min(1.0, w.mips_requested / mean_mips),
            memory_pct=min(100.0, 100.0 * w.ram_mb / mean_ram),
            disk_pct=min(100.0, 100.0 * (w.file_size_mb + w.output_size_mb)
                         / (10 * mean_ram)),
            network_pct=min(100.0, 100.0 * bw_need / mean_bw),
        )
        views.append(TaskView(w.id, w.mips_requested, w.ram_mb, bw_need, util))
    return views


def capacity_suitability(task, residual):
    """Default "task fits VM" rule: every residual covers the demand."""
    mips, ram, bw = residual
    return (task.mips_requested <= mips
            and task.ram_mb <= ram
            and getattr(task, "bandwidth_bps_required", 0.0) <= bw)


def map_workloads(tasks, vms, suitability=None):
    """Greedy mapping of tasks onto VMs.

    Tasks are walked in ascending estimated-demand order, VMs in descending
    utilization order; each task lands on the first VM whose residual
    capacity covers it and the residual is debited immediately. Tasks that
    fit nowhere end up in ``unassigned``. Inputs are not mutated.
    """
    if suitability is None:
        suitability = capacity_suitability
    ordered_tasks = utilization_sort(tasks, is_vm=False, decreasing=False)
    ordered_vms = utilization_sort(vms, is_vm=True, decreasing=True)
    residual = {
        vm.id: [vm.spec.mips - vm.reserved_mips,
                vm.spec.ram_mb - vm.reserved_ram_mb,
                vm.spec.bandwidth_bps - vm.reserved_bw_bps]
        for vm in ordered_vms
    }
    result = Assignment()
    for task in ordered_tasks:
        for vm in ordered_vms:
            if suitability(task, residual[vm.id]):
                residual[vm.id][0] -= task.mips_requested
                residual[vm.id][1] -= task.ram_mb
                residual[vm.id][2] -= getattr(task, "bandwidth_bps_required", 0.0)
                result.assigned.append((task.id, vm.id))
                break
        else:
            result.unassigned.append(task.id)
    return result
