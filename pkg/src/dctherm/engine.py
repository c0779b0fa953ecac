"""Discrete-event simulation loop.

Each step covers one interval and runs, in order: workload arrivals, task
-> VM mapping, VM placement by the active policy (with migration
accounting), power computation and energy integration, host temperature
update, and task progress / SLA checks. One replicate is one
single-threaded deterministic loop; replicates use seeds derived from the
base seed and are merged in index order, so results depend only on
(config, seed).
"""

import dataclasses
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import energy, scheduler, thermal, utilization
from .errors import DomainError
from .model import HostState, VmState, config_digest, validate_config
from .traceio import generate_workloads

STREAM_ARRIVALS = 0
STREAM_WORKLOAD = 1
STREAM_FANS = 2


def poisson_arrivals(lam, rng):
    """One Poisson draw by CDF inversion (a single uniform per draw).

    Written out explicitly so the draw sequence is pinned by this code
    rather than by the library's sampler internals.
    """
    if lam < 0:
        raise DomainError("lambda must be >= 0")
    if lam == 0:
        return 0
    if lam > 700:
        # exp(-lam) underflows and the inversion walk cannot start
        raise DomainError(f"arrival rate {lam} too large for inversion")
    u = rng.random()
    p = math.exp(-lam)
    cum = p
    k = 0
    while u > cum and p > 0.0:
        k += 1
        p *= lam / k
        cum += p
    return k


def migration_downtime(ram_mb, bandwidth_bps):
    """Seconds a VM grants zero MIPS while its memory image transfers."""
    if bandwidth_bps <= 0:
        raise DomainError("bandwidth must be > 0")
    return ram_mb * 8e6 / bandwidth_bps


def check_sla(task, sla_slack):
    """Violated if the task missed its slack-padded nominal runtime, or
    never finished at all."""
    if task.finish_s is None:
        return True
    deadline = task.arrival_s + task.nominal_runtime_s * (1.0 + sla_slack)
    return task.finish_s > deadline


@dataclass
class SimulationState:
    cfg: object
    seed: int
    clock_s: int = 0
    hosts: list = field(default_factory=list)
    vms: dict = field(default_factory=dict)
    waiting: deque = field(default_factory=deque)
    pending_tasks: list = field(default_factory=list)
    running_tasks: list = field(default_factory=list)
    completed_tasks: list = field(default_factory=list)
    energy_j: float = 0.0
    migrations: int = 0
    sla_violations: int = 0
    tasks_generated: int = 0
    temp_series: dict = field(default_factory=dict)
    per_step_rows: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def __post_init__(self):
        for spec in self.cfg.hosts:
            host = HostState(spec=spec, current_temp_c=spec.thermal.t_initial_c)
            self.hosts.append(host)
            self.temp_series[spec.id] = []
        hosts_by_id = {h.id: h for h in self.hosts}
        for spec in self.cfg.vms:
            vm = VmState(spec=spec)
            self.vms[spec.id] = vm
            if spec.host_id is not None:
                vm.host_id = spec.host_id
                hosts_by_id[spec.host_id].placed_vms.append(spec.id)
            else:
                self.waiting.append(spec.id)
        self.rng_arrivals = np.random.default_rng([self.seed, STREAM_ARRIVALS])
        self.rng_workload = np.random.default_rng([self.seed, STREAM_WORKLOAD])
        self.rng_fans = np.random.default_rng([self.seed, STREAM_FANS])
        self.lambda_per_interval = derive_lambda(self.cfg)
        self.thresholds = thermal.vm_thresholds(self.cfg.hosts[0].thermal
                                                if self.cfg.hosts else
                                                thermal.ThermalParams())
        self.traces = {}
        if self.cfg.trace_dir is not None:
            self.traces = load_trace_assignments(self.cfg.trace_dir,
                                                 [v.id for v in self.cfg.vms])

    @property
    def host_by_id(self):
        return {h.id: h for h in self.hosts}


def load_trace_assignments(trace_dir, vm_ids):
    """Map each VM to one utilization trace file (sorted order, cycled when
    there are fewer files than VMs)."""
    import os

    from .errors import IoError
    from .traceio import load_planetlab_trace

    try:
        names = sorted(os.listdir(trace_dir))
    except OSError as exc:
        raise IoError(f"cannot list trace dir {trace_dir}: {exc}") from exc
    paths = [os.path.join(trace_dir, n) for n in names
             if os.path.isfile(os.path.join(trace_dir, n))]
    if not paths:
        raise IoError(f"trace dir {trace_dir} has no trace files")
    traces = [load_planetlab_trace(p) for p in paths]
    return {vm_id: traces[i % len(traces)] for i, vm_id in enumerate(vm_ids)}


def trace_utilization(trace, step_index):
    """CPU fraction for a step, cycling the trace past its end."""
    return trace.samples[step_index % len(trace.samples)] / 100.0


def derive_lambda(cfg):
    """Arrival rate per interval: explicit rate wins, else a configured
    total count spread evenly over the horizon's steps."""
    wl = cfg.workload
    if wl is None:
        return 0.0
    if wl.lambda_per_interval is not None:
        return wl.lambda_per_interval
    if wl.count is not None:
        return wl.count / cfg.step_count
    return 0.0


def _host_utilization(state, host):
    demand = sum(state.vms[v].util.resource * state.vms[v].spec.mips
                 for v in host.placed_vms)
    return min(1.0, demand / host.spec.total_mips)


def _refresh_vm_views(state):
    """Recompute each VM's utilization snapshot, power share and predicted
    delta-T from its current reservations."""
    from .model import UtilizationSnapshot

    hosts = state.host_by_id
    mode = state.cfg.thermal_mode
    dt = state.cfg.interval_s
    host_util = {h.id: _host_utilization(state, h) for h in state.hosts}
    fallback = min(state.hosts, key=lambda h: (host_util[h.id], h.id)) \
        if state.hosts else None
    def clamp(value, hi):
        return min(hi, max(0.0, value))

    for vm in state.vms.values():
        spec = vm.spec
        if vm.id in state.traces:
            # Trace-driven load: the replayed CPU percent stands in for the
            # reservation-derived demand.
            resource = trace_utilization(state.traces[vm.id],
                                         state.clock_s // dt)
        else:
            resource = clamp(vm.reserved_mips / spec.mips, 1.0)
        vm.util = UtilizationSnapshot(
            resource=resource,
            memory_pct=clamp(100.0 * vm.reserved_ram_mb / spec.ram_mb, 100.0),
            disk_pct=vm.util.disk_pct,
            network_pct=clamp(100.0 * vm.reserved_bw_bps / spec.bandwidth_bps, 100.0),
        )
        host = hosts.get(vm.host_id) if vm.host_id else fallback
        if host is None:
            vm.delta_t_c = 0.0
            vm.e_total_w = 0.0
            continue
        base_u = host_util[host.id]
        # Waiting VMs are assessed at full demand; placed ones at their
        # current reservation level.
        u_share = spec.mips * (vm.util.resource if vm.host_id else 1.0) \
            / host.spec.total_mips
        dyn = host.spec.power.dyn
        base_w = energy.dynamic_power(base_u, dyn)
        with_vm = energy.dynamic_power(min(1.0, base_u + u_share), dyn)
        vm_power = max(0.0, with_vm - base_w)
        vm.e_total_w = vm_power
        vm.delta_t_c = thermal.vm_delta_temperature(
            vm_power, host.dynamic_w, host.spec.thermal, mode,
            dt if mode == thermal.MODE_TIME_DEPENDENT else None)


def _apply_actions(state, actions):
    hosts = state.host_by_id
    for action in actions:
        vm = state.vms[action.vm_id]
        if action.vm_id in state.waiting:
            state.waiting.remove(action.vm_id)
        if action.kind == "none":
            # Re-placement on the same host (after an overheat re-enqueue).
            if action.vm_id not in hosts[action.dst_host].placed_vms:
                hosts[action.dst_host].placed_vms.append(action.vm_id)
            continue
        if action.kind == "migrate":
            src = hosts.get(action.src_host)
            if src is not None and action.vm_id in src.placed_vms:
                src.placed_vms.remove(action.vm_id)
            state.migrations += 1
            downtime = migration_downtime(vm.spec.ram_mb,
                                          hosts[action.dst_host].spec.bandwidth_bps)
            vm.paused_until_s = state.clock_s + downtime
            state.events.append((state.clock_s, "migrate",
                                 f"{vm.id}:{action.src_host}->{action.dst_host}"))
        else:
            state.events.append((state.clock_s, "allocate",
                                 f"{vm.id}->{action.dst_host}"))
        vm.host_id = action.dst_host
        hosts[action.dst_host].placed_vms.append(action.vm_id)


def step(state):
    """Advance the simulation by one interval; returns the events emitted."""
    cfg = state.cfg
    events_before = len(state.events)
    clock = state.clock_s
    interval = cfg.interval_s

    # 1. workload arrivals
    count = poisson_arrivals(state.lambda_per_interval, state.rng_arrivals)
    if count:
        new_tasks = generate_workloads(
            cfg.workload, state.rng_workload, count,
            arrival_s=clock, id_offset=state.tasks_generated)
        state.pending_tasks.extend(new_tasks)
        state.tasks_generated += count
        state.events.append((clock, "arrivals", str(count)))

    # 2. map pending tasks onto VMs with a live placement
    live_ids = {vm_id for host in state.hosts for vm_id in host.placed_vms}
    placed_vms = [vm for vm in state.vms.values() if vm.id in live_ids]
    if state.pending_tasks and placed_vms:
        views = utilization.task_views(state.pending_tasks, placed_vms, interval)
        assignment = utilization.map_workloads(views, placed_vms)
        by_id = {t.id: t for t in state.pending_tasks}
        for task_id, vm_id in assignment.assigned:
            task = by_id.pop(task_id)
            vm = state.vms[vm_id]
            task.assigned_vm = vm_id
            task.start_s = clock
            vm.reserved_mips += task.mips_requested
            vm.reserved_ram_mb += task.ram_mb
            vm.reserved_bw_bps += 8e6 * task.file_size_mb / interval
            state.running_tasks.append(task)
        state.pending_tasks = [by_id[t] for t in by_id]

    # 3. VM placement by the active policy
    _refresh_vm_views(state)
    if cfg.policy in ("thermal", "thermal+utilization"):
        for host in state.hosts:
            if host.current_temp_c > host.spec.thermal.t_over_c and host.placed_vms:
                for vm_id in list(host.placed_vms):
                    host.placed_vms.remove(vm_id)
                    state.waiting.append(vm_id)
                state.events.append((clock, "overheat-evict", host.id))
    if state.waiting:
        snapshot = scheduler.Snapshot(
            hosts=state.hosts, vms=state.vms, waiting=list(state.waiting),
            thresholds=state.thresholds, interval_s=interval)
        actions = scheduler.run_policy(cfg.policy, snapshot)
        _apply_actions(state, actions)
        for vm_id in state.waiting:
            vm = state.vms[vm_id]
            if vm.host_id is not None:
                # Evicted from an overheated host but not re-placed.
                state.events.append((clock, "overheat-unresolved", vm_id))

    # 4. energy + 5. temperature per host
    for host in state.hosts:
        u = _host_utilization(state, host)
        busy = any(state.vms[v].reserved_mips > 0 for v in host.placed_vms)
        active = energy.Activity(processor=bool(host.placed_vms), storage=busy,
                                 memory=busy, network=busy, extra=busy)
        breakdown = energy.host_power(host.spec.power, active,
                                      host.spec.cores, u)
        host.power_w = breakdown.total_w
        host.dynamic_w = energy.dynamic_power(u, host.spec.power.dyn)
        state.energy_j += breakdown.total_w * interval
        tp = host.spec.thermal
        if cfg.thermal_mode == thermal.MODE_TIME_DEPENDENT:
            tp = dataclasses.replace(tp, t_initial_c=host.current_temp_c)
            host.current_temp_c = thermal.cpu_temperature(
                host.dynamic_w, tp, cfg.thermal_mode, interval)
        else:
            host.current_temp_c = thermal.cpu_temperature(
                host.dynamic_w, tp, cfg.thermal_mode)
        state.temp_series[host.id].append(host.current_temp_c)

    # 6. task progress, completions, SLA
    still_running = []
    hosts_by_id = state.host_by_id
    host_demand = {
        h.id: sum(state.vms[v].reserved_mips for v in h.placed_vms)
        for h in state.hosts}
    for task in state.running_tasks:
        vm = state.vms[task.assigned_vm]
        host = hosts_by_id.get(vm.host_id)
        if host is None or vm.id not in host.placed_vms:
            # VM has no live placement this interval; the task stalls.
            still_running.append(task)
            continue
        demand = host_demand[host.id]
        host_share = min(1.0, host.spec.total_mips / demand) if demand else 1.0
        vm_demand = vm.reserved_mips
        vm_share = min(1.0, vm.spec.mips / vm_demand) if vm_demand else 1.0
        granted = task.mips_requested * vm_share * host_share
        usable_s = interval - max(0.0, min(vm.paused_until_s - clock, interval))
        work = granted * usable_s
        if granted > 0 and task.remaining_mi <= work:
            pause = interval - usable_s
            task.finish_s = clock + pause + task.remaining_mi / granted
            task.remaining_mi = 0.0
            vm.reserved_mips -= task.mips_requested
            vm.reserved_ram_mb -= task.ram_mb
            vm.reserved_bw_bps -= 8e6 * task.file_size_mb / interval
            state.completed_tasks.append(task)
            if check_sla(task, cfg.sla_slack):
                state.sla_violations += 1
                state.events.append((clock, "sla-violation", task.id))
        else:
            task.remaining_mi -= work
            still_running.append(task)
    state.running_tasks = still_running

    # 7. advance the clock and record the per-host rows
    state.clock_s += interval
    step_index = state.clock_s // interval
    svr_cum = state.sla_violations / max(1, state.tasks_generated)
    for host in state.hosts:
        state.per_step_rows.append((
            step_index, state.clock_s, host.id, host.current_temp_c,
            host.power_w, state.energy_j, state.migrations, svr_cum))
    return state.events[events_before:]


@dataclass
class SimulationReport:
    seed: int
    config_digest: str
    policy: str
    lambda_per_interval: float
    total_energy_kwh: float
    svr: float
    migrations: int
    sla_violations: int
    tasks_generated: int
    tasks_completed: int
    temp_mean_c: float
    temp_max_c: float
    per_step_rows: list = field(default_factory=list)
    temp_series: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    replicate_rows: list = field(default_factory=list)

    SUMMARY_FIELDS = ("seed", "total_energy_kwh", "svr", "migrations",
                      "sla_violations", "tasks_generated", "tasks_completed",
                      "temp_mean_c", "temp_max_c")

    def summary_row(self):
        return tuple(getattr(self, name) for name in self.SUMMARY_FIELDS)


def run_once(cfg, seed=None):
    """One validated replicate: step the state across the whole horizon."""
    validate_config(cfg)
    state = SimulationState(cfg=cfg, seed=cfg.seed if seed is None else seed)
    for _ in range(cfg.step_count):
        step(state)
    unfinished = len(state.pending_tasks) + len(state.running_tasks)
    violations = state.sla_violations + unfinished
    svr = violations / state.tasks_generated if state.tasks_generated else 0.0
    temps = [t for series in state.temp_series.values() for t in series]
    return SimulationReport(
        seed=state.seed,
        config_digest=config_digest(cfg),
        policy=cfg.policy,
        lambda_per_interval=state.lambda_per_interval,
        total_energy_kwh=state.energy_j / 3.6e6,
        svr=svr,
        migrations=state.migrations,
        sla_violations=violations,
        tasks_generated=state.tasks_generated,
        tasks_completed=len(state.completed_tasks),
        temp_mean_c=sum(temps) / len(temps) if temps else 0.0,
        temp_max_c=max(temps) if temps else 0.0,
        per_step_rows=state.per_step_rows,
        temp_series=state.temp_series,
        events=state.events,
    )


def run(cfg):
    """Run cfg.replicates replicates (seeds seed+0 .. seed+K-1) and return
    the first replicate's report carrying all summary rows plus their mean."""
    validate_config(cfg)
    reports = [run_once(cfg, seed=cfg.seed + i) for i in range(cfg.replicates)]
    first = reports[0]
    rows = [r.summary_row() for r in reports]
    if len(reports) > 1:
        mean = tuple(
            sum(row[i] for row in rows) / len(rows)
            for i in range(len(SimulationReport.SUMMARY_FIELDS)))
        rows.append(mean)
    first.replicate_rows = rows
    return first


def run_replicates(cfg, replicates=10):
    """Replicated batch: rerun with derived seeds, ten times by default."""
    return run(dataclasses.replace(cfg, replicates=replicates))
