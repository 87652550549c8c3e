"""Scenario simulation engine.

Steps the electrical model, charge controller and ageing model over an
input profile until the battery reaches end of life or the horizon
expires.  One pass produces lifetime, per-mechanism capacity-loss
trajectories, operating histograms and stress factors; a paired run of
two controller policies over the same inputs produces a comparison.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .battery import (
    SOC_CAP,
    SOC_FLOOR,
    BatteryParams,
    battery_ocv,
    gassing_current,
    hold_voltage_current,
    invert_battery_ocv,
    step_soc,
    terminal_voltage,
)
from .control import (
    ControllerState,
    ControlParams,
    Phase,
    Policy,
    recharge_interval,
    select_limits,
    tscc_step,
    update_load_disconnect,
)
from .degradation import (
    DAYS_PER_YEAR,
    Datasheet,
    DegradationModel,
    DegradationParams,
    DegradationState,
)
from .profiles import SECONDS_PER_DAY, StressAccumulator, TimeSeries, TraceRecord


class EngineError(RuntimeError):
    """Simulation could not run with the given scenario."""


# Histogram layout: fixed bins so runs are comparable.
SOC_BIN_WIDTH = 0.05
N_SOC_BINS = 20
VOLTAGE_BIN_LOW = 10.0
VOLTAGE_BIN_WIDTH = 0.1
N_VOLTAGE_BINS = 56  # 10.0 .. 15.6 V, outliers land in the edge bins


@dataclass(frozen=True)
class Scenario:
    """Everything one simulation run needs."""

    name: str
    profile: TimeSeries
    control: ControlParams = field(default_factory=ControlParams)
    battery: BatteryParams = field(default_factory=BatteryParams)
    degradation: DegradationParams = field(default_factory=DegradationParams)
    datasheet: Datasheet = field(default_factory=Datasheet)
    dt_s: float = 900.0
    max_years: float = 15.0
    initial_soc: float = 0.9
    converter_efficiency: float = 0.95
    record_trace: bool = False

    def __post_init__(self) -> None:
        if self.dt_s <= 0:
            raise EngineError("dt_s must be positive")
        steps_per_day = SECONDS_PER_DAY / self.dt_s
        if abs(steps_per_day - round(steps_per_day)) > 1e-9:
            raise EngineError("dt_s must divide a day evenly")
        if not 0.0 <= self.initial_soc <= 1.0:
            raise EngineError("initial_soc must lie in [0, 1]")
        if not 0.0 < self.converter_efficiency <= 1.0:
            raise EngineError("converter_efficiency must lie in (0, 1]")
        if self.max_years <= 0:
            raise EngineError("max_years must be positive")


@dataclass(frozen=True)
class DayRecord:
    """State at the end of one simulated day."""

    day: int
    c_corr_ah: float
    c_deg_ah: float
    c_total_ah: float
    soh_pct: float
    min_soc: float
    full_charges: int


@dataclass
class EnergyAudit:
    """Closure check between coulomb counting and SOC bookkeeping.

    soc_end - soc_start must equal integral plus the explicit jump
    terms; anything else is a bookkeeping bug.
    """

    soc_start: float = 0.0
    soc_end: float = 0.0
    integral: float = 0.0  # sum of (I - I_gas) dt / capacity
    correction_jumps: float = 0.0  # rest-voltage SOC corrections
    full_reset_jumps: float = 0.0  # SOC snapped to 1.0 on full recharge
    clamp_jumps: float = 0.0  # SOC clipped at the [0, 1] bounds

    def residual(self) -> float:
        explained = (
            self.integral
            + self.correction_jumps
            + self.full_reset_jumps
            + self.clamp_jumps
        )
        return (self.soc_end - self.soc_start) - explained


@dataclass
class SimResult:
    name: str
    policy: str
    lifetime_years: float
    lifetime_days: float
    censored: bool  # horizon reached before end of life
    capacity_ah: float
    eol_threshold_ah: float
    c_corr_ah: float
    c_deg_ah: float
    c_total_ah: float
    soh_end_pct: float
    corrosion_share_pct: float
    full_equivalent_cycles: float
    min_soc: float
    full_charge_events: int
    full_recharge_day_fraction: float
    disconnect_events: int
    hours_disconnected: float
    load_energy_lost_wh: float
    soc_clamp_events: int
    rest_correction_events: int
    ks_clamp_events: int
    audit: EnergyAudit
    trajectory: list[DayRecord]
    soc_hist_h: list[float]
    voltage_hist_h: list[float]
    stress: "object"  # StressFactors
    runtime_s: float
    trace: list[TraceRecord] | None = None

    def soh_at_day(self, day: int) -> float:
        """SOH at the end of a given day, from the daily trajectory."""
        if not self.trajectory:
            raise EngineError("empty trajectory")
        idx = min(max(day - 1, 0), len(self.trajectory) - 1)
        return self.trajectory[idx].soh_pct

    def summary(self) -> dict:
        return {
            "name": self.name,
            "policy": self.policy,
            "lifetime_years": round(self.lifetime_years, 3),
            "censored": self.censored,
            "soh_end_pct": round(self.soh_end_pct, 2),
            "c_corr_ah": round(self.c_corr_ah, 4),
            "c_deg_ah": round(self.c_deg_ah, 4),
            "corrosion_share_pct": round(self.corrosion_share_pct, 1),
            "full_equivalent_cycles": round(self.full_equivalent_cycles, 1),
            "min_soc": round(self.min_soc, 3),
            "full_recharge_day_fraction": round(self.full_recharge_day_fraction, 3),
            "disconnect_events": self.disconnect_events,
        }


def run_scenario(scenario: Scenario) -> SimResult:
    """Simulate one scenario to end of life or the horizon."""
    started = time.perf_counter()
    battery = scenario.battery
    profile = scenario.profile
    model = DegradationModel(
        battery=battery,
        params=scenario.degradation,
        datasheet=scenario.datasheet,
    ).calibrated()
    deg = DegradationState(min_soc_since_full=scenario.initial_soc)
    ctrl = ControllerState()
    control = scenario.control
    adaptive = control.policy is Policy.ADAPTIVE

    dt_s = scenario.dt_s
    dt_h = dt_s / 3600.0
    steps_per_day = int(round(SECONDS_PER_DAY / dt_s))
    max_steps = int(round(scenario.max_years * DAYS_PER_YEAR * steps_per_day))
    n_profile = len(profile)
    if profile.dt_s != dt_s:
        raise EngineError(
            f"profile dt {profile.dt_s}s does not match scenario dt {dt_s}s"
        )

    capacity = battery.capacity_ah
    eff = scenario.converter_efficiency
    eol_ah = model.eol_threshold_ah()
    taper_a = control.taper_current_a(capacity)
    soc_to_ah = 1.0 / (capacity * 3600.0)

    soc = scenario.initial_soc
    v_prev = battery_ocv(max(min(soc, SOC_CAP), SOC_FLOOR), battery)
    audit = EnergyAudit(soc_start=soc)

    soc_hist = [0.0] * N_SOC_BINS
    v_hist = [0.0] * N_VOLTAGE_BINS
    stress = StressAccumulator(capacity, dt_h)
    trace: list[TraceRecord] | None = [] if scenario.record_trace else None
    trajectory: list[DayRecord] = []

    min_soc_run = soc
    min_soc_day = soc
    day_full_events = 0
    full_days = 0
    full_events = 0
    disconnect_events = 0
    hours_disconnected = 0.0
    load_lost_wh = 0.0
    clamp_events = 0
    correction_events = 0
    last_full_event_day = -1
    day_start_c_corr = 0.0
    day_start_total = 0.0
    lifetime_steps = max_steps
    censored = True

    for i in range(max_steps):
        day = i // steps_per_day
        if i > 0 and i % steps_per_day == 0:
            # midnight: close out yesterday, refresh the adaptive target
            total = deg.total_loss()
            trajectory.append(
                DayRecord(
                    day=day,
                    c_corr_ah=deg.c_corr,
                    c_deg_ah=deg.c_deg,
                    c_total_ah=total,
                    soh_pct=100.0 * (capacity - total) / capacity,
                    min_soc=min_soc_day,
                    full_charges=day_full_events,
                )
            )
            if day_full_events > 0:
                full_days += 1
            min_soc_day = soc
            day_full_events = 0
            if adaptive:
                interval = recharge_interval(
                    deg.c_corr - day_start_c_corr, total - day_start_total
                )
                if interval is not None:
                    ctrl.interval_days = interval
                ctrl.days_since_full_recharge = day - max(last_full_event_day, 0)
                if last_full_event_day < 0:
                    ctrl.days_since_full_recharge = day + 1
            day_start_c_corr = deg.c_corr
            day_start_total = total

        idx = i % n_profile
        load_w = profile.load_w[idx]
        solar_w = profile.solar_w[idx]
        temp_c = profile.temp_c[idx]
        temp_k = temp_c + 273.15

        disconnected, _ = update_load_disconnect(ctrl, soc, control)
        if disconnected:
            disconnect_events += 1
        if ctrl.load_disconnected:
            hours_disconnected += dt_h
            load_lost_wh += load_w * dt_h
            load_a = 0.0
        else:
            load_a = load_w / v_prev
        avail_a = solar_w * eff / v_prev
        net_a = avail_a - load_a

        v_limit, v_float, _ = select_limits(ctrl, control, temp_c)
        applied, events = tscc_step(
            ctrl,
            soc,
            deg.total_loss(),
            avail_a,
            load_a,
            v_limit,
            v_float,
            battery,
            taper_a,
        )

        full_event = False
        if events.float_entered:
            if events.full_charge:
                # full recharge declared: trust the controller and snap
                # the coulomb counter to full
                audit.full_reset_jumps += 1.0 - soc
                soc = 1.0
                deg.register_full_charge()
                full_event = True
                full_events += 1
                day_full_events += 1
                last_full_event_day = day
                ctrl.days_since_full_recharge = 0
            # entering float collapses the current to the float hold level
            hold = hold_voltage_current(
                max(min(soc, SOC_CAP), SOC_FLOOR), v_float, battery, deg.total_loss()
            )
            applied = min(net_a, max(hold, 0.0))

        soc_v = max(min(soc, SOC_CAP), SOC_FLOOR)
        voltage = terminal_voltage(soc_v, applied, battery, deg.total_loss())

        # rest correction: only when the controller is not holding a
        # voltage, otherwise small hold currents look like rest while
        # the terminal is still polarized
        if abs(applied) < battery.rest_current_a and ctrl.phase is Phase.BULK:
            corrected = invert_battery_ocv(voltage, battery, seed=soc)[0]
            jump = corrected - soc
            if abs(jump) > 1e-9:
                correction_events += 1
            audit.correction_jumps += jump
            soc = corrected

        i_gas = gassing_current(voltage, temp_k, battery.gassing)
        audit.integral += (applied - i_gas) * dt_s * soc_to_ah
        new_soc, clamped = step_soc(soc, applied, i_gas, dt_s, battery)
        if clamped:
            clamp_events += 1
            audit.clamp_jumps += new_soc - (
                soc + (applied - i_gas) * dt_s * soc_to_ah
            )

        discharge_a = -applied if applied < 0.0 else 0.0
        model.step(deg, soc, voltage, temp_k, discharge_a, dt_h)
        soc = new_soc

        min_soc_run = min(min_soc_run, soc)
        min_soc_day = min(min_soc_day, soc)
        soc_hist[min(int(soc_v / SOC_BIN_WIDTH), N_SOC_BINS - 1)] += dt_h
        vbin = int((voltage - VOLTAGE_BIN_LOW) / VOLTAGE_BIN_WIDTH)
        v_hist[min(max(vbin, 0), N_VOLTAGE_BINS - 1)] += dt_h
        floating = ctrl.phase.name == "FLOAT"
        stress.add(applied, soc, full_event, floating)
        if trace is not None:
            trace.append(
                TraceRecord(
                    t_h=i * dt_h,
                    current_a=applied,
                    soc=soc,
                    voltage=voltage,
                    full_charge=full_event,
                    floating=floating,
                )
            )
        v_prev = voltage

        if deg.total_loss() >= eol_ah:
            lifetime_steps = i + 1
            censored = False
            break

    # close out the final (possibly partial) day
    total = deg.total_loss()
    trajectory.append(
        DayRecord(
            day=lifetime_steps // steps_per_day
            + (1 if lifetime_steps % steps_per_day else 0),
            c_corr_ah=deg.c_corr,
            c_deg_ah=deg.c_deg,
            c_total_ah=total,
            soh_pct=100.0 * (capacity - total) / capacity,
            min_soc=min_soc_day,
            full_charges=day_full_events,
        )
    )
    if day_full_events > 0:
        full_days += 1

    audit.soc_end = soc
    lifetime_days = lifetime_steps * dt_s / SECONDS_PER_DAY
    stress_result = stress.result()
    whole_days = max(int(math.ceil(lifetime_days)), 1)
    return SimResult(
        name=scenario.name,
        policy=control.policy.value,
        lifetime_years=lifetime_days / DAYS_PER_YEAR,
        lifetime_days=lifetime_days,
        censored=censored,
        capacity_ah=capacity,
        eol_threshold_ah=eol_ah,
        c_corr_ah=deg.c_corr,
        c_deg_ah=deg.c_deg,
        c_total_ah=total,
        soh_end_pct=100.0 * (capacity - total) / capacity,
        corrosion_share_pct=100.0 * deg.c_corr / total if total > 0 else 0.0,
        full_equivalent_cycles=stress_result.full_equivalent_cycles,
        min_soc=min_soc_run,
        full_charge_events=full_events,
        full_recharge_day_fraction=full_days / whole_days,
        disconnect_events=disconnect_events,
        hours_disconnected=hours_disconnected,
        load_energy_lost_wh=load_lost_wh,
        soc_clamp_events=clamp_events,
        rest_correction_events=correction_events,
        ks_clamp_events=deg.ks_clamp_events,
        audit=audit,
        trajectory=trajectory,
        soc_hist_h=soc_hist,
        voltage_hist_h=v_hist,
        stress=stress_result,
        runtime_s=time.perf_counter() - started,
        trace=trace,
    )


@dataclass(frozen=True)
class ComparisonResult:
    """Paired-run comparison of two controller policies."""

    base: SimResult
    alt: SimResult
    lifetime_ratio: float
    corrosion_reduction_pct: float  # at the runs' respective ends of life
    corrosion_reduction_at_base_eol_pct: float
    active_mass_loss_ratio: float  # alt over base at respective ends of life
    active_mass_loss_ratio_at_base_eol: float
    alt_soh_at_base_eol_pct: float
    soh_never_worse: bool  # alt SOH >= base SOH on every common day
    max_soh_deficit_pct: float

    def summary(self) -> dict:
        return {
            "base": self.base.summary(),
            "alt": self.alt.summary(),
            "lifetime_ratio": round(self.lifetime_ratio, 3),
            "corrosion_reduction_pct": round(self.corrosion_reduction_pct, 1),
            "corrosion_reduction_at_base_eol_pct": round(
                self.corrosion_reduction_at_base_eol_pct, 1
            ),
            "active_mass_loss_ratio": round(self.active_mass_loss_ratio, 2),
            "active_mass_loss_ratio_at_base_eol": round(
                self.active_mass_loss_ratio_at_base_eol, 2
            ),
            "alt_soh_at_base_eol_pct": round(self.alt_soh_at_base_eol_pct, 2),
            "soh_never_worse": self.soh_never_worse,
            "max_soh_deficit_pct": round(self.max_soh_deficit_pct, 4),
        }


def compare_strategies(base: Scenario, alt: Scenario) -> ComparisonResult:
    """Run two scenarios that differ only in controller policy.

    Raises EngineError unless profile, battery, ageing parameters and
    time step all match; the comparison is only meaningful paired.
    """
    if base.profile is not alt.profile and (
        base.profile.load_w != alt.profile.load_w
        or base.profile.solar_w != alt.profile.solar_w
        or base.profile.temp_c != alt.profile.temp_c
    ):
        raise EngineError("compared scenarios must share the same input profile")
    if (
        base.battery != alt.battery
        or base.degradation != alt.degradation
        or base.datasheet != alt.datasheet
        or base.dt_s != alt.dt_s
        or base.initial_soc != alt.initial_soc
        or base.converter_efficiency != alt.converter_efficiency
    ):
        raise EngineError("compared scenarios must differ only in control policy")

    base_result = run_scenario(base)
    alt_result = run_scenario(alt)

    lifetime_ratio = (
        base_result.lifetime_years
        and alt_result.lifetime_years / base_result.lifetime_years
    )

    base_eol_day = len(base_result.trajectory)
    alt_at_base_eol = alt_result.trajectory[
        min(base_eol_day, len(alt_result.trajectory)) - 1
    ]
    base_end = base_result.trajectory[-1]

    corr_red = _reduction_pct(base_result.c_corr_ah, alt_result.c_corr_ah)
    corr_red_base_eol = _reduction_pct(base_end.c_corr_ah, alt_at_base_eol.c_corr_ah)

    common = min(len(base_result.trajectory), len(alt_result.trajectory))
    deficit = 0.0
    for b, a in zip(base_result.trajectory[:common], alt_result.trajectory[:common]):
        deficit = max(deficit, b.soh_pct - a.soh_pct)

    return ComparisonResult(
        base=base_result,
        alt=alt_result,
        lifetime_ratio=lifetime_ratio,
        corrosion_reduction_pct=corr_red,
        corrosion_reduction_at_base_eol_pct=corr_red_base_eol,
        active_mass_loss_ratio=_ratio(alt_result.c_deg_ah, base_result.c_deg_ah),
        active_mass_loss_ratio_at_base_eol=_ratio(
            alt_at_base_eol.c_deg_ah, base_end.c_deg_ah
        ),
        alt_soh_at_base_eol_pct=alt_at_base_eol.soh_pct,
        soh_never_worse=deficit <= 1e-9,
        max_soh_deficit_pct=deficit,
    )


def _reduction_pct(base_value: float, alt_value: float) -> float:
    if base_value <= 0.0:
        return 0.0
    return 100.0 * (1.0 - alt_value / base_value)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0.0 else math.inf
