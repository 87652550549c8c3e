#!/usr/bin/env python3
"""Compare the static and adaptive control policies on one archetype.

Paired run over the identical profile; prints lifetime ratio,
per-mechanism loss changes and the full-recharge statistics that
distinguish the two schedulers.

Usage: python3 scripts/compare_control.py [--archetype low] [--seed N]
"""

import argparse
import sys

from vrlasim import (
    ARCHETYPES,
    ControlParams,
    Policy,
    Scenario,
    adaptive_params,
    compare_strategies,
    generate_archetype,
)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--archetype", default="low", choices=sorted(ARCHETYPES))
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--dt", type=float, default=900.0)
    parser.add_argument("--max-years", type=float, default=15.0)
    args = parser.parse_args()

    profile = generate_archetype(
        ARCHETYPES[args.archetype],
        days=int(args.max_years * 365) + 1,
        seed=args.seed,
        dt_s=args.dt,
    )
    base = Scenario(
        name=f"{args.archetype}_static",
        profile=profile,
        control=ControlParams(policy=Policy.BBOXX_STATIC),
        dt_s=args.dt,
        max_years=args.max_years,
    )
    alt = Scenario(
        name=f"{args.archetype}_adaptive",
        profile=profile,
        control=adaptive_params(),
        dt_s=args.dt,
        max_years=args.max_years,
    )
    cmp_result = compare_strategies(base, alt)
    b, a = cmp_result.base, cmp_result.alt

    def row(r):
        gaps = (r.stress.time_between_full_mean_h, r.stress.time_between_full_max_h)
        return (
            f"{r.name:<16} life={r.lifetime_years:6.2f}y fec={r.full_equivalent_cycles:5.0f} "
            f"c_corr={r.c_corr_ah:5.3f} c_deg={r.c_deg_ah:5.3f} "
            f"full_day={100 * r.full_recharge_day_fraction:5.1f}% "
            f"gap_mean={gaps[0] and round(gaps[0], 1)}h gap_max={gaps[1] and round(gaps[1], 1)}h "
            f"min_soc={r.min_soc:.3f} cutoffs={r.disconnect_events}"
        )

    print(row(b))
    print(row(a))
    print()
    print(f"lifetime ratio          {cmp_result.lifetime_ratio:.3f}")
    print(f"corrosion reduction     {cmp_result.corrosion_reduction_pct:.1f}% (own EOL)")
    print(
        f"                        {cmp_result.corrosion_reduction_at_base_eol_pct:.1f}% (base EOL)"
    )
    print(f"active-mass ratio       {cmp_result.active_mass_loss_ratio:.2f} (own EOL)")
    print(
        f"                        {cmp_result.active_mass_loss_ratio_at_base_eol:.2f} (base EOL)"
    )
    print(f"alt SOH at base EOL     {cmp_result.alt_soh_at_base_eol_pct:.2f}%")
    print(f"SOH never worse         {cmp_result.soh_never_worse}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
