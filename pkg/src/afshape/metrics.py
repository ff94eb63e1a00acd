"""Post-design evaluation of suppression quality.

All levels are in dB referenced to the mainlobe (r[0, 0] = N maps to
0 dB), so every level of a unimodular code is <= 0 dB. Region statistics
are taken over the per-(k, p) bins of the suppression region; the global
peak sidelobe scans the full lag/Doppler grid with only the mainlobe cell
excluded.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .af_core import (
    DB_FLOOR,
    CodeSequence,
    RegionSpec,
    af_grid,
    eval_af,
    eval_objective,
    to_db,
)


@dataclass
class RegionReport:
    """Suppression figures of one code over one region."""

    n: int
    delays: tuple
    dopplers: tuple
    region_energy: float
    region_avg_db: float
    region_peak_db: float
    global_peak_sidelobe_db: float

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "region": {"k": list(self.delays), "p": list(self.dopplers)},
            "region_energy": self.region_energy,
            "region_avg_db": self.region_avg_db,
            "region_peak_db": self.region_peak_db,
            "global_peak_sidelobe_db": self.global_peak_sidelobe_db,
        }


@dataclass
class ComparisonReport:
    """Before/after suppression summary for a fixed region.

    suppression_db is the drop in the region's average level, so positive
    values mean the 'after' code is better. bin_levels carries the
    per-(k, p) levels as (k, p, before_db, after_db) rows.
    """

    before: RegionReport
    after: RegionReport
    suppression_db: float
    bin_levels: list

    def to_json_dict(self) -> dict:
        return {
            "before": self.before.to_json_dict(),
            "after": self.after.to_json_dict(),
            "suppression_db": self.suppression_db,
            "bin_levels": [
                {"k": k, "p": p, "before_db": b, "after_db": a}
                for k, p, b, a in self.bin_levels
            ],
        }

    def write_csv(self, path) -> None:
        lines = ["k,p,before_db,after_db"]
        for k, p, before_db, after_db in self.bin_levels:
            lines.append(f"{k},{p},{before_db:.17g},{after_db:.17g}")
        Path(path).write_text("\n".join(lines) + "\n")


def region_levels_db(x: CodeSequence, region: RegionSpec) -> list:
    """Per-(k, p) levels 20*log10(|r|/N), in region.pairs() order."""
    region.validate_for(x.n)
    mainlobe = float(x.n)
    return [
        (k, p, float(to_db(abs(eval_af(x, k, p)), mainlobe)))
        for k, p in region.pairs()
    ]


def report(x: CodeSequence, region: RegionSpec) -> RegionReport:
    """Evaluate one code: region energy, average/peak level, global peak."""
    levels = [level for _, _, level in region_levels_db(x, region)]
    grid = af_grid(x)
    sidelobes = grid.magnitude_db.copy()
    sidelobes[x.n - 1, x.n // 2] = DB_FLOOR  # mask the mainlobe cell
    return RegionReport(
        n=x.n,
        delays=region.delays,
        dopplers=region.dopplers,
        region_energy=eval_objective(x, region),
        region_avg_db=float(np.mean(levels)),
        region_peak_db=float(np.max(levels)),
        global_peak_sidelobe_db=float(sidelobes.max()),
    )


def compare(before: CodeSequence, after: CodeSequence, region: RegionSpec) -> ComparisonReport:
    """Compare two codes of the same length over one region."""
    if before.n != after.n:
        raise ValueError(f"code lengths differ: {before.n} vs {after.n}")
    report_before = report(before, region)
    report_after = report(after, region)
    levels_before = region_levels_db(before, region)
    levels_after = region_levels_db(after, region)
    bin_levels = [
        (k, p, level_b, level_a)
        for (k, p, level_b), (_, _, level_a) in zip(levels_before, levels_after)
    ]
    return ComparisonReport(
        before=report_before,
        after=report_after,
        suppression_db=report_before.region_avg_db - report_after.region_avg_db,
        bin_levels=bin_levels,
    )
