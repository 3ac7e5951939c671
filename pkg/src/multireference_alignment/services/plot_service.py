#!/usr/bin/env python3
"""
SVG line charts rendered from report CSV files
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..utils.errors import DataFormatError  # noqa: E402
from ..utils.logger import log  # noqa: E402
from .data_service import DataService  # noqa: E402

LOG_SCALE_KINDS = ("slope_random", "slope_uniform", "method_compare", "bounds_table")
AXIS_PREFERENCE = ("spread", "sigma", "period")


def _x_axis(rows: List[Dict[str, Any]]) -> Optional[str]:
    for key in AXIS_PREFERENCE:
        values = {row.get(key) for row in rows}
        if len(values) > 1:
            return key
    for key in AXIS_PREFERENCE:
        if key in rows[0]:
            return key
    return None


class PlotService:
    """Service class for report figures"""

    @staticmethod
    def render_report(csv_path: str, svg_path: Optional[str] = None) -> Optional[Path]:
        """Plot the median (with interquartile band) per method against the swept parameter"""
        report = DataService.read_report(csv_path)
        if not report.rows:
            log(f"⚠️  Report {csv_path} has no rows to plot", "warning")
            return None
        axis = _x_axis(report.rows)
        if axis is None:
            return None

        target = Path(svg_path) if svg_path else Path(csv_path).with_suffix(".svg")
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        methods = sorted({str(row.get("method", "")) for row in report.rows})
        for method in methods:
            rows = sorted((r for r in report.rows if str(r.get("method", "")) == method and "median" in r),
                          key=lambda r: r[axis])
            xs = [r[axis] for r in rows]
            ax.plot(xs, [r["median"] for r in rows], marker="o", label=method)
            if all("q1" in r and "q3" in r for r in rows):
                ax.fill_between(xs, [r["q1"] for r in rows], [r["q3"] for r in rows], alpha=0.2)
            if any("predicted_cosine" in r for r in rows):
                ax.plot(xs, [r.get("predicted_cosine") for r in rows], linestyle="--", label="predicted")
            if any("bound" in r for r in rows):
                ax.plot(xs, [r.get("bound") for r in rows], linestyle=":", label="lower bound")

        if report.kind in LOG_SCALE_KINDS:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(axis)
        ax.set_ylabel("cosine" if report.kind == "spiked" else "error")
        ax.set_title(report.kind)
        ax.legend()
        try:
            fig.savefig(target, format="svg", bbox_inches="tight")
        except OSError as e:
            raise DataFormatError(f"Cannot write figure {target}: {e}") from e
        finally:
            plt.close(fig)
        log(f"🖼️  Figure saved to {target}", "progress")
        return target
