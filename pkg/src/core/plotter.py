# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
误差曲线绘图模块

直接输出自包含的SVG折线图（误差 vs 参与比例，每个拓扑一条曲线），
不依赖绘图库，相同输入得到逐字节相同的文件。
"""

from pathlib import Path
from typing import Dict, List, Sequence, Tuple
from xml.sax.saxutils import escape

from .simharness import SweepRecord

WIDTH = 640
HEIGHT = 420
MARGIN_LEFT = 70
MARGIN_RIGHT = 150
MARGIN_TOP = 40
MARGIN_BOTTOM = 55
TICKS = 5
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
TITLE = "Network Model Decision Errors over Active Participant Percentage"


class SweepPlotter:
    """扫描结果SVG绘图器类"""

    def __init__(self, records: Sequence[SweepRecord]) -> None:
        self.series: Dict[str, List[Tuple[float, float]]] = {}
        for record in records:
            self.series.setdefault(record.topology, []).append(
                (record.participation, record.mean_error)
            )
        for points in self.series.values():
            points.sort()

        values = [e for points in self.series.values() for _, e in points]
        self.y_max = max(values) if values and max(values) > 0 else 1.0

    def render(self) -> str:
        """
        生成SVG文本

        Returns:
            str: SVG文档
        """
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(TITLE)}</text>',
        ]
        parts.extend(self._axes())
        for index, (label, points) in enumerate(self.series.items()):
            color = PALETTE[index % len(PALETTE)]
            coords = " ".join(f"{self._x(p):.2f},{self._y(e):.2f}" for p, e in points)
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{coords}"/>'
            )
            parts.extend(self._legend_entry(index, label, color))
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    def save(self, file_path: Path) -> Path:
        """写出SVG文件"""
        file_path.write_text(self.render(), encoding="utf-8")
        return file_path

    def _axes(self) -> List[str]:
        left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
        top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
        lines = [
            f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
            f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
        ]
        for i in range(TICKS + 1):
            fraction = i / TICKS
            x = self._x(fraction)
            lines.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 4}" stroke="black"/>')
            lines.append(
                f'<text x="{x:.2f}" y="{bottom + 17}" text-anchor="middle">{fraction * 100:.0f}%</text>'
            )

            value = self.y_max * i / TICKS
            y = self._y(value)
            lines.append(f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
            lines.append(f'<text x="{left - 7}" y="{y + 4:.2f}" text-anchor="end">{value:.3g}</text>')

        lines.append(
            f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">'
            "Active participants</text>"
        )
        lines.append(
            f'<text x="18" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 18 {(top + bottom) / 2:.1f})">Mean decision error</text>'
        )
        return lines

    def _legend_entry(self, index: int, label: str, color: str) -> List[str]:
        x = WIDTH - MARGIN_RIGHT + 15
        y = MARGIN_TOP + 10 + index * 18
        return [
            f'<line x1="{x}" y1="{y}" x2="{x + 20}" y2="{y}" stroke="{color}" stroke-width="2"/>',
            f'<text x="{x + 26}" y="{y + 4}">{escape(label)}</text>',
        ]

    def _x(self, fraction: float) -> float:
        return MARGIN_LEFT + fraction * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)

    def _y(self, value: float) -> float:
        span = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
        return HEIGHT - MARGIN_BOTTOM - (value / self.y_max) * span
