"""
Minimal SVG line charts (axes, ticks, legend, polylines, error bars)
"""
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


@dataclass
class Series:
    name: str
    xs: List[float]
    ys: List[float]
    yerr: Optional[List[float]] = None


@dataclass
class LineChart:
    title: str
    x_label: str
    y_label: str
    width: int = 640
    height: int = 420
    y_range: Optional[Tuple[float, float]] = None
    series: List[Series] = field(default_factory=list)

    margin_left = 70
    margin_right = 150
    margin_top = 40
    margin_bottom = 55

    def add_series(self, name: str, xs: Sequence[float], ys: Sequence[float], yerr: Optional[Sequence[float]] = None):
        if len(xs) != len(ys) or (yerr is not None and len(yerr) != len(ys)):
            raise ValueError(f"series {name!r} has mismatched lengths")
        self.series.append(
            Series(name, [float(x) for x in xs], [float(y) for y in ys],
                   None if yerr is None else [float(e) for e in yerr])
        )

    def _bounds(self) -> Tuple[float, float, float, float]:
        xs = [x for s in self.series for x in s.xs] or [0.0, 1.0]
        if self.y_range is not None:
            y0, y1 = self.y_range
        else:
            lows = [y - (s.yerr[i] if s.yerr else 0.0) for s in self.series for i, y in enumerate(s.ys)]
            highs = [y + (s.yerr[i] if s.yerr else 0.0) for s in self.series for i, y in enumerate(s.ys)]
            y0, y1 = (min(lows), max(highs)) if lows else (0.0, 1.0)
        x0, x1 = min(xs), max(xs)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        return x0, x1, y0, y1

    def render(self) -> str:
        x0, x1, y0, y1 = self._bounds()
        plot_w = self.width - self.margin_left - self.margin_right
        plot_h = self.height - self.margin_top - self.margin_bottom

        def px(x: float) -> float:
            return self.margin_left + (x - x0) / (x1 - x0) * plot_w

        def py(y: float) -> float:
            return self.margin_top + (1.0 - (y - y0) / (y1 - y0)) * plot_h

        svg = ET.Element(
            "svg",
            xmlns="http://www.w3.org/2000/svg",
            width=str(self.width),
            height=str(self.height),
            viewBox=f"0 0 {self.width} {self.height}",
        )
        ET.SubElement(svg, "rect", x="0", y="0", width=str(self.width), height=str(self.height), fill="white")
        title = ET.SubElement(svg, "text", x=f"{self.width / 2:.1f}", y="24", attrib={"text-anchor": "middle", "font-size": "15"})
        title.text = self.title

        axes = ET.SubElement(svg, "g", stroke="black", attrib={"stroke-width": "1"})
        bottom = self.margin_top + plot_h
        ET.SubElement(axes, "line", x1=str(self.margin_left), y1=f"{bottom:.1f}", x2=f"{self.margin_left + plot_w:.1f}", y2=f"{bottom:.1f}")
        ET.SubElement(axes, "line", x1=str(self.margin_left), y1=str(self.margin_top), x2=str(self.margin_left), y2=f"{bottom:.1f}")

        ticks = ET.SubElement(svg, "g", attrib={"font-size": "11"})
        for i in range(6):
            xv = x0 + (x1 - x0) * i / 5
            yv = y0 + (y1 - y0) * i / 5
            label = ET.SubElement(ticks, "text", x=f"{px(xv):.1f}", y=f"{bottom + 16:.1f}", attrib={"text-anchor": "middle"})
            label.text = f"{xv:.3g}"
            label = ET.SubElement(ticks, "text", x=f"{self.margin_left - 6}", y=f"{py(yv) + 4:.1f}", attrib={"text-anchor": "end"})
            label.text = f"{yv:.3g}"
            ET.SubElement(ticks, "line", x1=f"{self.margin_left - 3}", y1=f"{py(yv):.1f}", x2=str(self.margin_left), y2=f"{py(yv):.1f}", stroke="black")

        x_title = ET.SubElement(svg, "text", x=f"{self.margin_left + plot_w / 2:.1f}", y=f"{self.height - 12}", attrib={"text-anchor": "middle", "font-size": "12"})
        x_title.text = self.x_label
        y_title = ET.SubElement(
            svg, "text", x="16", y=f"{self.margin_top + plot_h / 2:.1f}",
            transform=f"rotate(-90 16 {self.margin_top + plot_h / 2:.1f})",
            attrib={"text-anchor": "middle", "font-size": "12"},
        )
        y_title.text = self.y_label

        for k, s in enumerate(self.series):
            color = PALETTE[k % len(PALETTE)]
            group = ET.SubElement(svg, "g", stroke=color, fill="none")
            points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.xs, s.ys))
            ET.SubElement(group, "polyline", points=points, attrib={"stroke-width": "2"})
            for i, (x, y) in enumerate(zip(s.xs, s.ys)):
                ET.SubElement(group, "circle", cx=f"{px(x):.2f}", cy=f"{py(y):.2f}", r="2.5", fill=color)
                if s.yerr and s.yerr[i] > 0:
                    ET.SubElement(group, "line", x1=f"{px(x):.2f}", y1=f"{py(y - s.yerr[i]):.2f}", x2=f"{px(x):.2f}", y2=f"{py(y + s.yerr[i]):.2f}")

            legend_y = self.margin_top + 16 * k + 8
            legend_x = self.margin_left + plot_w + 12
            ET.SubElement(svg, "line", x1=f"{legend_x}", y1=f"{legend_y}", x2=f"{legend_x + 18}", y2=f"{legend_y}", stroke=color, attrib={"stroke-width": "2"})
            entry = ET.SubElement(svg, "text", x=f"{legend_x + 24}", y=f"{legend_y + 4}", attrib={"font-size": "11"})
            entry.text = s.name

        return ET.tostring(svg, encoding="unicode")

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.render() + "\n", encoding="utf-8")
        return path
