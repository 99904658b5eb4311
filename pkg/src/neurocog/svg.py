"""Minimal deterministic SVG writer for task stimuli."""

from __future__ import annotations

from xml.sax.saxutils import escape


def _num(v: float) -> str:
    return f"{v:g}"


class Canvas:
    def __init__(self, width: float, height: float, background: str = "white"):
        self.width = width
        self.height = height
        self._parts: list[str] = [
            f'<rect x="0" y="0" width="{_num(width)}" height="{_num(height)}" fill="{background}"/>'
        ]

    def rect(self, x, y, w, h, fill, cls=None, stroke=None, rx=0) -> None:
        attrs = f'x="{_num(x)}" y="{_num(y)}" width="{_num(w)}" height="{_num(h)}" fill="{fill}"'
        if rx:
            attrs += f' rx="{_num(rx)}"'
        if stroke:
            attrs += f' stroke="{stroke}"'
        if cls:
            attrs += f' class="{cls}"'
        self._parts.append(f"<rect {attrs}/>")

    def circle(self, cx, cy, r, fill, cls=None) -> None:
        extra = f' class="{cls}"' if cls else ""
        self._parts.append(
            f'<circle cx="{_num(cx)}" cy="{_num(cy)}" r="{_num(r)}" fill="{fill}"{extra}/>'
        )

    def polygon(self, points, fill, cls=None) -> None:
        pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in points)
        extra = f' class="{cls}"' if cls else ""
        self._parts.append(f'<polygon points="{pts}" fill="{fill}"{extra}/>')

    def text(self, x, y, content: str, size: int = 14) -> None:
        self._parts.append(
            f'<text x="{_num(x)}" y="{_num(y)}" font-size="{size}" text-anchor="middle" '
            f'font-family="sans-serif">{escape(content)}</text>'
        )

    def open_group(self, cls: str, **data: str) -> None:
        extra = "".join(f' data-{k}="{escape(str(v))}"' for k, v in data.items())
        self._parts.append(f'<g class="{cls}"{extra}>')

    def close_group(self) -> None:
        self._parts.append("</g>")

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(self.width)}" '
            f'height="{_num(self.height)}" viewBox="0 0 {_num(self.width)} {_num(self.height)}">'
        )
        return "\n".join([head, *self._parts, "</svg>"]) + "\n"
