"""Minimal self-contained SVG line plots for spectra.

Hand-rolled on purpose: no raster backend, byte-deterministic output,
and the peak markers are plain text elements a test can grep for.
"""
from __future__ import annotations

from typing import Sequence

from .spectral import Peak, Spectrum

_WIDTH = 840.0
_HEIGHT = 420.0
_MARGIN_L = 64.0
_MARGIN_R = 16.0
_MARGIN_T = 28.0
_MARGIN_B = 44.0


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_spectrum_svg(spectrum: Spectrum, peaks: Sequence[Peak], title: str = "") -> str:
    """SVG text for magnitude vs frequency with labeled peak markers."""
    freqs = spectrum.freqs
    mags = spectrum.mags
    if freqs.shape[0] == 0:
        raise ValueError("cannot plot an empty spectrum")
    f_lo, f_hi = float(freqs[0]), float(freqs[-1])
    m_hi = float(mags.max()) if float(mags.max()) > 0 else 1.0
    span_x = _WIDTH - _MARGIN_L - _MARGIN_R
    span_y = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(f: float) -> float:
        return _MARGIN_L + (f - f_lo) / (f_hi - f_lo) * span_x

    def py(m: float) -> float:
        return _MARGIN_T + (1.0 - m / m_hi) * span_y

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH:.0f}" '
        f'height="{_HEIGHT:.0f}" viewBox="0 0 {_WIDTH:.0f} {_HEIGHT:.0f}">',
        f'<rect x="0" y="0" width="{_WIDTH:.0f}" height="{_HEIGHT:.0f}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_fmt(_WIDTH / 2)}" y="18" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{title}</text>'
        )

    # axes
    x0, y0 = _MARGIN_L, _HEIGHT - _MARGIN_B
    parts.append(
        f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(_WIDTH - _MARGIN_R)}" '
        f'y2="{_fmt(y0)}" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x0)}" '
        f'y2="{_fmt(_MARGIN_T)}" stroke="black" stroke-width="1"/>'
    )

    # x ticks every 10 Hz from the first multiple of 10 in band
    tick = float(int(f_lo // 10 + (1 if f_lo % 10 else 0)) * 10)
    while tick <= f_hi:
        parts.append(
            f'<line x1="{_fmt(px(tick))}" y1="{_fmt(y0)}" x2="{_fmt(px(tick))}" '
            f'y2="{_fmt(y0 + 5)}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(px(tick))}" y="{_fmt(y0 + 18)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tick:.0f}</text>'
        )
        tick += 10.0
    parts.append(
        f'<text x="{_fmt(_MARGIN_L + span_x / 2)}" y="{_fmt(_HEIGHT - 8)}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12">frequency (Hz)</text>'
    )

    # y ticks at quarters of the max
    for k in range(5):
        m = m_hi * k / 4.0
        parts.append(
            f'<line x1="{_fmt(x0 - 5)}" y1="{_fmt(py(m))}" x2="{_fmt(x0)}" '
            f'y2="{_fmt(py(m))}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(x0 - 8)}" y="{_fmt(py(m) + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{m:.2e}</text>'
        )

    # spectrum polyline
    pts = " ".join(f"{_fmt(px(float(f)))},{_fmt(py(float(m)))}" for f, m in zip(freqs, mags))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e8c" stroke-width="1"/>')

    # peak markers
    for pk in peaks:
        cx, cy = px(pk.freq_hz), py(pk.magnitude)
        text = pk.label.text() if pk.label is not None else f"{pk.freq_hz:.1f}"
        parts.append(
            f'<circle class="peak-marker" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="3" '
            f'fill="none" stroke="#c03020" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text class="peak-label" x="{_fmt(cx)}" y="{_fmt(cy - 8)}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="10">{text}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
