"""Tiny SVG emitter for series plots and heatmaps; no plotting dependency.

Returns SVG text; callers decide where it goes.  Good enough for run
artifacts: axes, ticks, legends, log-log scaling, block-averaged heatmaps
capped at 160 cells per side.
"""

import numpy as np

PALETTE = ("#1f62a8", "#c23e2e", "#2a8a4a", "#8a5fb8", "#b8860b", "#3a3a3a")


def _esc(s):
    return (
        str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def _ticks(lo, hi, log):
    if log:
        lo_d = int(np.floor(lo))
        hi_d = int(np.ceil(hi))
        vals = [d for d in range(lo_d, hi_d + 1) if lo - 1e-9 <= d <= hi + 1e-9]
        if len(vals) < 2:
            vals = [lo, hi]
        return [(val, "1e%d" % val if isinstance(val, int) else "%.3g" % 10**val) for val in vals]
    span = hi - lo
    if span <= 0.0:
        return [(lo, "%.3g" % lo)]
    step = 10.0 ** np.floor(np.log10(span / 4.0))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= 6.0:
            step *= mult
            break
    first = np.ceil(lo / step) * step
    vals = np.arange(first, hi + 0.5 * step, step)
    return [(float(val), "%.4g" % val) for val in vals]


def line_plot(series, title="", xlabel="", ylabel="", loglog=False, width=640, height=440):
    """SVG polyline chart.  series: list of (label, x, y) with 1-D arrays."""
    if not series:
        raise ValueError("no series to plot")
    xs, ys = [], []
    for label, x, y in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.size != y.size or x.size < 2:
            raise ValueError("series %r needs matching arrays of length >= 2" % label)
        if loglog:
            if np.any(x <= 0.0) or np.any(y <= 0.0):
                raise ValueError("log-log plot needs positive data (series %r)" % label)
            x, y = np.log10(x), np.log10(y)
        xs.append(x)
        ys.append(y)
    x_lo = min(x.min() for x in xs)
    x_hi = max(x.max() for x in xs)
    y_lo = min(y.min() for y in ys)
    y_hi = max(y.max() for y in ys)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad_y = 0.05 * (y_hi - y_lo)
    y_lo -= pad_y
    y_hi += pad_y

    ml, mr, mt, mb = 62, 16, 34, 46
    pw, ph = width - ml - mr, height - mt - mb
    sx = lambda u: ml + (u - x_lo) / (x_hi - x_lo) * pw
    sy = lambda u: mt + ph - (u - y_lo) / (y_hi - y_lo) * ph

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'font-family="monospace" font-size="12">' % (width, height),
        '<rect width="%d" height="%d" fill="white"/>' % (width, height),
        '<text x="%d" y="20" font-size="14">%s</text>' % (ml, _esc(title)),
        '<rect x="%d" y="%d" width="%d" height="%d" fill="none" stroke="#444"/>'
        % (ml, mt, pw, ph),
    ]
    for val, lab in _ticks(x_lo, x_hi, loglog):
        px = sx(val)
        if ml - 1 <= px <= ml + pw + 1:
            parts.append('<line x1="%.1f" y1="%d" x2="%.1f" y2="%d" stroke="#444"/>'
                         % (px, mt + ph, px, mt + ph + 4))
            parts.append('<text x="%.1f" y="%d" text-anchor="middle">%s</text>'
                         % (px, mt + ph + 18, _esc(lab)))
    for val, lab in _ticks(y_lo, y_hi, loglog):
        py = sy(val)
        if mt - 1 <= py <= mt + ph + 1:
            parts.append('<line x1="%d" y1="%.1f" x2="%d" y2="%.1f" stroke="#444"/>'
                         % (ml - 4, py, ml, py))
            parts.append('<text x="%d" y="%.1f" text-anchor="end">%s</text>'
                         % (ml - 7, py + 4, _esc(lab)))
    parts.append('<text x="%d" y="%d" text-anchor="middle">%s</text>'
                 % (ml + pw // 2, height - 10, _esc(xlabel)))
    parts.append('<text x="14" y="%d" text-anchor="middle" transform="rotate(-90 14 %d)">%s</text>'
                 % (mt + ph // 2, mt + ph // 2, _esc(ylabel)))

    for k, ((label, _, _), x, y) in enumerate(zip(series, xs, ys)):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join("%.2f,%.2f" % (sx(a), sy(b)) for a, b in zip(x, y))
        parts.append('<polyline points="%s" fill="none" stroke="%s" stroke-width="1.6"/>'
                     % (pts, color))
        parts.append('<text x="%d" y="%d" fill="%s">%s</text>'
                     % (ml + pw - 150, mt + 16 + 15 * k, color, _esc(label)))
    parts.append("</svg>")
    return "\n".join(parts)


def _block_mean(a, cap):
    n = a.shape[0]
    if n <= cap:
        return a
    # chop to a multiple of the block size, then average blocks
    block = int(np.ceil(n / cap))
    m = (n // block) * block
    return a[:m].reshape(m // block, block, *a.shape[1:]).mean(axis=1)


def heatmap(values, x_extent, y_extent, title="", max_cells=160, width=560, height=470):
    """SVG cell map of a 2-D array; downsampled by block means past the cap."""
    a = np.asarray(values, dtype=float)
    if a.ndim != 2:
        raise ValueError("heatmap needs a 2-D array")
    a = _block_mean(a, max_cells)
    a = _block_mean(a.T, max_cells).T
    lo, hi = float(np.nanmin(a)), float(np.nanmax(a))
    span = hi - lo if hi > lo else 1.0
    nx, ny = a.shape

    ml, mt, mb = 56, 34, 40
    pw, ph = width - ml - 16, height - mt - mb
    cw, ch = pw / nx, ph / ny
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'font-family="monospace" font-size="12">' % (width, height),
        '<rect width="%d" height="%d" fill="white"/>' % (width, height),
        '<text x="%d" y="20" font-size="14">%s</text>' % (ml, _esc(title)),
    ]
    for i in range(nx):
        for j in range(ny):
            u = (a[i, j] - lo) / span
            r = int(30 + 225 * u)
            g = int(30 + 180 * u)
            b = int(90 + 40 * (1.0 - u))
            parts.append(
                '<rect x="%.2f" y="%.2f" width="%.2f" height="%.2f" fill="#%02x%02x%02x"/>'
                % (ml + i * cw, mt + ph - (j + 1) * ch, cw + 0.5, ch + 0.5, r, g, b)
            )
    parts.append('<rect x="%d" y="%d" width="%.1f" height="%.1f" fill="none" stroke="#444"/>'
                 % (ml, mt, pw, ph))
    parts.append('<text x="%d" y="%d">[%.3g, %.3g] x [%.3g, %.3g]  range [%.3g, %.3g]</text>'
                 % (ml, height - 12, x_extent[0], x_extent[1],
                    y_extent[0], y_extent[1], lo, hi))
    parts.append("</svg>")
    return "\n".join(parts)
