"""Independent reference computations used to check the package's fast paths."""
import math

from robosec.world import SENSOR_MAX, SENSOR_MIN


def segment_hit(ox, oy, hx, hy, seg, steps=16, reach=500.0):
    """Smallest distance along the ray at which it crosses ``seg``, found by bisection
    on the sign of the side-of-line test (no closed-form intersection)."""
    x0, y0, x1, y1 = seg

    def side(t):
        px, py = ox + t * hx, oy + t * hy
        return (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)

    def on_segment(t):
        px, py = ox + t * hx, oy + t * hy
        ex, ey = x1 - x0, y1 - y0
        L2 = ex * ex + ey * ey
        u = ((px - x0) * ex + (py - y0) * ey) / L2
        return -1e-9 <= u <= 1 + 1e-9

    prev_t, prev_s = 0.0, side(0.0)
    if abs(prev_s) < 1e-12 and on_segment(0.0):
        return 0.0
    for k in range(1, steps + 1):
        t = reach * k / steps
        s = side(t)
        if prev_s == 0 or s == 0 or (prev_s < 0) != (s < 0):
            lo, hi = prev_t, t
            for _ in range(80):
                mid = (lo + hi) / 2
                if (side(lo) < 0) != (side(mid) < 0):
                    hi = mid
                else:
                    lo = mid
            if on_segment(hi):
                return hi
        prev_t, prev_s = t, s
    return math.inf


def brute_raycast(segments, x, y, heading):
    hx, hy = math.cos(heading), math.sin(heading)
    best = min((segment_hit(x, y, hx, hy, s) for s in segments), default=math.inf)
    return min(SENSOR_MAX, max(SENSOR_MIN, best))


def dense_march(cells, res, x, y, heading, step=0.01, reach=SENSOR_MAX):
    """Walk the ray in tiny steps and report the first occupied cell."""
    hx, hy = math.cos(heading), math.sin(heading)
    n = int(reach / step)
    for k in range(n + 1):
        t = k * step
        if (math.floor((x + t * hx) / res), math.floor((y + t * hy) / res)) in cells:
            return max(SENSOR_MIN, t)
    return SENSOR_MAX


def rasterize_visible(segments, poses, res):
    """Cells containing the true surface point hit by each ray from ``poses``."""
    out = set()
    for x, y, h in poses:
        d = brute_raycast(segments, x, y, h)
        if d >= SENSOR_MAX:
            continue
        ex, ey = x + (d + 1e-6) * math.cos(h), y + (d + 1e-6) * math.sin(h)
        out.add((math.floor(ex / res), math.floor(ey / res)))
    return out


def jaccard(a, b):
    a, b = set(a), set(b)
    return len(a & b) / len(a | b) if a | b else 1.0


def reversals(values, magnitude):
    n = 0
    for a, b, c in zip(values, values[1:], values[2:]):
        if (b - a) * (c - b) < 0 and max(abs(b - a), abs(c - b)) > magnitude:
            n += 1
    return n


def lsq_slope(ts, vs):
    n = len(ts)
    mt, mv = sum(ts) / n, sum(vs) / n
    num = sum((t - mt) * (v - mv) for t, v in zip(ts, vs))
    den = sum((t - mt) ** 2 for t in ts)
    return num / den
