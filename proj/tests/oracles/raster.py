"""Background blending reference: background rescaled toward gray 118 by the
contrast, line ink composited by its coverage (deviation from 118)."""
def blend(stim, bg, c):
    b = 118 + c * (bg - 118)
    if stim < 118:
        cov = (118 - stim) / 118
        return round(b * (1 - cov))
    if stim > 118:
        cov = (stim - 118) / 137
        return round(b + (255 - b) * cov)
    return round(b)

for args in [(118, 200, 0.5), (0, 200, 0.5), (59, 30, 1.0), (255, 30, 0.25), (118, 30, 0.0), (200, 100, 1.0)]:
    print(args, "->", blend(*args))
