"""Raster rendering of condition number plots with matplotlib."""

import numpy as np

from .svg import MARK_COLORS, PlotConfig

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 11,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "savefig.dpi": 100,
}


def render_png(filename, path, config=None):
    """Draw the same panels as :func:`~ridgecond.plotting.svg.render_svg` into a PNG file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    config = config or PlotConfig()
    config.validate(path.grid)
    lnl = np.log(path.grid.values)
    cond = np.asarray(path.cond, dtype=float)
    aids = config.show_aids and path.digits_lost is not None and path.acceleration is not None
    ncols = 3 if aids else 1

    marks = [(lam, MARK_COLORS.get(color, color), "-") for lam, color in config.vertical_marks]
    if path.knee is not None:
        marks.insert(0, (path.knee[0], MARK_COLORS["knee"], "--"))

    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, ncols, figsize=(config.width / 100, config.height / 100), squeeze=False)
        axes = axes[0]
        finite = np.isfinite(cond)
        ax = axes[0]
        ax.plot(lnl[finite], cond[finite], color="#1f77b4")
        if not finite.all():
            top = config.y_clip or (10.0 * cond[finite].max() if finite.any() else 1.0)
            ax.plot(lnl[~finite], np.full((~finite).sum(), top), "o", mfc="none", color="#d62728")
        ax.set_title(config.title)
        ax.set_xlabel("ln(penalty)")
        ax.set_ylabel("spectral condition number" if path.norm.value == 2 else "l1 condition number")
        if aids:
            digits = np.asarray(path.digits_lost)
            ok = digits >= 0
            axes[1].plot(lnl[ok], digits[ok], color="#ff7f0e", drawstyle="steps-post")
            axes[1].set_title("Digit loss")
            axes[1].set_xlabel("ln(penalty)")
            axes[1].set_ylabel("floor(log10 condition)")
            acc = np.asarray(path.acceleration, dtype=float)
            axes[2].plot(lnl[1:-1], acc, color="#9467bd")
            axes[2].set_title("Acceleration")
            axes[2].set_xlabel("ln(penalty)")
            axes[2].set_ylabel("second derivative")
        for a in axes:
            for lam, color, style in marks:
                a.axvline(np.log(lam), color=color, linestyle=style)
        fig.tight_layout()
        fig.savefig(filename, metadata={"Software": None})
        plt.close(fig)
    return filename
