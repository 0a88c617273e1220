from .svg import MARK_COLORS, PlotConfig, render_svg, write_svg

__all__ = ["MARK_COLORS", "PlotConfig", "render_svg", "write_svg", "render_png"]


def render_png(filename, path, config=None):
    from .figures import render_png as _render

    return _render(filename, path, config)
