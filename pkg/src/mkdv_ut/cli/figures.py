"""PNG figures drawn from the emitted CSV tables (never from in-memory state)."""

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _load(path):
    from .pipeline import read_csv

    return read_csv(path)


def render_figures(tables, out):
    """tables: {name: csv path} as returned by emit_tables."""
    plt = _pyplot()
    out = Path(out)
    made = {}

    if "field" in tables:
        d = _load(tables["field"])
        xs, ts = np.unique(d["x"]), np.unique(d["t"])
        shape = (len(ts), len(xs))
        fig, axes = plt.subplots(1, 2 if "abs_error" in d else 1, figsize=(10, 4), squeeze=False)
        im = axes[0, 0].pcolormesh(xs, ts, d["u"].reshape(shape), shading="nearest")
        axes[0, 0].set(xlabel="x", ylabel="t", title="u(x, t)")
        fig.colorbar(im, ax=axes[0, 0])
        if "abs_error" in d:
            err = np.log10(np.maximum(d["abs_error"], 1e-17)).reshape(shape)
            im = axes[0, 1].pcolormesh(xs, ts, err, shading="nearest")
            axes[0, 1].set(xlabel="x", ylabel="t", title="log10 |u - exact|")
            fig.colorbar(im, ax=axes[0, 1])
        fig.tight_layout()
        made["field_png"] = out / "field.png"
        fig.savefig(made["field_png"], dpi=110)
        plt.close(fig)

    if "boundary_trace" in tables:
        d = _load(tables["boundary_trace"])
        fig, ax = plt.subplots(figsize=(6, 4))
        for key in ("u", "u_x", "u_xx"):
            ax.plot(d["t"], d[key], marker="o", ms=3, label=key)
        ax.set(xlabel="t", title="values at x = 0")
        ax.legend()
        made["boundary_png"] = out / "boundary_trace.png"
        fig.savefig(made["boundary_png"], dpi=110)
        plt.close(fig)

    if "regularization" in tables:
        d = _load(tables["regularization"])
        fig, ax = plt.subplots(figsize=(6, 4))
        for ang in np.unique(np.round(d["arg_k"], 6)):
            sel = np.isclose(d["arg_k"], ang, atol=1e-6)
            ax.loglog(d["abs_k"][sel], np.maximum(d["abs_h_minus_ha"][sel], 1e-300), label=f"arg k = {ang:.3f}")
        ax.set(xlabel="|k|", ylabel="|h - h_a|")
        ax.legend()
        made["regularization_png"] = out / "regularization.png"
        fig.savefig(made["regularization_png"], dpi=110)
        plt.close(fig)

    if "slopes" in tables:
        d = _load(tables["slopes"])
        fig, ax = plt.subplots(figsize=(6, 4))
        for idx in np.unique(d["series"]):
            sel = d["series"] == idx
            ax.loglog(d["abs_k"][sel], d["error"][sel], marker="o", label=f"series {int(idx)}")
        ax.set(xlabel="|k|", ylabel="error")
        ax.legend()
        made["slopes_png"] = out / "slopes.png"
        fig.savefig(made["slopes_png"], dpi=110)
        plt.close(fig)

    return {k: str(v) for k, v in made.items()}
