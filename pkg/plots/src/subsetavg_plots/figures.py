"""Figure builders for candidate sweeps and N-scaling studies.

Both builders return a bare matplotlib Figure (no pyplot, no global state),
so they work headless and the caller decides the output format. Every
plotted value comes verbatim from the table rows; the only number a figure
adds is the optional true-value reference line.
"""

from matplotlib.figure import Figure

TRUE_VALUE_DEFAULT = 1.80


def _grouped(rows, key):
    """Row groups keyed by `key`, preserving first-appearance order."""
    groups = {}
    for row in rows:
        groups.setdefault(row[key], []).append(row)
    return groups


def sweep_figure(candidates, averages, true_value=TRUE_VALUE_DEFAULT):
    """Two-panel sweep figure.

    Top: per-t_min parameter estimates with error bars for each model,
    the grand-average band of each criterion, and the optional true-value
    line. Bottom: per-model weight curves for both criteria plus the
    fit-quality Q, all on the common [0, 1] scale.
    """
    fig = Figure(figsize=(7.0, 7.5), constrained_layout=True)
    ax_fit, ax_weight = fig.subplots(2, 1, sharex=True,
                                     height_ratios=[3, 2])

    for i, (model, rows) in enumerate(_grouped(candidates, "model").items()):
        t_min = [row["t_min"] for row in rows]
        color = f"C{i}"
        ax_fit.errorbar(t_min, [row["a0"] for row in rows],
                        yerr=[row["a0_err"] for row in rows],
                        fmt="o", color=color, capsize=3,
                        label=f"{model} fits")
        ax_weight.plot(t_min, [row["w_subspace"] for row in rows],
                       color=color, linestyle="-", marker=".",
                       label=f"{model} w subspace")
        ax_weight.plot(t_min, [row["w_perfect"] for row in rows],
                       color=color, linestyle="--", marker=".",
                       label=f"{model} w perfect")
        ax_weight.plot(t_min, [row["q_value"] for row in rows],
                       color=color, linestyle=":",
                       label=f"{model} Q")

    band_colors = {"subspace": "0.55", "perfect": "0.8"}
    for row in averages:
        kind = row["criterion"]
        ax_fit.axhspan(row["mean"] - row["err"], row["mean"] + row["err"],
                       color=band_colors.get(kind, "0.7"), alpha=0.4,
                       label=f"{kind} average")
    if true_value is not None:
        ax_fit.axhline(true_value, color="k", linestyle="--", linewidth=1,
                       label="true value")

    ax_fit.set_ylabel("$a_0$")
    ax_fit.legend(fontsize="small", ncols=2)
    ax_weight.set_xlabel(r"$t_\mathrm{min}$")
    ax_weight.set_ylabel("weight / Q")
    ax_weight.set_ylim(-0.02, 1.02)
    ax_weight.legend(fontsize="small", ncols=2)
    return fig


def nscaling_figure(averages, true_value=TRUE_VALUE_DEFAULT):
    """Grand-average mean with error bars against N on a log axis, one
    series per criterion, with the optional true-value line."""
    fig = Figure(figsize=(6.5, 4.5), constrained_layout=True)
    ax = fig.subplots()
    markers = {"subspace": "o", "perfect": "s"}
    for kind, rows in _grouped(averages, "criterion").items():
        ax.errorbar([row["N"] for row in rows],
                    [row["mean"] for row in rows],
                    yerr=[row["err"] for row in rows],
                    fmt=markers.get(kind, "d"), capsize=3, label=kind)
    if true_value is not None:
        ax.axhline(true_value, color="k", linestyle="--", linewidth=1,
                   label="true value")
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("$a_0$")
    ax.legend(fontsize="small")
    return fig
