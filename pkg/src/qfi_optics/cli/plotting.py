"""Static SVG figures from sweep results."""

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from qfi_optics.cli.artifacts import ArtifactMeta, canonical_json  # noqa: E402
from qfi_optics.cli.sweep import SweepResult  # noqa: E402
from qfi_optics.core.fock import FloatArray  # noqa: E402

logger = logging.getLogger(__name__)


def _finite(values: tuple[float, ...]) -> FloatArray:
    array = np.asarray(values, dtype=np.float64)
    return np.where(np.isfinite(array), array, np.nan)


def plot_sweep(result: SweepResult, path: Path, meta: ArtifactMeta) -> Path:
    """Precision of every strategy against eta, above the optimal weight profile.

    Each precision curve is an SVG group with id ``series-<strategy>``; each
    weight band has id ``weights-x<k>``. The artifact meta is embedded as the
    SVG description; the creation date is omitted.
    """
    eta = np.asarray(result.eta_grid)
    fig, (top, bottom) = plt.subplots(
        2, 1, sharex=True, figsize=(7.0, 8.0), gridspec_kw={"height_ratios": [3, 2]}
    )
    for name, values in result.delta_phi.items():
        metric = result.metrics.get(name)
        label = f"{name} ({metric})" if metric is not None else str(name)
        (line,) = top.plot(eta, _finite(values), label=label)
        line.set_gid(f"series-{name}")
    top.set_yscale("log")
    top.set_ylabel("minimal phase uncertainty")
    top.set_title(f"N={result.n_photons}, {result.mode} losses")
    top.legend(fontsize="small")

    weights = np.nan_to_num(np.asarray(result.weights, dtype=np.float64).T)
    bands = bottom.stackplot(eta, weights, labels=[f"x_{k}" for k in range(result.n_photons + 1)])
    for k, band in enumerate(bands):
        band.set_gid(f"weights-x{k}")
    bottom.set_xlabel("transmissivity")
    bottom.set_ylabel("optimal weights")
    bottom.set_ylim(0.0, 1.0)

    fig.tight_layout()
    metadata = {
        "Title": f"qfi-optics sweep N={result.n_photons} {result.mode}",
        "Description": canonical_json(meta),
        "Date": None,
    }
    fig.savefig(path, format="svg", metadata=metadata)
    plt.close(fig)
    logger.info(f"Wrote {path} with {len(result.delta_phi)} series")
    return path
