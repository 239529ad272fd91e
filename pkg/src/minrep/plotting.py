"""Plot-ready tables and their PNG renderings."""
from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import compact_model as cm  # noqa: E402
from . import cone_model as co  # noqa: E402
from . import flat_model as fm  # noqa: E402
from . import quadrature as qd  # noqa: E402
from . import specfun as sf  # noqa: E402
from .geometry import Signature  # noqa: E402


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in r])


def f0_line(sig: Signature, t_max: float = 3.0, count: int = 61, axis: int = 1):
    """Synthesized Bessel vector against the closed-form generating function on a line."""
    s0 = sig if sig.p >= sig.q else sig.swapped()
    C = sf.constants(s0)
    rule = qd.cone_rule(s0, 96, 24 if s0.n <= 4 else 12, 1e-7, 22.0)
    t = np.linspace(-t_max, t_max, count)
    z = np.zeros((count, s0.n))
    z[:, axis - 1] = t
    synth = qd.inverse_synthesis(rule, co.psi_0(s0), z).real / C.synthesis_const_derived
    closed = sf.generating_f0(s0, z)
    return s0, t, synth, closed


def ktype_spectrum(sig: Signature, t: float = 0.5, a_max: int = 12):
    """Component norms of the compact image of a dilated f0."""
    s0 = sig if sig.p >= sig.q else sig.swapped()
    lam = (s0.n - 2) / 2
    F = cm.twisted_pullback_inv(s0, lam, sf.eps_sign(s0),
                                lambda w: np.exp(lam * t) * sf.generating_f0(s0, np.exp(t) * np.asarray(w)))
    return s0, cm.zonal_expansion(s0, F, a_max=a_max, nodes=48)


def box_convergence(sig: Signature, seed: int = 0, levels: int = 5):
    s0 = sig if sig.p >= sig.q else sig.swapped()
    z = np.random.default_rng(seed).uniform(-1, 1, size=s0.n)
    hs, res, _ = fm.box_orders(s0, lambda w: sf.generating_f0(s0, w), z, h0=0.4, levels=levels)
    return s0, hs, res


def write_plot_data(sig: Signature, out: str, seed: int = 0) -> list[str]:
    """Write CSV tables and PNG figures into `out`; returns the file names."""
    os.makedirs(out, exist_ok=True)
    files = []

    s0, t, synth, closed = f0_line(sig)
    _write(os.path.join(out, "f0_line.csv"), ["t", "synthesized", "closed_form"], zip(t, synth, closed))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(t, closed, "-", label="closed form")
    ax.plot(t, synth, ".", label="cone synthesis")
    ax.set_xlabel("z_1")
    ax.set_ylabel("f0")
    ax.set_title(f"f0 on a line, signature {s0}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(out, "f0_line.png"), dpi=110)
    plt.close(fig)
    files += ["f0_line.csv", "f0_line.png"]

    s0, E = ktype_spectrum(sig)
    E.to_csv(os.path.join(out, "ktype_spectrum.csv"))
    adm = sorted(k for k in E.coeffs if E.admissible(*k))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    vals = [max(E.component_norm2(*k), 1e-300) ** 0.5 for k in adm]
    ax.semilogy([a for a, _ in adm], vals, "o-")
    ax.set_xlabel("a (degree on the first sphere)")
    ax.set_ylabel("component norm")
    ax.set_title(f"K-types of a dilated f0, signature {s0}")
    fig.tight_layout()
    fig.savefig(os.path.join(out, "ktype_spectrum.png"), dpi=110)
    plt.close(fig)
    files += ["ktype_spectrum.csv", "ktype_spectrum.png"]

    s0, hs, res = box_convergence(sig, seed)
    _write(os.path.join(out, "box_convergence.csv"), ["h", "box_residual"], zip(hs, res))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(hs, res, "o-", label="|box f0| (finite differences)")
    ax.loglog(hs, res[0] * (hs / hs[0]) ** 2, "--", label="slope 2")
    ax.set_xlabel("h")
    ax.set_ylabel("residual")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(out, "box_convergence.png"), dpi=110)
    plt.close(fig)
    files += ["box_convergence.csv", "box_convergence.png"]
    return files
