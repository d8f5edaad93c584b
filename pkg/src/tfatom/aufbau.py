"""Atomic-number sequences: the Madelung rule and its mean-field analogue.

The empirical Madelung (Aufbau) rule gives a closed form for the atomic
number Z_l(n) at which an electron first enters an l subspace for the
n-th time; its leading term is (n + 2l)^3 / 6.  The mean-field atoms
instead distinguish sequences whose scaled phase d_cl Z^(1/3) converges
modulo one, realized by Z_n = floor(d_cl^-3 (n + tau)^3): the same cubic
shape with coefficient d_cl^-3 in place of 1/6.

Convergence modulo one is judged by circular statistics: fractional parts
live on the unit circle, where the mean resultant length is the natural
dispersion measure (ordinary variance misbehaves near the 0/1 seam).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "AufbauSequence",
    "Mod1Verdict",
    "madelung_Z",
    "tf_sequence",
    "converges_mod1",
    "compare_tables",
]


@dataclass
class AufbauSequence:
    """Increasing positive atomic numbers with their generating data."""

    tau: float
    values: list[int]
    kind: str = "custom"
    ns: list[int] | None = None
    d_cl: float | None = None


def madelung_Z(ell: int, n: int) -> int:
    """Atomic number starting the n-th filling of angular momentum ell.

    Exact integer arithmetic throughout; the (-1)^n parity term makes
    float evaluation fragile.
    """
    if ell < 0 or n < 1:
        raise ValueError("madelung_Z requires ell >= 0 and n >= 1")
    m = n + 2 * ell
    twelve_z = (
        2 * (m - 1) * (m * m + 4 * m + 9)
        - 3 * (1 + (-1) ** n) * (m + 1)
        + 12
        - 24 * ell * (ell + 2)
    )
    if twelve_z % 12 != 0:
        raise ArithmeticError(f"Madelung formula not integral at ({ell}, {n})")
    return twelve_z // 12


def tf_sequence(tau: float, n_max: int, d_cl: float) -> AufbauSequence:
    """Z_n = floor(d_cl^-3 (n + tau)^3) for n = 1..n_max, deduplicated.

    Entries with Z < 1 and duplicates (possible only for the first few n,
    while 3 n^2 d_cl^-3 < 1) are dropped; the generating n of each kept
    value is recorded so the floor definition stays testable.
    """
    if not 0.0 <= tau < 1.0:
        raise ValueError("tau must lie in [0, 1)")
    if d_cl <= 0.0:
        raise ValueError("d_cl must be positive")
    scale = d_cl**-3
    values: list[int] = []
    ns: list[int] = []
    for n in range(1, n_max + 1):
        z = math.floor(scale * (n + tau) ** 3)
        if z >= 1 and (not values or z > values[-1]):
            values.append(z)
            ns.append(n)
    return AufbauSequence(tau=tau, values=values, kind="tf", ns=ns, d_cl=d_cl)


@dataclass
class Mod1Verdict:
    """Outcome of the mod-1 convergence test."""

    verdict: str                  # "convergent" | "divergent" | "inconclusive"
    tau: float | None
    dispersion: float | None
    reason: str = ""


def converges_mod1(values, d_cl: float, dispersion_tol: float = 0.05) -> Mod1Verdict:
    """Judge convergence of frac(d_cl Z_n^(1/3)) by circular statistics.

    The tail half of the sequence must have circular dispersion
    (one minus the mean resultant length) below ``dispersion_tol`` to be
    convergent; divergent needs dispersion above it on every tail
    fraction.  Fewer than 8 points, or a sequence not increasing to
    infinity, is inconclusive.
    """
    values = list(values)
    if len(values) < 8:
        return Mod1Verdict("inconclusive", None, None, "fewer than 8 points")
    if any(b <= a for a, b in zip(values, values[1:])):
        return Mod1Verdict("inconclusive", None, None,
                           "sequence is not strictly increasing")
    fracs = np.array([(d_cl * float(z) ** (1.0 / 3.0)) % 1.0 for z in values])

    def stats(tail_fraction):
        tail = fracs[int(len(fracs) * (1.0 - tail_fraction)):]
        vec = np.exp(2j * math.pi * tail).mean()
        tau = (math.atan2(vec.imag, vec.real) / (2.0 * math.pi)) % 1.0
        return tau, 1.0 - abs(vec)

    tau_half, disp_half = stats(0.5)
    if disp_half < dispersion_tol:
        return Mod1Verdict("convergent", tau_half, disp_half)
    if all(stats(f)[1] > dispersion_tol for f in (0.5, 0.25, 0.125)):
        return Mod1Verdict("divergent", None, disp_half,
                           "dispersion high on every tail fraction")
    return Mod1Verdict("inconclusive", tau_half, disp_half,
                       "tail dispersion straddles the threshold")


def compare_tables(d_cl: float, n_max: int = 20):
    """Side-by-side Madelung and mean-field sequences with cubic fits.

    Returns (rows, coefficients): rows hold (n, Z_madelung for l = 0..2,
    Z_tf for tau = 0), coefficients the fitted leading cubic terms next
    to their exact counterparts 1/6 and d_cl^-3.
    """
    if n_max < 4:
        raise ValueError("n_max must be at least 4 for a cubic fit")
    seq = tf_sequence(0.0, n_max, d_cl)
    tf_by_n = dict(zip(seq.ns, seq.values))
    rows = []
    for n in range(1, n_max + 1):
        rows.append({
            "n": n,
            "madelung_l0": madelung_Z(0, n),
            "madelung_l1": madelung_Z(1, n),
            "madelung_l2": madelung_Z(2, n),
            "tf_tau0": tf_by_n.get(n),
        })
    ns = np.arange(1, n_max + 1, dtype=float)
    mad = np.array([madelung_Z(0, n) for n in range(1, n_max + 1)], dtype=float)
    # fit against the shifted cube the closed form is built on
    mad_coeff = float(np.polyfit(ns + 0.0, mad, 3)[0])
    tf_ns = np.array(seq.ns, dtype=float)
    tf_vals = np.array(seq.values, dtype=float)
    tf_coeff = float(np.polyfit(tf_ns, tf_vals, 3)[0])
    coefficients = {
        "madelung_cubic": mad_coeff,
        "madelung_exact": 1.0 / 6.0,
        "tf_cubic": tf_coeff,
        "tf_exact": d_cl**-3,
    }
    return rows, coefficients


def sequence_table_to_csv(rows, path) -> None:
    path = Path(path)
    fields = list(rows[0].keys())
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
