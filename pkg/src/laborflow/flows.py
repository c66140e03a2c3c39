"""Group-level flux matrices and the expected-flux normalization."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .network import LaborFlowNetwork

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RawFlux:
    groups: tuple
    matrix: np.ndarray
    unmapped_firms: int = 0


@dataclass(frozen=True)
class FluxMatrix:
    """Raw flux W, expected flux E, and normalized flux T = W / E.

    T entries where E is zero are undefined and held as NaN; ``defined``
    marks the valid cells. Writers must keep undefined cells empty.
    """

    groups: tuple
    raw: np.ndarray
    expected: np.ndarray
    normalized: np.ndarray
    defined: np.ndarray
    s_out: np.ndarray
    s_in: np.ndarray


def aggregate_flux(
    net: LaborFlowNetwork,
    group_of: Mapping,
    include_within: bool = True,
) -> RawFlux:
    """Sum edge weights into a group-by-group matrix.

    Firms missing from ``group_of`` are excluded (their count is reported).
    The diagonal is kept only when ``include_within`` is set.
    """
    unmapped = sum(1 for f in net.firms if group_of.get(f) is None)
    if unmapped:
        log.warning("aggregate_flux: %d firms have no group and were excluded", unmapped)
    groups = tuple(sorted({g for g in (group_of.get(f) for f in net.firms) if g is not None}, key=str))
    gidx = {g: i for i, g in enumerate(groups)}
    W = np.zeros((len(groups), len(groups)))
    for (a, b), w in net.edges.items():
        ga, gb = group_of.get(a), group_of.get(b)
        if ga is None or gb is None:
            continue
        if ga == gb and not include_within:
            continue
        W[gidx[ga], gidx[gb]] += w
    return RawFlux(groups=groups, matrix=W, unmapped_firms=unmapped)


def normalize_flux(W, groups=None) -> FluxMatrix:
    """Normalize a raw flux matrix by its marginal-product null model.

    E_ij = S_out_i * S_in_j / sum_k S_in_k and T_ij = W_ij / E_ij; cells
    with E_ij = 0 stay undefined rather than zero.
    """
    if isinstance(W, RawFlux):
        groups = W.groups if groups is None else tuple(groups)
        W = W.matrix
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"flux matrix must be square, got shape {W.shape}")
    if np.any(W < 0):
        raise ValueError("flux matrix must be non-negative")
    if groups is None:
        groups = tuple(range(W.shape[0]))
    if len(groups) != W.shape[0]:
        raise ValueError("group labels do not match matrix size")

    s_out = W.sum(axis=1)
    s_in = W.sum(axis=0)
    total_in = s_in.sum()
    if total_in <= 0:
        raise ValueError("all-zero flux matrix cannot be normalized")

    expected = np.outer(s_out, s_in) / total_in
    defined = expected > 0
    normalized = np.full_like(W, np.nan)
    normalized[defined] = W[defined] / expected[defined]
    return FluxMatrix(
        groups=tuple(groups),
        raw=W,
        expected=expected,
        normalized=normalized,
        defined=defined,
        s_out=s_out,
        s_in=s_in,
    )
