"""Frame-based optimum of the coupling objective, independent of the (theta, phi, psi) reduction.

With u_i, v_i the coordinates of the tangential parts of e_i in the (alpha, beta) and (a, b) frames,
f - g = -2 (cos^2 theta + cos^2 phi) + 2 <O, C>  with  C = sum_i v_i u_i^T - 2 v_3 u_3^T,
so the best coupling solves an orthogonal Procrustes problem on each component of O(2).
"""
import math
from typing import Tuple

import numpy as np

from surfcouple.coupling.coupling_law import CouplingChoice
from surfcouple.geometry.configuration import Configuration


def frame_coordinates(config: Configuration) -> Tuple[np.ndarray, np.ndarray]:
    """Rows i = 1, 2, 3 hold (e_i . alpha, e_i . beta) and (e_i . a, e_i . b)."""
    axes = np.stack([config.axes.e1, config.axes.e2, config.axes.e3])
    Bm = axes @ np.stack([config.alpha_dir, config.beta_dir], axis=1)
    Bn = axes @ np.stack([config.a_dir, config.b_dir], axis=1)
    return Bm, Bn


def procrustes_optimal(config: Configuration, tie_tol: float = 1e-12) -> Tuple[float, CouplingChoice]:
    Bm, Bn = frame_coordinates(config)
    C = Bn.T @ Bm - 2 * np.outer(Bn[2], Bm[2])
    const = -2 * ((1 - Bm[2] @ Bm[2]) + (1 - Bn[2] @ Bn[2]))
    U, S, Vt = np.linalg.svd(C)
    flip = np.linalg.det(U) * np.linalg.det(Vt)
    best, best_J, best_A = -np.inf, None, None
    for A in (-1, 1):
        w = 1.0 if A * flip > 0 else -1.0
        value = S[0] + w * S[1]
        if value > best + tie_tol:
            best, best_J, best_A = value, U @ np.diag([1.0, w]) @ Vt, A
    sigma = math.atan2(-best_J[1, 0], best_J[1, 1]) % (2 * math.pi)
    return const + 2 * best, CouplingChoice(best_A, sigma, 0.0)
